"""Time-domain solvers for the governing equations of the walk.

Four routes to the same transition probabilities:

* ``solve_renewal`` — the Markov renewal (Volterra) equation, marched with
  product-trapezoid quadrature using exact holding-distribution increments.
* ``solve_backward_caputo`` — the variable-order Caputo backward system,
  implicit L1 stepping with a graded startup mesh (rows of order 1 use
  Crank-Nicolson).
* ``solve_forward_rl`` — the variable-order Riemann-Liouville forward system,
  implicit Grünwald-Letnikov / Crank-Nicolson stepping.
* the Laplace route lives in :mod:`fracwalk.laplace`.

Plus the general-kernel Volterra backward/forward solvers (holding laws given
by a subordinator's Lévy tail / potential density) and flux and
renewal-density diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lu_factor, lu_solve

from .mlf import ml_survival
from .process import (
    Exponential,
    GeneralSubordinated,
    MittagLeffler,
    Provenance,
    SemiMarkovModel,
    TransitionGrid,
    build_generator,
)

__all__ = [
    "DiscretizationConfig",
    "FluxGrid",
    "solve_renewal",
    "solve_backward_caputo",
    "solve_forward_rl",
    "solve_backward_volterra",
    "solve_forward_volterra",
    "forward_rl_march",
    "gl_weights",
    "outgoing_flux",
    "renewal_density",
]


@dataclass(frozen=True)
class DiscretizationConfig:
    """Time-stepping settings shared by all marching solvers.

    ``forward_substeps`` refines the forward scheme internally (results are
    still reported on the dt grid).  ``refine_cells``/``refine_points`` grade
    the first few cells of the backward mesh, where the solution has a
    t^alpha startup layer that a uniform L1 mesh resolves poorly.
    """

    dt: float
    n_steps: int
    scheme_backward: str = "L1Caputo"
    scheme_forward: str = "GrunwaldLetnikov"
    volterra_quadrature: str = "ProductTrapezoid"
    forward_substeps: int = 4
    refine_cells: int = 4
    refine_points: int = 16
    refine_grade: float = 3.0

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.n_steps < 1:
            raise ValueError("dt must be > 0 and n_steps >= 1")
        if self.scheme_backward != "L1Caputo":
            raise ValueError(f"unknown backward scheme {self.scheme_backward!r}")
        if self.scheme_forward != "GrunwaldLetnikov":
            raise ValueError(f"unknown forward scheme {self.scheme_forward!r}")
        if self.volterra_quadrature != "ProductTrapezoid":
            raise ValueError(f"unknown quadrature {self.volterra_quadrature!r}")
        if self.forward_substeps < 1:
            raise ValueError("forward_substeps must be >= 1")

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    def t_grid(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class FluxGrid:
    """Per-state gain/loss fluxes along a transition grid."""

    t_grid: np.ndarray
    j_minus: np.ndarray  # loss flux, shape (n_t, n_start, n_states)
    j_plus: np.ndarray  # gain flux, same shape
    balance_residual: float  # sup |dp/dt - (J+ - J-)| over interior nodes


# ---------------------------------------------------------------------------
# Meshes and weights


def _refined_mesh(cfg: DiscretizationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grid with the first cells subdivided (graded in the first).

    Returns ``(mesh, idx)`` where ``mesh[idx]`` are the uniform nodes
    dt, 2 dt, ..., n_steps * dt.
    """
    dt, ns = cfg.dt, cfg.n_steps
    cells = min(cfg.refine_cells, ns)
    nodes = [0.0]
    for c in range(cells):
        a, b = c * dt, (c + 1) * dt
        kk = max(2, cfg.refine_points >> c)
        for k in range(1, kk + 1):
            frac = (k / kk) ** cfg.refine_grade if c == 0 else k / kk
            nodes.append(a + (b - a) * frac)
    for m in range(cells + 1, ns + 1):
        nodes.append(m * dt)
    mesh = np.asarray(nodes)
    idx = np.searchsorted(mesh, dt * np.arange(1, ns + 1))
    return mesh, idx


def gl_weights(beta: float, n: int) -> np.ndarray:
    """Grünwald-Letnikov weights w_m = (-1)^m binom(beta, m), m = 0..n."""
    w = np.empty(n + 1)
    w[0] = 1.0
    for m in range(1, n + 1):
        w[m] = w[m - 1] * (1.0 - (beta + 1.0) / m)
    return w


def _survival_fn(law) -> Callable[[float], float]:
    if isinstance(law, Exponential):
        return lambda t: math.exp(-law.rate * t)
    if isinstance(law, MittagLeffler):
        return lambda t: ml_survival(law.alpha, law.rate, t)
    raise TypeError("renewal marching needs a closed-form holding distribution (ML or exponential)")


# ---------------------------------------------------------------------------
# Renewal equation


def solve_renewal(model: SemiMarkovModel, cfg: DiscretizationConfig) -> TransitionGrid:
    """March p_{i,j}(t) = Fbar_i(t) d_{i,j} + int_0^t sum_l h_{i,l} p_{l,j}(t-s) dF_i(s).

    Product-trapezoid: the holding-time measure dF_i is integrated exactly
    over each cell (difference of survival values), against the trapezoid
    average of p.  This handles the t^{alpha-1} density singularity without
    ever evaluating the density.
    """
    build_generator(model)  # validates
    n = model.n_states
    h = model.embedded_chain
    tg = cfg.t_grid()
    surv = np.empty((n, cfg.n_steps + 1))
    for i, law in enumerate(model.holding_laws):
        fbar = _survival_fn(law)
        surv[i] = [fbar(t) for t in tg]
    dF = surv[:, :-1] - surv[:, 1:]  # exact cell masses of the holding law

    ns = cfg.n_steps
    P = np.zeros((ns + 1, n, n))
    P[0] = np.eye(n)
    R = np.zeros((ns + 1, n, n))  # R[k] = h @ (P[k] + P[k-1]) / 2
    A = np.eye(n) - 0.5 * np.diag(dF[:, 0]) @ h
    A_inv = np.linalg.inv(A)
    for m in range(1, ns + 1):
        if m > 1:
            conv = np.einsum("ik,kij->ij", dF[:, 1:m], R[m - 1:0:-1][: m - 1])
        else:
            conv = 0.0
        rhs = np.diag(surv[:, m]) + 0.5 * dF[:, 0][:, None] * (h @ P[m - 1]) + conv
        P[m] = A_inv @ rhs
        R[m] = h @ (0.5 * (P[m] + P[m - 1]))
    return TransitionGrid(tg, P, Provenance.RENEWAL)


# ---------------------------------------------------------------------------
# Backward equations (Caputo L1 / general Volterra kernel)


def _eval_kernel_integral(I: Callable, ts: np.ndarray) -> np.ndarray:
    """Evaluate a kernel antiderivative at many points, vectorized if it allows."""
    try:
        vals = np.asarray(I(ts), dtype=float)
        if vals.shape == ts.shape:
            return vals
    except Exception:  # noqa: BLE001 - scalar-only callables fall through
        pass
    return np.array([I(float(x)) for x in ts])


def _march_backward(
    G: np.ndarray,
    tail_integrals: Sequence[Optional[Callable[[float], float]]],
    cn_rows: np.ndarray,
    mesh: np.ndarray,
    p0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Implicit generalized-L1 march of the backward system on ``mesh``.

    ``tail_integrals[i]`` is I(t) = int_0^t k_i(u) du of row i's memory kernel
    (for the Caputo case k_i(u) = u^{-alpha_i}/Gamma(1-alpha_i)); rows flagged
    in ``cn_rows`` are first-order (no memory) and use Crank-Nicolson.
    ``p0`` defaults to the identity; a single column may be passed as (n, 1).

    The step matrix depends only on the trailing cell width, so its LU
    factorization is cached across the (mostly uniform) mesh.
    """
    n = G.shape[0]
    N = len(mesh) - 1
    if p0 is None:
        p0 = np.eye(n)
    ncol = p0.shape[1]
    P = np.zeros((N + 1, n, ncol))
    P[0] = p0
    frac = np.nonzero(~cn_rows)[0]
    lu_cache: dict[float, tuple] = {}
    diag_cache: dict[float, np.ndarray] = {}
    for m in range(1, N + 1):
        t = mesh[m]
        tj = mesh[: m + 1]
        dtm = float(mesh[m] - mesh[m - 1])
        # weights A[i, j-1] multiply (P_j - P_{j-1}) in row i's memory sum
        A = np.zeros((n, m))
        for i in frac:
            vals = _eval_kernel_integral(tail_integrals[i], t - tj)
            A[i] = (vals[:-1] - vals[1:]) / (tj[1:] - tj[:-1])
        key = round(dtm, 15)
        if key not in lu_cache:
            M = np.where(cn_rows[:, None], -0.5 * G, -G)
            diag = np.where(cn_rows, 1.0 / dtm, A[:, m - 1] if m >= 1 else 0.0)
            M[np.arange(n), np.arange(n)] += diag
            lu_cache[key] = lu_factor(M)
            diag_cache[key] = diag
        diag = diag_cache[key]
        if m > 1 and len(frac):
            hist = np.einsum("ij,jik->ik", A[:, : m - 1], P[1:m] - P[0 : m - 1])
        else:
            hist = np.zeros((n, ncol))
        rhs = np.empty((n, ncol))
        cn = cn_rows
        if cn.any():
            rhs[cn] = P[m - 1][cn] / dtm + 0.5 * G[cn] @ P[m - 1]
        if (~cn).any():
            rhs[~cn] = diag[~cn, None] * P[m - 1][~cn] - hist[~cn]
        P[m] = lu_solve(lu_cache[key], rhs)
    return P


def solve_backward_caputo(model: SemiMarkovModel, cfg: DiscretizationConfig) -> TransitionGrid:
    """Variable-order Caputo backward system D^{alpha_i} p_{i,.} = (G p)_{i,.}.

    L1 discretization on a startup-refined mesh; rows with alpha_i = 1 reduce
    to the classical backward equation and use Crank-Nicolson.
    """
    G = build_generator(model).matrix
    alphas = model.alphas  # raises for general laws
    cn_rows = alphas == 1.0
    tails: list[Optional[Callable[[float], float]]] = []
    for a in alphas:
        if a == 1.0:
            tails.append(None)
        else:
            g2 = math.gamma(2.0 - a)
            tails.append(lambda t, a=a, g2=g2: t ** (1.0 - a) / g2)
    mesh, idx = _refined_mesh(cfg)
    P = _march_backward(G, tails, cn_rows, mesh)
    values = np.concatenate([P[:1], P[idx]], axis=0)
    return TransitionGrid(cfg.t_grid(), values, Provenance.BACKWARD_CAPUTO)


def solve_backward_volterra(model: SemiMarkovModel, cfg: DiscretizationConfig) -> TransitionGrid:
    """Backward equation with general memory kernels nu_bar(., i).

    Solves d/dt int_0^t p_{i,j}(t') nu_bar(t - t', i) dt' - d_{i,j} nu_bar(t, i)
    = (G p)_{i,j} by product integration: the kernel enters only through its
    exact cell integrals, so the 0+ singularity is handled without quadrature.
    Requires every law to be GeneralSubordinated with an integrable Lévy tail.
    """
    G = build_generator(model).matrix
    tails: list[Callable[[float], float]] = []
    for i, law in enumerate(model.holding_laws):
        if not isinstance(law, GeneralSubordinated):
            raise TypeError(f"state {i}: Volterra backward solve requires GeneralSubordinated laws")
        if law.levy_tail_integral is not None:
            tails.append(law.levy_tail_integral)
        else:
            tails.append(_numeric_tail_integral(law.levy_tail, cfg.horizon))
    mesh, idx = _refined_mesh(cfg)
    n = model.n_states
    P = _march_backward(G, tails, np.zeros(n, dtype=bool), mesh)
    values = np.concatenate([P[:1], P[idx]], axis=0)
    return TransitionGrid(cfg.t_grid(), values, Provenance.BACKWARD_VOLTERRA)


def _numeric_tail_integral(tail: Callable[[float], float], horizon: float) -> Callable[[float], float]:
    """Cumulative integral of a decreasing kernel, checking 0+ integrability."""
    probe, err = quad(tail, 0.0, min(1e-3, horizon))
    if not np.isfinite(probe) or err > 1e-6 * max(abs(probe), 1.0):
        raise ValueError("Lévy tail is not integrable at 0+ under product-integration weights")

    def integral(t: float) -> float:
        if t <= 0.0:
            return 0.0
        val, _ = quad(tail, 0.0, t, limit=200)
        return val

    return integral


# ---------------------------------------------------------------------------
# Forward equations (Grünwald-Letnikov / general potential kernels)


def forward_rl_march(
    G: np.ndarray,
    alphas: Sequence[float],
    dt: float,
    n_steps: int,
    p0: np.ndarray,
) -> np.ndarray:
    """March the variable-order forward system for initial rows ``p0``.

    Discretizes d/dt p_{l,i} = sum_k g_{k,i} RL-D^{1-alpha_k} p_{l,k} with
    Grünwald-Letnikov memory in the RL term and a trapezoid (Crank-Nicolson)
    balance in t; the update is conservative (row sums are preserved exactly).
    Returns an array of shape (n_steps + 1,) + p0.shape.
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    n = G.shape[0]
    alphas = np.asarray(alphas, dtype=float)
    W = np.stack([gl_weights(1.0 - alphas[k], n_steps) for k in range(n)], axis=1)  # (n_steps+1, n)
    dta = dt**alphas
    P = np.zeros((n_steps + 1,) + p0.shape)
    Q = np.zeros_like(P)  # Q_n = dt * (discrete RL-D^{1-alpha} applied to P_n)
    P[0] = p0
    Q[0] = p0 * dta
    luf = lu_factor((np.eye(n) - 0.5 * np.diag(dta) @ G).T)
    for m in range(1, n_steps + 1):
        hist = dta * np.einsum("mk,m...k->...k", W[1 : m + 1], P[m - 1 :: -1][:m])
        rhs = P[m - 1] + 0.5 * (hist @ G + Q[m - 1] @ G)
        x = lu_solve(luf, rhs.T).T
        P[m] = x
        Q[m] = hist + x * dta
    return P


def solve_forward_rl(model: SemiMarkovModel, cfg: DiscretizationConfig) -> TransitionGrid:
    """Variable-order RL forward system d/dt p_{l,i} = sum_k g_{k,i} D^{1-alpha_k} p_{l,k}.

    Requires no self-jumps (h_{i,i} = 0), the standing hypothesis of the
    forward equation.  The march runs on dt / forward_substeps internally.
    """
    if np.abs(np.diag(model.embedded_chain)).max() > 1e-15:
        raise ValueError("forward equation requires h[i,i] = 0 for every state")
    G = build_generator(model).matrix
    alphas = model.alphas
    sub = cfg.forward_substeps
    P = forward_rl_march(G, alphas, cfg.dt / sub, cfg.n_steps * sub, np.eye(model.n_states))
    return TransitionGrid(cfg.t_grid(), P[::sub], Provenance.FORWARD_RL)


def _potential_moments(law, rate_unused: float, dt: float, n_steps: int):
    """Per-cell moments of the potential density u on a uniform grid.

    Returns (m0, m1) with m0[j] = int over cell j of u and m1[j] = int over
    cell j of v * u(v) dv, cells [j dt, (j+1) dt), j = 0..n_steps-1.
    """
    edges = dt * np.arange(n_steps + 1)
    if isinstance(law, Exponential):
        iu = edges.copy()  # u == 1
        ju = edges**2 / 2.0
    elif isinstance(law, MittagLeffler):
        a = law.alpha
        iu = edges**a / math.gamma(a + 1.0)
        ju = edges ** (a + 1.0) / ((a + 1.0) * math.gamma(a))
    elif isinstance(law, GeneralSubordinated):
        if law.potential_density is None:
            raise ValueError("forward Volterra solve needs the law's potential_density")
        u = law.potential_density
        m0 = np.empty(n_steps)
        m1 = np.empty(n_steps)
        for j in range(n_steps):
            m0[j], _ = quad(u, edges[j], edges[j + 1], limit=100)
            m1[j], _ = quad(lambda v: v * u(v), edges[j], edges[j + 1], limit=100)
        return m0, m1
    else:
        raise TypeError(f"unsupported holding law {type(law).__name__}")
    return np.diff(iu), np.diff(ju)


def solve_forward_volterra(model: SemiMarkovModel, cfg: DiscretizationConfig) -> TransitionGrid:
    """Forward equation with potential-density kernels u_k:

        d/dt p_{l,i}(t) = sum_k g_{k,i} d/dt int_0^t p_{l,k}(s) u_k(t-s) ds.

    Integrated in t and marched with product integration of u against
    piecewise-linear p; conservative by construction.  Closed-form moments are
    used for ML/exponential laws, numerical cell moments otherwise.
    """
    if np.abs(np.diag(model.embedded_chain)).max() > 1e-15:
        raise ValueError("forward equation requires h[i,i] = 0 for every state")
    G = build_generator(model).matrix
    n = model.n_states
    ns = cfg.n_steps
    dt = cfg.dt
    m0 = np.empty((n, ns))
    m1 = np.empty((n, ns))
    for k, law in enumerate(model.holding_laws):
        m0[k], m1[k] = _potential_moments(law, model.rates[k], dt, ns)

    # Psi_k(t_m) = sum over cells j of p_{j-1} M0 + (dp_j / dt) [t_{j-1}^rev M0 - M1]
    # where the moments are taken over the reversed window (t_m - t_j, t_m - t_{j-1}).
    P = np.zeros((ns + 1, n, n))
    P[0] = np.eye(n)
    Psi = np.zeros((ns + 1, n, n))
    # implicit coefficient: contribution of P_m to Psi(t_m) through the newest cell
    c = (dt * m0[:, 0] - m1[:, 0]) / dt  # per state k
    luf = lu_factor((np.eye(n) - np.diag(c) @ G).T)
    for m in range(1, ns + 1):
        # contributions of cells j = 1..m to Psi(t_m); cell j covers p on
        # [t_{j-1}, t_j] and sees the kernel window index m - j.
        j = np.arange(1, m + 1)
        w0 = m0[:, m - j]  # (n, m) kernel cell masses, newest cell last
        w1 = m1[:, m - j]
        pj = P[1 : m + 1]  # unknown P[m] included; handled implicitly below
        pjm1 = P[0:m]
        slope_weight = ((m - j + 1) * dt * w0 - w1) / dt  # multiplies (p_j - p_{j-1})
        # split off the implicit newest-cell term (j = m): weight c * P[m]
        known = (
            np.einsum("kj,jlk->lk", w0[:, :], pjm1)
            + np.einsum("kj,jlk->lk", slope_weight[:, :-1], (pj - pjm1)[:-1])
            - slope_weight[:, -1] * P[m - 1]
        )
        rhs = P[m - 1] + (known - Psi[m - 1]) @ G
        x = lu_solve(luf, rhs.T).T
        P[m] = x
        Psi[m] = known + x * c
    return TransitionGrid(cfg.t_grid(), P, Provenance.FORWARD_VOLTERRA)


# ---------------------------------------------------------------------------
# Diagnostics


def outgoing_flux(grid: TransitionGrid, model: SemiMarkovModel) -> FluxGrid:
    """Gain/loss fluxes J±_i(t) along a solver-produced grid.

    Loss flux J-_i = lambda_i RL-D^{1-alpha_i} p_{l,i} (which is lambda_i
    p_{l,i} in the Markov case); gain flux J+_i routes the loss fluxes through
    the embedded chain.  The balance residual reports
    sup |dp/dt - (J+ - J-)| over interior grid nodes past the startup layer.
    """
    if grid.provenance is Provenance.MONTE_CARLO:
        raise ValueError("flux requires a deterministic solver grid, not Monte Carlo")
    alphas = model.alphas
    h = model.embedded_chain
    lam = model.rates
    tg = grid.t_grid
    dt = float(tg[1] - tg[0])
    ns = len(tg) - 1
    P = grid.values  # (ns+1, n_start, n)
    n = model.n_states
    D = np.empty_like(P)  # RL-D^{1-alpha_k} p_{l,k}
    for k in range(n):
        beta = 1.0 - alphas[k]
        if beta == 0.0:
            D[:, :, k] = P[:, :, k]
            continue
        w = gl_weights(beta, ns)
        col = P[:, :, k]
        for m in range(ns + 1):
            D[m, :, k] = dt ** (-beta) * np.einsum("j,j...->...", w[: m + 1], col[m::-1])
    j_minus = lam[None, None, :] * D
    j_plus = np.einsum("ki,tlk->tli", h * lam[:, None], D)
    dpdt = np.gradient(P, dt, axis=0)
    # skip the t^alpha startup layer (first few cells), where a difference
    # quotient of the singular solution cannot resolve dp/dt
    lo = min(4, max(1, ns - 1))
    residual = float(np.abs(dpdt[lo:-1] - (j_plus - j_minus)[lo:-1]).max()) if ns >= 2 else 0.0
    return FluxGrid(tg, j_minus, j_plus, residual)


def renewal_density(model: SemiMarkovModel, i: int, t: float) -> float:
    """m_i(t) = lambda_i * u_i(t), the expected renewal rate near t in state i.

    u_i is the potential density of the driving subordinator: 1 for
    exponential laws, t^{alpha-1}/Gamma(alpha) for ML laws, the user-supplied
    callable for general laws.
    """
    if not (0 <= i < model.n_states):
        raise ValueError(f"state {i} outside [0, {model.n_states})")
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    law = model.holding_laws[i]
    lam = float(model.rates[i])
    if isinstance(law, Exponential):
        return lam
    if isinstance(law, MittagLeffler):
        return lam * t ** (law.alpha - 1.0) / math.gamma(law.alpha)
    if law.potential_density is None:
        raise ValueError(f"state {i}: general law has no potential_density")
    return lam * float(law.potential_density(t))
