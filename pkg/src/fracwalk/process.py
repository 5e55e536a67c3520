"""Domain model for semi-Markov continuous-time random walks.

A :class:`SemiMarkovModel` bundles the embedded jump chain, the per-state
rates, and the per-state holding-time laws; every solver and sampler in the
package consumes this single description.  Holding laws form a tagged union:
exponential, Mittag-Leffler (heavy-tailed), or a general law defined through
the Laplace exponent and Lévy tail of a driving subordinator.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import special as sp

from .mlf import ml_survival

__all__ = [
    "Exponential",
    "MittagLeffler",
    "GeneralSubordinated",
    "HoldingLaw",
    "SemiMarkovModel",
    "Generator",
    "TransitionGrid",
    "PathSample",
    "Provenance",
    "build_generator",
    "validate_model",
    "holding_survival",
    "stable_subordinated",
    "tempered_stable_subordinated",
    "ml_model",
    "exponential_model",
    "birth_chain",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class Exponential:
    """Exponential holding law with the given rate."""

    rate: float

    def validate(self) -> list[str]:
        return [] if self.rate > 0 else [f"Exponential rate must be > 0, got {self.rate}"]


@dataclass(frozen=True)
class MittagLeffler:
    """Mittag-Leffler holding law: survival E_alpha(-rate * t^alpha)."""

    alpha: float
    rate: float

    def validate(self) -> list[str]:
        out = []
        if not (0.0 < self.alpha < 1.0):
            out.append(f"MittagLeffler alpha must be in (0, 1), got {self.alpha}")
        if not self.rate > 0:
            out.append(f"MittagLeffler rate must be > 0, got {self.rate}")
        return out


@dataclass(frozen=True)
class GeneralSubordinated:
    """Holding law driven by a general subordinator.

    ``laplace_exponent`` is f(s) (defined for complex s with Re s > 0),
    ``levy_tail`` is the tail nu_bar(t) of the Lévy measure (must be
    non-increasing with infinite activity at 0+), ``potential_density`` is the
    optional density u(t) with Laplace transform 1/f(s) (needed by forward
    solves and the renewal density), and ``levy_tail_integral`` is the
    optional antiderivative of ``levy_tail`` from 0 (used by product
    integration across the t=0 singularity).

    ``tag`` identifies built-in families for serialization round-trips.
    """

    laplace_exponent: Callable[[complex], complex]
    levy_tail: Callable[[float], float]
    potential_density: Optional[Callable[[float], float]] = None
    levy_tail_integral: Optional[Callable[[float], float]] = None
    tag: Optional[str] = None

    def validate(self) -> list[str]:
        out = []
        f = self.laplace_exponent
        try:
            if abs(f(1e-12)) > 1e-6:
                out.append("GeneralSubordinated laplace_exponent must satisfy f(0+) = 0")
            vals = [f(s).real if isinstance(f(s), complex) else float(f(s)) for s in (0.5, 1.0, 2.0, 5.0)]
            if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
                out.append("GeneralSubordinated laplace_exponent must be nondecreasing on (0, inf)")
        except Exception as exc:  # noqa: BLE001 - report, don't crash validation
            out.append(f"GeneralSubordinated laplace_exponent not evaluable: {exc}")
        try:
            tails = [self.levy_tail(t) for t in (1e-8, 1e-4, 0.1, 1.0, 10.0)]
            if any(b > a + 1e-12 for a, b in zip(tails, tails[1:])):
                out.append("GeneralSubordinated levy_tail must be non-increasing")
            if tails[0] < 1e3:
                out.append("GeneralSubordinated levy_tail must diverge at 0+ (infinite activity)")
        except Exception as exc:  # noqa: BLE001
            out.append(f"GeneralSubordinated levy_tail not evaluable: {exc}")
        return out


HoldingLaw = Union[Exponential, MittagLeffler, GeneralSubordinated]


class Provenance(str, Enum):
    """Which solver produced a transition grid."""

    RENEWAL = "Renewal"
    BACKWARD_CAPUTO = "BackwardCaputo"
    FORWARD_RL = "ForwardRL"
    LAPLACE_INVERSION = "LaplaceInversion"
    BACKWARD_VOLTERRA = "BackwardVolterra"
    FORWARD_VOLTERRA = "ForwardVolterra"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class SemiMarkovModel:
    """Finite-state semi-Markov walk: embedded chain, rates, holding laws."""

    n_states: int
    embedded_chain: np.ndarray
    rates: np.ndarray
    holding_laws: tuple[HoldingLaw, ...]
    diagonal_jumps_allowed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "embedded_chain", np.asarray(self.embedded_chain, dtype=float))
        object.__setattr__(self, "rates", np.asarray(self.rates, dtype=float))
        object.__setattr__(self, "holding_laws", tuple(self.holding_laws))

    @property
    def alphas(self) -> np.ndarray:
        """Per-state stability index: the ML order, or 1 for exponential laws.

        Raises for general laws, which have no single index.
        """
        out = np.empty(self.n_states)
        for i, law in enumerate(self.holding_laws):
            if isinstance(law, MittagLeffler):
                out[i] = law.alpha
            elif isinstance(law, Exponential):
                out[i] = 1.0
            else:
                raise TypeError(f"state {i} has a general holding law with no stability index")
        return out

    def all_mittag_leffler(self) -> bool:
        return all(isinstance(law, (MittagLeffler, Exponential)) for law in self.holding_laws)


@dataclass(frozen=True)
class Generator:
    """Markov generator g[i, j] = rates[i] * (h[i, j] - delta[i, j])."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


@dataclass(frozen=True)
class TransitionGrid:
    """Transition matrices P(t_n) on a uniform time grid."""

    t_grid: np.ndarray
    values: np.ndarray  # shape (len(t_grid), n, n)
    provenance: Provenance

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_grid", np.asarray(self.t_grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def at(self, t: float) -> np.ndarray:
        """Matrix at the grid node nearest to t (t must lie on the grid)."""
        idx = int(np.argmin(np.abs(self.t_grid - t)))
        if abs(self.t_grid[idx] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a grid node")
        return self.values[idx]


@dataclass(frozen=True)
class PathSample:
    """One trajectory: jump times T_n, visited states X_n, holding times J_n."""

    jump_times: np.ndarray
    states: np.ndarray
    holding_times: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "jump_times", np.asarray(self.jump_times, dtype=float))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=np.int64))
        object.__setattr__(self, "holding_times", np.asarray(self.holding_times, dtype=float))

    def state_at(self, t: float) -> int:
        """State occupied at time t (right-continuous)."""
        idx = int(np.searchsorted(self.jump_times, t, side="right")) - 1
        return int(self.states[max(idx, 0)])


def build_generator(model: SemiMarkovModel) -> Generator:
    """g[i, j] = rates[i] * (h[i, j] - delta[i, j]); rows sum to zero."""
    violations = validate_model(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    h = model.embedded_chain
    g = model.rates[:, None] * (h - np.eye(model.n_states))
    return Generator(g)


def validate_model(model: SemiMarkovModel) -> list[str]:
    """Return a list of invariant violations (empty when the model is valid)."""
    out: list[str] = []
    n = model.n_states
    h = model.embedded_chain
    if n <= 0:
        out.append(f"n_states must be positive, got {n}")
        return out
    if h.shape != (n, n):
        out.append(f"embedded_chain must be {n}x{n}, got {h.shape}")
        return out
    if model.rates.shape != (n,):
        out.append(f"rates must have length {n}, got {model.rates.shape}")
        return out
    if len(model.holding_laws) != n:
        out.append(f"holding_laws must have length {n}, got {len(model.holding_laws)}")
        return out
    if (h < -1e-15).any():
        out.append("embedded_chain entries must be nonnegative")
    bad_rows = np.nonzero(np.abs(h.sum(axis=1) - 1.0) > 1e-12)[0]
    for i in bad_rows:
        out.append(f"embedded_chain row {i} sums to {h[i].sum():.15g}, expected 1")
    if not model.diagonal_jumps_allowed:
        diag = np.nonzero(np.abs(np.diag(h)) > 1e-15)[0]
        for i in diag:
            out.append(f"embedded_chain has self-jump h[{i},{i}]={h[i, i]:.3g} but diagonal jumps are disallowed")
    nonpos = np.nonzero(~(model.rates > 0))[0]
    for i in nonpos:
        out.append(f"rates[{i}] must be > 0, got {model.rates[i]}")
    for i, law in enumerate(model.holding_laws):
        for msg in law.validate():
            out.append(f"holding_laws[{i}]: {msg}")
        rate = getattr(law, "rate", None)
        if rate is not None and model.rates[i] > 0 and abs(rate - model.rates[i]) > 1e-12 * model.rates[i]:
            out.append(f"holding_laws[{i}].rate={rate} disagrees with rates[{i}]={model.rates[i]}")
    return out


def holding_survival(model: SemiMarkovModel, i: int, t: float) -> float:
    """P(J > t) in state i, dispatching on the holding law.

    General laws are handled by numerically inverting the survival transform
    f(s) / (s * (rate + f(s))).
    """
    if not (0 <= i < model.n_states):
        raise ValueError(f"state {i} outside [0, {model.n_states})")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    law = model.holding_laws[i]
    if isinstance(law, Exponential):
        return math.exp(-law.rate * t)
    if isinstance(law, MittagLeffler):
        return ml_survival(law.alpha, law.rate, t)
    if t == 0.0:
        return 1.0
    from .laplace import InversionConfig, invert_laplace_scalar

    lam = float(model.rates[i])
    f = law.laplace_exponent

    def transform(s: complex) -> complex:
        fs = f(s)
        return fs / (s * (lam + fs))

    return invert_laplace_scalar(transform, t, InversionConfig())


# ---------------------------------------------------------------------------
# Built-in general laws


def stable_subordinated(alpha: float) -> GeneralSubordinated:
    """General law equivalent to MittagLeffler(alpha, rate): f(s) = s^alpha."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    g1 = math.gamma(1.0 - alpha)
    g2 = math.gamma(2.0 - alpha)
    ga = math.gamma(alpha)
    return GeneralSubordinated(
        laplace_exponent=lambda s: s**alpha,
        levy_tail=lambda t: t ** (-alpha) / g1,
        potential_density=lambda t: t ** (alpha - 1.0) / ga,
        levy_tail_integral=lambda t: t ** (1.0 - alpha) / g2,
        tag=f"stable({alpha!r})",
    )


def tempered_stable_subordinated(alpha: float, theta: float) -> GeneralSubordinated:
    """Tempered stable law: f(s) = (s + theta)^alpha - theta^alpha.

    The Lévy tail is nu_bar(t) = alpha * theta^alpha * Gamma(-alpha, theta t)
    / Gamma(1 - alpha), evaluated through the positive-parameter upper
    incomplete gamma.  No closed-form potential density is provided.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if theta <= 0.0:
        raise ValueError(f"theta must be > 0, got {theta}")
    g1 = math.gamma(1.0 - alpha)

    def upper_gamma_neg(x):
        # Gamma(-alpha, x) = (Gamma(1-alpha, x) - x^{-alpha} e^{-x}) / (-alpha)
        upper = g1 * sp.gammaincc(1.0 - alpha, x)
        return (upper - x ** (-alpha) * np.exp(-x)) / (-alpha)

    def tail(t):
        return alpha * theta**alpha * upper_gamma_neg(theta * t) / g1

    def tail_integral(t):
        # int_0^t nu_bar = t nu_bar(t) + alpha theta^{alpha-1} gamma_lower(1-alpha, theta t) / Gamma(1-alpha)
        t = np.asarray(t, dtype=float)
        pos = np.maximum(t, 1e-300)
        lower = g1 * sp.gammainc(1.0 - alpha, theta * pos)
        out = pos * tail(pos) + alpha * theta ** (alpha - 1.0) * lower / g1
        out = np.where(t > 0.0, out, 0.0)
        return float(out) if out.ndim == 0 else out

    return GeneralSubordinated(
        laplace_exponent=lambda s: (s + theta) ** alpha - theta**alpha,
        levy_tail=tail,
        levy_tail_integral=tail_integral,
        tag=f"tempered_stable({alpha!r},{theta!r})",
    )


# ---------------------------------------------------------------------------
# Model constructors


def ml_model(
    h: Sequence[Sequence[float]],
    rates: Sequence[float],
    alphas: Sequence[float],
    diagonal_jumps_allowed: bool = False,
) -> SemiMarkovModel:
    """Model with Mittag-Leffler laws (alpha_i = 1 states become exponential)."""
    rates = np.asarray(rates, dtype=float)
    laws: list[HoldingLaw] = []
    for a, lam in zip(alphas, rates):
        laws.append(Exponential(float(lam)) if a == 1.0 else MittagLeffler(float(a), float(lam)))
    return SemiMarkovModel(len(rates), np.asarray(h, float), rates, tuple(laws), diagonal_jumps_allowed)


def exponential_model(
    h: Sequence[Sequence[float]],
    rates: Sequence[float],
    diagonal_jumps_allowed: bool = False,
) -> SemiMarkovModel:
    """Markov model: all holding laws exponential."""
    rates = np.asarray(rates, dtype=float)
    laws = tuple(Exponential(float(lam)) for lam in rates)
    return SemiMarkovModel(len(rates), np.asarray(h, float), rates, laws, diagonal_jumps_allowed)


def birth_chain(n: int, lam: float, alphas: Sequence[float], wrap: bool = False) -> SemiMarkovModel:
    """Pure birth chain h[i, i+1] = 1 with constant rate and per-state orders.

    With ``wrap`` the last state jumps back to 0 (keeps every row stochastic
    without an absorbing boundary); otherwise the last state is absorbing via
    a self-jump, and diagonal jumps are enabled.
    """
    h = np.zeros((n, n))
    for i in range(n - 1):
        h[i, i + 1] = 1.0
    if wrap:
        h[n - 1, 0] = 1.0
    else:
        h[n - 1, n - 1] = 1.0
    return ml_model(h, [lam] * n, list(alphas), diagonal_jumps_allowed=not wrap)


# ---------------------------------------------------------------------------
# Serialization

_TAG_RE = re.compile(r"^(stable|tempered_stable)\(([^)]*)\)$")


def _law_to_dict(law: HoldingLaw) -> dict:
    if isinstance(law, Exponential):
        return {"kind": "exponential", "lambda": law.rate}
    if isinstance(law, MittagLeffler):
        return {"kind": "mittag_leffler", "alpha": law.alpha, "lambda": law.rate}
    if law.tag is None:
        raise ValueError("only built-in general laws (stable/tempered_stable) are serializable")
    return {"kind": "general", "builtin_exponent": law.tag}


def _law_from_dict(doc: dict) -> HoldingLaw:
    kind = doc["kind"]
    if kind == "exponential":
        return Exponential(float(doc["lambda"]))
    if kind == "mittag_leffler":
        return MittagLeffler(float(doc["alpha"]), float(doc["lambda"]))
    if kind == "general":
        m = _TAG_RE.match(doc["builtin_exponent"])
        if m is None:
            raise ValueError(f"unknown builtin_exponent {doc['builtin_exponent']!r}")
        args = [float(x) for x in m.group(2).split(",")]
        if m.group(1) == "stable":
            return stable_subordinated(*args)
        return tempered_stable_subordinated(*args)
    raise ValueError(f"unknown holding-law kind {kind!r}")


def model_to_dict(model: SemiMarkovModel) -> dict:
    return {
        "n_states": model.n_states,
        "h": [float(x) for x in model.embedded_chain.ravel()],
        "lambda": [float(x) for x in model.rates],
        "laws": [_law_to_dict(law) for law in model.holding_laws],
        "diagonal_jumps_allowed": model.diagonal_jumps_allowed,
    }


def model_from_dict(doc: dict) -> SemiMarkovModel:
    n = int(doc["n_states"])
    h = np.asarray(doc["h"], dtype=float).reshape(n, n)
    rates = np.asarray(doc["lambda"], dtype=float)
    laws = tuple(_law_from_dict(d) for d in doc["laws"])
    return SemiMarkovModel(n, h, rates, laws, bool(doc.get("diagonal_jumps_allowed", False)))


def save_model(model: SemiMarkovModel, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)


def load_model(path: str) -> SemiMarkovModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
