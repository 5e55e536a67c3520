"""Path-level simulation of the semi-Markov walk.

Holding times in heavy-tailed states are sampled exactly through the
positive-stable product representation J = E^{1/alpha} * S_alpha, with S_alpha
drawn by the Kanter / Chambers-Mallows-Stuck method.  Every path owns an
independent counter-based random stream derived from (seed, stream_id,
path_index), so generation is reproducible and embarrassingly parallel, and
the compiled and numpy kernels give identical results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import Stream, occupation_counts, path_state
from ._kernels import BACKEND as KERNEL_BACKEND
from .process import (
    Exponential,
    GeneralSubordinated,
    MittagLeffler,
    PathSample,
    SemiMarkovModel,
    validate_model,
)

__all__ = [
    "RngSpec",
    "KERNEL_BACKEND",
    "sample_stable_subordinator",
    "sample_ml_waiting",
    "simulate_ctrw",
    "simulate_time_changed",
    "simulate_paths",
    "occupation_at",
    "empirical_transition",
]

_MAX_JUMPS = 50_000_000


@dataclass(frozen=True)
class RngSpec:
    """Reproducibility contract: (seed, stream_id) determines every sample."""

    seed: int
    stream_id: int = 0

    def stream(self, path_index: int = 0) -> Stream:
        return Stream(path_state(self.seed, self.stream_id, path_index))


def _stream_of(rng) -> Stream:
    return rng.stream() if isinstance(rng, RngSpec) else rng


def _stable_standard(alpha: float, rng: Stream) -> float:
    """One draw of the standard positive stable S_alpha, E e^{-s S} = e^{-s^alpha}."""
    theta = math.pi * rng.uniform()
    w = -math.log(rng.uniform())
    return (math.sin(alpha * theta) / math.sin(theta) ** (1.0 / alpha)) * (
        math.sin((1.0 - alpha) * theta) / w
    ) ** ((1.0 - alpha) / alpha)


def sample_stable_subordinator(alpha: float, t: float, rng) -> float:
    """One draw of the stable subordinator H_alpha(t), E e^{-s H} = e^{-t s^alpha}.

    Uses self-similarity: H_alpha(t) equals t^{1/alpha} H_alpha(1) in law.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    return t ** (1.0 / alpha) * _stable_standard(alpha, _stream_of(rng))


def sample_ml_waiting(alpha: float, lam: float, rng) -> float:
    """One Mittag-Leffler waiting time: J = E^{1/alpha} S_alpha, E ~ Exp(lam)."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if lam <= 0.0:
        raise ValueError(f"rate must be > 0, got {lam}")
    stream = _stream_of(rng)
    e = stream.exponential(lam)
    if alpha == 1.0:
        return e
    return e ** (1.0 / alpha) * _stable_standard(alpha, stream)


def _draw_holding(law, lam: float, stream: Stream) -> float:
    if isinstance(law, Exponential):
        return stream.exponential(law.rate)
    if isinstance(law, MittagLeffler):
        e = stream.exponential(law.rate)
        return e ** (1.0 / law.alpha) * _stable_standard(law.alpha, stream)
    raise TypeError("general holding laws have no exact sampler; use ML or exponential laws")


def simulate_ctrw(model: SemiMarkovModel, t_max: float, rng, start: int = 0) -> PathSample:
    """One trajectory on [0, t_max]: alternate holding draws and chain jumps.

    The path record stops at the first jump time exceeding t_max (the state
    there is the state occupied at t_max).  Absorbing states (self-jump
    probability 1) terminate the record immediately.
    """
    violations = validate_model(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    if t_max <= 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    stream = _stream_of(rng)
    h = model.embedded_chain
    n = model.n_states
    jump_times = [0.0]
    states = [int(start)]
    holdings: list[float] = []
    t = 0.0
    cur = int(start)
    hit_edge = cur in (0, n - 1)
    for _ in range(_MAX_JUMPS):
        if h[cur, cur] == 1.0:
            break  # absorbing: the walk never leaves
        j = _draw_holding(model.holding_laws[cur], model.rates[cur], stream)
        if t + j > t_max:
            break
        t += j
        u = stream.uniform()
        cur = int(np.searchsorted(np.cumsum(h[cur]), u, side="right"))
        cur = min(cur, n - 1)
        jump_times.append(t)
        states.append(cur)
        holdings.append(j)
        hit_edge = hit_edge or cur in (0, n - 1)
    else:
        raise RuntimeError(f"path exceeded {_MAX_JUMPS} jumps before t_max={t_max}")
    if hit_edge and n > 3 and start not in (0, n - 1):
        warnings.warn(
            "path reached the state-space truncation edge; boundary effects possible",
            RuntimeWarning,
            stacklevel=2,
        )
    return PathSample(np.asarray(jump_times), np.asarray(states), np.asarray(holdings))


def simulate_time_changed(model: SemiMarkovModel, t_max: float, rng, start: int = 0) -> PathSample:
    """Trajectory via the dependent time change of the Markov walk.

    Simulates the exponential-clock Markov chain (clocks E_n, breakpoints
    V_n), then maps each segment through a stable subordinator of the current
    state's order: the realized holding times are H_{alpha_{X_n}}(E_n).  The
    subordinator only needs to be evaluated at the breakpoints.  Requires
    every law to be Mittag-Leffler.
    """
    for i, law in enumerate(model.holding_laws):
        if not isinstance(law, MittagLeffler):
            raise TypeError(f"time-change construction requires MittagLeffler laws; state {i} has {type(law).__name__}")
    violations = validate_model(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    stream = _stream_of(rng)
    h = model.embedded_chain
    n = model.n_states
    jump_times = [0.0]
    states = [int(start)]
    holdings: list[float] = []
    t = 0.0
    cur = int(start)
    for _ in range(_MAX_JUMPS):
        if h[cur, cur] == 1.0:
            break
        law = model.holding_laws[cur]
        e = stream.exponential(law.rate)  # Markov clock E_n
        j = sample_stable_subordinator(law.alpha, e, stream)  # sigma increment over [V_n, V_n + E_n)
        if t + j > t_max:
            break
        t += j
        u = stream.uniform()
        cur = int(np.searchsorted(np.cumsum(h[cur]), u, side="right"))
        cur = min(cur, n - 1)
        jump_times.append(t)
        states.append(cur)
        holdings.append(j)
    else:
        raise RuntimeError(f"path exceeded {_MAX_JUMPS} jumps before t_max={t_max}")
    return PathSample(np.asarray(jump_times), np.asarray(states), np.asarray(holdings))


def simulate_paths(
    model: SemiMarkovModel,
    t_max: float,
    n_paths: int,
    rng: RngSpec,
    start: int = 0,
    time_changed: bool = False,
) -> list[PathSample]:
    """Independent trajectories, one random stream per path index."""
    sim = simulate_time_changed if time_changed else simulate_ctrw
    with warnings.catch_warnings():
        warnings.simplefilter("once", RuntimeWarning)
        return [sim(model, t_max, rng.stream(k), start=start) for k in range(n_paths)]


def occupation_at(
    model: SemiMarkovModel,
    t_evals: Sequence[float],
    n_paths: int,
    rng: RngSpec,
    start: int = 0,
) -> np.ndarray:
    """Path counts per state at each eval time, via the fast kernel.

    Returns an int64 array of shape (len(t_evals), n_states); row sums equal
    n_paths.  Only ML/exponential laws are supported (exact samplers).
    """
    violations = validate_model(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    n = model.n_states
    lam = np.empty(n)
    alpha = np.ones(n)
    is_ml = np.zeros(n, dtype=np.uint8)
    for i, law in enumerate(model.holding_laws):
        if isinstance(law, Exponential):
            lam[i] = law.rate
        elif isinstance(law, MittagLeffler):
            lam[i] = law.rate
            alpha[i] = law.alpha
            is_ml[i] = 1
        else:
            raise TypeError("occupation_at requires ML or exponential laws")
    t_evals = np.asarray(t_evals, dtype=float)
    if (np.diff(t_evals) < 0).any() or (t_evals < 0).any():
        raise ValueError("t_evals must be sorted and nonnegative")
    h_cum = np.cumsum(model.embedded_chain, axis=1)
    return np.asarray(
        occupation_counts(h_cum, lam, alpha, is_ml, int(start), t_evals, int(n_paths), rng.seed, rng.stream_id)
    )


def empirical_transition(paths: Sequence[PathSample], t: float, i: int, n_states: int):
    """Occupation frequencies at time t over paths started in state i.

    Returns ``(estimates, std_errors)`` over target states j, with
    estimate_j the fraction of paths in j at t and the binomial standard
    error sqrt(p(1-p)/N).
    """
    if len(paths) == 0:
        raise ValueError("empty path collection")
    counts = np.zeros(n_states)
    for p in paths:
        if int(p.states[0]) != i:
            raise ValueError(f"path started at {p.states[0]}, expected {i}")
        counts[p.state_at(t)] += 1
    n = len(paths)
    est = counts / n
    se = np.sqrt(est * (1.0 - est) / n)
    return est, se
