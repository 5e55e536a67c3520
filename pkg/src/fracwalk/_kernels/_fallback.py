"""Pure-numpy Monte Carlo kernel: vectorized over paths.

Semantics (per-path draw order, stream derivation, jump rule) match the
compiled kernel in ``_corekern.pyx`` exactly.
"""

from __future__ import annotations

import numpy as np

from ._rng import GOLDEN, mix64_vec, path_states

BACKEND = "numpy"

_CHUNK = 1 << 15


def _draw(states: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Advance the streams of the selected paths by one and return uniforms."""
    states[idx] += np.uint64(GOLDEN)
    z = mix64_vec(states[idx])
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def occupation_counts(h_cum, rates, alphas, is_ml, start, t_evals, n_paths, seed, stream_id):
    """Count paths per state at each time in ``t_evals`` (sorted, >= 0).

    Returns an int64 array of shape ``(len(t_evals), n_states)``.  Each path
    runs its own splitmix64 stream; the reported state at time t is the state
    occupied on the holding interval containing t (the walk is right
    continuous with left limits).
    """
    h_cum = np.ascontiguousarray(h_cum, dtype=np.float64)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    is_ml = np.ascontiguousarray(is_ml, dtype=np.uint8)
    t_evals = np.ascontiguousarray(t_evals, dtype=np.float64)
    m = len(t_evals)
    n = h_cum.shape[0]
    counts = np.zeros((m, n), dtype=np.int64)
    inv_alpha = 1.0 / alphas

    for lo in range(0, n_paths, _CHUNK):
        size = min(_CHUNK, n_paths - lo)
        rng = path_states(seed, stream_id, np.arange(lo, lo + size, dtype=np.uint64))
        state = np.full(size, start, dtype=np.intp)
        t = np.zeros(size)
        ei = np.zeros(size, dtype=np.intp)
        active = np.arange(size, dtype=np.intp)
        while active.size:
            cur = state[active]
            lam = rates[cur]
            u1 = _draw(rng, active)
            J = -np.log(u1) / lam
            ml = is_ml[cur] != 0
            if ml.any():
                sel = active[ml]
                theta = np.pi * _draw(rng, sel)
                w = -np.log(_draw(rng, sel))
                a = alphas[cur[ml]]
                s_stable = (np.sin(a * theta) / np.sin(theta) ** (1.0 / a)) * (
                    np.sin((1.0 - a) * theta) / w
                ) ** ((1.0 - a) / a)
                J[ml] = J[ml] ** inv_alpha[cur[ml]] * s_stable
            t_next = t[active] + J
            # record every eval time inside the current holding interval
            rec = active
            tn = t_next
            while rec.size:
                hit = t_evals[np.minimum(ei[rec], m - 1)] < tn
                hit &= ei[rec] < m
                rec = rec[hit]
                tn = tn[hit]
                if rec.size == 0:
                    break
                np.add.at(counts, (ei[rec], state[rec]), 1)
                ei[rec] += 1
            t[active] = t_next
            done = ei[active] >= m
            if done.any():
                active = active[~done]
                if active.size == 0:
                    break
            u2 = _draw(rng, active)
            rows = h_cum[state[active]]
            state[active] = np.minimum(
                (rows < u2[:, None]).sum(axis=1), n - 1
            )
    return counts
