# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Monte Carlo kernel.

Draw-for-draw identical to the numpy fallback in ``_fallback.py``: the same
per-path splitmix64 streams, the same draw order per jump (holding time
first, then the two extra uniforms for heavy-tailed states, then the target
state), so results are reproducible across backends.
"""

from libc.math cimport log, sin, pow, M_PI

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

cdef extern from *:
    """
    #include <stdint.h>
    static const uint64_t FW_GOLDEN = 0x9E3779B97F4A7C15ULL;
    static inline uint64_t fw_mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    unsigned long long FW_GOLDEN
    unsigned long long fw_mix64(unsigned long long z) nogil


cdef inline double _next_uniform(unsigned long long *state) nogil:
    state[0] += FW_GOLDEN
    return ((fw_mix64(state[0]) >> 11) + 0.5) * (1.0 / 9007199254740992.0)


def occupation_counts(h_cum, rates, alphas, is_ml, start, t_evals, n_paths, seed, stream_id):
    """Count paths per state at each time in ``t_evals`` (sorted, >= 0)."""
    cdef double[:, ::1] hc = np.ascontiguousarray(h_cum, dtype=np.float64)
    cdef double[::1] lam = np.ascontiguousarray(rates, dtype=np.float64)
    cdef double[::1] alpha = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef unsigned char[::1] ml = np.ascontiguousarray(is_ml, dtype=np.uint8)
    cdef double[::1] tev = np.ascontiguousarray(t_evals, dtype=np.float64)
    cdef Py_ssize_t m = tev.shape[0]
    cdef Py_ssize_t n = hc.shape[0]
    counts_arr = np.zeros((m, n), dtype=np.int64)
    cdef long long[:, ::1] counts = counts_arr

    cdef unsigned long long base, st
    cdef unsigned long long seed64 = <unsigned long long> (int(seed) & ((1 << 64) - 1))
    cdef unsigned long long sid = <unsigned long long> (int(stream_id) & ((1 << 64) - 1))
    base = fw_mix64(fw_mix64(seed64) ^ sid)

    cdef Py_ssize_t npaths = n_paths
    cdef Py_ssize_t start_state = start
    cdef Py_ssize_t p, ei, cur, j
    cdef double t, t_next, u, jump, a, theta, w
    with nogil:
        for p in range(npaths):
            st = fw_mix64(base ^ (<unsigned long long> p))
            cur = start_state
            t = 0.0
            ei = 0
            while ei < m:
                u = _next_uniform(&st)
                jump = -log(u) / lam[cur]
                if ml[cur]:
                    a = alpha[cur]
                    theta = M_PI * _next_uniform(&st)
                    w = -log(_next_uniform(&st))
                    jump = pow(jump, 1.0 / a) * (
                        sin(a * theta) / pow(sin(theta), 1.0 / a)
                    ) * pow(sin((1.0 - a) * theta) / w, (1.0 - a) / a)
                t_next = t + jump
                while ei < m and tev[ei] < t_next:
                    counts[ei, cur] += 1
                    ei += 1
                t = t_next
                if ei >= m:
                    break
                u = _next_uniform(&st)
                j = 0
                while j < n - 1 and hc[cur, j] < u:
                    j += 1
                cur = j
    return counts_arr
