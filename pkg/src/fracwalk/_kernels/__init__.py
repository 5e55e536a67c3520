"""Monte Carlo kernel backends.

Prefers the compiled Cython kernel; falls back to the vectorized numpy
implementation when the extension is not built.  Both produce bit-identical
counts for the same ``(seed, stream_id)``.
"""

from ._rng import GOLDEN, MASK64, Stream, mix64, next_uniforms, path_state, path_states

try:
    from ._corekern import BACKEND, occupation_counts
except ImportError:  # extension not built: use the numpy kernel
    from ._fallback import BACKEND, occupation_counts

from . import _fallback

__all__ = [
    "BACKEND",
    "GOLDEN",
    "MASK64",
    "Stream",
    "mix64",
    "next_uniforms",
    "occupation_counts",
    "path_state",
    "path_states",
    "_fallback",
]
