"""Benchmark the compiled occupation kernel against the numpy fallback.

Simulates a heterogeneous Mittag-Leffler walk on a growing number of paths
with both kernel implementations (identical draws, identical outputs) and
reports throughput.

Run from the repository root:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fracwalk import ml_model
from fracwalk._kernels import BACKEND, _fallback, occupation_counts

MODEL = ml_model(
    [[0.0, 0.6, 0.4], [0.3, 0.0, 0.7], [0.5, 0.5, 0.0]],
    [1.0, 2.0, 0.5],
    [0.5, 0.7, 0.9],
)
T_EVALS = np.array([0.5, 1.0, 2.0, 5.0])
SEED = 12345


def _args(n_paths: int):
    lam = np.array([law.rate for law in MODEL.holding_laws])
    alpha = np.array([law.alpha for law in MODEL.holding_laws])
    is_ml = np.ones(3, dtype=np.uint8)
    h_cum = np.cumsum(MODEL.embedded_chain, axis=1)
    return (h_cum, lam, alpha, is_ml, 0, T_EVALS, n_paths, SEED, 0)


def bench(fn, n_paths: int, repeats: int = 3) -> tuple[float, np.ndarray]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = np.asarray(fn(*_args(n_paths)))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    if BACKEND != "compiled":
        print("NOTE: compiled kernel unavailable; benchmarking the fallback against itself")
    print(f"active backend: {BACKEND}")
    print(f"{'paths':>9}  {'compiled':>10}  {'numpy':>10}  {'speedup':>8}")
    for n_paths in (1000, 10000, 100000, 500000):
        t_active, out_a = bench(occupation_counts, n_paths)
        t_fb, out_f = bench(_fallback.occupation_counts, n_paths)
        assert np.array_equal(out_a, out_f), "kernel outputs diverged"
        print(f"{n_paths:>9}  {t_active:>9.4f}s  {t_fb:>9.4f}s  {t_fb / t_active:>7.1f}x")


if __name__ == "__main__":
    main()
