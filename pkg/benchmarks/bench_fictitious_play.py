"""Benchmark the fictitious-play kernel: compiled extension vs numpy.

Builds the symmetric duopoly price game used across the test suite and
times both backends over the same iteration budget, verifying that they
produce bit-identical play counts.

Run:  python benchmarks/bench_fictitious_play.py [iterations]
"""

import sys
import time

import numpy as np

from vremarket import MarketConfig, TruncatedNormalModel, build_bimatrix
from vremarket.kernels import BACKEND, _fictitious_play_py

try:
    from vremarket.kernels import _fictitious_play_c
except ImportError:
    _fictitious_play_c = None


def run_backend(fp_run, A, B, iterations):
    row_cum = A.mean(axis=1).copy()
    col_cum = B.mean(axis=1).copy()
    row_counts = np.zeros(A.shape[0])
    col_counts = np.zeros(B.shape[0])
    start = time.perf_counter()
    fp_run(A, B, row_cum, col_cum, row_counts, col_counts, iterations)
    elapsed = time.perf_counter() - start
    return elapsed, row_counts, col_counts


def main():
    iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    config = MarketConfig(demand=2.0, price_cap=1.0, penalty=1.5)
    models = [TruncatedNormalModel(1.5, 1.0, hi=3.0),
              TruncatedNormalModel(1.5, 1.0, hi=3.0)]
    game = build_bimatrix(models, config)
    A = np.ascontiguousarray(game.payoff1)
    B = np.ascontiguousarray(game.payoff2)
    print(f"grid {game.grid.count} levels, {iterations} iterations, "
          f"selected backend: {BACKEND}")

    t_py, rc_py, cc_py = run_backend(_fictitious_play_py.fp_run, A, B,
                                     iterations)
    print(f"python/numpy : {t_py:8.3f} s "
          f"({1e6 * t_py / iterations:7.3f} us/iter)")

    if _fictitious_play_c is None:
        print("cython       : not built")
        return
    t_c, rc_c, cc_c = run_backend(_fictitious_play_c.fp_run, A, B, iterations)
    print(f"cython       : {t_c:8.3f} s "
          f"({1e6 * t_c / iterations:7.3f} us/iter)")
    print(f"speedup      : {t_py / t_c:8.1f}x")
    same = (np.array_equal(rc_py, rc_c) and np.array_equal(cc_py, cc_c))
    print(f"bit-identical play counts: {same}")
    if not same:
        sys.exit(1)


if __name__ == "__main__":
    main()
