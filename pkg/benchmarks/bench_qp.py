#!/usr/bin/env python3
"""Benchmark the compiled ADMM epoch kernel against the numpy fallback.

Runs the identical iteration on identical data, so the timings isolate the
inner loop itself (the factorization is shared and excluded). Usage:

    python3 benchmarks/bench_qp.py [--epochs 200] [--repeats 5]
"""

import argparse
import time

import numpy as np
from scipy.linalg import cho_factor

from secureplan.qp import _admm_np

try:
    from secureplan.qp import _admm_cy
except ImportError:  # pragma: no cover - extension not built
    _admm_cy = None

SIZES = [(30, 60), (100, 200), (242, 500), (500, 1000), (968, 2000)]


def make_instance(rng, n, m):
    M = rng.standard_normal((n, max(1, n // 2)))
    P = M @ M.T + 0.5 * np.eye(n)
    q = rng.standard_normal(n)
    A = rng.standard_normal((m, n))
    l = rng.standard_normal(m) - 2.0
    u = l + rng.uniform(0.5, 3.0, size=m)
    R = rng.uniform(0.5, 2.0, size=m)
    sigma, alpha = 1e-9, 1.6
    K = P + sigma * np.eye(n) + (A.T * R) @ A
    c, _ = cho_factor(K, lower=True, check_finite=False)
    return dict(P=P, q=q, A=A, AT=np.ascontiguousarray(A.T), l=l, u=u, R=R,
                sigma=sigma, alpha=alpha,
                chol_np=(c, True), chol_cy=np.asfortranarray(np.tril(c)))


def bench(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", type=int, default=200,
                    help="ADMM iterations per timed run")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed runs per size; best one is reported")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'n':>6} {'m':>6} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for n, m in SIZES:
        inst = make_instance(rng, n, m)
        state = lambda: (np.zeros(n), np.zeros(m), np.zeros(m))

        def run_np():
            x, z, y = state()
            _admm_np.run_epoch(inst["chol_np"], inst["P"], inst["q"],
                               inst["A"], inst["AT"], inst["l"], inst["u"],
                               inst["R"], inst["sigma"], inst["alpha"],
                               x, z, y, args.epochs)
            return x

        t_np = bench(run_np, args.repeats)
        if _admm_cy is None:
            print(f"{n:>6} {m:>6} {t_np * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue

        def run_cy():
            x, z, y = state()
            _admm_cy.run_epoch(inst["chol_cy"], inst["A"], inst["q"],
                               inst["l"], inst["u"], inst["R"], inst["sigma"],
                               inst["alpha"], x, z, y, args.epochs)
            return x

        # both kernels must produce the same iterates before timing them
        np.testing.assert_allclose(run_np(), run_cy(), atol=1e-9)
        t_cy = bench(run_cy, args.repeats)
        print(f"{n:>6} {m:>6} {t_np * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms "
              f"{t_np / t_cy:>8.2f}x")


if __name__ == "__main__":
    main()
