#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-Python fallback.

Times the closed-form kinematics kernels and the two solvers on a fixed
workload and prints per-call timings plus the speedup.  Run after an
editable install:

    python3 benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

from ccarm._kernels import _purecore

try:
    from ccarm._kernels import _fastcore
except ImportError:
    _fastcore = None

L, R, BETA, N = 0.25, 0.02, math.pi / 2, 4
FLEX, KT = 2.4543692606170264e-03, 1580.0
Q_CMD = np.array([0.0104719755, 0.0, -0.0104719755, 0.0])
TAU0 = np.array([0.2454369261, 0.0, 0.0, 0.0])


def bench(label, fn, reps):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    elapsed = time.perf_counter() - start
    per_call = elapsed / reps
    print(f"  {label:<24s} {per_call * 1e6:9.2f} us/call")
    return per_call


def run(core, reps_fast, reps_solve):
    rng = np.random.default_rng(42)
    angles = rng.uniform(0.05, 3.0, size=64)
    deltas = rng.uniform(-3.0, 3.0, size=64)

    def kin():
        for th, de in zip(angles, deltas):
            core.position(L, th, de)
            core.jac_v(L, th, de)
            core.jac_w(th, de)

    def deflect():
        core.solve_deflection(L, R, BETA, N, FLEX, KT, Q_CMD, TAU0,
                              0.42, 0.0, -0.24, 0.5236, 0.0, 5e-11, 100)

    def perch():
        core.solve_tip_constraint(L, 0.5236, 0.0, 0.115, 0.0, 0.24,
                                  1e-6, 1e-8, 100)

    results = {}
    results["kinematics x64"] = bench("kinematics x64", kin, reps_fast)
    results["solve_deflection"] = bench("solve_deflection", deflect, reps_solve)
    results["solve_tip_constraint"] = bench("solve_tip_constraint", perch, reps_solve)
    return results


def main():
    print("pure-python backend:")
    pure = run(_purecore, 200, 2000)
    if _fastcore is None:
        print("compiled backend not built; install with the Cython extension to compare")
        return
    print("compiled backend:")
    fast = run(_fastcore, 2000, 20000)
    print("speedup (pure / compiled):")
    for key in pure:
        print(f"  {key:<24s} {pure[key] / fast[key]:8.1f}x")


if __name__ == "__main__":
    main()
