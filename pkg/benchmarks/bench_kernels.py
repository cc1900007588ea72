"""Compiled versus pure-Python impact integrator.

Run ``python3 benchmarks/bench_kernels.py [--repeat N] [--t-end T]``.  Both
backends integrate the same trajectory in a tabulated quartic well beside a
harmonic axis; the script checks that they agree and prints wall times.
"""
import argparse
import math
import time

import numpy as np

from steposc import kernels
from steposc.potentials import PotentialSpec


def case(t_end):
    V1 = PotentialSpec.from_function(lambda q: q ** 4, 1.6, n=6001)
    V2 = PotentialSpec.harmonic(math.sqrt(2.0))
    return (np.array([0.9, -0.4, 0.7, 0.2]), 0.0, kernels.axis_params(V1),
            kernels.axis_params(V2), -0.3, -0.3, 1e-3, t_end, -1, 1e-10)


def timed(args, backend, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kernels.integrate_impacts(*args, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=50.0)
    a = ap.parse_args(argv)
    args = case(a.t_end)
    print(f"default backend: {kernels.BACKEND}")
    t_py, (rows_py, st_py) = timed(args, "python", a.repeat)
    print(f"python : {t_py:8.3f} s  ({len(rows_py)} event rows, status {st_py})")
    if kernels.BACKEND != "cython":
        print("cython : not built (pip install -e . --no-build-isolation compiles it)")
        return 0
    t_cy, (rows_cy, st_cy) = timed(args, "cython", a.repeat)
    diff = float(np.max(np.abs(rows_cy - rows_py))) if len(rows_cy) == len(rows_py) else math.inf
    print(f"cython : {t_cy:8.3f} s  ({len(rows_cy)} event rows, status {st_cy})")
    print(f"speedup: {t_py / t_cy:.1f}x   max |row difference| {diff:.2e}")
    return 0 if st_cy == st_py and diff < 1e-12 else 1


if __name__ == "__main__":
    raise SystemExit(main())
