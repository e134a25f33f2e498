"""Time the numba kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Every pair of results is checked for equality before timings are reported.
An end-to-end run under each HMLAB_NUMBA setting is timed in a subprocess,
since the backend is fixed at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hmlab import kernels

THETA = 2 - 2**0.5  # 2*theta for theta = 1/(2+sqrt 2); kernels only need a float
END_TO_END = """
import time
from fractions import Fraction
from hmlab.contfrac import convergents, expand, explicit_selection
from hmlab.exact import quad
from hmlab.floorseq import DifferenceScheme, FloorSequence, IntPolynomial, w_scan
th = quad(1, Fraction(-1, 2), 2)
cf = expand(th, 12)
sel = explicit_selection(cf, range(0, 9), convergents(cf), first_n=0)
f = IntPolynomial((0, -2, 0, 1))
scheme = DifferenceScheme.for_poly(f, sel)
src = FloorSequence(f, th, th)
w_scan(scheme, src, 2, (0, 10))  # warm up
t = time.perf_counter()
for n in range(2, 7):
    w_scan(scheme, src, n, (0, {size}))
print(time.perf_counter() - t)
"""


def inputs(size):
    rng = np.random.default_rng(0)
    u = rng.integers(-10**6, 10**6, size + 4 * 1000, dtype=np.int64)
    return {
        "floor_affine": (0, size, THETA / 2, THETA / 3, 1e-17, 1e-17),
        "nearest_distance": (1, size, THETA / 2, 1e-17),
        "difference_scan": (u, np.array([1, -4, 6, -4, 1], dtype=np.int64), 1000, size),
        "poly_eval": (np.array([0, -2, 0, 1], dtype=np.int64), rng.integers(0, 10**5, size, dtype=np.int64)),
        "nonzero_gaps": (rng.integers(0, 3, size, dtype=np.int64) * rng.integers(0, 2, size, dtype=np.int64),),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is not importable; nothing to compare")

    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, a in inputs(args.size).items():
        fp, fb = kernels.NUMPY_IMPL[name], kernels.NUMBA_IMPL[name]
        if not same(fp(*a), fb(*a)):  # also triggers compilation
            sys.exit(f"{name}: backends disagree")
        tp = min(timeit.repeat(lambda: fp(*a), number=1, repeat=args.repeat)) * 1e3
        tb = min(timeit.repeat(lambda: fb(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{tp:>12.2f}{tb:>12.2f}{tp / tb:>9.1f}x")

    size = min(args.size, 200_000)
    print(f"\nw_scan, f = x^3 - 2x, n = 2..6, window 0:{size}")
    for flag in ("0", "1"):
        env = dict(os.environ, HMLAB_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(size=size)], env=env,
                             capture_output=True, text=True, check=True).stdout
        print(f"  HMLAB_NUMBA={flag}: {float(out) * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
