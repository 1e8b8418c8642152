"""Benchmark the compiled path kernels against the pure-Python fallback.

The two implementations draw identically from the bit generator, so this
is purely a speed comparison.  Run:

    python benchmarks/bench_kernels.py [--sizes 1e4,1e5,1e6] [--repeat 5]
"""

import argparse
import time

import numpy as np

from latentsts import rng
from latentsts._kernels import _fallback

try:
    from latentsts._kernels import _native
except ImportError:
    _native = None


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_gaussian(impl, n, repeat):
    return best_of(repeat, lambda: impl.gaussian_ar1_path(
        rng.bit_generator((1, n)), n, -0.1, 0.6, -0.25, 0.7071, 0.5657))


def bench_gar(impl, n, repeat):
    kappa = 1.0 / (0.3 * 0.2)
    return best_of(repeat, lambda: impl.gar1_path(
        rng.bit_generator((2, n)), n, 1 / 0.3, 0.3, kappa * 0.8,
        1 / kappa, 1 / kappa))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1e4,1e5,1e6")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(float(s)) for s in args.sizes.split(",")]

    if _native is None:
        print("compiled kernels not built; benchmarking the fallback only")

    header = f"{'kernel':14s} {'n':>9s} {'python':>10s}"
    if _native is not None:
        header += f" {'native':>10s} {'speedup':>8s}"
    print(header)
    for name, bench in (("gaussian_ar1", bench_gaussian), ("gar1", bench_gar)):
        for n in sizes:
            py = bench(_fallback, n, args.repeat)
            line = f"{name:14s} {n:9d} {py*1e3:9.2f}ms"
            if _native is not None:
                nat = bench(_native, n, args.repeat)
                line += f" {nat*1e3:9.2f}ms {py/nat:7.1f}x"
            print(line)

    # sanity: identical output either way
    if _native is not None:
        a = _native.gar1_path(rng.bit_generator(3), 10_000, 1 / 0.3, 0.3,
                              0.8 / 0.06, 0.06, 0.06)
        b = _fallback.gar1_path(rng.bit_generator(3), 10_000, 1 / 0.3, 0.3,
                                0.8 / 0.06, 0.06, 0.06)
        assert np.array_equal(a, b)
        print("\nnative and python kernels produced bit-identical paths")


if __name__ == "__main__":
    main()
