"""Compare the compiled and pure-Python aggregation kernels.

    python benchmarks/bench_kernels.py [--rows N] [--dims D] [--members M] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from cubewright import kernels
from cubewright.kernels import _pykernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=1_000_000)
    ap.add_argument("--dims", type=int, default=4)
    ap.add_argument("--members", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    codes = rng.integers(0, args.members, size=(args.rows, args.dims), dtype=np.int64)
    radices = np.full(args.dims, args.members, dtype=np.int64)
    maps = np.tile(np.arange(args.members, dtype=np.int64) // 2, (args.dims, 1))
    half = radices // 2 + radices % 2
    weights = np.ones(args.rows, dtype=np.int64)

    backends = {"pure": _pykernels}
    if kernels.compiled is not None:
        backends["compiled"] = kernels.compiled
    else:
        print("compiled kernels unavailable; timing the pure-Python backend only")

    print(f"rows={args.rows} dims={args.dims} members={args.members}")
    print(f"{'kernel':<12} {'backend':<9} {'best of ' + str(args.repeat):>12}")
    results = {}
    for name, impl in backends.items():
        count = min(timeit.repeat(lambda: impl.count_codes(codes, radices), number=1, repeat=args.repeat))
        remap = min(timeit.repeat(lambda: impl.remap_sum(codes, weights, maps, half), number=1,
                                  repeat=args.repeat))
        results[name] = (count, remap)
        print(f"{'count_codes':<12} {name:<9} {count:>11.4f}s")
        print(f"{'remap_sum':<12} {name:<9} {remap:>11.4f}s")
    if len(results) == 2:
        a, b = results["pure"], results["compiled"]
        print(f"speedup: count_codes x{a[0] / b[0]:.1f}, remap_sum x{a[1] / b[1]:.1f}")
        assert kernels.compiled.count_codes(codes, radices) == _pykernels.count_codes(codes, radices)


if __name__ == "__main__":
    main()
