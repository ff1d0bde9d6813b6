"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--size 128] [--repeat 5]

Each row is the best of ``--repeat`` runs, per call.
"""

import argparse
import timeit

import numpy as np

from gdpkit import _backend
from gdpkit.descriptors import GDP_BIN_LUT, LBP_BIN_LUT


def cases(size, rng):
    img = rng.integers(0, 256, (size, size), dtype=np.uint8)
    codes_gdp = _backend.python.gdp_code_map(img)
    codes_lbp = _backend.python.lbp_code_map(img)
    m = size - 2
    rb = (np.arange(1, m + 1) * 9 // size).astype(np.intp)
    X = np.ascontiguousarray(rng.random((200, 648 + 1)))
    y = np.where(rng.random(200) < 0.5, 1.0, -1.0)
    q = np.einsum("ij,ij->i", X, X)
    order = rng.permutation(200)

    def dcd(k):
        return lambda: k.dcd_epoch(X, y, np.zeros(200), np.zeros(649), q, order, 1.0)

    return [
        ("gdp_code_map", lambda k: lambda: k.gdp_code_map(img)),
        ("lbp_code_map", lambda k: lambda: k.lbp_code_map(img)),
        ("block_counts GDP n=9", lambda k: lambda: k.block_counts(codes_gdp, rb, rb, 9, GDP_BIN_LUT, 8)),
        ("block_counts LBP n=9", lambda k: lambda: k.block_counts(codes_lbp, rb, rb, 9, LBP_BIN_LUT, 256)),
        ("dcd_epoch 200x649", dcd),
    ]


def best_time(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128, help="square test image side")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _backend.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, make in cases(args.size, rng):
        tp = best_time(make(_backend.python), args.repeat)
        tc = best_time(make(_backend.compiled), args.repeat)
        print(f"{name:<24}{tp * 1e6:>10.1f}us{tc * 1e6:>10.1f}us{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
