"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from adeval._kernels import implementations


def cases(rng):
    scores = np.round(rng.standard_normal(200_000), 3)
    order = np.argsort(-scores, kind="stable")
    s_sorted = np.ascontiguousarray(scores[order])
    labels = np.ascontiguousarray(rng.integers(0, 2, scores.size).astype(np.int64)[order])
    train = np.ascontiguousarray(rng.standard_normal((2000, 2)))
    query = np.ascontiguousarray(rng.standard_normal((2000, 2)))
    return {
        "tie_blocks n=200k": lambda m: m.tie_blocks(s_sorted, labels),
        "knn k=5 2000x2000 d=2": lambda m: m.kth_neighbor_distance(train, query, 5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats (default: 5)")
    args = ap.parse_args(argv)
    impls = implementations()
    if "cython" not in impls:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'case':<26}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for label, fn in cases(rng).items():
        times = {}
        for name, mod in impls.items():
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:<26}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in impls)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
