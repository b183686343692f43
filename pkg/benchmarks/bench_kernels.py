"""Timing comparison of the compiled and pure-Python tree kernels.

Checks first that both backends return bit-identical results on shared
inputs (the contract that lets them be swapped freely), then times the
three hot paths: class-split scanning, gradient-split scanning, and tree
application.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--repeats K]
"""

import argparse
import sys
import time

import numpy as np

from issuediff.model import kernels_py
from issuediff.model.trees import DEFAULT_HYPERPARAMS, RANDOM_FOREST, fit


def _best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _check_identical(name, a, b):
    if isinstance(a, tuple):
        same = len(a) == len(b) and all(x == y for x, y in zip(a, b))
    else:
        same = np.array_equal(np.asarray(a), np.asarray(b))
    if not same:
        print(f"MISMATCH in {name}: python={a!r} compiled={b!r}")
        sys.exit(1)
    print(f"{name}: backends agree bit-for-bit")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    try:
        from issuediff.model import _kernels as compiled
    except ImportError:
        print("compiled backend is not built; install the package first")
        return 1

    rng = np.random.default_rng(args.seed)
    n = args.rows
    xs = np.sort(rng.normal(size=n))
    ys = (rng.random(n) < 0.3).astype(np.float64)
    gs = rng.normal(size=n)
    hs = rng.random(n) * 0.25 + 1e-6

    _check_identical(
        "scan_split_class",
        kernels_py.scan_split_class(xs, ys, 2),
        compiled.scan_split_class(xs, ys, 2),
    )
    _check_identical(
        "scan_split_reg",
        kernels_py.scan_split_reg(xs, gs, hs, 2),
        compiled.scan_split_reg(xs, gs, hs, 2),
    )

    x_small = rng.normal(size=(2000, 8))
    y_small = (x_small[:, 0] + 0.5 * x_small[:, 3] > 0).astype(np.int64)
    hp = dict(DEFAULT_HYPERPARAMS[RANDOM_FOREST])
    hp["n_estimators"] = 8
    model = fit(RANDOM_FOREST, x_small, y_small, hp, seed=1)
    tree = model.trees[0]
    x_apply = rng.normal(size=(n, 8))
    _check_identical(
        "apply_tree",
        kernels_py.apply_tree(tree.feature, tree.threshold, tree.left, tree.right, x_apply),
        compiled.apply_tree(tree.feature, tree.threshold, tree.left, tree.right, x_apply),
    )

    rows = [
        (
            "scan_split_class",
            lambda: kernels_py.scan_split_class(xs, ys, 2),
            lambda: compiled.scan_split_class(xs, ys, 2),
        ),
        (
            "scan_split_reg",
            lambda: kernels_py.scan_split_reg(xs, gs, hs, 2),
            lambda: compiled.scan_split_reg(xs, gs, hs, 2),
        ),
        (
            "apply_tree",
            lambda: kernels_py.apply_tree(
                tree.feature, tree.threshold, tree.left, tree.right, x_apply
            ),
            lambda: compiled.apply_tree(
                tree.feature, tree.threshold, tree.left, tree.right, x_apply
            ),
        ),
    ]

    print(f"\nrows={n} repeats={args.repeats} (best-of timing)")
    print(f"{'kernel':<18} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, py_fn, c_fn in rows:
        t_py = _best_of(args.repeats, py_fn)
        t_c = _best_of(args.repeats, c_fn)
        print(f"{name:<18} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {t_py / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
