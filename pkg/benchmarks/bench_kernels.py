"""Side-by-side throughput of the compiled kernels, the numpy fallback, and
the generic attack loop.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

The generic loop is the path every external or instrumented oracle takes; the
fused kernels are the fast path for the builtin linear-softmax oracle. All
three produce bit-identical attack decisions, so the only difference worth
measuring is time.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from objattack.attack import AttackConfig, run_attack
from objattack.kernels import HAVE_NATIVE, _pure
from objattack.oracle import make_builtin_oracle, predict
from objattack.region import RegionMask, mask_to_coordinates
from objattack.tensor import ImageTensor

SHAPE = (32, 32, 3)
CLASSES = 10

if HAVE_NATIVE:
    from objattack.kernels import _native


def timed(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_linear_probs(repeats: int) -> list[tuple[str, float, int]]:
    rng = np.random.default_rng(0)
    n = SHAPE[0] * SHAPE[1] * SHAPE[2]
    W = rng.standard_normal((CLASSES, n))
    b = rng.standard_normal(CLASSES)
    x = rng.uniform(0.0, 1.0, n)
    calls = 2000

    rows = []

    def pure():
        for _ in range(calls):
            _pure.linear_probs(W, b, x)

    rows.append(("linear_probs/pure-numpy", timed(pure, repeats), calls))

    if HAVE_NATIVE:

        def native():
            for _ in range(calls):
                _native.linear_probs(W, b, x)

        rows.append(("linear_probs/compiled", timed(native, repeats), calls))
    return rows


def bench_attack(repeats: int) -> list[tuple[str, float, int]]:
    oracle = make_builtin_oracle(3, SHAPE, CLASSES)
    image = ImageTensor(np.random.default_rng(4).uniform(0.3, 0.7, SHAPE))
    label = predict(oracle, image)
    coords = mask_to_coordinates(RegionMask.full(SHAPE[0], SHAPE[1]), SHAPE[2], 5)
    cfg = AttackConfig(max_queries=20_000)

    flat = image.flat()
    args = (oracle.W, oracle.b, flat, coords.flat_indices, cfg.mu, cfg.max_queries, label)
    queries = _pure.linear_attack(*args)[3]

    rows = [("linear_attack/pure-numpy", timed(lambda: _pure.linear_attack(*args), repeats), queries)]
    if HAVE_NATIVE:
        rows.append(
            ("linear_attack/compiled", timed(lambda: _native.linear_attack(*args), repeats), queries)
        )

    # the generic loop talks to the oracle object query by query, the way an
    # external process or spy-wrapped oracle would
    class PlainWrapper:
        num_classes = oracle.num_classes
        image_shape = oracle.image_shape
        kind = "wrapped"

        @staticmethod
        def classify(img):
            return oracle.classify(img)

        @staticmethod
        def _check_shape(img):
            return oracle._check_shape(img)

    rows.append(
        (
            "attack/generic-loop",
            timed(lambda: run_attack(image, PlainWrapper(), coords, cfg, label), repeats),
            queries,
        )
    )
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="take the best of N runs")
    args = parser.parse_args()

    print(f"image {SHAPE}, {CLASSES} classes, compiled kernels active: {HAVE_NATIVE}")
    print(f"{'benchmark':<28} {'best time':>12} {'unit count':>12} {'per unit':>12}")
    for name, seconds, units in bench_linear_probs(args.repeats) + bench_attack(args.repeats):
        per_unit = seconds / units
        print(f"{name:<28} {seconds * 1e3:>10.2f}ms {units:>12} {per_unit * 1e6:>10.2f}us")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
