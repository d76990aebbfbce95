"""Compare the numba and numpy kernel backends on hot group operations.

Run as: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from nil2 import kernels
from nil2.core import PcGroup, PcPresentation, quotient, subgroup_closure
from nil2.variety import Variety, free_nil2_group


def build_groups():
    small = free_nil2_group(2, Variety(8, 4), name="F2(8,4)")
    pres = PcPresentation(
        ("x", "y", "z", "c1", "c2"),
        (16, 16, 16, 16, 16),
        {},
        {(1, 0): ((3, 1),), (2, 1): ((4, 1),)},
    )
    big = PcGroup(pres, name="big")  # order 2^20
    return small, big


def bench(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def workloads(small, big):
    rng = np.random.default_rng(7)
    n_small = int(small.order)
    a_s = rng.integers(0, n_small, size=200_000, dtype=np.int64)
    b_s = rng.integers(0, n_small, size=200_000, dtype=np.int64)
    n_big = int(big.order)
    a_b = rng.integers(0, n_big, size=200_000, dtype=np.int64)
    b_b = rng.integers(0, n_big, size=200_000, dtype=np.int64)
    zgen = big.generator_tokens()[3]

    def quotient_pass():
        quotient(big, subgroup_closure(big, [big.pw(zgen, 2)]))

    return [
        ("mul_many 200k small", lambda: small.mul_many(a_s, b_s)),
        ("comm_many 200k small", lambda: small.comm_many(a_s, b_s)),
        ("pow_many 200k small", lambda: small.pow_many(a_s, 5)),
        ("mul_many 200k big", lambda: big.mul_many(a_b, b_b)),
        ("comm_many 200k big", lambda: big.comm_many(a_b, b_b)),
        ("pow_many 200k big", lambda: big.pow_many(a_b, 7)),
        ("quotient 2^20 by center slice", quotient_pass),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    small, big = build_groups()
    loads = workloads(small, big)
    names = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    results = {}
    for backend in names:
        kernels.set_backend(backend)
        for label, fn in loads:
            fn()  # warm up (jit compilation, caches)
            results[(backend, label)] = bench(fn, args.repeat)
    kernels.set_backend("auto")
    width = max(len(label) for label, _ in loads)
    header = f"{'workload':<{width}}  " + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, _ in loads:
        row = f"{label:<{width}}  "
        for n in names:
            row += f"{results[(n, label)]:>10.2f}ms"
        if len(names) == 2:
            ratio = results[("numpy", label)] / max(results[("numba", label)], 1e-9)
            row += f"{ratio:>9.1f}x"
        print(row)
    if len(names) == 1:
        print("numba not importable; numpy backend only")


if __name__ == "__main__":
    main()
