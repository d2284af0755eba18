#!/usr/bin/env python3
"""Benchmark the compiled edit-distance kernel against the pure-Python one.

Usage: python benchmarks/bench_editdist.py [--pairs N] [--repeat R]

Workload: similarity-style comparisons between synonym-like strings, the hot
loop of target-synonym selection and ambiguity resolution during linking.
"""

import argparse
import random
import statistics
import time

from kgel._editdist_py import levenshtein as py_levenshtein

try:
    from kgel._editdist import levenshtein as c_levenshtein
except ImportError:
    c_levenshtein = None

WORDS = [
    "acute", "chronic", "myocardial", "infarction", "carcinoma", "syndrome",
    "fever", "pyrexia", "cephalalgia", "nausea", "aspirin", "ibuprofen",
    "acetylsalicylic", "acid", "disorder", "disease", "lesion", "stenosis",
]


def make_pairs(n, seed=7):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
        b = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
        pairs.append((a, b))
    return pairs


def bench(kernel, pairs, repeat):
    times = []
    checksum = 0
    for _ in range(repeat):
        start = time.perf_counter()
        for a, b in pairs:
            checksum += kernel(a, b)
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times), checksum


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs)
    results = {}
    py_best, py_median, py_sum = bench(py_levenshtein, pairs, args.repeat)
    results["python"] = (py_best, py_median)
    print(f"{'kernel':<8} {'best':>10} {'median':>10} {'pairs/s':>12}")
    print(f"{'python':<8} {py_best:>9.4f}s {py_median:>9.4f}s {args.pairs / py_best:>12,.0f}")

    if c_levenshtein is None:
        print("c        (extension not built)")
        return

    c_best, c_median, c_sum = bench(c_levenshtein, pairs, args.repeat)
    if c_sum != py_sum:
        raise SystemExit("kernel mismatch: compiled and pure results differ")
    print(f"{'c':<8} {c_best:>9.4f}s {c_median:>9.4f}s {args.pairs / c_best:>12,.0f}")
    print(f"\nspeedup (best/best): {py_best / c_best:.1f}x")


if __name__ == "__main__":
    main()
