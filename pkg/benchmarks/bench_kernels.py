"""Time the compiled kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--n 10] [--trials 4096] [--repeat 5]

Outputs are compared before timing; a mismatch aborts the run.
"""
import argparse
import sys
import timeit

import numpy as np

from owpuzzle import _pykernels

try:
    from owpuzzle import _ckernels
except ImportError:
    _ckernels = None


def workloads(n: int, trials: int, seed: int):
    rng = np.random.default_rng(seed)
    xs = np.arange(1 << n, dtype=np.int64)
    probs = rng.random(len(xs))
    probs /= probs.sum()
    A, B, C = (rng.integers(0, 1 << n, trials, dtype=np.int64) for _ in range(3))
    X = rng.choice(xs, trials)
    kw = max(1, n // 2)
    Y = _pykernels.hash_each(X, A, B, C, n, kw)
    U = rng.random(trials)
    excl = np.full(trials, -1, dtype=np.int64)
    fam = min(trials, 256)
    return {
        "gf_mul x1000": lambda k: [k.gf_mul(int(a), int(b), n) for a, b in zip(A[:1000], B[:1000])],
        "hash_each": lambda k: k.hash_each(X, A, B, C, n, kw),
        "hash_table": lambda k: k.hash_table(xs, A[:fam], B[:fam], C[:fam], n, kw),
        "preimage_mass": lambda k: k.preimage_mass(xs, probs, n, kw, A, B, C, Y, excl),
        "posterior_sample": lambda k: k.posterior_sample(xs, probs, n, kw, A, B, C, Y, U),
    }


def same(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        return a.shape == b.shape and np.allclose(a, b, rtol=1e-12, atol=1e-15)
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--trials", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1

    print(f"n={args.n} trials={args.trials} support={1 << args.n} (best of {args.repeat})")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in workloads(args.n, args.trials, args.seed).items():
        if not same(fn(_pykernels), fn(_ckernels)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        print(f"{name:<18}{tp * 1e3:>12.2f}{tc * 1e3:>13.2f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
