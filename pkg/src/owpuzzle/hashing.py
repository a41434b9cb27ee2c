"""3-wise independent hash family over GF(2^n).

``h(x)`` is the top ``k`` bits of ``a*x^2 + b*x + c`` in GF(2^n), with the
modulus fixed per width in :mod:`owpuzzle.gf`. A uniformly random triple
``(a, b, c)`` gives a family that is exactly 3-wise independent, and
truncation to the leading bits preserves this.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .dist import MAX_N, BitString, SeededRng, as_bitstring
from .gf import MODULI


def gf2n_mul(a: int, b: int, n: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced by the width-``n`` modulus."""
    if n not in MODULI:
        raise ValueError(f"unsupported field width n={n}; need 1 <= n <= {MAX_N}")
    if not (0 <= a < 1 << n and 0 <= b < 1 << n):
        raise ValueError(f"operands must be {n}-bit field elements")
    return _kernels.gf_mul(int(a), int(b), n)


@dataclass(frozen=True)
class HashFunction:
    n: int
    k: int
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.n not in MODULI:
            raise ValueError(f"unsupported input width n={self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not 0 <= v < 1 << self.n:
                raise ValueError(f"coefficient {name}={v} is not an element of GF(2^{self.n})")

    def eval_int(self, x: int) -> int:
        sq = _kernels.gf_mul(x, x, self.n)
        v = _kernels.gf_mul(self.a, sq, self.n) ^ _kernels.gf_mul(self.b, x, self.n) ^ self.c
        return v >> (self.n - self.k)

    def __call__(self, x) -> BitString:
        return eval_hash(self, x)

    def serialize(self) -> bytes:
        """``[n, k]`` followed by ``a | b<<n | c<<2n`` as ``ceil(3n/8)`` little-endian bytes."""
        packed = self.a | (self.b << self.n) | (self.c << (2 * self.n))
        return bytes([self.n, self.k]) + packed.to_bytes(math.ceil(3 * self.n / 8), "little")

    @classmethod
    def deserialize(cls, data: bytes) -> "HashFunction":
        if len(data) < 2:
            raise ValueError("hash serialization too short")
        n, k = data[0], data[1]
        if n not in MODULI:
            raise ValueError(f"unsupported input width n={n}")
        body = data[2:]
        if len(body) != math.ceil(3 * n / 8):
            raise ValueError(f"expected {math.ceil(3 * n / 8)} coefficient bytes, got {len(body)}")
        packed = int.from_bytes(body, "little")
        if packed >> (3 * n):
            raise ValueError("padding bits are not zero")
        mask = (1 << n) - 1
        return cls(n, k, packed & mask, (packed >> n) & mask, packed >> (2 * n))


@dataclass(frozen=True)
class HashFamily:
    """All ``2^(3n)`` coefficient triples at widths ``(n, k)``."""

    n: int
    k: int

    def __post_init__(self):
        HashFunction(self.n, self.k, 0, 0, 0)

    def __len__(self) -> int:
        return 1 << (3 * self.n)

    def sample(self, rng: SeededRng) -> HashFunction:
        return sample_hash(self.n, self.k, rng)

    def coefficient_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Every triple, ``a`` varying slowest."""
        q = 1 << self.n
        idx = np.arange(q ** 3, dtype=np.int64)
        return idx // (q * q), (idx // q) % q, idx % q

    def __iter__(self):
        q = range(1 << self.n)
        for a, b, c in itertools.product(q, q, q):
            yield HashFunction(self.n, self.k, a, b, c)


def sample_hash(n: int, k: int, rng: SeededRng) -> HashFunction:
    if k > n:
        raise ValueError(f"output width k={k} exceeds input width n={n}")
    a, b, c = (int(v) for v in rng.integers(0, 1 << n, size=3))
    return HashFunction(n, k, a, b, c)


def sample_coefficients(n: int, size: int, rng: SeededRng):
    """Vectorized draw of ``size`` uniform triples as three int64 arrays."""
    abc = rng.integers(0, 1 << n, size=(size, 3))
    return abc[:, 0].copy(), abc[:, 1].copy(), abc[:, 2].copy()


def eval_hash(h: HashFunction, x) -> BitString:
    x = as_bitstring(x)
    if x.n != h.n:
        raise ValueError(f"input has length {x.n}, hash expects {h.n}")
    return BitString(h.k, h.eval_int(x.value))


def padded_eval(h: HashFunction, x: BitString, k: int) -> BitString:
    """Hash output zero-padded on the right to ``k >= h.k`` bits."""
    y = eval_hash(h, x)
    return BitString(k, y.value << (k - h.k))


@dataclass
class IndependenceReport:
    n: int
    k: int
    t: int
    tuples_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_t_wise_independence(n: int, k: int, t: int) -> IndependenceReport:
    """Exhaustively check that every ``t`` distinct inputs hash to uniform independent outputs.

    For each set of distinct inputs the joint output histogram over all
    ``2^(3n)`` triples must put exactly ``2^(3n - t*k)`` triples on every
    target tuple.
    """
    if t not in (2, 3):
        raise ValueError("t must be 2 or 3")
    if not 1 <= n <= 5:
        raise ValueError(f"exhaustive mode supports n <= 5, got n={n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    fam = HashFamily(n, k)
    A, B, C = fam.coefficient_arrays()
    table = _kernels.hash_table(np.arange(1 << n, dtype=np.int64), A, B, C, n, k)
    expected = len(fam) >> (t * k)
    report = IndependenceReport(n, k, t, 0)
    for xs in itertools.combinations(range(1 << n), t):
        code = np.zeros(len(fam), dtype=np.int64)
        for x in xs:
            code = (code << k) | table[:, x]
        counts = np.bincount(code, minlength=1 << (t * k))
        report.tuples_checked += 1
        bad = np.flatnonzero(counts != expected)
        for target in bad:
            report.violations.append((xs, int(target), int(counts[target])))
    return report


def pairwise_collision_rate(n: int, k: int, x: int, x2: int):
    """Exact ``Pr_h[h(x) = h(x2)]`` over the full family, as a Fraction."""
    fam = HashFamily(n, k)
    A, B, C = fam.coefficient_arrays()
    t = _kernels.hash_table(np.array([x, x2], dtype=np.int64), A, B, C, n, k)
    return Fraction(int(np.count_nonzero(t[:, 0] == t[:, 1])), len(fam))
