"""Hash puzzle candidate and the security harnesses around it.

A puzzle is ``(k, h, y)`` with ``k`` uniform on ``1..2n``, ``h`` a uniform
member of the 3-wise family and ``y = h(x)`` for a key ``x ~ d``. For
``k > n`` the family is instantiated at width ``n`` and ``y`` is the width-n
output followed by ``k - n`` zero bits.
"""
from __future__ import annotations

import base64
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _kernels
from .dist import BitString, FiniteDistribution, SeededRng, as_bitstring
from .hashing import HashFamily, HashFunction, padded_eval, sample_coefficients, sample_hash

EXACT_BUDGET = 1 << 26
DENSE_MAX_N = 12
HOEFFDING_DELTA = 1e-3


def effective_width(n: int, k: int) -> int:
    if not 1 <= k <= 2 * n:
        raise ValueError(f"k={k} outside [1, {2 * n}]")
    return min(k, n)


@dataclass(frozen=True)
class PuzzleInstance:
    k: int
    h: HashFunction
    y: BitString
    x: BitString | None = None

    def __post_init__(self):
        if self.h.k != effective_width(self.h.n, self.k):
            raise ValueError(f"hash width {self.h.k} does not match k={self.k}")
        if self.y.n != self.k:
            raise ValueError(f"y has length {self.y.n}, expected {self.k}")
        if self.x is not None and padded_eval(self.h, self.x, self.k) != self.y:
            raise ValueError("puzzle invariant violated: h(x) != y")

    @property
    def n(self) -> int:
        return self.h.n

    def public(self) -> "PuzzleInstance":
        return PuzzleInstance(self.k, self.h, self.y)

    def to_json(self) -> dict:
        return {"k": self.k, "h": base64.b64encode(self.h.serialize()).decode("ascii"),
                "y": str(self.y)}

    @classmethod
    def from_json(cls, obj) -> "PuzzleInstance":
        h = HashFunction.deserialize(base64.b64decode(obj["h"]))
        return cls(int(obj["k"]), h, BitString.from_str(obj["y"]))


def samp_candidate(d: FiniteDistribution, rng: SeededRng) -> PuzzleInstance:
    n = d.n
    k = int(rng.integers(1, 2 * n + 1))
    h = sample_hash(n, effective_width(n, k), rng)
    x = d.sample(rng)
    return PuzzleInstance(k, h, padded_eval(h, x, k), x)


@dataclass
class PuzzleBatch:
    """Many puzzles at once, as arrays; ``Y`` holds unpadded width-``kw`` outputs."""

    n: int
    K: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    X: np.ndarray
    Y: np.ndarray

    def kw(self) -> np.ndarray:
        return np.minimum(self.K, self.n)


def samp_batch(d: FiniteDistribution, rng: SeededRng, size: int) -> PuzzleBatch:
    n = d.n
    K = rng.integers(1, 2 * n + 1, size=size)
    A, B, C = sample_coefficients(n, size, rng)
    X = d.xs[d.sample_indices(rng, size)]
    Y = np.empty(size, dtype=np.int64)
    for kw in np.unique(np.minimum(K, n)):
        sel = np.minimum(K, n) == kw
        Y[sel] = _kernels.hash_each(X[sel], A[sel], B[sel], C[sel], n, int(kw))
    return PuzzleBatch(n, K, A, B, C, X, Y)


@dataclass
class SecurityReport:
    distance: float | Fraction
    trials: int
    radius: float
    mode: str

    def to_json(self) -> dict:
        dist = self.distance
        return {"distance": f"{dist.numerator}/{dist.denominator}" if isinstance(dist, Fraction)
                else float(dist), "trials": self.trials, "radius": self.radius, "mode": self.mode}


def hoeffding_radius(trials: int, delta: float = HOEFFDING_DELTA) -> float:
    return math.sqrt(math.log(2 / delta) / (2 * trials))


def _domain_probs(d: FiniteDistribution) -> np.ndarray:
    p = np.zeros(1 << d.n, dtype=np.float64)
    p[d.xs] = d.weights
    return p


def exact_security(d: FiniteDistribution, inverter, method: str = "auto") -> Fraction | float:
    """Exact ``SD((k,h,h(x),x), (k,h,h(x),O(k,h,h(x))))`` by enumerating every tuple.

    ``method`` is ``"fraction"`` (rational loop over ``inverter.conditional``,
    tiny ``n`` only), ``"integer"`` (exact, needs ``inverter.mixture`` and a
    rational ``d``), ``"float"`` (vectorized over ``inverter.conditional_rows``)
    or ``"auto"``.
    """
    n = d.n
    if len(d) * (1 << (3 * n)) * 2 * n > EXACT_BUDGET:
        raise ValueError(f"exact mode would enumerate more than {EXACT_BUDGET} tuples")
    if method == "auto":
        method = "integer" if _integer_ok(d, inverter) else "float"
    if method == "fraction":
        return _exact_fraction(d, inverter)
    if method == "integer":
        if not _integer_ok(d, inverter):
            raise ValueError("integer mode needs rational d, gamma and decoy")
        return _exact_integer(d, inverter)
    if method == "float":
        return _exact_float(d, inverter)
    raise ValueError(f"unknown method {method!r}")


def _integer_ok(d, inverter) -> bool:
    mix = getattr(inverter, "mixture", None)
    if mix is None or not d.exact or not isinstance(mix[0], Fraction):
        return False
    return mix[1] is None or mix[1].exact


def _k_weights(n: int):
    """Each distinct effective width with the number of ``k`` values mapping to it."""
    return [(kw, 1 if kw < n else n + 1) for kw in range(1, n + 1)]


def _exact_fraction(d, inverter) -> Fraction:
    n = d.n
    total = Fraction(0)
    for kw, mult in _k_weights(n):
        k = kw
        sub = Fraction(0)
        for h in HashFamily(n, kw):
            groups: dict[int, dict] = {}
            for x, p in d.items():
                groups.setdefault(h.eval_int(x.value), {})[x] = p
            for yv, pre in groups.items():
                w = sum(pre.values(), Fraction(0))
                q = inverter.conditional(k, h, BitString(k, yv))
                keys = set(pre) | set(q.support)
                sub += sum((abs(pre.get(z, 0) - w * Fraction(q.prob(z))) for z in keys),
                           Fraction(0)) / 2
        total += mult * sub
    return total / (2 * n * (1 << (3 * n)))


def _exact_integer(d, inverter) -> Fraction:
    n = d.n
    gamma, q = inverter.mixture
    pd = math.lcm(*(p.denominator for _, p in d.items()))
    pint = np.zeros(1 << n, dtype=np.int64)
    for x, p in d.items():
        pint[x.value] = int(p * pd)
    G, g = gamma.denominator, gamma.numerator
    if q is None:
        qd, qint = 1, np.zeros(1 << n, dtype=np.int64)
    else:
        qd = math.lcm(*(p.denominator for _, p in q.items()))
        qint = np.zeros(1 << n, dtype=np.int64)
        for x, p in q.items():
            qint[x.value] = int(p * qd)
    domain = np.arange(1 << n, dtype=np.int64)
    A, B, C = HashFamily(n, 1).coefficient_arrays()
    acc = 0
    for kw, mult in _k_weights(n):
        sub = 0
        for s in range(0, len(A), 4096):
            T = _kernels.hash_table(domain, A[s:s + 4096], B[s:s + 4096], C[s:s + 4096], n, kw)
            for yv in range(1 << kw):
                M = np.where(T == yv, pint[None, :], 0)
                W = M.sum(axis=1, keepdims=True)
                # scaled by pd*G*qd: honest M vs (1-gamma)*M + gamma*W*q
                lhs = M * (G * qd)
                rhs = (G - g) * qd * M + g * W * qint[None, :]
                sub += int(np.abs(lhs - rhs).sum())
        acc += mult * sub
    return Fraction(acc, 2 * 2 * n * (1 << (3 * n)) * pd * G * qd)


def _exact_float(d, inverter) -> float:
    n = d.n
    if n > DENSE_MAX_N:
        raise ValueError("float exact mode needs n <= 12")
    p = _domain_probs(d)
    domain = np.arange(1 << n, dtype=np.int64)
    A, B, C = HashFamily(n, 1).coefficient_arrays()
    step = max(1, (1 << 20) >> n)
    acc = []
    for kw, mult in _k_weights(n):
        sub = []
        for s in range(0, len(A), step):
            T = _kernels.hash_table(domain, A[s:s + step], B[s:s + step], C[s:s + step], n, kw)
            for yv in range(1 << kw):
                M = np.where(T == yv, p[None, :], 0.0)
                W = M.sum(axis=1, keepdims=True)
                Q = inverter.conditional_rows(T, p, yv)
                sub.append(0.5 * np.abs(M - W * Q).sum())
        acc.append(mult * math.fsum(sub))
    return math.fsum(acc) / (2 * n * (1 << (3 * n)))


def sampled_security(d: FiniteDistribution, inverter, trials: int, rng: SeededRng,
                     replicas: int = 64) -> SecurityReport:
    """Monte Carlo estimate over puzzles drawn from the honest distribution.

    Given a puzzle, the honest key and the inverter's answer are compared
    through their exact conditional distributions when the inverter exposes
    ``conditional_rows``; the average of those per-puzzle distances is an
    unbiased estimate of the joint distance. Black-box inverters are queried
    ``replicas`` times per puzzle instead, which biases the estimate upward.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = d.n
    batch = samp_batch(d, rng.spawn(0), trials)
    vals = np.empty(trials, dtype=np.float64)
    p = _domain_probs(d) if n <= DENSE_MAX_N else None
    domain = np.arange(1 << n, dtype=np.int64) if p is not None else None
    mode = "sampled"
    for kw in np.unique(batch.kw()):
        sel = np.flatnonzero(batch.kw() == kw)
        kw = int(kw)
        if p is not None and hasattr(inverter, "conditional_rows"):
            for s in range(0, len(sel), 4096):
                idx = sel[s:s + 4096]
                T = _kernels.hash_table(domain, batch.A[idx], batch.B[idx], batch.C[idx], n, kw)
                Y = batch.Y[idx][:, None]
                M = np.where(T == Y, p[None, :], 0.0)
                post = M / M.sum(axis=1, keepdims=True)
                Q = inverter.conditional_rows(T, p, batch.Y[idx])
                vals[idx] = 0.5 * np.abs(post - Q).sum(axis=1)
        else:
            mode = "sampled-blackbox"
            sub = rng.spawn(1 + kw)
            for i in sel:
                A = np.repeat(batch.A[i], replicas)
                B = np.repeat(batch.B[i], replicas)
                C = np.repeat(batch.C[i], replicas)
                Y = np.repeat(batch.Y[i], replicas)
                ans = inverter.invert_batch(kw, A, B, C, Y, sub.spawn(int(i)))
                h = HashFunction(n, kw, int(batch.A[i]), int(batch.B[i]), int(batch.C[i]))
                mask = np.array([h.eval_int(int(v)) == batch.Y[i] for v in d.xs])
                post = dict(zip(d.xs[mask].tolist(), (d.weights[mask] / d.weights[mask].sum()).tolist()))
                vals_, counts = np.unique(ans, return_counts=True)
                emp = dict(zip(vals_.tolist(), (counts / replicas).tolist()))
                keys = set(post) | set(emp)
                vals[i] = 0.5 * math.fsum(abs(post.get(z, 0.0) - emp.get(z, 0.0)) for z in keys)
    return SecurityReport(math.fsum(vals.tolist()) / trials, trials, hoeffding_radius(trials), mode)


def distributional_security(d: FiniteDistribution, inverter, trials: int = 10_000,
                            rng: SeededRng | None = None, mode: str = "sampled",
                            method: str = "auto") -> SecurityReport:
    """Distance between honest ``(k,h,h(x),x)`` and ``(k,h,h(x),O(k,h,h(x)))``."""
    if mode == "exact":
        dist = exact_security(d, inverter, method)
        size = len(d) * (1 << (3 * d.n)) * 2 * d.n
        return SecurityReport(dist, size, 0.0, "exact")
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    return sampled_security(d, inverter, trials, rng)


# -- search-style game -------------------------------------------------------

def ver_equals_key(key: BitString, puzzle: PuzzleInstance) -> bool:
    """Accept only the hidden key (an inefficient verifier is allowed)."""
    return puzzle.x is not None and as_bitstring(key) == puzzle.x


def ver_hash_consistent(key: BitString, puzzle: PuzzleInstance) -> bool:
    key = as_bitstring(key)
    return key.n == puzzle.n and padded_eval(puzzle.h, key, puzzle.k) == puzzle.y


def owpuzz_security_game(samp: Callable[[SeededRng], PuzzleInstance],
                         ver: Callable[[BitString, PuzzleInstance], bool],
                         adversary: Callable[[PuzzleInstance, SeededRng], BitString],
                         trials: int, rng: SeededRng) -> float:
    """Fraction of trials in which the adversary's key verifies.

    The adversary sees only the public part of each puzzle; ``ver`` sees the
    full instance, including the hidden key.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    wins = 0
    for i in range(trials):
        r = rng.spawn(i)
        puz = samp(r.spawn(0))
        wins += bool(ver(adversary(puz.public(), r.spawn(1)), puz))
    return wins / trials
