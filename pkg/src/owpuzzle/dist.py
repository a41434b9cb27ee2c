"""Exact finite distributions over fixed-length bit strings.

Everything downstream treats :class:`FiniteDistribution` as ground truth:
the puzzle sampler draws keys from it, the exact inverter conditions it,
and every lemma check compares empirical frequencies against it.

Two numeric modes are supported. When every probability is given as a
rational (``Fraction`` or a ``"p/q"`` string) and ``n <= 12`` the table is
kept in exact arithmetic; otherwise probabilities are 64-bit floats that
must sum to one within ``1e-12``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

MAX_N = 24
EXACT_MAX_N = 12
FLOAT_TOL = 1e-12

Number = Union[Fraction, float]


@dataclass(frozen=True, order=True)
class BitString:
    """An ``n``-bit string stored as an integer, first bit most significant.

    Ordering is by ``(n, value)``, which for equal lengths is lexicographic
    order on the bit strings.
    """

    n: int
    value: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError(f"bit length {self.n} outside [0, {MAX_N}]")
        if not 0 <= self.value < (1 << self.n) or (self.n == 0 and self.value):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        if any(ch not in "01" for ch in s):
            raise ValueError(f"not a bit string: {s!r}")
        return cls(len(s), int(s, 2) if s else 0)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b") if self.n else ""

    def __repr__(self) -> str:
        return f"BitString('{self}')"

    def __len__(self) -> int:
        return self.n

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.n - 1 - i)) & 1 for i in range(self.n))


def as_bitstring(x: "BitString | str") -> BitString:
    if isinstance(x, BitString):
        return x
    if isinstance(x, str):
        return BitString.from_str(x)
    raise TypeError(f"expected BitString or str, got {type(x).__name__}")


def parse_probability(v) -> Number:
    """Parse a JSON probability: ``"p/q"`` strings and ints become exact."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("boolean is not a probability")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    return float(v)


@dataclass(frozen=True)
class SeededRng:
    """A reproducible random stream identified by ``(seed, stream)``.

    ``stream`` is a tuple of non-negative integers; :meth:`spawn` extends it,
    so independent workers can derive disjoint streams from one seed without
    sharing any state.
    """

    seed: int
    stream: tuple[int, ...] = ()
    _gen: np.random.Generator = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned value")
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(self.stream))
        object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(seq)))

    @property
    def gen(self) -> np.random.Generator:
        return self._gen

    def spawn(self, index: int) -> "SeededRng":
        return SeededRng(self.seed, tuple(self.stream) + (int(index),))

    def random(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size, dtype=np.int64)


class FiniteDistribution:
    """Immutable probability table over ``n``-bit strings."""

    def __init__(self, n: int, probs: Mapping["BitString | str", object]):
        if not 0 <= n <= MAX_N:
            raise ValueError(f"n={n} outside [0, {MAX_N}]")
        parsed: dict[BitString, Number] = {}
        for key, raw in probs.items():
            x = as_bitstring(key)
            if x.n != n:
                raise ValueError(f"support element {x} has length {x.n}, expected {n}")
            p = parse_probability(raw)
            if p < 0:
                raise ValueError(f"negative probability for {x}")
            if p == 0:
                continue
            parsed[x] = parsed.get(x, 0) + p
        if not parsed:
            raise ValueError("distribution has empty support")

        exact = n <= EXACT_MAX_N and all(isinstance(p, Fraction) for p in parsed.values())
        if exact:
            total = sum(parsed.values(), Fraction(0))
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        else:
            parsed = {x: float(p) for x, p in parsed.items()}
            total = math.fsum(parsed.values())
            if abs(total - 1.0) > FLOAT_TOL:
                raise ValueError(f"probabilities sum to {total!r}, not 1 within {FLOAT_TOL}")
        self.n = n
        self.exact = exact
        self._probs = dict(sorted(parsed.items()))

    # -- constructors -----------------------------------------------------

    @classmethod
    def uniform(cls, n: int, exact: bool = True) -> "FiniteDistribution":
        p = Fraction(1, 2**n) if exact and n <= EXACT_MAX_N else 2.0**-n
        return cls(n, {BitString(n, v): p for v in range(2**n)})

    @classmethod
    def point_mass(cls, x: "BitString | str") -> "FiniteDistribution":
        x = as_bitstring(x)
        return cls(x.n, {x: Fraction(1)})

    @classmethod
    def from_weights(cls, n: int, weights: Mapping["BitString | str", object]) -> "FiniteDistribution":
        """Normalize non-negative weights; integer/rational weights stay exact."""
        parsed = {as_bitstring(k): parse_probability(v) for k, v in weights.items()}
        total = sum(parsed.values())
        if all(isinstance(v, Fraction) for v in parsed.values()):
            return cls(n, {k: v / total for k, v in parsed.items()})
        total = math.fsum(float(v) for v in parsed.values())
        return cls(n, {k: float(v) / total for k, v in parsed.items()})

    @classmethod
    def from_array(cls, n: int, probs: np.ndarray, clamp: float = 0.0) -> "FiniteDistribution":
        """Build from a dense length-``2**n`` float vector indexed by value."""
        probs = np.asarray(probs, dtype=np.float64).copy()
        probs[probs < clamp] = 0.0
        total = math.fsum(probs.tolist())
        probs /= total
        return cls(n, {BitString(n, int(v)): float(probs[v]) for v in np.flatnonzero(probs)})

    # -- access -----------------------------------------------------------

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        return f"FiniteDistribution(n={self.n}, support={len(self._probs)}, {mode})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteDistribution) and self.n == other.n
                and self._probs == other._probs)

    def __hash__(self):
        return hash((self.n, tuple(self._probs.items())))

    def items(self):
        return self._probs.items()

    @property
    def support(self) -> tuple[BitString, ...]:
        return tuple(self._probs)

    def __len__(self) -> int:
        return len(self._probs)

    def __contains__(self, x) -> bool:
        return as_bitstring(x) in self._probs

    @cached_property
    def xs(self) -> np.ndarray:
        """Support values in canonical (lexicographic) order."""
        return np.fromiter((x.value for x in self._probs), dtype=np.int64, count=len(self._probs))

    @cached_property
    def weights(self) -> np.ndarray:
        return np.fromiter((float(p) for p in self._probs.values()), dtype=np.float64,
                           count=len(self._probs))

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def prob(self, x: "BitString | str") -> Number:
        x = as_bitstring(x)
        if x.n != self.n:
            raise ValueError(f"query has length {x.n}, distribution is over {self.n}-bit strings")
        return self._probs.get(x, Fraction(0) if self.exact else 0.0)

    def mass(self, xs: Iterable["BitString | str"]) -> Number:
        return sum((self.prob(x) for x in set(map(as_bitstring, xs))),
                   Fraction(0) if self.exact else 0.0)

    def index_of(self, x: "BitString | str") -> int:
        x = as_bitstring(x)
        i = int(np.searchsorted(self.xs, x.value))
        if i >= len(self.xs) or self.xs[i] != x.value:
            return -1
        return i

    # -- sampling ---------------------------------------------------------

    def sample_indices(self, rng: SeededRng, size: int) -> np.ndarray:
        u = rng.random(size) * self._cdf[-1]
        idx = np.searchsorted(self._cdf, u, side="right")
        return np.minimum(idx, len(self.xs) - 1)

    def sample(self, rng: SeededRng) -> BitString:
        """Inverse-CDF draw over the canonical support order."""
        return BitString(self.n, int(self.xs[self.sample_indices(rng, 1)[0]]))

    def sample_many(self, rng: SeededRng, size: int) -> list[BitString]:
        return [BitString(self.n, int(v)) for v in self.xs[self.sample_indices(rng, size)]]

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        def enc(p):
            return f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else p
        return {"n": self.n, "probs": {str(x): enc(p) for x, p in self._probs.items()}}

    @classmethod
    def from_json(cls, obj: Mapping) -> "FiniteDistribution":
        if "n" not in obj or "probs" not in obj:
            raise ValueError("distribution JSON needs 'n' and 'probs'")
        return cls(int(obj["n"]), obj["probs"])


def load_distribution(path: "str | Path") -> FiniteDistribution:
    with open(path) as fh:
        return FiniteDistribution.from_json(json.load(fh))


def prob(d: FiniteDistribution, x: "BitString | str") -> Number:
    return d.prob(x)


def sample(d: FiniteDistribution, rng: SeededRng) -> BitString:
    return d.sample(rng)


def statistical_distance(a: FiniteDistribution, b: FiniteDistribution) -> Number:
    """Half the L1 distance; exact when both tables are rational."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    keys = set(a.support) | set(b.support)
    if a.exact and b.exact:
        return sum((abs(a.prob(z) - b.prob(z)) for z in keys), Fraction(0)) / 2
    return math.fsum(abs(float(a.prob(z)) - float(b.prob(z))) for z in keys) / 2


def entropy(d: FiniteDistribution) -> float:
    """Shannon entropy in bits."""
    return math.fsum(-float(p) * math.log2(float(p)) for _, p in d.items() if p > 0) + 0.0


def tail_set(d: FiniteDistribution, c: float) -> frozenset[BitString]:
    """Strings whose probability sits in the bottom ``n**-c`` of cumulative mass.

    ``S = {x : Pr_{x' <- d}[p_{x'} <= p_x] <= n**-c}``; computed by sorting the
    support by probability, so ties are handled as a block.
    """
    bound = d.n ** (-c) if d.n > 0 else 1.0
    by_prob = sorted(d.items(), key=lambda kv: kv[1])
    out = []
    cum = Fraction(0) if d.exact else 0.0
    i = 0
    while i < len(by_prob):
        j = i
        p = by_prob[i][1]
        while j < len(by_prob) and by_prob[j][1] == p:
            cum += p
            j += 1
        if float(cum) > bound:
            break
        out.extend(x for x, _ in by_prob[i:j])
        i = j
    return frozenset(out)
