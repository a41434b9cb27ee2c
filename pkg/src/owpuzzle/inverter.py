"""Distributional inverter oracles for the hash puzzle.

Every inverter answers a puzzle ``(k, h, y)`` with a candidate key. Besides
single calls, each exposes

* ``invert_batch(kw, A, B, C, Y, rng)``: one answer per coefficient triple,
  returned as integer key values;
* ``conditional(k, h, y)``: its exact output distribution on one puzzle;
* ``conditional_rows(T, p, y)``: the same for many hashes at once, as a dense
  ``(J, 2**n)`` float array, given the hash table ``T`` of the whole domain;
* ``mixture``: ``(gamma, q)`` when the output is ``(1-gamma)*posterior + gamma*q``,
  which permits integer-exact distance computations.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import _kernels
from .dist import BitString, FiniteDistribution, SeededRng, as_bitstring
from .hashing import HashFunction


def unpad(h: HashFunction, k: int, y: BitString) -> int:
    """Strip the zero padding of a width-``k`` output of a width-``h.k`` hash."""
    if y.n != k:
        raise ValueError(f"output has length {y.n}, puzzle says k={k}")
    if k < h.k:
        raise ValueError(f"k={k} is smaller than the hash width {h.k}")
    return y.value >> (k - h.k)


def _col(y):
    y = np.asarray(y)
    return y[:, None] if y.ndim else y


class EmptyPosterior:
    """Returned by :func:`preimage_posterior` when the preimage carries no mass."""

    def __repr__(self):
        return "EmptyPosterior()"

    def __bool__(self):
        return False


def preimage_posterior(inv: "ExactInverter", k: int, h: HashFunction, y: BitString):
    """``d`` restricted to ``{x' : h(x') = y}`` and renormalized."""
    d = inv.d
    target = unpad(h, k, as_bitstring(y))
    pre = {x: p for x, p in d.items() if h.eval_int(x.value) == target}
    if not pre:
        return EmptyPosterior()
    return FiniteDistribution.from_weights(d.n, pre)


class ExactInverter:
    """Samples the exact posterior of ``d`` given the puzzle; ``0^n`` on empty preimage."""

    def __init__(self, d: FiniteDistribution):
        self.d = d
        self.n = d.n
        self.mixture = (Fraction(0), None)

    def __repr__(self):
        return f"ExactInverter({self.d!r})"

    def invert(self, k: int, h: HashFunction, y: BitString, rng: SeededRng) -> BitString:
        yv = unpad(h, k, as_bitstring(y))
        out = self.invert_batch(h.k, [h.a], [h.b], [h.c], [yv], rng)
        return BitString(self.n, int(out[0]))

    def invert_batch(self, kw, A, B, C, Y, rng: SeededRng) -> np.ndarray:
        U = rng.random(len(A))
        idx = _kernels.posterior_sample(self.d.xs, self.d.weights, self.n, kw, A, B, C, Y, U)
        return np.where(idx >= 0, self.d.xs[np.maximum(idx, 0)], 0)

    def conditional(self, k: int, h: HashFunction, y: BitString) -> FiniteDistribution:
        post = preimage_posterior(self, k, h, y)
        return post if post else FiniteDistribution.point_mass(BitString.zeros(self.n))

    def conditional_rows(self, T: np.ndarray, p: np.ndarray, y) -> np.ndarray:
        M = np.where(T == _col(y), p[None, :], 0.0)
        W = M.sum(axis=1, keepdims=True)
        Q = np.divide(M, W, out=np.zeros_like(M), where=W > 0)
        Q[W[:, 0] == 0, 0] = 1.0
        return Q


class ConstantInverter:
    """Always answers the same key."""

    def __init__(self, n: int, key: "BitString | str | None" = None):
        self.n = n
        self.key = BitString.zeros(n) if key is None else as_bitstring(key)
        self.mixture = (Fraction(1), FiniteDistribution.point_mass(self.key))

    def invert(self, k, h, y, rng) -> BitString:
        return self.key

    def invert_batch(self, kw, A, B, C, Y, rng) -> np.ndarray:
        return np.full(len(A), self.key.value, dtype=np.int64)

    def conditional(self, k, h, y) -> FiniteDistribution:
        return FiniteDistribution.point_mass(self.key)

    def conditional_rows(self, T, p, y) -> np.ndarray:
        Q = np.zeros(T.shape, dtype=np.float64)
        Q[:, self.key.value] = 1.0
        return Q


class NoisyInverter:
    """Answers via ``inner`` with probability ``1 - gamma``, else draws from ``decoy``.

    The default decoy is uniform over all ``n``-bit strings.
    """

    def __init__(self, inner: ExactInverter, gamma, decoy: FiniteDistribution | None = None):
        gamma = Fraction(gamma) if isinstance(gamma, (int, str, Fraction)) else float(gamma)
        if not 0 <= gamma <= 1:
            raise ValueError(f"gamma={gamma} outside [0, 1]")
        self.inner = inner
        self.n = inner.n
        self.gamma = gamma
        self.decoy = decoy if decoy is not None else FiniteDistribution.uniform(self.n)
        if self.decoy.n != self.n:
            raise ValueError("decoy length does not match the inner inverter")
        self.mixture = (gamma, self.decoy)

    def __repr__(self):
        return f"NoisyInverter(gamma={self.gamma}, decoy={self.decoy!r})"

    def invert(self, k, h, y, rng: SeededRng) -> BitString:
        yv = unpad(h, k, as_bitstring(y))
        out = self.invert_batch(h.k, [h.a], [h.b], [h.c], [yv], rng)
        return BitString(self.n, int(out[0]))

    def invert_batch(self, kw, A, B, C, Y, rng: SeededRng) -> np.ndarray:
        honest = self.inner.invert_batch(kw, A, B, C, Y, rng)
        flip = rng.random(len(A)) < float(self.gamma)
        noise = self.decoy.xs[self.decoy.sample_indices(rng, len(A))]
        return np.where(flip, noise, honest)

    def conditional(self, k, h, y) -> FiniteDistribution:
        inner = self.inner.conditional(k, h, y)
        g = self.gamma
        keys = set(inner.support) | set(self.decoy.support)
        return FiniteDistribution(self.n, {z: (1 - g) * inner.prob(z) + g * self.decoy.prob(z)
                                           for z in keys})

    def conditional_rows(self, T, p, y) -> np.ndarray:
        q = np.zeros(T.shape[1], dtype=np.float64)
        q[self.decoy.xs] = self.decoy.weights
        g = float(self.gamma)
        return (1 - g) * self.inner.conditional_rows(T, p, y) + g * q[None, :]
