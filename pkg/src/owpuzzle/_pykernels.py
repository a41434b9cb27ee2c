"""Pure numpy implementations of the hashing/inversion kernels.

Mirrors ``_ckernels.pyx`` exactly, including floating point summation
order (sequential over the canonical support order), so that both backends
return identical results for identical inputs.
"""
from __future__ import annotations

import numpy as np

from .gf import MODULI

_CHUNK_CELLS = 1 << 21


def gf_mul(a: int, b: int, n: int) -> int:
    mod = MODULI[n]
    top = 1 << n
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= mod
    return r


def _gf_mul_vec(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    mod = np.int64(MODULI[n])
    a = np.array(a, dtype=np.int64, copy=True)
    b = np.asarray(b, dtype=np.int64)
    a, b = np.broadcast_arrays(a, b)
    a = a.copy()
    r = np.zeros(a.shape, dtype=np.int64)
    for i in range(n):
        r ^= np.where((b >> i) & 1, a, 0)
        a <<= 1
        a ^= np.where((a >> n) & 1, mod, 0)
    return r


def _hash_grid(xs, A, B, C, n, kw):
    xs = np.asarray(xs, dtype=np.int64)
    sq = _gf_mul_vec(xs, xs, n)
    A = np.asarray(A, dtype=np.int64)[:, None]
    B = np.asarray(B, dtype=np.int64)[:, None]
    C = np.asarray(C, dtype=np.int64)[:, None]
    v = _gf_mul_vec(A, sq[None, :], n) ^ _gf_mul_vec(B, xs[None, :], n) ^ C
    return v >> (n - kw)


def hash_each(X, A, B, C, n: int, kw: int) -> np.ndarray:
    """Elementwise ``h_j(X[j])`` truncated to the top ``kw`` bits."""
    X = np.asarray(X, dtype=np.int64)
    sq = _gf_mul_vec(X, X, n)
    v = (_gf_mul_vec(np.asarray(A, dtype=np.int64), sq, n)
         ^ _gf_mul_vec(np.asarray(B, dtype=np.int64), X, n)
         ^ np.asarray(C, dtype=np.int64))
    return v >> (n - kw)


def hash_table(xs, A, B, C, n: int, kw: int) -> np.ndarray:
    """``out[j, i] = h_j(xs[i])`` for every coefficient triple ``j``."""
    xs = np.asarray(xs, dtype=np.int64)
    T = len(A)
    out = np.empty((T, len(xs)), dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(1, len(xs)))
    for s in range(0, T, step):
        out[s:s + step] = _hash_grid(xs, A[s:s + step], B[s:s + step], C[s:s + step], n, kw)
    return out


def preimage_mass(xs, probs, n, kw, A, B, C, Y, exclude) -> np.ndarray:
    """Mass of ``{x' in support : h_j(x') = Y[j], x' != exclude[j]}`` per trial."""
    xs = np.asarray(xs, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    T = len(A)
    out = np.empty(T, dtype=np.float64)
    step = max(1, _CHUNK_CELLS // max(1, len(xs)))
    Y = np.asarray(Y, dtype=np.int64)
    exclude = np.asarray(exclude, dtype=np.int64)
    for s in range(0, T, step):
        V = _hash_grid(xs, A[s:s + step], B[s:s + step], C[s:s + step], n, kw)
        match = (V == Y[s:s + step, None]) & (xs[None, :] != exclude[s:s + step, None])
        masked = np.where(match, probs[None, :], 0.0)
        out[s:s + step] = np.cumsum(masked, axis=1)[:, -1]
    return out


def posterior_sample(xs, probs, n, kw, A, B, C, Y, U) -> np.ndarray:
    """Inverse-CDF draw from ``d | h_j(x') = Y[j]`` using uniform ``U[j]``.

    Returns support indices, ``-1`` where the preimage has zero mass.
    """
    xs = np.asarray(xs, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    T = len(A)
    S = len(xs)
    out = np.empty(T, dtype=np.int64)
    step = max(1, _CHUNK_CELLS // max(1, S))
    Y = np.asarray(Y, dtype=np.int64)
    U = np.asarray(U, dtype=np.float64)
    cols = np.arange(S)
    for s in range(0, T, step):
        V = _hash_grid(xs, A[s:s + step], B[s:s + step], C[s:s + step], n, kw)
        match = V == Y[s:s + step, None]
        cum = np.cumsum(np.where(match, probs[None, :], 0.0), axis=1)
        total = cum[:, -1]
        target = U[s:s + step] * total
        idx = (cum <= target[:, None]).sum(axis=1)
        last = np.where(match, cols[None, :], -1).max(axis=1)
        idx = np.where(idx >= S, last, idx)
        out[s:s + step] = np.where(total > 0.0, idx, -1)
    return out
