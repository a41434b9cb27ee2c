# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hashing/inversion kernels.

Same API and summation order as ``_pykernels``; see that module for the
reference semantics.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

from .gf import MODULI

cnp.import_array()


cdef inline uint64_t _mul(uint64_t a, uint64_t b, int n, uint64_t mod) noexcept nogil:
    cdef uint64_t r = 0
    cdef uint64_t top = (<uint64_t>1) << n
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= mod
    return r


cdef inline int64_t _h(uint64_t x, uint64_t sq, uint64_t a, uint64_t b, uint64_t c,
                       int n, int shift, uint64_t mod) noexcept nogil:
    return <int64_t>((_mul(a, sq, n, mod) ^ _mul(b, x, n, mod) ^ c) >> shift)


TABLE_MAX_N = 16
_tables = {}


def _log_tables(int n):
    """exp/log tables w.r.t. a primitive element; exp is doubled to skip a modulo."""
    if n in _tables:
        return _tables[n]
    cdef uint64_t mod = MODULI[n]
    cdef Py_ssize_t order = (1 << n) - 1
    cdef Py_ssize_t i
    cdef uint64_t g, v
    exp = np.empty(2 * order + 2, dtype=np.int64)
    log = np.zeros(1 << n, dtype=np.int64)
    cdef int64_t[::1] e = exp
    cdef int64_t[::1] lg = log
    if n == 1:
        exp[:] = 1
        _tables[n] = (exp, log)
        return exp, log
    g = 2
    while True:
        v = 1
        for i in range(order):
            e[i] = <int64_t>v
            v = _mul(v, g, n, mod)
            if v == 1 and i < order - 1:
                break
        else:
            break
        g += 1
    for i in range(order):
        lg[e[i]] = i
        e[i + order] = e[i]
    e[2 * order] = e[0]
    e[2 * order + 1] = e[1]
    _tables[n] = (exp, log)
    return exp, log


cdef inline int64_t _h_tab(int64_t x, int64_t lx, int64_t lsq, int64_t a, int64_t la,
                           int64_t b, int64_t lb, int64_t c, int shift,
                           const int64_t[::1] e) noexcept nogil:
    cdef int64_t v = c
    if x != 0:
        if a != 0:
            v ^= e[la + lsq]
        if b != 0:
            v ^= e[lb + lx]
    return v >> shift


def gf_mul(a, b, int n):
    return int(_mul(<uint64_t>a, <uint64_t>b, n, <uint64_t>MODULI[n]))


def _squares(const int64_t[::1] xs, int n, uint64_t mod):
    cdef Py_ssize_t i, S = xs.shape[0]
    out = np.empty(S, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for i in range(S):
            o[i] = <int64_t>_mul(<uint64_t>xs[i], <uint64_t>xs[i], n, mod)
    return out


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def hash_each(X, A, B, C, int n, int kw):
    cdef const int64_t[::1] x = _i64(X)
    cdef const int64_t[::1] a = _i64(A)
    cdef const int64_t[::1] b = _i64(B)
    cdef const int64_t[::1] c = _i64(C)
    cdef uint64_t mod = MODULI[n]
    cdef int shift = n - kw
    cdef Py_ssize_t j, T = x.shape[0]
    out = np.empty(T, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t xv
    with nogil:
        for j in range(T):
            xv = <uint64_t>x[j]
            o[j] = _h(xv, _mul(xv, xv, n, mod), a[j], b[j], c[j], n, shift, mod)
    return out


def hash_table(xs, A, B, C, int n, int kw):
    cdef const int64_t[::1] x = _i64(xs)
    cdef const int64_t[::1] a = _i64(A)
    cdef const int64_t[::1] b = _i64(B)
    cdef const int64_t[::1] c = _i64(C)
    cdef uint64_t mod = MODULI[n]
    cdef const int64_t[::1] sq = _squares(x, n, mod)
    cdef int shift = n - kw
    cdef Py_ssize_t i, j, S = x.shape[0], T = a.shape[0]
    out = np.empty((T, S), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    with nogil:
        for j in range(T):
            for i in range(S):
                o[j, i] = _h(x[i], sq[i], a[j], b[j], c[j], n, shift, mod)
    return out


def _prep(xs, A, B, int n):
    """Log-domain views of support and coefficients, or None above the table cap."""
    if n > TABLE_MAX_N:
        return None
    exp, log = _log_tables(n)
    x = _i64(xs)
    sq = _squares(x, n, MODULI[n])
    return exp, log[x], log[sq], log[_i64(A)], log[_i64(B)]


def preimage_mass(xs, probs, int n, int kw, A, B, C, Y, exclude):
    cdef const int64_t[::1] x = _i64(xs)
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const int64_t[::1] a = _i64(A)
    cdef const int64_t[::1] b = _i64(B)
    cdef const int64_t[::1] c = _i64(C)
    cdef const int64_t[::1] y = _i64(Y)
    cdef const int64_t[::1] ex = _i64(exclude)
    cdef uint64_t mod = MODULI[n]
    cdef const int64_t[::1] sq = _squares(x, n, mod)
    cdef int shift = n - kw
    cdef Py_ssize_t i, j, S = x.shape[0], T = a.shape[0]
    cdef double acc
    cdef int64_t hv
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] o = out
    prep = _prep(x, a, b, n)
    cdef bint tab = prep is not None
    cdef const int64_t[::1] e, lx, lsq, la, lb
    if tab:
        e, lx, lsq, la, lb = prep
    with nogil:
        for j in range(T):
            acc = 0.0
            for i in range(S):
                if tab:
                    hv = _h_tab(x[i], lx[i], lsq[i], a[j], la[j], b[j], lb[j], c[j], shift, e)
                else:
                    hv = _h(x[i], sq[i], a[j], b[j], c[j], n, shift, mod)
                if hv == y[j] and x[i] != ex[j]:
                    acc = acc + p[i]
            o[j] = acc
    return out


def posterior_sample(xs, probs, int n, int kw, A, B, C, Y, U):
    cdef const int64_t[::1] x = _i64(xs)
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const int64_t[::1] a = _i64(A)
    cdef const int64_t[::1] b = _i64(B)
    cdef const int64_t[::1] c = _i64(C)
    cdef const int64_t[::1] y = _i64(Y)
    cdef const double[::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef uint64_t mod = MODULI[n]
    cdef const int64_t[::1] sq = _squares(x, n, mod)
    cdef int shift = n - kw
    cdef Py_ssize_t i, j, S = x.shape[0], T = a.shape[0]
    cdef double total, target, acc
    cdef Py_ssize_t last, pick
    cdef int64_t hv
    # match flags from the first pass so the second pass avoids rehashing
    match_arr = np.empty(S, dtype=np.uint8)
    cdef unsigned char[::1] m = match_arr
    out = np.empty(T, dtype=np.int64)
    cdef int64_t[::1] o = out
    prep = _prep(x, a, b, n)
    cdef bint tab = prep is not None
    cdef const int64_t[::1] e, lx, lsq, la, lb
    if tab:
        e, lx, lsq, la, lb = prep
    with nogil:
        for j in range(T):
            total = 0.0
            last = -1
            for i in range(S):
                if tab:
                    hv = _h_tab(x[i], lx[i], lsq[i], a[j], la[j], b[j], lb[j], c[j], shift, e)
                else:
                    hv = _h(x[i], sq[i], a[j], b[j], c[j], n, shift, mod)
                if hv == y[j]:
                    m[i] = 1
                    total = total + p[i]
                    last = i
                else:
                    m[i] = 0
            if not total > 0.0:
                o[j] = -1
                continue
            target = u[j] * total
            acc = 0.0
            pick = -1
            for i in range(S):
                if m[i]:
                    acc = acc + p[i]
                    if acc > target:
                        pick = i
                        break
            o[j] = pick if pick >= 0 else last
    return out
