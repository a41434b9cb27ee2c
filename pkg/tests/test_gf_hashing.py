from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from owpuzzle.dist import BitString, SeededRng
from owpuzzle.gf import MODULI, is_irreducible
from owpuzzle.hashing import (HashFamily, HashFunction, gf2n_mul, padded_eval,
                              pairwise_collision_rate, sample_coefficients, sample_hash,
                              verify_t_wise_independence)
from oracles import field_mul, hash_value, rabin_irreducible


@pytest.mark.parametrize("n", sorted(MODULI))
def test_moduli_irreducible(n):
    m = MODULI[n]
    assert m.bit_length() == n + 1
    assert rabin_irreducible(m)
    assert is_irreducible(m)


def test_reducible_rejected():
    assert not is_irreducible(0b101)      # (x+1)^2
    assert not rabin_irreducible(0b10001)  # x^4+1 = (x+1)^4


def test_hand_reduction():
    # x * x^2 = x^3 = x + 1 under x^3 + x + 1
    assert MODULI[3] == 0b1011
    assert gf2n_mul(0b010, 0b100, 3) == 0b011


def test_commutative_exhaustive_n4():
    for a in range(16):
        for b in range(16):
            assert gf2n_mul(a, b, 4) == gf2n_mul(b, a, 4)


@st.composite
def field_elems(draw, count=3):
    n = draw(st.integers(1, 24))
    return n, [draw(st.integers(0, (1 << n) - 1)) for _ in range(count)]


@given(field_elems())
def test_field_axioms(arg):
    n, (a, b, c) = arg
    mul = lambda u, v: gf2n_mul(u, v, n)
    assert mul(a, b) == field_mul(a, b, MODULI[n])
    assert mul(a, mul(b, c)) == mul(mul(a, b), c)
    assert mul(a, b ^ c) == mul(a, b) ^ mul(a, c)
    assert mul(a, 1) == a


@pytest.mark.parametrize("bad", [(16, 1, 4), (1, 1, 0), (1, 1, 25)])
def test_mul_rejects(bad):
    with pytest.raises(ValueError):
        gf2n_mul(*bad)


@given(field_elems(4), st.data())
def test_hash_matches_reference(arg, data):
    n, (a, b, c, x) = arg
    k = data.draw(st.integers(1, n))
    h = HashFunction(n, k, a, b, c)
    assert h.eval_int(x) == hash_value(n, k, a, b, c, x, MODULI[n])
    assert h(BitString(n, x)) == BitString(k, h.eval_int(x))


@given(field_elems(), st.data())
def test_serialization_roundtrip(arg, data):
    n, (a, b, c) = arg
    k = data.draw(st.integers(1, n))
    h = HashFunction(n, k, a, b, c)
    blob = h.serialize()
    assert len(blob) == 2 + -(-3 * n // 8)
    assert HashFunction.deserialize(blob) == h


def test_deserialize_rejects_garbage():
    h = HashFunction(3, 2, 1, 2, 3)
    blob = bytearray(h.serialize())
    blob[-1] |= 0x80  # padding bit beyond 3n = 9 bits
    with pytest.raises(ValueError):
        HashFunction.deserialize(bytes(blob))
    with pytest.raises(ValueError):
        HashFunction.deserialize(b"\x03")
    with pytest.raises(ValueError):
        HashFunction(3, 4, 0, 0, 0)


def test_padded_eval():
    h = HashFunction(3, 3, 0, 1, 0)
    assert padded_eval(h, BitString(3, 5), 5) == BitString(5, 5 << 2)


def test_family_order_and_size():
    fam = HashFamily(2, 1)
    A, B, C = fam.coefficient_arrays()
    assert len(fam) == 64 == len(A)
    assert [(h.a, h.b, h.c) for h in fam] == list(zip(A.tolist(), B.tolist(), C.tolist()))


def test_coefficients_uniform():
    A, B, C = sample_coefficients(4, 10_000, SeededRng(11))
    freq = np.bincount(A, minlength=16) / 10_000
    assert np.all(np.abs(freq - 1 / 16) <= 0.05)
    chi2 = ((np.bincount(A, minlength=16) - 625) ** 2 / 625).sum()
    assert chi2 < 37.7  # 99.9th percentile of chi-square with 15 dof


def test_sample_hash_deterministic():
    assert sample_hash(8, 3, SeededRng(5)) == sample_hash(8, 3, SeededRng(5))


@pytest.mark.parametrize("n,k,t", [(3, 1, 2), (3, 2, 3), (4, 4, 3), (2, 2, 3)])
def test_t_wise_independence(n, k, t):
    rep = verify_t_wise_independence(n, k, t)
    assert rep.ok and rep.tuples_checked > 0


def test_collision_rate_exact():
    for x, x2 in [(0, 1), (3, 12), (7, 8)]:
        assert pairwise_collision_rate(4, 2, x, x2) == Fraction(1, 4)


def test_independence_rejects_large_n():
    with pytest.raises(ValueError):
        verify_t_wise_independence(6, 1, 2)
