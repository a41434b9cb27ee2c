from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from owpuzzle.dist import BitString, FiniteDistribution, SeededRng
from owpuzzle.gf import MODULI
from owpuzzle.hashing import HashFamily, HashFunction, padded_eval
from owpuzzle.inverter import (ConstantInverter, EmptyPosterior, ExactInverter, NoisyInverter,
                               preimage_posterior)
from owpuzzle.puzzle import (PuzzleInstance, distributional_security, effective_width,
                             exact_security, owpuzz_security_game, samp_batch, samp_candidate,
                             sampled_security, ver_equals_key, ver_hash_consistent)
from oracles import hash_value


def _find_hash(n, k, preimage):
    for h in HashFamily(n, k):
        ys = {h.eval_int(x) for x in preimage}
        if len(ys) == 1:
            y = ys.pop()
            if {x for x in range(1 << n) if h.eval_int(x) == y} == set(preimage):
                return h, BitString(k, y)
    raise AssertionError("no family member with that preimage")


def test_posterior_uniform_pair():
    d = FiniteDistribution.uniform(3)
    h, y = _find_hash(3, 2, {0b001, 0b110})
    inv = ExactInverter(d)
    rng = SeededRng(4)
    outs = inv.invert_batch(2, [h.a] * 10_000, [h.b] * 10_000, [h.c] * 10_000,
                            [y.value] * 10_000, rng)
    assert set(np.unique(outs).tolist()) == {1, 6}
    assert abs(np.mean(outs == 1) - 0.5) <= 0.02


def test_posterior_weighted():
    d = FiniteDistribution(2, {"00": "1/2", "01": "1/4", "10": "1/8", "11": "1/8"})
    h, y = _find_hash(2, 1, {0b00, 0b11})
    post = preimage_posterior(ExactInverter(d), 1, h, y)
    assert post.prob("00") == Fraction(4, 5) and post.prob("11") == Fraction(1, 5)


def test_empty_posterior_defaults_to_zero():
    d = FiniteDistribution.point_mass("101")
    h = HashFunction(3, 3, 0, 1, 0)  # identity
    inv = ExactInverter(d)
    assert isinstance(preimage_posterior(inv, 3, h, BitString(3, 2)), EmptyPosterior)
    assert inv.invert(3, h, BitString(3, 2), SeededRng(0)) == BitString(3, 0)


def test_puzzle_invariants_and_json():
    d = FiniteDistribution.uniform(4)
    rng = SeededRng(9)
    for i in range(50):
        p = samp_candidate(d, rng.spawn(i))
        assert 1 <= p.k <= 8 and p.y.n == p.k
        assert padded_eval(p.h, p.x, p.k) == p.y
        assert ver_hash_consistent(p.x, p) and ver_equals_key(p.x, p)
        q = PuzzleInstance.from_json(p.to_json())
        assert q == p.public()
    h = HashFunction(4, 2, 1, 1, 1)
    with pytest.raises(ValueError):
        PuzzleInstance(2, h, BitString(2, h.eval_int(0) ^ 1), BitString(4, 0))
    with pytest.raises(ValueError):
        effective_width(3, 7)


def test_k_marginal_uniform():
    b = samp_batch(FiniteDistribution.uniform(5), SeededRng(2), 10_000)
    freq = np.bincount(b.K, minlength=11)[1:] / 10_000
    assert np.all(np.abs(freq - 0.1) <= 0.05 * 0.1 * 3 + 0.01)


def _constant_sd_oracle(n, key):
    """Enumerate (k, h, x) directly with the reference hash."""
    m = MODULI[n]
    q = 1 << n
    total = Fraction(0)
    for k in range(1, 2 * n + 1):
        kw = min(k, n)
        for a, b, c in product(range(q), repeat=3):
            hv = [hash_value(n, kw, a, b, c, x, m) for x in range(q)]
            for y in set(hv):
                pre = [x for x in range(q) if hv[x] == y]
                w = Fraction(len(pre), q)
                post_key = Fraction(1, len(pre)) if key in pre else Fraction(0)
                total += w * (1 - post_key)
    return total / (2 * n * q ** 3)


def test_constant_inverter_exact():
    d = FiniteDistribution.uniform(3)
    want = _constant_sd_oracle(3, 0)
    assert want == Fraction(7, 8)
    for method in ("fraction", "integer", "float"):
        assert exact_security(d, ConstantInverter(3), method) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_exact_inverter_zero(n):
    d = FiniteDistribution(n, {BitString(n, v): Fraction(v + 1, (1 << n) * ((1 << n) + 1) // 2)
                               for v in range(1 << n)})
    for method in ("fraction", "integer"):
        assert exact_security(d, ExactInverter(d), method) == 0
    assert exact_security(d, ExactInverter(d), "float") == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("gamma", ["1/20", "1/10", "3/10"])
def test_noisy_disjoint_decoy(gamma):
    d = FiniteDistribution(3, {"000": "1/2", "011": "1/4", "101": "1/4"})
    decoy = FiniteDistribution.point_mass("111")
    inv = NoisyInverter(ExactInverter(d), gamma, decoy)
    assert exact_security(d, inv, "integer") == Fraction(gamma)
    r = sampled_security(d, inv, 4000, SeededRng(1))
    assert abs(r.distance - float(Fraction(gamma))) <= 0.02


def test_noisy_uniform_decoy_below_gamma():
    d = FiniteDistribution.uniform(3)
    sd = exact_security(d, NoisyInverter(ExactInverter(d), "1/10"), "integer")
    assert 0 < sd < Fraction(1, 10)


def test_sampled_mode_report():
    d = FiniteDistribution.uniform(4)
    r = distributional_security(d, ExactInverter(d), 2000, SeededRng(3))
    assert r.distance == 0 and r.mode == "sampled" and r.radius > 0
    with pytest.raises(ValueError):
        distributional_security(d, ExactInverter(d))


def test_security_game_random_guess():
    d = FiniteDistribution.uniform(8)
    guess = lambda puz, rng: BitString(8, int(rng.integers(0, 256)))
    rate = owpuzz_security_game(lambda r: samp_candidate(d, r), ver_equals_key, guess,
                                20_000, SeededRng(5))
    assert abs(rate - 2 ** -8) <= 3 * (2 ** -8 / 20_000) ** 0.5 + 1e-9
