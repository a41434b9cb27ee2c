import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from owpuzzle.dist import FiniteDistribution, SeededRng
from owpuzzle.kolmo.coding import (coding_encoder, complexity_ensemble, description_length,
                                   encoder_overhead_bound, gapk_decide_via_estimation,
                                   run_gapk_experiment, verify_coding_theorem)
from owpuzzle.kolmo.enumerate import shortest_by_brute_force, shortest_by_search, shortest_program
from owpuzzle.kolmo.machine import (HALT, Crash, Program, calibration, gamma, literal_cost,
                                    literal_program, rank_code, run_program)
from owpuzzle.kolmo.oracle import GapKInstance, KolmogorovOracle, verify_counting
from owpuzzle.qsim import bell, ghz, hadamard_layer


def test_gamma_code():
    assert [gamma(v) for v in (1, 2, 3, 4)] == ["1", "010", "011", "00100"]
    with pytest.raises(ValueError):
        gamma(0)


def test_literal_costs():
    assert literal_cost(8) == 20 and literal_cost(10) == 22
    assert calibration(8) == 12
    assert run_program(literal_program("1011")) == "1011"


def test_instruction_semantics():
    assert run_program("00") == ""
    assert run_program("011" + "010" + "00") == "10"
    # PUSH 1, PUSH 0, REPEAT b=2 r=3
    assert run_program("011" + "010" + "10" + gamma(2) + gamma(3) + "00") == "10101010"
    # PUSH 1, PUSH 0, DUP j=1
    assert run_program("011" + "010" + "1110" + gamma(1) + "00") == "101"
    for bad in ("", "0", "000", "10" + gamma(1) + gamma(1) + "00", "1110" + gamma(1) + "00"):
        with pytest.raises(Crash):
            run_program(bad)


@given(st.text(alphabet="01", max_size=22))
def test_prefix_free(bits):
    """No valid program is a proper prefix of another valid program."""
    try:
        run_program(bits, max_out=64)
    except Crash:
        return
    for cut in range(len(bits)):
        with pytest.raises(Crash):
            run_program(bits[:cut], max_out=64)


def test_enumerators_agree():
    assert shortest_by_search(14, 12) == shortest_by_brute_force(14, 12)


def test_empty_output_and_repeats():
    table = shortest_by_search(18, 16)
    assert table[""] == len(HALT)
    assert table["0" * 16] < literal_cost(16)
    assert shortest_program("0000", 14) is not None


def test_oracle_queries(tmp_path, monkeypatch):
    monkeypatch.setenv("OWPUZZLE_CACHE", str(tmp_path))
    o = KolmogorovOracle(19, 8)
    assert o.k_complexity("00000000") == 13
    assert o.k_cal("00000000") == 1
    assert o.k_exact("01101001") in (19, 20)
    assert list(tmp_path.iterdir())  # cached on disk
    again = KolmogorovOracle(19, 8)
    assert again.table == o.table
    with pytest.raises(ValueError):
        o.count_low_k(8, 20)
    with pytest.raises(ValueError):
        o.k_complexity("0" * 9)


def test_literal_bound_everywhere():
    o = KolmogorovOracle(22, 12)
    for n in range(1, 9):
        for v in range(1 << n):
            k = o.k_exact(format(v, f"0{n}b"))
            assert k is None or k <= literal_cost(n)


def test_counting_bound():
    o = KolmogorovOracle(14, 12)
    assert o.count_low_k(8, 6) <= 2 ** 7 - 1
    rep = verify_counting(o, 12, 14, cross_L=12)
    assert rep.passed and rep.stats["cross_check_disagreements"] == 0


def test_gapk_instance():
    g = GapKInstance("00000000", 2, 6)
    assert [g.classify(k) for k in (1, 2, 4, 6, 7)] == ["YES", "YES", "PROMISE_VIOLATION", "NO", "NO"]
    with pytest.raises(ValueError):
        GapKInstance("0000", 3, 2)


def test_program_hex_roundtrip():
    for bits in ("", "0", "001", "0110100"):
        assert Program.from_hex(Program(bits).hex).bits == bits


def test_rank_code_prefix_free():
    codes = [rank_code(r) for r in range(64)]
    for a, b in itertools.permutations(codes, 2):
        assert not b.startswith(a)


@pytest.mark.parametrize("circ", [bell(), ghz(3), hadamard_layer(3), hadamard_layer(4)],
                         ids=["bell", "ghz3", "uniform3", "uniform4"])
def test_coding_encoder(circ):
    rep = verify_coding_theorem(KolmogorovOracle(22, 12), circ)
    assert rep.passed
    assert rep.measured_overhead <= encoder_overhead_bound(rep.n)
    for row in rep.rows:
        assert run_program(coding_encoder(circ, row["x"])) == row["x"]


def test_coding_uniform4_rank_width():
    c = hadamard_layer(4)
    lens = {len(coding_encoder(c, format(v, "04b"))) - description_length(c) for v in range(16)}
    assert max(lens) <= 4 + 2 * 2 + 1 + 6


def test_gapk_decider():
    o = KolmogorovOracle(19, 8)
    d = complexity_ensemble(o, 8)
    assert math.isclose(float(sum(p for _, p in d.items())), 1.0)
    assert gapk_decide_via_estimation(lambda x: 1.0, "0", 7, 6) == "YES"
    assert gapk_decide_via_estimation(lambda x: 0.0, "0", 7, 6) == "NO"
    for eps in (0.0, 0.05):
        r = run_gapk_experiment(o, 8, 7, 6, eps, 5000, SeededRng(3))
        assert r.passed
        assert r.exact_error_honest == 0
