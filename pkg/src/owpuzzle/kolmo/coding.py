"""Rank encoder for samplable distributions and the GapK decider built on estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..dist import BitString, FiniteDistribution, SeededRng, as_bitstring
from ..qsim import Circuit, output_distribution
from .machine import (HALT, SAMPLE, encode_circuit, ranked_support, run_program,
                      sample_program)
from .oracle import KolmogorovOracle

C_ENC = 12


def description_length(c: Circuit) -> int:
    """``|desc|``: bits of the binary circuit code read by SAMPLE."""
    return len(encode_circuit(c))


def encoder_overhead_bound(n: int) -> int:
    """Analytic bound on ``len(program) - (-log p_x) - |desc|``: ``8 + 2 floor(log2(n+1))``."""
    return len(SAMPLE) + len(HALT) + 2 + 2 * int(math.log2(n + 1))


def slack(n: int, c_enc: float = C_ENC) -> float:
    return c_enc * max(1.0, math.log2(n))


def coding_encoder(c: Circuit, x) -> str:
    """Program ``SAMPLE <circuit> <rank of x> HALT`` that prints ``x``."""
    x = as_bitstring(x)
    support = ranked_support(c)
    try:
        r = support.index(str(x))
    except ValueError:
        raise ValueError(f"{x} has probability 0 under the circuit") from None
    return sample_program(c, r)


@dataclass
class CodingReport:
    n: int
    desc_bits: int
    c_enc: float
    rows: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r["runs_to_x"] and r["within_bound"] and r["k_le_len"] is not False
                   for r in self.rows)

    @property
    def measured_overhead(self) -> float:
        """Largest ``len - (-log p_x) - |desc|`` across the support."""
        return max(r["overhead"] for r in self.rows)


def verify_coding_theorem(oracle: KolmogorovOracle | None, c: Circuit,
                          d: FiniteDistribution | None = None, c_enc: float = C_ENC) -> CodingReport:
    """Check every support string: the program prints it and fits the bound."""
    d = output_distribution(c) if d is None else d
    n = d.n
    rep = CodingReport(n, description_length(c), c_enc)
    for x, p in d.items():
        prog = coding_encoder(c, x)
        out = run_program(prog)
        surprisal = -math.log2(float(p))
        bound = surprisal + rep.desc_bits + slack(n, c_enc)
        k = None
        if oracle is not None and n <= oracle.max_out:
            k = oracle.k_complexity(x)
        rep.rows.append({
            "x": str(x), "p": float(p), "len": len(prog), "bound": bound,
            "overhead": len(prog) - surprisal - rep.desc_bits,
            "runs_to_x": out == str(x), "within_bound": len(prog) <= bound + 1e-9,
            # only comparable when the program is inside the enumeration cap
            "k_le_len": (None if oracle is None or len(prog) > oracle.L
                         else (k is not None and k <= len(prog))),
        })
    return rep


# -- deciding GapK with an estimation oracle -----------------------------------

def gapk_threshold(s: float, delta: float) -> float:
    return 2.0 ** (-s + delta / 2)


def gapk_decide_via_estimation(est_oracle, x, s: float, delta: float) -> str:
    """Accept exactly when the estimate reaches ``2^(-s + delta/2)``."""
    return "YES" if est_oracle(x) >= gapk_threshold(s, delta) else "NO"


class FaultyEstimator:
    """Estimation oracle: honest with probability ``1 - eps``, adversarial otherwise.

    Honest answers are ``p_x / factor`` (``factor = 1`` is exact). An
    adversarial answer flips the decision the caller would make at
    ``threshold``: it is ``0`` for strings the honest answer would accept
    and ``1`` otherwise.
    """

    def __init__(self, d: FiniteDistribution, eps: float, threshold: float,
                 rng: SeededRng, factor: float = 1.0):
        self.d = d
        self.eps = eps
        self.threshold = threshold
        self.rng = rng
        self.factor = factor

    def honest(self, x) -> float:
        return float(self.d.prob(x)) / self.factor

    def __call__(self, x) -> float:
        h = self.honest(x)
        if self.rng.random() < self.eps:
            return 0.0 if h >= self.threshold else 1.0
        return h


def complexity_ensemble(oracle: KolmogorovOracle, m: int) -> FiniteDistribution:
    """``p_x`` proportional to ``2^-K_cal(x)`` over all ``m``-bit strings."""
    weights = {}
    for v in range(1 << m):
        x = BitString(m, v)
        kc = oracle.k_cal(x)
        if kc is None:
            raise ValueError(f"K({x}) is not settled by {oracle!r}")
        weights[x] = 2.0 ** -kc
    return FiniteDistribution.from_weights(m, weights)


@dataclass
class GapKReport:
    m: int
    s: float
    delta: float
    eps: float
    samples: int
    errors: int
    promise_mass: float
    yes_mass: float
    no_mass: float
    exact_error_honest: float
    lemma_mass: float

    @property
    def error_rate(self) -> float:
        return self.errors / self.samples

    @property
    def bound(self) -> float:
        return self.eps + 2.0 ** (-self.delta / 3)

    @property
    def radius(self) -> float:
        b = min(self.bound, 1.0)
        return 3 * math.sqrt(b * (1 - b) / self.samples)

    @property
    def passed(self) -> bool:
        return self.error_rate <= self.bound + self.radius


def run_gapk_experiment(oracle: KolmogorovOracle, m: int, s: float, delta: float, eps: float,
                        samples: int, rng: SeededRng, n_c: float | None = None,
                        factor: float = 1.0) -> GapKReport:
    """Empirical decider error on the complexity ensemble.

    Complexities are calibrated. An error is a promise instance decided the
    wrong way; instances outside the promise never count. ``lemma_mass`` is
    the mass of ``{K_cal <= s - delta, p_x <= n^c alpha}`` with ``n^c = n_c``
    (default ``m``).
    """
    d = complexity_ensemble(oracle, m)
    alpha = gapk_threshold(s, delta)
    est = FaultyEstimator(d, eps, alpha, rng.spawn(1), factor)
    truth = {}
    for x in d.support:
        kc = oracle.k_cal(x)
        truth[x] = "YES" if kc <= s - delta else "NO" if kc >= s else None
    yes = sum(float(p) for x, p in d.items() if truth[x] == "YES")
    no = sum(float(p) for x, p in d.items() if truth[x] == "NO")
    honest_err = sum(float(p) for x, p in d.items() if truth[x] is not None
                     and ("YES" if est.honest(x) >= alpha else "NO") != truth[x])
    nc = float(m) if n_c is None else n_c
    lemma = sum(float(p) for x, p in d.items() if truth[x] == "YES" and float(p) <= nc * alpha)
    errors = 0
    for x in d.sample_many(rng.spawn(0), samples):
        if truth[x] is not None and gapk_decide_via_estimation(est, x, s, delta) != truth[x]:
            errors += 1
    return GapKReport(m, s, delta, eps, samples, errors, yes + no, yes, no, honest_err, lemma)


def coding_bound_report(circuits: dict, oracle: KolmogorovOracle | None = None,
                        c_enc: float = C_ENC):
    """One check per circuit: fraction of support strings whose program runs and fits the bound."""
    from ..lemmas import BoundCheckReport, Check

    rep = BoundCheckReport("coding", stats={"c_enc": c_enc})
    for name in sorted(circuits):
        r = verify_coding_theorem(oracle, circuits[name], c_enc=c_enc)
        ok = sum(1 for row in r.rows if row["runs_to_x"] and row["within_bound"]
                 and row["k_le_len"] is not False)
        rep.checks.append(Check(name, ok / len(r.rows), 1.0, 0, direction=">=",
                                params={"support": len(r.rows), "desc_bits": r.desc_bits,
                                        "measured_overhead": r.measured_overhead,
                                        "overhead_bound": encoder_overhead_bound(r.n)}))
        rep.stats[f"overhead_{name}"] = r.measured_overhead
    if rep.checks:
        rep.stats["measured_c_enc"] = max(c.params["measured_overhead"] for c in rep.checks)
    return rep
