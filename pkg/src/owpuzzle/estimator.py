"""Probability estimation from a distributional inverter.

For every ``k`` in ``1..2n`` the estimator hashes ``x`` with ``t`` fresh
functions, asks the inverter for a preimage and counts how often it gets
``x`` back. The first ``k`` whose count reaches ``3t/8`` fixes the output
``2^-(k*-1)``.

Hit probabilities of the conditioned distribution ``P_{k,x}`` are exposed in
three forms:

``hit_probability_closed_form``
    ``p / (rho (1 - p) + p)`` with ``rho = 2^-min(k, n)``.
``hit_probability_joint``
    exhaustive over the family, conditioning ``(h, x')`` jointly on
    ``h(x') = h(x)``; equals the closed form exactly.
``hit_probability_two_step``
    exhaustive over the family, drawing ``h`` first and then ``x' | h``;
    this is the procedure the estimator actually runs and it is never
    smaller than the closed form.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from fractions import Fraction

import numpy as np

from . import _kernels
from .dist import BitString, FiniteDistribution, SeededRng, as_bitstring
from .hashing import HashFamily, sample_coefficients
from .puzzle import effective_width

DEFAULT_T = 1024
THRESHOLD = Fraction(3, 8)
EXHAUSTIVE_MAX_N = 5

VARIANTS = {
    # multiplicative guarantee as a function of (n, c)
    "final": lambda n, c: 4 * n ** (2 * c),
    "pairwise": lambda n, c: 8,
}


@dataclass
class EstimationRun:
    n: int
    t: int
    x: str
    c_counts: list[int]
    k_star: int
    estimate: float
    p_x_truth: float | None = None

    def within(self, factor: float) -> bool | None:
        if self.p_x_truth is None:
            return None
        p = self.p_x_truth
        return p <= self.estimate <= factor * p

    def to_json(self, include_truth: bool = True) -> dict:
        out = asdict(self)
        if not include_truth:
            out.pop("p_x_truth")
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def choose_k_star(counts, t: int) -> int:
    """Smallest ``k`` (1-based) with ``count >= 3t/8``, else ``len(counts)``."""
    for k, ck in enumerate(counts, start=1):
        if ck * THRESHOLD.denominator >= THRESHOLD.numerator * t:
            return k
    return len(counts)


def estimate_probability(d: FiniteDistribution, inverter, x, t: int = DEFAULT_T,
                         rng: SeededRng | None = None, truth: bool = True) -> EstimationRun:
    """Run the estimator on ``x`` against ``inverter`` (an oracle with ``invert_batch``).

    ``d`` is only used for its bit length, and for the ground truth when
    ``truth`` is set.
    """
    if t < 8:
        raise ValueError("t must be at least 8")
    if rng is None:
        raise ValueError("an rng is required")
    x = as_bitstring(x)
    n = d.n
    if x.n != n:
        raise ValueError(f"x has length {x.n}, distribution is over {n} bits")
    counts = []
    for k in range(1, 2 * n + 1):
        kw = effective_width(n, k)
        r = rng.spawn(k)
        A, B, C = sample_coefficients(n, t, r)
        X = np.full(t, x.value, dtype=np.int64)
        Y = _kernels.hash_each(X, A, B, C, n, kw)
        try:
            ans = inverter.invert_batch(kw, A, B, C, Y, r)
        except Exception as e:  # pragma: no cover - diagnostic path
            raise RuntimeError(f"inverter failed at k={k}: {e}") from e
        counts.append(int(np.count_nonzero(np.asarray(ans) == x.value)))
    k_star = choose_k_star(counts, t)
    p = float(d.prob(x)) if truth else None
    return EstimationRun(n, t, str(x), counts, k_star, 2.0 ** -(k_star - 1), p)


def _estimate_job(args):
    d, inverter, x, t, seed, stream = args
    return estimate_probability(d, inverter, x, t, SeededRng(seed, stream))


def estimate_many(d: FiniteDistribution, inverter, xs, t: int, rng: SeededRng,
                  workers: int = 1) -> list[EstimationRun]:
    """Estimate every ``xs[i]`` on stream ``rng.spawn(i)``; results are worker-count independent."""
    jobs = [(d, inverter, as_bitstring(x), t, rng.seed, tuple(rng.spawn(i).stream))
            for i, x in enumerate(xs)]
    if workers <= 1 or len(jobs) <= 1:
        return [_estimate_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_estimate_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


@dataclass
class GuaranteeSummary:
    n: int
    c: float
    variant: str
    factor: float
    samples: int
    within: int
    target: float
    runs: list = field(default_factory=list, repr=False)

    @property
    def fraction(self) -> float:
        return self.within / self.samples

    @property
    def passed(self) -> bool:
        return self.fraction >= self.target


def check_guarantee(d: FiniteDistribution, inverter, c: float, t: int, samples: int,
                    rng: SeededRng, variant: str = "final", workers: int = 1) -> GuaranteeSummary:
    """Sample ``x ~ d`` and count runs with ``p_x <= A(x) <= factor * p_x``.

    The target success fraction is ``1 - n^(1 - c/2)``.
    """
    factor = VARIANTS[variant](d.n, c)
    xs = d.sample_many(rng.spawn(0), samples)
    runs = estimate_many(d, inverter, xs, t, rng.spawn(1), workers)
    within = sum(bool(r.within(factor)) for r in runs)
    target = max(0.0, 1 - d.n ** (1 - c / 2))
    return GuaranteeSummary(d.n, c, variant, factor, samples, within, target, runs)


# -- hit probabilities of P_{k,x} -------------------------------------------

def collision_rate(n: int, k: int) -> Fraction:
    return Fraction(1, 2 ** effective_width(n, k))


def hit_probability_closed_form(p_x, k: int, n: int):
    """``p / (rho (1 - p) + p)``; exact when ``p_x`` is a Fraction."""
    rho = collision_rate(n, k)
    if not isinstance(p_x, Fraction):
        rho = float(rho)
    return p_x / (rho * (1 - p_x) + p_x)


def p_kx_hit_probability(d: FiniteDistribution, k: int, x):
    return hit_probability_closed_form(d.prob(x), k, d.n)


def _integer_weights(d: FiniteDistribution):
    pd = math.lcm(*(p.denominator for _, p in d.items()))
    return np.array([int(p * pd) for _, p in d.items()], dtype=np.int64), pd


@lru_cache(maxsize=16)
def _family_table(d: FiniteDistribution, kw: int) -> np.ndarray:
    A, B, C = HashFamily(d.n, kw).coefficient_arrays()
    return _kernels.hash_table(d.xs, A, B, C, d.n, kw)


def _collision_masses(d: FiniteDistribution, k: int, x: BitString):
    """Per family member: integer preimage mass of ``h(x)`` (scaled by ``pd``); ``x`` in the support."""
    n = d.n
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive family evaluation needs n <= {EXHAUSTIVE_MAX_N}")
    if not d.exact:
        raise ValueError("exhaustive evaluation needs an exact distribution")
    T = _family_table(d, effective_width(n, k))
    i = d.index_of(x)
    pint, pd = _integer_weights(d)
    W = (T == T[:, i:i + 1]) @ pint
    return W, pint[i], pd


def hit_probability_joint(d: FiniteDistribution, k: int, x) -> Fraction:
    """``Pr[x' = x | h(x') = h(x)]`` with ``(h, x')`` uniform x ``d``, by enumeration."""
    x = as_bitstring(x)
    if x not in d:
        return Fraction(0)
    W, px, _ = _collision_masses(d, k, x)
    return Fraction(int(px) * len(W), int(W.sum()))


def hit_probability_two_step(d: FiniteDistribution, k: int, x) -> Fraction:
    """``E_h[p_x / W_h]``: draw ``h``, then ``x' ~ d | h(x') = h(x)``; by enumeration."""
    x = as_bitstring(x)
    if x not in d:
        return Fraction(0)
    W, px, _ = _collision_masses(d, k, x)
    vals, counts = np.unique(W, return_counts=True)
    total = sum((Fraction(int(c) * int(px), int(v)) for v, c in zip(vals, counts)), Fraction(0))
    return total / len(W)


def hit_rate_two_step_mc(d: FiniteDistribution, k: int, x, trials: int, rng: SeededRng) -> float:
    """Monte Carlo rate of ``P_{k,x} -> x`` through the exact posterior sampler."""
    x = as_bitstring(x)
    n = d.n
    kw = effective_width(n, k)
    A, B, C = sample_coefficients(n, trials, rng)
    Y = _kernels.hash_each(np.full(trials, x.value, dtype=np.int64), A, B, C, n, kw)
    idx = _kernels.posterior_sample(d.xs, d.weights, n, kw, A, B, C, Y, rng.random(trials))
    return float(np.count_nonzero(idx == d.index_of(x))) / trials


def hit_rate_joint_mc(d: FiniteDistribution, k: int, x, trials: int, rng: SeededRng,
                      batch: int = 1 << 16) -> float:
    """Rejection sampler for ``(h, x')`` conditioned on ``h(x') = h(x)``.

    Proposals are independent ``h`` and ``x' ~ d``; the first ``trials``
    accepted pairs are kept.
    """
    x = as_bitstring(x)
    n = d.n
    kw = effective_width(n, k)
    hits = accepted = 0
    i = 0
    while accepted < trials:
        r = rng.spawn(i)
        i += 1
        A, B, C = sample_coefficients(n, batch, r)
        X2 = d.xs[d.sample_indices(r, batch)]
        same = (_kernels.hash_each(X2, A, B, C, n, kw)
                == _kernels.hash_each(np.full(batch, x.value, dtype=np.int64), A, B, C, n, kw))
        keep = X2[same][: trials - accepted]
        accepted += len(keep)
        hits += int(np.count_nonzero(keep == x.value))
    return hits / trials


def collision_mass_samples(d: FiniteDistribution, k: int, x, trials: int, rng: SeededRng,
                           exclude_self: bool = True) -> np.ndarray:
    """Samples of ``Pr_{x'~d}[h(x') = h(x) (and x' != x)]`` over random ``h``."""
    x = as_bitstring(x)
    n = d.n
    kw = effective_width(n, k)
    A, B, C = sample_coefficients(n, trials, rng)
    Y = _kernels.hash_each(np.full(trials, x.value, dtype=np.int64), A, B, C, n, kw)
    ex = np.full(trials, x.value if exclude_self else -1, dtype=np.int64)
    return _kernels.preimage_mass(d.xs, d.weights, n, kw, A, B, C, Y, ex)
