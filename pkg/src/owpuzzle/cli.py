"""Command-line experiment harness.

Every subcommand reads a JSON config (``--config``), applies environment
overrides (``OWPUZZLE_SEED``, ``OWPUZZLE_OUT``) and then command-line flags,
and writes ``<command>.csv`` plus ``<command>.json`` into the output
directory. Every CSV row carries the hash of the resolved config. Output is
a pure function of the config: worker count and wall-clock never appear.

Exit codes: 0 success (including premise skips), 1 a bound failed, 2 usage
or config error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .breaker import (ExactGapKOracle, RandomGapKOracle, distinguish_with_gapk, feasibility,
                      load_sampler, thresholds, verify_claim_highk, verify_claim_lowk)
from .dist import FiniteDistribution, SeededRng, load_distribution
from .estimator import VARIANTS, check_guarantee
from .hashing import pairwise_collision_rate, verify_t_wise_independence
from .inverter import ExactInverter, NoisyInverter
from .kolmo.coding import C_ENC, coding_bound_report, coding_encoder, run_gapk_experiment
from .kolmo.machine import Program, calibration
from .kolmo.oracle import KolmogorovOracle, verify_counting
from .lemmas import (verify_claim_approx, verify_claim_close, verify_lemma_chebtrick,
                     verify_lemma_firstlem_secondlem)
from .qsim import load_circuit, output_distribution

DATA = Path(__file__).parent / "data"

DEFAULTS = {
    "seed": 0,
    "n": 6,
    "distribution": "uniform",
    "circuit": None,
    "c": 2.0,
    "d_exp": 0.5,
    "t": 1024,
    "samples": 200,
    "trials": 2000,
    "variant": "final",
    "gamma": 0.0,
    "m": 8,
    "s": 7,
    "delta": 6,
    "eps": [0.0, 0.05],
    "L": 19,
    "sampler": str(DATA / "sampler_m10_t2.json"),
    "sampler_n": 5,
    "sampler_c": None,
    "oracle_mode": "exact",
    "circuits": sorted(str(p) for p in DATA.glob("circuit_*.json")),
    "out": "results",
}
# keys that never influence results, so they stay out of the config hash
UNHASHED = {"out", "workers"}
LEMMAS = ("chebtrick", "firstlem", "secondlem", "approx", "close", "highk", "lowk",
          "counting", "coding")
PATH_KEYS = ("distribution", "circuit", "sampler", "circuits")


class ConfigError(Exception):
    pass


def _rel(base: Path, v: str) -> str:
    q = Path(v)
    return str(q if q.is_absolute() else base / q)


# -- configuration -------------------------------------------------------------

def load_config(path: str | None, flags: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            with open(p) as fh:
                user = json.load(fh)
        except ValueError as e:
            raise ConfigError(f"config {p} is not valid JSON: {e}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"config {p} must hold a JSON object")
        unknown = sorted(set(user) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        # relative file references resolve against the config's directory
        for key in PATH_KEYS:
            v = user.get(key)
            if isinstance(v, list):
                user[key] = [_rel(p.parent, x) for x in v]
            elif isinstance(v, str) and v != "uniform":
                user[key] = _rel(p.parent, v)
        cfg.update(user)
    if "OWPUZZLE_SEED" in os.environ:
        cfg["seed"] = os.environ["OWPUZZLE_SEED"]
    if "OWPUZZLE_OUT" in os.environ:
        cfg["out"] = os.environ["OWPUZZLE_OUT"]
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return validate(cfg)


def validate(cfg: dict) -> dict:
    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"seed: not an integer: {cfg['seed']!r}") from None
    if not 0 <= cfg["seed"] < 2 ** 64:
        raise ConfigError("seed: must be a 64-bit unsigned integer")
    for key in ("n", "t", "samples", "trials", "m", "L"):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            raise ConfigError(f"{key}: must be a positive integer, got {cfg[key]!r}")
    if cfg["c"] < 1:
        raise ConfigError(f"c: exponent must be >= 1, got {cfg['c']}")
    if cfg["d_exp"] <= 0:
        raise ConfigError(f"d_exp: must be positive, got {cfg['d_exp']}")
    if not isinstance(cfg["delta"], int) or cfg["delta"] < 2 or cfg["delta"] % 2:
        raise ConfigError(f"delta: must be a positive even integer, got {cfg['delta']!r}")
    if not 0 <= cfg["gamma"] <= 1:
        raise ConfigError(f"gamma: must lie in [0, 1], got {cfg['gamma']}")
    if isinstance(cfg["eps"], (int, float)):
        cfg["eps"] = [cfg["eps"]]
    if any(not 0 <= e <= 1 for e in cfg["eps"]):
        raise ConfigError(f"eps: values must lie in [0, 1], got {cfg['eps']}")
    if cfg["variant"] not in VARIANTS:
        raise ConfigError(f"variant: one of {sorted(VARIANTS)}, got {cfg['variant']!r}")
    if cfg["oracle_mode"] not in ("exact", "random"):
        raise ConfigError(f"oracle_mode: 'exact' or 'random', got {cfg['oracle_mode']!r}")
    paths = [cfg["sampler"], *cfg["circuits"]]
    if cfg["distribution"] != "uniform":
        paths.append(cfg["distribution"])
    if cfg["circuit"] is not None:
        paths.append(cfg["circuit"])
    for p in paths:
        if p is not None and not Path(p).exists():
            raise ConfigError(f"file not found: {p}")
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of the resolved config; file paths are replaced by their contents' hashes."""
    def norm(v):
        if isinstance(v, str) and v.endswith(".json") and Path(v).exists():
            return "sha256:" + hashlib.sha256(Path(v).read_bytes()).hexdigest()
        if isinstance(v, list):
            return [norm(x) for x in v]
        return v
    blob = {k: norm(v) for k, v in sorted(cfg.items()) if k not in UNHASHED}
    return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()[:16]


def distribution_of(cfg: dict) -> FiniteDistribution:
    if cfg["circuit"] is not None:
        return output_distribution(load_circuit(cfg["circuit"]))
    if cfg["distribution"] == "uniform":
        return FiniteDistribution.uniform(cfg["n"])
    return load_distribution(cfg["distribution"])


def inverter_of(cfg: dict, d: FiniteDistribution):
    inv = ExactInverter(d)
    return NoisyInverter(inv, cfg["gamma"]) if cfg["gamma"] else inv


# -- output --------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


def write_results(out: Path, name: str, rows: list[dict], summary: dict, chash: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    fields = ["config_hash"] + sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({"config_hash": chash, **{k: _fmt(v) for k, v in r.items()}})
    (out / f"{name}.csv").write_text(buf.getvalue())
    summary = {"config_hash": chash, "version": __version__, **summary}
    (out / f"{name}.json").write_text(json.dumps(summary, sort_keys=True, indent=1, default=str) + "\n")


def _report_rows(rep) -> list[dict]:
    return [{"lemma": rep.lemma, "check": c.label, "frequency": float(c.frequency),
             "bound": float(c.bound), "radius": c.radius, "direction": c.direction,
             "proven": c.proven, "vacuous": c.vacuous, "passed": c.passed,
             "premise_failed": rep.premise_failed} for c in rep.checks]


# -- subcommands -----------------------------------------------------------------

def cmd_estimate(cfg: dict, workers: int) -> tuple[list, dict, int]:
    d = distribution_of(cfg)
    summ = check_guarantee(d, inverter_of(cfg, d), cfg["c"], cfg["t"], cfg["samples"],
                           SeededRng(cfg["seed"]), cfg["variant"], workers)
    rows = [{"index": i, "x": r.x, "p_x": r.p_x_truth, "estimate": r.estimate, "k_star": r.k_star,
             "within": bool(r.within(summ.factor))} for i, r in enumerate(summ.runs)]
    summary = {"command": "estimate", "n": d.n, "c": cfg["c"], "t": cfg["t"], "variant": summ.variant,
               "factor": summ.factor, "samples": summ.samples, "within": summ.within,
               "fraction": summ.fraction, "target": summ.target, "passed": summ.passed}
    return rows, summary, 0 if summ.passed else 1


def _lemma_xs(d: FiniteDistribution, rng: SeededRng, count: int = 3):
    """The most likely string plus distinct draws, in a fixed order."""
    xs = [max(d.items(), key=lambda kv: (kv[1], -kv[0].value))[0]]
    for x in d.sample_many(rng, 8 * count):
        if x not in xs:
            xs.append(x)
        if len(xs) == count:
            break
    return xs


def run_lemma(name: str, cfg: dict, rng: SeededRng):
    d = distribution_of(cfg)
    n = d.n
    trials = cfg["trials"]
    if name == "chebtrick":
        reps = [verify_lemma_chebtrick(d, k, trials, rng.spawn(k)) for k in range(1, n + 1)]
    elif name in ("firstlem", "secondlem"):
        reps = []
        for i, x in enumerate(_lemma_xs(d, rng.spawn(0))):
            rep = verify_lemma_firstlem_secondlem(d, x, cfg["c"], trials, rng.spawn(i + 1))
            rep.checks = [c for c in rep.checks if c.label.startswith(name)]
            rep.skipped = [s for s in rep.skipped if s.startswith(name)]
            rep.lemma = name
            reps.append(rep)
    elif name == "approx":
        reps = [verify_claim_approx(d, x, cfg["c"], trials, rng.spawn(i + 1))
                for i, x in enumerate(_lemma_xs(d, rng.spawn(0)))]
    elif name == "close":
        xs = _lemma_xs(d, rng.spawn(0))
        reps = [verify_claim_close(d, inverter_of(cfg, d), cfg["c"], cfg["d_exp"], 64,
                                   rng.spawn(1), xs=xs, premise_trials=trials)]
    elif name == "highk":
        m = min(cfg["m"], 8)
        oracle = KolmogorovOracle(L=min(24, max(cfg["L"], m + 12)), max_out=m)
        reps = [verify_claim_highk(oracle, m, 4, 1.0, trials, rng)]
    elif name == "lowk":
        sampler = load_sampler(cfg["sampler"])
        reps = [verify_claim_lowk(sampler, cfg["sampler_n"], trials, rng)]
    elif name == "counting":
        reps = [verify_counting(KolmogorovOracle(L=14, max_out=12), 12, 14, cross_L=14)]
    elif name == "coding":
        circuits = {Path(p).stem: load_circuit(p) for p in cfg["circuits"]}
        reps = [coding_bound_report(circuits, KolmogorovOracle(L=22, max_out=12), C_ENC)]
    else:
        raise ConfigError(f"unknown lemma {name!r}")
    return reps


def cmd_verify_lemmas(cfg: dict, workers: int, only: str | None = None):
    names = LEMMAS if only is None else (only,)
    if only is not None and only not in LEMMAS:
        raise ConfigError(f"--only: unknown lemma {only!r}; choose from {', '.join(LEMMAS)}")
    rng = SeededRng(cfg["seed"])
    rows, reports, failed, premise = [], [], [], []
    for i, name in enumerate(names):
        for rep in run_lemma(name, cfg, rng.spawn(LEMMAS.index(name))):
            rows.extend(_report_rows(rep))
            reports.append(rep.to_json())
            if rep.premise_failed:
                premise.append(name)
            elif not rep.passed:
                failed.append(name)
    for name in sorted(set(premise)):
        print(f"warning: {name}: premise failed, no claim checked", file=sys.stderr)
    summary = {"command": "verify-lemmas", "lemmas": list(names), "reports": reports,
               "failed": sorted(set(failed)), "premise_failed": sorted(set(premise)),
               "passed": not failed}
    return rows, summary, 1 if failed else 0


def cmd_gapk(cfg: dict, workers: int):
    m = cfg["m"]
    oracle = KolmogorovOracle(L=cfg["L"], max_out=m)
    rng = SeededRng(cfg["seed"])
    rows, reps = [], []
    for i, eps in enumerate(cfg["eps"]):
        r = run_gapk_experiment(oracle, m, cfg["s"], cfg["delta"], eps, cfg["trials"], rng.spawn(i))
        row = {"eps": eps, "errors": r.errors, "samples": r.samples, "error_rate": r.error_rate,
               "bound": r.bound, "radius": r.radius, "passed": r.passed,
               "yes_mass": r.yes_mass, "no_mass": r.no_mass, "honest_error": r.exact_error_honest}
        rows.append(row)
        reps.append(row)
    ok = all(r["passed"] for r in rows)
    summary = {"command": "gapk", "m": m, "s": cfg["s"], "delta": cfg["delta"], "L": cfg["L"],
               "runs": reps, "passed": ok}
    return rows, summary, 0 if ok else 1


def cmd_distinguish(cfg: dict, workers: int):
    sampler = load_sampler(cfg["sampler"])
    n = cfg["sampler_n"]
    m = sampler.m
    c = cfg["sampler_c"]
    if c is None:
        c = max(math.log(m) / math.log(n), sampler.t * math.log(2) / math.log(n))
    feas = feasibility(n, m, sampler.t, c)
    rng = SeededRng(cfg["seed"])
    if cfg["oracle_mode"] == "exact":
        s2 = thresholds(n, m, c)[1]
        need = max(0, math.ceil(s2 + calibration(m)) - 1)
        if need > 24:
            raise ConfigError(f"thresholds need K up to {need}, beyond the enumeration cap 24")
        oracle = ExactGapKOracle(KolmogorovOracle(L=need, max_out=m), m, s2)
    else:
        oracle = RandomGapKOracle(rng.spawn(2))
    rep = distinguish_with_gapk(oracle, sampler, n, c, cfg["trials"], rng)
    rows = [{"condition": "good_advice", "accept_rate": rep.accept_good,
             "exact_rate": rep.exact_accept_good, "threshold": rep.good_threshold,
             "direction": ">=", "ok": rep.good_ok},
            {"condition": "uniform", "accept_rate": rep.accept_uniform,
             "exact_rate": rep.exact_accept_uniform, "threshold": rep.uniform_threshold,
             "direction": "<=", "ok": rep.uniform_ok}]
    gap = sampler.entropy_gap_holds(n)
    summary = {"command": "distinguish", "oracle_mode": cfg["oracle_mode"],
               "report": rep.to_json(), "feasibility": feas.to_json(), "entropy_gap": gap}
    for f in rep.flags:
        print(f"warning: {f}", file=sys.stderr)
    # only an exact oracle on a sampler with the entropy gap makes a claim
    claim = cfg["oracle_mode"] == "exact" and gap
    return rows, summary, 1 if claim and not rep.passed else 0


def cmd_hash_test(cfg: dict, workers: int):
    rows = []
    for n in range(1, 5):
        for k in range(1, n + 1):
            for t in (2, 3):
                r = verify_t_wise_independence(n, k, t)
                rows.append({"n": n, "k": k, "t": t, "tuples": r.tuples_checked,
                             "violations": len(r.violations), "collision_rate": "",
                             "passed": r.ok})
            rate = pairwise_collision_rate(n, k, 0, (1 << n) - 1) if n > 1 else None
            if rate is not None:
                rows.append({"n": n, "k": k, "t": "pair", "tuples": 1, "violations": 0,
                             "collision_rate": str(rate), "passed": rate == 2.0 ** -k})
    ok = all(r["passed"] for r in rows)
    return rows, {"command": "hash-test", "passed": ok}, 0 if ok else 1


def cmd_kolmo(args, cfg: dict) -> int:
    if args.action == "k-of":
        x = args.x
        oracle = KolmogorovOracle(L=min(24, args.L), max_out=max(1, len(x)))
        print(json.dumps({"x": x, "K": oracle.k_complexity(x), "K_exact": oracle.k_exact(x),
                          "K_cal": oracle.k_cal(x), "L": oracle.L}, sort_keys=True))
    elif args.action == "count-low-k":
        oracle = KolmogorovOracle(L=args.t, max_out=args.n)
        print(json.dumps({"n": args.n, "t": args.t, "count": oracle.count_low_k(args.n, args.t),
                          "bound": 2 ** (args.t + 1) - 1}, sort_keys=True))
    elif args.action == "encode":
        circ = load_circuit(args.circuit)
        prog = Program(coding_encoder(circ, args.x))
        print(json.dumps({"x": args.x, "program_bits": len(prog), "program_hex": prog.hex,
                          "output": prog.run()}, sort_keys=True))
    return 0


COMMANDS = {"estimate": cmd_estimate, "gapk": cmd_gapk, "distinguish": cmd_distinguish,
            "hash-test": cmd_hash_test}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="64-bit seed (overrides config and env)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--trials", type=int, help="trial count for sampled checks")
    common.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")

    p = argparse.ArgumentParser(prog="owpuzzle", description="Probability-estimation and puzzle experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="estimator guarantee sweep")
    v = sub.add_parser("verify-lemmas", parents=[common], help="empirical bound checks")
    v.add_argument("--only", help=f"one of: {', '.join(LEMMAS)}")
    sub.add_parser("gapk", parents=[common], help="GapK decider error with a faulty estimator")
    sub.add_parser("distinguish", parents=[common], help="advised-sampler distinguisher")
    sub.add_parser("hash-test", parents=[common], help="exhaustive hash independence checks")
    k = sub.add_parser("kolmo", parents=[common], help="toy-machine complexity tools")
    ks = k.add_subparsers(dest="action", required=True)
    a = ks.add_parser("k-of", help="exact K of a bit string")
    a.add_argument("x")
    a.add_argument("--L", type=int, default=22)
    b = ks.add_parser("count-low-k", help="number of n-bit strings with K <= t")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--t", type=int, required=True)
    e = ks.add_parser("encode", help="rank-encoder program for x under a circuit")
    e.add_argument("--circuit", required=True)
    e.add_argument("x")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 2
    try:
        flags = {"seed": args.seed, "out": args.out, "trials": args.trials}
        cfg = load_config(args.config, flags)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.command == "kolmo":
            return cmd_kolmo(args, cfg)
        if args.command == "verify-lemmas":
            rows, summary, code = cmd_verify_lemmas(cfg, args.workers, args.only)
        else:
            rows, summary, code = COMMANDS[args.command](cfg, args.workers)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    name = args.command.replace("-", "_")
    write_results(Path(cfg["out"]), name, rows, summary, config_hash(cfg))
    print(json.dumps({"command": args.command, "exit": code,
                      "out": str(Path(cfg["out"]) / f"{name}.json")}))
    return code


if __name__ == "__main__":
    sys.exit(main())
