import csv
import json

import pytest

from owpuzzle.cli import main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(kw))
    return str(p)


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_estimate_point_mass(tmp_path, data_dir):
    d = tmp_path / "pm.json"
    d.write_text(json.dumps({"n": 4, "probs": {"0110": 1}}))
    code, out = run(tmp_path, "estimate", "--config", cfg(tmp_path, distribution=str(d), samples=10, t=128))
    assert code == 0
    summary = json.loads((out / "estimate.json").read_text())
    assert summary["fraction"] == 1.0
    r = rows(out / "estimate.csv")
    assert len(r) == 10 and len({x["config_hash"] for x in r}) == 1
    assert r[0]["config_hash"] == summary["config_hash"]


def test_missing_file_exit_2(tmp_path, capsys):
    code, _ = run(tmp_path, "estimate", "--config", cfg(tmp_path, distribution="nope.json"))
    assert code == 2
    assert "nope.json" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [{"delta": 5}, {"c": 0.5}, {"seed": -1}, {"bogus": 1}, {"gamma": 2}])
def test_config_validation(tmp_path, bad, capsys):
    code, _ = run(tmp_path, "gapk", "--config", cfg(tmp_path, **bad))
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_usage_error():
    assert main(["frobnicate"]) == 2
    assert main(["verify-lemmas", "--only", "nonsense"]) == 2


def test_only_single_report(tmp_path):
    code, out = run(tmp_path, "verify-lemmas", "--only", "chebtrick", "--trials", "500",
                    "--config", cfg(tmp_path, n=4))
    assert code == 0
    s = json.loads((out / "verify_lemmas.json").read_text())
    assert {r["lemma"] for r in s["reports"]} == {"chebtrick"}


def test_close_premise_failure_exits_zero(tmp_path, capsys):
    code, out = run(tmp_path, "verify-lemmas", "--only", "close", "--trials", "500",
                    "--config", cfg(tmp_path, n=4, gamma=0.5))
    assert code == 0
    s = json.loads((out / "verify_lemmas.json").read_text())
    assert s["premise_failed"] == ["close"]
    assert "premise failed" in capsys.readouterr().err


def test_distinguish_and_random(tmp_path, data_dir):
    code, out = run(tmp_path, "distinguish", "--trials", "3000")
    assert code == 0
    rep = json.loads((out / "distinguish.json").read_text())["report"]
    assert rep["passed"] and rep["advantage"] >= rep["good_threshold"]
    code, out = run(tmp_path, "distinguish", "--trials", "3000",
                    "--config", cfg(tmp_path, oracle_mode="random"), name="rnd")
    assert code == 0
    assert abs(json.loads((out / "distinguish.json").read_text())["report"]["advantage"]) < 0.06
    flat = cfg(tmp_path, sampler=str(data_dir / "sampler_uniform_m10_t2.json"))
    code, out = run(tmp_path, "distinguish", "--trials", "3000", "--config", flat, name="flat")
    assert code == 0
    assert json.loads((out / "distinguish.json").read_text())["entropy_gap"] is False


def test_hash_test_and_gapk(tmp_path):
    assert run(tmp_path, "hash-test")[0] == 0
    code, out = run(tmp_path, "gapk", "--trials", "3000", name="g")
    assert code == 0
    assert all(r["passed"] == "True" for r in rows(out / "gapk.csv"))


def test_kolmo_tools(capsys, data_dir):
    assert main(["kolmo", "k-of", "00000000"]) == 0
    assert json.loads(capsys.readouterr().out)["K"] == 13
    assert main(["kolmo", "count-low-k", "--n", "8", "--t", "6"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] <= 127
    assert main(["kolmo", "encode", "--circuit", str(data_dir / "circuit_bell.json"), "11"]) == 0
    assert json.loads(capsys.readouterr().out)["output"] == "11"


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("OWPUZZLE_SEED", "77")
    monkeypatch.setenv("OWPUZZLE_OUT", str(tmp_path / "envout"))
    assert main(["gapk", "--trials", "500"]) == 0
    s = json.loads((tmp_path / "envout" / "gapk.json").read_text())
    monkeypatch.delenv("OWPUZZLE_SEED")
    assert main(["gapk", "--trials", "500", "--seed", "77", "--out", str(tmp_path / "flag")]) == 0
    assert json.loads((tmp_path / "flag" / "gapk.json").read_text()) == s


def test_deterministic_across_workers(tmp_path):
    c = cfg(tmp_path, n=5, samples=12, t=256, c=4)
    _, a = run(tmp_path, "estimate", "--config", c, "--workers", "1", name="w1")
    _, b = run(tmp_path, "estimate", "--config", c, "--workers", "2", name="w2")
    for f in ("estimate.csv", "estimate.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
