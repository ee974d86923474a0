import csv
import json

import numpy as np
import pytest

from starris.cli import main, run
from starris.config import ScenarioConfig, config_hash, load_config
from starris.montecarlo import SweepResult, fit_diversity

FAST = ["sim.trials=4000", "sim.scaling_trials=500", "sim.m_grid=[4, 8, 16]"]


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def manifest(d):
    m = json.loads((d / "manifest.json").read_text())
    m.pop("timestamp")
    return m


def test_validate_default_config(capsys):
    assert run("validate") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[surface]\nbogus_key = 3\n")
    assert run("validate", bad) == 2
    assert "bogus_key" in capsys.readouterr().err
    assert run("validate", tmp_path / "missing.toml") == 2
    assert run("outage", None, tmp_path / "o", ["ma.rate_t=3.0"]) == 2
    assert "ma.rate_t" in capsys.readouterr().err
    assert run("outage", None, tmp_path / "o", ["sim.trials=0"]) == 2
    assert run("outage", None, tmp_path / "o", ["ma.c_t_sq=0.3"]) == 2
    broken = tmp_path / "broken.toml"
    broken.write_text("[surface\n")
    assert run("validate", broken) == 2


def test_outage_csv_and_manifest(tmp_path):
    out = tmp_path / "a"
    assert main(["outage", "--out", str(out), "-q", "--strategy", "dp", "--strategy", "random", *sum([["--set", s] for s in FAST], [])]) == 0
    rows = read(out / "outage_T.csv")
    assert list(rows[0]) == ["snr_db", "strategy", "user", "p_out", "ci_low", "ci_high", "trials", "analytic_value"]
    cfg = ScenarioConfig(load_config(None, FAST))
    assert len(rows) == 2 * cfg.snr_grid.size
    assert {r["strategy"] for r in rows} == {"dp_psc", "random"}
    m = manifest(out)
    assert m["files"] == {"outage_R.csv": {"rows": len(rows)}, "outage_T.csv": {"rows": len(rows)}}
    assert m["overrides"]["sim.trials"] == {"default": 200000, "value": 4000}
    assert m["seed"] == cfg.seed and m["subcommand"] == "outage"


def test_ps_secondary_has_empty_analytic(tmp_path):
    assert run("outage", None, tmp_path, FAST + ['surface.strategy=["ps"]']) == 0
    t = read(tmp_path / "outage_T.csv")
    r = read(tmp_path / "outage_R.csv")
    assert all(row["analytic_value"] == "" for row in t)
    assert all(row["analytic_value"] != "" for row in r)


def test_reproducible_manifests_and_hash(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for d in (a, b):
        assert run("outage", None, d, FAST + ['surface.strategy=["dp"]']) == 0
    assert manifest(a) == manifest(b)
    assert (a / "outage_T.csv").read_bytes() == (b / "outage_T.csv").read_bytes()
    assert run("outage", None, c, FAST + ['surface.strategy=["dp"]', "ma.rate_r=1.1"]) == 0
    assert manifest(c)["config_sha256"] != manifest(a)["config_sha256"]
    assert config_hash(load_config()) != config_hash(load_config(None, ["bs.k_db=1.4"]))


def test_byte_stable_across_workers(tmp_path):
    outs = []
    for w in (1, 4):
        d = tmp_path / f"w{w}"
        ov = ["sim.trials=70000", 'surface.strategy=["ps"]', f"sim.workers={w}"]
        assert run("outage", None, d, ov) == 0
        outs.append(d)
    for name in ("outage_T.csv", "outage_R.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_scaling_csv(tmp_path):
    assert run("scaling", None, tmp_path, FAST + ['surface.strategy=["dp", "random"]']) == 0
    rows = read(tmp_path / "scaling.csv")
    assert list(rows[0]) == ["m", "strategy", "user", "mean_power_db", "ci_low", "ci_high", "analytic_value"]
    assert len(rows) == 2 * 2 * 3
    assert manifest(tmp_path)["files"]["scaling.csv"]["rows"] == 12
    for r in rows:
        assert float(r["ci_low"]) <= float(r["mean_power_db"]) <= float(r["ci_high"])


def test_pattern_csv(tmp_path):
    assert run("pattern", None, tmp_path, ['surface.strategy=["ps", "dp"]']) == 0
    rows = read(tmp_path / "pattern_ps_psc.csv")
    assert list(rows[0]) == ["angle_deg", "power_db"] and len(rows) == 720
    m = manifest(tmp_path)
    assert m["files"]["coefficients_dp_psc.csv"]["rows"] == 324
    peak = max(rows, key=lambda r: float(r["power_db"]))
    assert abs(float(peak["angle_deg"]) - 150) <= 2


def test_outage_random_default_diversity(tmp_path):
    # the default configuration with the random strategy, at its full trial count
    assert main(["outage", "--out", str(tmp_path), "-q", "--strategy", "random"]) == 0
    for user in "TR":
        rows = read(tmp_path / f"outage_{user}.csv")
        axis = np.array([float(r["snr_db"]) for r in rows])
        est = np.array([float(r["p_out"]) for r in rows])
        n = np.array([int(r["trials"]) for r in rows])
        res = SweepResult("outage", "random", user, axis, est, est, est, n, np.full(n.size, np.nan), np.rint(est * n))
        d, _ = fit_diversity(res, (1e-4, 1e-1))
        assert d == pytest.approx(2.0, abs=0.3)


def test_shipped_configs_load():
    from pathlib import Path

    from starris.config import diff_from_defaults

    root = Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.toml"))
    assert len(files) >= 5
    for f in files:
        cfg = ScenarioConfig(load_config(f))
        if f.name == "default.toml":
            assert diff_from_defaults(cfg.raw) == {}
