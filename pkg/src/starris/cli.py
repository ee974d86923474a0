"""Command-line front end.

    starris outage   [--config FILE] [--out DIR] [options]
    starris scaling  ...
    starris pattern  ...
    starris validate ...

Exit status: 0 success, 2 configuration error, 3 numerical error or a
failed self-check.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, config_hash, diff_from_defaults, load_config
from .link import ConfigError
from .montecarlo import RngPlan, estimate_outage, estimate_power
from .pattern import compute_pattern, los_channel, write_pattern_csv
from .psc import configure
from .selfcheck import format_table, run_checks
from .specfun import DomainError
from .surface import SurfaceCoefficients, write_coefficients_csv

__all__ = ["main", "run", "emit_manifest", "build_parser"]

OUTAGE_COLUMNS = ["snr_db", "strategy", "user", "p_out", "ci_low", "ci_high", "trials", "analytic_value"]
SCALING_COLUMNS = ["m", "strategy", "user", "mean_power_db", "ci_low", "ci_high", "analytic_value"]


def _fmt(v):
    """Round-trip text for numbers; empty for missing analytic values."""
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return len(rows)


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _log(quiet, msg):
    if not quiet:
        print(msg, file=sys.stderr)


def _run_outage(cfg, out, args):
    rows = {"T": [], "R": []}
    scn = cfg.scenario()
    for spec in cfg.strategies:
        _log(args.quiet, f"outage: {spec.kind}, M={scn.m}, {cfg.trials} trials")
        res = estimate_outage(scn, spec, cfg.snr_grid, cfg.trials, cfg.seed, cfg.workers, progress=not args.quiet)
        for user, r in res.items():
            for i, snr in enumerate(r.axis):
                rows[user].append(
                    [snr, spec.kind, user, r.estimate[i], r.ci_low[i], r.ci_high[i], r.trials[i], r.analytic[i]]
                )
    return {
        f"outage_{u}.csv": _write_rows(out / f"outage_{u}.csv", OUTAGE_COLUMNS, rows[u]) for u in ("T", "R")
    }


def _run_scaling(cfg, out, args):
    rows = []
    trials = cfg.raw["sim"]["scaling_trials"]
    for spec in cfg.strategies:
        _log(args.quiet, f"scaling: {spec.kind}, M in {list(cfg.m_grid)}, {trials} trials")
        res = estimate_power(cfg.scenario(), spec, cfg.m_grid, trials, cfg.seed, cfg.workers, progress=not args.quiet)
        for user in ("T", "R"):
            r = res[user]
            for i, m in enumerate(r.axis):
                ana = r.analytic[i]
                rows.append([
                    int(m), spec.kind, user, _db(r.estimate[i]), _db(r.ci_low[i]), _db(r.ci_high[i]),
                    _db(ana) if np.isfinite(ana) else math.nan,
                ])
    return {"scaling.csv": _write_rows(out / "scaling.csv", SCALING_COLUMNS, rows)}


def _single(c: SurfaceCoefficients) -> SurfaceCoefficients:
    if c.phi_t.ndim == 1:
        return c
    return SurfaceCoefficients(*(a.reshape(-1, a.shape[-1])[0] for a in (c.beta_t, c.beta_r, c.phi_t, c.phi_r, c.nu)))


def _run_pattern(cfg, out, args):
    pcfg = cfg.pattern_config()
    ut, ur = cfg.raw["user_t"], cfg.raw["user_r"]
    ch = los_channel(pcfg, ut["angle_deg"], ur["angle_deg"], ut["distance_m"], ur["distance_m"])
    files = {}
    for i, spec in enumerate(cfg.strategies):
        coeffs = _single(configure(ch, spec, RngPlan(cfg.seed).generator(20_000 + i, 0)))
        pat = compute_pattern(pcfg, coeffs)
        name = f"pattern_{spec.kind}.csv"
        write_pattern_csv(pat, out / name)
        files[name] = pat.angle_deg.size
        cname = f"coefficients_{spec.kind}.csv"
        write_coefficients_csv(coeffs, out / cname)
        files[cname] = coeffs.num_elements
    return files


def _git_version():
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=10,
        )
        if res.returncode == 0 and res.stdout.strip():
            return f"{__version__}+{res.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def emit_manifest(out_dir, subcommand, cfg: ScenarioConfig, files: dict) -> Path:
    """Write manifest.json describing the run; raises OSError if unwritable."""
    manifest = {
        "subcommand": subcommand,
        "config_sha256": config_hash(cfg.raw),
        "seed": cfg.seed,
        "version": _git_version(),
        "files": {name: {"rows": n} for name, n in sorted(files.items())},
        "overrides": diff_from_defaults(cfg.raw),
        "config": cfg.raw,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = Path(out_dir) / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _flag_overrides(args):
    ov = list(args.set or [])
    if args.strategy:
        ov.append((("surface", "strategy"), list(args.strategy)))
    for flag, key in (
        ("primary", ("surface", "primary_user")),
        ("nu_rule", ("surface", "nu_rule")),
        ("t_group_fraction", ("surface", "t_group_fraction")),
        ("trials", ("sim", "trials")),
        ("seed", ("sim", "seed")),
        ("workers", ("sim", "workers")),
    ):
        val = getattr(args, flag)
        if val is not None:
            ov.append((key, val))
    return ov


def run(subcommand, config_path=None, out_dir="out", overrides=(), args=None) -> int:
    """Execute one subcommand; returns the process exit status."""
    if args is None:
        args = argparse.Namespace(quiet=True)
    try:
        cfg = ScenarioConfig(load_config(config_path, overrides))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if subcommand == "validate":
        results = run_checks(cfg)
        print(format_table(results))
        return 0 if all(r.ok for r in results) else 3
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"output directory {out} is not writable")
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    runner = {"outage": _run_outage, "scaling": _run_scaling, "pattern": _run_pattern}[subcommand]
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            files = runner(cfg, out, args)
    except (DomainError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        emit_manifest(out, subcommand, cfg, files)
    except OSError as exc:
        print(f"config error: cannot write manifest: {exc}", file=sys.stderr)
        return 2
    _log(args.quiet, f"wrote {', '.join(sorted(files))} and manifest.json to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starris", description="STAR-RIS two-user downlink simulator")
    p.add_argument("subcommand", choices=["outage", "scaling", "pattern", "validate"])
    p.add_argument("--config", help="TOML scenario file (defaults apply to missing keys)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value, e.g. sim.trials=1000")
    p.add_argument("--strategy", action="append", choices=["ps", "dp", "tr", "random", "independent"])
    p.add_argument("--primary", choices=["T", "R"])
    p.add_argument("--nu-rule", dest="nu_rule", choices=["literal", "closest"])
    p.add_argument("--t-group-fraction", dest="t_group_fraction", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("-q", "--quiet", action="store_true", help="no progress output on stderr")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.out, _flag_overrides(args), args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
