"""Scenario configuration: TOML schema, defaults, overrides and validation.

Every key has a default (see ``DEFAULTS``); a config file only lists what it
changes.  Unknown keys are rejected with their dotted path.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .channel import RicianParams, db_to_linear
from .link import ConfigError, InfeasibleRateError, MaConfig, thresholds
from .montecarlo import Scenario, direct_for_eta
from .pattern import PatternConfig
from .psc import StrategySpec
from .surface import SurfaceGeometry

__all__ = ["DEFAULTS", "ScenarioConfig", "load_config", "parse_override", "config_hash", "diff_from_defaults"]

_USER = {
    "distance_m": 10.0,
    "angle_deg": 0.0,
    "k_db": 1.3,
    "alpha": 2.2,
    "rho0_db": -30.0,
    "direct": {"present": True, "k_db": 1.3, "eta": 1.0},
}

DEFAULTS = {
    "surface": {
        "m_h": 2,
        "m_v": 2,
        "spacing_wavelengths": 0.5,
        "beta_r": 1.0 / math.sqrt(2.0),
        "strategy": ["ps", "dp", "tr", "random"],
        "primary_user": "R",
        "nu_rule": "closest",
        "t_group_fraction": 0.5,
        "independent_full_amplitude": True,
    },
    "bs": {"distance_m": 50.0, "angle_deg": 270.0, "k_db": 1.3, "alpha": 2.2, "rho0_db": -30.0},
    "user_t": copy.deepcopy(_USER),
    "user_r": {**copy.deepcopy(_USER), "angle_deg": 150.0},
    "ma": {
        "scheme": "NOMA",
        "c_t_sq": 0.6,
        "c_r_sq": 0.4,
        "rate_t": 0.5,
        "rate_r": 1.0,
        "noise_dbm": -50.0,
    },
    "sim": {
        "trials": 200000,
        "scaling_trials": 20000,
        "seed": 20211,
        "snr_db": {"start": 0.0, "stop": 30.0, "step": 2.0},
        "m_grid": [16, 32, 64, 128, 256],
        "workers": 1,
        "normalize_pathloss": True,
        "random_combining": "power",
    },
    "pattern": {
        "m_h": 18,
        "m_v": 18,
        "wavelength_m": 0.1,
        "eval_radius_m": 10.0,
        "angle_step_deg": 0.5,
    },
}

# keys whose value is a table or a list, so a dict is a legal value
_FREE_FORM = {("sim", "snr_db")}


def _merge(base, new, path=()):
    for key, val in new.items():
        here = path + (key,)
        if key not in base:
            raise ConfigError(f"unknown config key {'.'.join(here)!r}")
        if isinstance(base[key], dict) and here not in _FREE_FORM:
            if not isinstance(val, dict):
                raise ConfigError(f"{'.'.join(here)!r} must be a table")
            _merge(base[key], val, here)
        else:
            base[key] = val
    return base


def parse_override(text: str):
    """``a.b.c=value`` -> (("a","b","c"), value); the value is read as TOML,
    falling back to a bare string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return tuple(key.strip().split(".")), value


def _nest(path, value):
    out = value
    for k in reversed(path):
        out = {k: out}
    return out


def load_config(path=None, overrides=()) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        _merge(cfg, data)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        _merge(cfg, _nest(key, value))
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def diff_from_defaults(cfg: dict, base=None, path=()) -> dict:
    """Dotted key -> {"default", "value"} for every value that differs."""
    base = DEFAULTS if base is None else base
    out = {}
    for key, val in cfg.items():
        here = path + (key,)
        ref = base.get(key)
        if isinstance(val, dict) and isinstance(ref, dict) and here not in _FREE_FORM:
            out.update(diff_from_defaults(val, ref, here))
        elif val != ref:
            out[".".join(here)] = {"default": ref, "value": val}
    return out


def _num(cfg, path, positive=True, allow_zero=False):
    sec = cfg
    for k in path:
        sec = sec[k]
    name = ".".join(path)
    if isinstance(sec, bool) or not isinstance(sec, (int, float)) or not math.isfinite(sec):
        raise ConfigError(f"{name!r} must be a finite number, got {sec!r}")
    if positive and not (sec > 0 or (allow_zero and sec == 0)):
        raise ConfigError(f"{name!r} must be {'>= 0' if allow_zero else '> 0'}, got {sec!r}")
    return float(sec)


def _int(cfg, path, minimum=1):
    sec = cfg
    for k in path:
        sec = sec[k]
    if isinstance(sec, bool) or not isinstance(sec, int) or sec < minimum:
        raise ConfigError(f"{'.'.join(path)!r} must be an integer >= {minimum}, got {sec!r}")
    return sec


def _grid(value, name):
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "step"}
        if unknown or len(value) != 3:
            raise ConfigError(f"{name!r} table needs exactly start, stop, step")
        if not value["step"] > 0:
            raise ConfigError(f"{name}.step must be > 0")
        n = int(math.floor((value["stop"] - value["start"]) / value["step"] + 1e-9)) + 1
        grid = value["start"] + value["step"] * np.arange(max(n, 0))
    else:
        grid = np.asarray(value, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError(f"{name!r} must be a non-empty list")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{name!r} must be strictly increasing")
    return grid


@dataclass
class ScenarioConfig:
    """Validated view of a merged config dict."""

    raw: dict

    def __post_init__(self):
        c = self.raw
        s = c["surface"]
        _int(c, ("surface", "m_h"))
        _int(c, ("surface", "m_v"))
        _num(c, ("surface", "spacing_wavelengths"))
        beta_r = _num(c, ("surface", "beta_r"), allow_zero=True)
        if beta_r > 1:
            raise ConfigError("'surface.beta_r' must lie in [0, 1]")
        for sec in ("bs", "user_t", "user_r"):
            _num(c, (sec, "distance_m"))
            _num(c, (sec, "alpha"))
            _num(c, (sec, "angle_deg"), positive=False)
            _num(c, (sec, "k_db"), positive=False)
            _num(c, (sec, "rho0_db"), positive=False)
        for sec in ("user_t", "user_r"):
            _num(c, (sec, "direct", "eta"))
            _num(c, (sec, "direct", "k_db"), positive=False)
        for key in ("c_t_sq", "c_r_sq"):
            _num(c, ("ma", key))
        for key in ("rate_t", "rate_r"):
            _num(c, ("ma", key), allow_zero=True)
        _num(c, ("ma", "noise_dbm"), positive=False)
        _int(c, ("sim", "trials"))
        _int(c, ("sim", "scaling_trials"))
        _int(c, ("sim", "seed"), minimum=0)
        _int(c, ("sim", "workers"))
        for key in ("m_h", "m_v"):
            _int(c, ("pattern", key))
        for key in ("wavelength_m", "eval_radius_m", "angle_step_deg"):
            _num(c, ("pattern", key))
        self.snr_grid = _grid(c["sim"]["snr_db"], "sim.snr_db")
        m_grid = _grid(c["sim"]["m_grid"], "sim.m_grid")
        if np.any(m_grid < 1) or np.any(m_grid != np.round(m_grid)):
            raise ConfigError("'sim.m_grid' must hold positive integers")
        self.m_grid = m_grid.astype(int)
        if c["sim"]["random_combining"] not in ("power", "coherent"):
            raise ConfigError("'sim.random_combining' must be 'power' or 'coherent'")
        strategies = s["strategy"]
        s["strategy"] = [strategies] if isinstance(strategies, str) else list(strategies)
        try:
            self.strategies = [self.strategy_spec(k) for k in s["strategy"]]
            self.ma = self.ma_config()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"surface/ma: {exc}") from exc
        if not self.strategies:
            raise ConfigError("'surface.strategy' must name at least one strategy")
        try:
            thresholds(self.ma, strict=True)
        except InfeasibleRateError as exc:
            raise ConfigError(f"'ma.rate_t': {exc}") from exc

    # -- builders -------------------------------------------------------
    def strategy_spec(self, kind: str) -> StrategySpec:
        s = self.raw["surface"]
        return StrategySpec(
            kind,
            beta_r=s["beta_r"],
            primary_user=s["primary_user"],
            t_group_fraction=s["t_group_fraction"],
            nu_rule=s["nu_rule"],
            full_amplitude=bool(s["independent_full_amplitude"]),
        )

    def ma_config(self, scheme: str | None = None) -> MaConfig:
        m = self.raw["ma"]
        return MaConfig(
            scheme=scheme or m["scheme"],
            c_t_sq=m["c_t_sq"],
            c_r_sq=m["c_r_sq"],
            rate_t=m["rate_t"],
            rate_r=m["rate_r"],
            noise_power=float(db_to_linear(m["noise_dbm"] - 30.0)),
        )

    def _link(self, sec) -> RicianParams:
        d = self.raw[sec]
        k = float(db_to_linear(d["k_db"]))
        if self.raw["sim"]["normalize_pathloss"]:
            return RicianParams(k)
        return RicianParams(
            k, 1.0, float(db_to_linear(d["rho0_db"])), d["distance_m"], d["alpha"]
        )

    def scenario(self, m: int | None = None) -> Scenario:
        s = self.raw["surface"]
        m = m if m is not None else s["m_h"] * s["m_v"]
        links = {}
        for user, sec in (("T", "user_t"), ("R", "user_r")):
            p_h = self._link(sec)
            d = self.raw[sec]["direct"]
            p_d = direct_for_eta(d["eta"], p_h, float(db_to_linear(d["k_db"]))) if d["present"] else None
            links[user] = (p_h, p_d)
        return Scenario(
            m,
            self._link("bs"),
            links["T"][0],
            links["R"][0],
            links["T"][1],
            links["R"][1],
            self.ma,
            self.raw["sim"]["random_combining"],
        )

    def pattern_config(self) -> PatternConfig:
        p = self.raw["pattern"]
        return PatternConfig(
            SurfaceGeometry(p["m_h"], p["m_v"], self.raw["surface"]["spacing_wavelengths"]),
            wavelength_m=p["wavelength_m"],
            bs_angle_deg=self.raw["bs"]["angle_deg"],
            bs_distance_m=self.raw["bs"]["distance_m"],
            eval_radius_m=p["eval_radius_m"],
            angle_grid=np.arange(0.0, 360.0, p["angle_step_deg"]),
        )

    @property
    def trials(self) -> int:
        return self.raw["sim"]["trials"]

    @property
    def seed(self) -> int:
        return self.raw["sim"]["seed"]

    @property
    def workers(self) -> int:
        return self.raw["sim"]["workers"]
