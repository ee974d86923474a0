"""Azimuth radiation pattern of a configured surface.

The BS field reaches each element as a spherical wave; each element
re-radiates with its reflection coefficient towards the reflection half-space
and its transmission coefficient otherwise.  Angles are measured in the x-y
plane from the surface normal (+x); the surface itself lies along the y axis,
so 90 and 270 degrees are in-plane.  In-plane angles count as reflection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .surface import SurfaceCoefficients, SurfaceGeometry, element_positions

__all__ = [
    "PatternConfig",
    "Pattern",
    "polar_point",
    "reflection_side",
    "los_channel",
    "compute_pattern",
    "write_pattern_csv",
    "peak_to_average_db",
]


def _default_grid():
    return np.arange(0.0, 360.0, 0.5)


@dataclass
class PatternConfig:
    geometry: SurfaceGeometry = field(default_factory=lambda: SurfaceGeometry(18, 18))
    wavelength_m: float = 0.1
    bs_angle_deg: float = 270.0
    bs_distance_m: float = 50.0
    eval_radius_m: float = 10.0
    angle_grid: np.ndarray = field(default_factory=_default_grid)
    reference_db: float = 0.0

    def __post_init__(self):
        self.angle_grid = np.asarray(self.angle_grid, dtype=float)
        if not (self.eval_radius_m > 0 and self.bs_distance_m > 0 and self.wavelength_m > 0):
            raise ValueError("radius, BS distance and wavelength must be > 0")
        if self.angle_grid.ndim != 1 or self.angle_grid.size == 0:
            raise ValueError("angle grid must be a non-empty vector")
        if np.any(np.diff(self.angle_grid) <= 0):
            raise ValueError("angle grid must be strictly increasing")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength_m


@dataclass
class Pattern:
    angle_deg: np.ndarray
    power_db: np.ndarray

    def __post_init__(self):
        if self.angle_deg.shape != self.power_db.shape:
            raise ValueError("angle and power vectors differ in length")
        if not np.all(np.isfinite(self.power_db)):
            raise ValueError("pattern contains non-finite values")

    def value_at(self, angle_deg: float) -> float:
        return float(self.power_db[np.argmin(np.abs(self.angle_deg - angle_deg))])

    def peak_angle(self, mask=None) -> float:
        p = self.power_db if mask is None else np.where(mask, self.power_db, -np.inf)
        return float(self.angle_deg[np.argmax(p)])


def polar_point(angle_deg, distance_m):
    a = np.deg2rad(np.asarray(angle_deg, dtype=float))
    return np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1) * distance_m


def reflection_side(angle_deg):
    """True on the BS side of the surface (90..270 degrees, inclusive)."""
    c = np.cos(np.deg2rad(angle_deg))
    # cos(90 deg) is ~6e-17, not 0; treat that as in-plane
    return c <= 1e-12


def _spherical(src, pos, k):
    d = np.linalg.norm(pos - src[..., None, :], axis=-1)
    return np.exp(-1j * k * d) / d


def los_channel(
    cfg: PatternConfig, t_angle_deg=0.0, r_angle_deg=150.0, t_distance_m=10.0, r_distance_m=10.0
):
    """Deterministic LoS links (no direct path) for users at the given angles."""
    pos = element_positions(cfg.geometry, cfg.wavelength_m)
    k = cfg.wavenumber
    g = _spherical(polar_point(cfg.bs_angle_deg, cfg.bs_distance_m), pos, k)
    h_t = _spherical(polar_point(t_angle_deg, t_distance_m), pos, k)
    h_r = _spherical(polar_point(r_angle_deg, r_distance_m), pos, k)
    return ChannelRealization(g, h_t, h_r, direct_t_present=False, direct_r_present=False)


def compute_pattern(cfg: PatternConfig, coeffs: SurfaceCoefficients) -> Pattern:
    pos = element_positions(cfg.geometry, cfg.wavelength_m)
    if coeffs.num_elements != pos.shape[0]:
        raise ValueError("coefficient count does not match the geometry")
    k = cfg.wavenumber
    incident = _spherical(polar_point(cfg.bs_angle_deg, cfg.bs_distance_m), pos, k)
    out = _spherical(polar_point(cfg.angle_grid, cfg.eval_radius_m), pos, k)  # (A, M)
    refl = reflection_side(cfg.angle_grid)[:, None]
    c = np.where(refl, coeffs.complex_gain("R"), coeffs.complex_gain("T"))
    amp = np.abs(np.sum(c * incident * out, axis=-1))
    # silent directions would give -inf; floor far below any real lobe
    power_db = 20.0 * np.log10(np.maximum(amp, 1e-300)) - cfg.reference_db
    return Pattern(cfg.angle_grid.copy(), power_db)


def peak_to_average_db(p: Pattern) -> float:
    lin = 10.0 ** (p.power_db / 10.0)
    return float(10.0 * np.log10(lin.max() / lin.mean()))


def write_pattern_csv(p: Pattern, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["angle_deg", "power_db"])
        for a, v in zip(p.angle_deg, p.power_db):
            w.writerow([repr(float(a)), repr(float(v))])
