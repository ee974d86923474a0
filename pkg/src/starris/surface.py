"""STAR-RIS element coefficients, constraint checks and planar geometry."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AMPLITUDE_TOL",
    "PHASE_TOL",
    "SurfaceGeometry",
    "SurfaceCoefficients",
    "ValidationReport",
    "Violation",
    "wrap_phase",
    "wrap_signed",
    "validate",
    "element_positions",
    "write_coefficients_csv",
    "read_coefficients_csv",
]

AMPLITUDE_TOL = 1e-12
PHASE_TOL = 1e-9
TWO_PI = 2.0 * np.pi


def wrap_phase(x):
    """Wrap to [0, 2*pi)."""
    out = np.mod(x, TWO_PI)
    # mod can return exactly 2*pi after rounding of tiny negatives
    return np.where(out >= TWO_PI, 0.0, out)


def wrap_signed(x):
    """Wrap to [-pi, pi)."""
    return wrap_phase(np.asarray(x) + np.pi) - np.pi


@dataclass(frozen=True)
class SurfaceGeometry:
    m_h: int
    m_v: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.m_h < 1 or self.m_v < 1:
            raise ValueError("m_h and m_v must be >= 1")
        if not self.spacing_wavelengths > 0:
            raise ValueError("spacing must be > 0")

    @property
    def num_elements(self) -> int:
        return self.m_h * self.m_v


def element_positions(geom: SurfaceGeometry, wavelength_m: float) -> np.ndarray:
    """Element centres, shape (M, 3), in metres.

    The surface lies in the y-z plane (y horizontal, z vertical) and is
    centred on the origin; its normal is the x axis.  Elements are ordered
    row-major: vertical index outer, horizontal index inner.
    """
    if not wavelength_m > 0:
        raise ValueError("wavelength must be > 0")
    d = geom.spacing_wavelengths * wavelength_m
    y = (np.arange(geom.m_h) - (geom.m_h - 1) / 2.0) * d
    z = (np.arange(geom.m_v) - (geom.m_v - 1) / 2.0) * d
    zz, yy = np.meshgrid(z, y, indexing="ij")
    return np.column_stack([np.zeros(geom.num_elements), yy.ravel(), zz.ravel()])


@dataclass
class SurfaceCoefficients:
    """Per-element transmission/reflection amplitudes, phases and the
    auxiliary bit.  Arrays may carry leading batch axes; the last axis
    indexes elements.
    """

    beta_t: np.ndarray
    beta_r: np.ndarray
    phi_t: np.ndarray
    phi_r: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.beta_t = np.asarray(self.beta_t, dtype=float)
        self.beta_r = np.asarray(self.beta_r, dtype=float)
        self.phi_t = wrap_phase(np.asarray(self.phi_t, dtype=float))
        self.phi_r = wrap_phase(np.asarray(self.phi_r, dtype=float))
        self.nu = np.asarray(self.nu, dtype=np.int8)

    @property
    def num_elements(self) -> int:
        return self.phi_t.shape[-1] if self.phi_t.ndim else 1

    def complex_gain(self, user: str) -> np.ndarray:
        if user == "T":
            return self.beta_t * np.exp(1j * self.phi_t)
        if user == "R":
            return self.beta_r * np.exp(1j * self.phi_r)
        raise ValueError(f"unknown user {user!r}")

    def rotated(self, angle: float) -> "SurfaceCoefficients":
        """Same surface with a common phase added to every coefficient."""
        return SurfaceCoefficients(
            self.beta_t, self.beta_r, self.phi_t + angle, self.phi_r + angle, self.nu
        )


@dataclass(frozen=True)
class Violation:
    index: tuple
    constraint: str  # "amplitude", "phase" or "aux_bit"
    detail: str = ""


@dataclass
class ValidationReport:
    mode: str
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def indices(self, constraint=None):
        return [v.index for v in self.violations if constraint in (None, v.constraint)]


def validate(c: SurfaceCoefficients, mode: str = "constrained") -> ValidationReport:
    """Check the lossless amplitude law and, in constrained mode, the
    correlated phase law (phase difference pi/2 or 3pi/2 wherever both
    amplitudes are nonzero, with a consistent auxiliary bit).
    """
    if mode not in ("constrained", "independent"):
        raise ValueError(f"unknown mode {mode!r}")
    shapes = {a.shape for a in (c.beta_t, c.beta_r, c.phi_t, c.phi_r, c.nu)}
    if len(shapes) != 1:
        raise ValueError(f"coefficient arrays differ in shape: {sorted(shapes)}")
    report = ValidationReport(mode)

    amp_err = np.abs(c.beta_t**2 + c.beta_r**2 - 1.0)
    bad_amp = (amp_err > AMPLITUDE_TOL) | (c.beta_t < 0) | (c.beta_r < 0)
    for idx in zip(*np.nonzero(np.atleast_1d(bad_amp))):
        report.violations.append(
            Violation(idx, "amplitude", f"|bt^2+br^2-1|={np.atleast_1d(amp_err)[idx]:.3e}")
        )
    if mode == "independent":
        return report

    diff = wrap_phase(c.phi_r - c.phi_t)
    coupled = (c.beta_t * c.beta_r) > 0
    dist_half = np.abs(wrap_signed(diff - np.pi / 2))
    dist_3half = np.abs(wrap_signed(diff - 3 * np.pi / 2))
    bad_phase = coupled & (np.minimum(dist_half, dist_3half) > PHASE_TOL)
    expected = np.abs(wrap_signed(diff - (np.pi / 2 + np.pi * c.nu)))
    bad_nu = ((c.nu != 0) & (c.nu != 1)) | (coupled & ~bad_phase & (expected > PHASE_TOL))
    diff1 = np.atleast_1d(diff)
    for idx in zip(*np.nonzero(np.atleast_1d(bad_phase))):
        report.violations.append(Violation(idx, "phase", f"phi_r-phi_t={diff1[idx]:.12f}"))
    for idx in zip(*np.nonzero(np.atleast_1d(bad_nu))):
        report.violations.append(Violation(idx, "aux_bit", f"nu={np.atleast_1d(c.nu)[idx]}"))
    return report


_CSV_COLUMNS = ["m", "beta_t", "beta_r", "phi_t", "phi_r", "nu"]


def write_coefficients_csv(c: SurfaceCoefficients, path) -> None:
    """One row per element; phases in radians, 12 significant digits."""
    if c.phi_t.ndim != 1:
        raise ValueError("only a single (unbatched) surface can be written")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_COLUMNS)
        for m in range(c.phi_t.size):
            w.writerow(
                [m]
                + [f"{v:.12g}" for v in (c.beta_t[m], c.beta_r[m], c.phi_t[m], c.phi_r[m])]
                + [int(c.nu[m])]
            )


def read_coefficients_csv(path) -> SurfaceCoefficients:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and list(rows[0]) != _CSV_COLUMNS:
        raise ValueError(f"expected columns {_CSV_COLUMNS}")
    rows.sort(key=lambda r: int(r["m"]))
    col = lambda k: np.array([float(r[k]) for r in rows])  # noqa: E731
    return SurfaceCoefficients(
        col("beta_t"), col("beta_r"), col("phi_t"), col("phi_r"), col("nu").astype(np.int8)
    )
