"""Phase-shift configuration strategies.

Every strategy maps a (possibly batched) :class:`ChannelRealization` to
:class:`SurfaceCoefficients`.  All of them except ``independent`` respect the
correlated transmission/reflection phase law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .surface import SurfaceCoefficients, wrap_phase, wrap_signed

__all__ = [
    "KINDS",
    "StrategySpec",
    "cophase_target",
    "phase_error",
    "ps_psc",
    "dp_psc",
    "tr_psc",
    "random_psc",
    "independent_psc",
    "configure",
    "default_t_group",
]

KINDS = ("ps_psc", "dp_psc", "tr_psc", "random", "independent")
_ALIASES = {"ps": "ps_psc", "dp": "dp_psc", "tr": "tr_psc", "rand": "random", "ind": "independent"}
_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class StrategySpec:
    """Strategy choice and its knobs.

    ``t_group`` holds 0-based element indices of the transmit group (TR-PSC);
    when ``None`` the first ``round(t_group_fraction * M)`` elements are used.
    ``full_amplitude`` lets the independent-phase bound give both users unit
    amplitude, which deliberately breaks energy conservation.
    """

    kind: str
    beta_r: float = 1.0 / math.sqrt(2.0)
    primary_user: str = "R"
    t_group: tuple | None = None
    t_group_fraction: float = 0.5
    nu_rule: str = "closest"
    full_amplitude: bool = False

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not 0.0 <= self.beta_r <= 1.0:
            raise ValueError("beta_r must lie in [0, 1]")
        if self.primary_user not in ("T", "R"):
            raise ValueError("primary_user must be 'T' or 'R'")
        if self.nu_rule not in ("closest", "literal"):
            raise ValueError("nu_rule must be 'closest' or 'literal'")
        if not 0.0 <= self.t_group_fraction <= 1.0:
            raise ValueError("t_group_fraction must lie in [0, 1]")
        if self.t_group is not None:
            object.__setattr__(self, "t_group", tuple(int(i) for i in self.t_group))

    @property
    def beta_t(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.beta_r**2))


def cophase_target(ch: ChannelRealization, user: str) -> np.ndarray:
    """Phase that aligns every cascaded path of ``user`` with its direct link."""
    h, h_d = ch.user_links(user)
    return wrap_phase(np.angle(h_d)[..., None] - np.angle(h) - np.angle(ch.g))


def phase_error(ch: ChannelRealization, c: SurfaceCoefficients, user: str) -> np.ndarray:
    """Residual phase of each element relative to cophasing, in [-pi, pi)."""
    phi = c.phi_t if user == "T" else c.phi_r
    return wrap_signed(phi - cophase_target(ch, user))


def _amplitudes(spec, shape):
    return np.full(shape, spec.beta_t), np.full(shape, spec.beta_r)


def ps_psc(ch: ChannelRealization, spec: StrategySpec) -> SurfaceCoefficients:
    """Cophase the primary user exactly; pick the auxiliary bits for the other.

    ``nu_rule='closest'`` chooses, per element, whichever of the two admissible
    secondary phases lies nearer the secondary user's cophase target.
    ``nu_rule='literal'`` compares the primary phase against the secondary
    direct-link phase only.
    """
    primary = spec.primary_user
    secondary = "T" if primary == "R" else "R"
    phi_p = cophase_target(ch, primary)
    target_s = cophase_target(ch, secondary)
    # constraint: phi_r - phi_t = pi/2 + nu*pi
    sign = -1.0 if primary == "R" else 1.0
    cand0 = phi_p + sign * _HALF_PI
    cand1 = phi_p + sign * 3 * _HALF_PI
    if spec.nu_rule == "closest":
        err0 = np.abs(wrap_signed(cand0 - target_s))
        err1 = np.abs(wrap_signed(cand1 - target_s))
        nu = (err1 < err0).astype(np.int8)
    else:
        _, h_d_s = ch.user_links(secondary)
        ref = np.angle(h_d_s)[..., None]
        nu = (wrap_phase(phi_p - ref) >= math.pi).astype(np.int8)
    phi_s = np.where(nu == 0, cand0, cand1)
    beta_t, beta_r = _amplitudes(spec, phi_p.shape)
    if primary == "R":
        return SurfaceCoefficients(beta_t, beta_r, phi_s, phi_p, nu)
    return SurfaceCoefficients(beta_t, beta_r, phi_p, phi_s, nu)


# Table rows keyed on where (target_R - target_T) falls:
# [0, pi), [pi, 2pi), [-pi, 0), (-2pi, -pi)
_DP_OFFSET_T = np.array([-0.25, -0.75, 0.25, 0.75]) * math.pi
_DP_NU = np.array([0, 1, 1, 0], dtype=np.int8)


def dp_psc(ch: ChannelRealization, spec: StrategySpec) -> SurfaceCoefficients:
    """Split the correlation penalty evenly: both users see the same
    absolute phase error, never more than pi/4."""
    d_r = cophase_target(ch, "R")
    d_t = cophase_target(ch, "T")
    diff = d_r - d_t
    mid = 0.5 * (d_r + d_t)
    row = np.select(
        [(diff >= 0) & (diff < math.pi), diff >= math.pi, (diff >= -math.pi) & (diff < 0)],
        [0, 1, 2],
        default=3,
    )
    phi_t = mid + _DP_OFFSET_T[row]
    phi_r = mid - _DP_OFFSET_T[row]
    beta_t, beta_r = _amplitudes(spec, d_r.shape)
    return SurfaceCoefficients(beta_t, beta_r, phi_t, phi_r, _DP_NU[row])


def default_t_group(m: int, fraction: float = 0.5) -> tuple:
    return tuple(range(int(round(fraction * m))))


def tr_psc(ch: ChannelRealization, spec: StrategySpec) -> SurfaceCoefficients:
    """Transmit group serves user T only, the rest reflect to user R only."""
    m = ch.num_elements
    group = spec.t_group if spec.t_group is not None else default_t_group(m, spec.t_group_fraction)
    if any(i < 0 or i >= m for i in group):
        raise IndexError(f"t_group index out of range for M={m}")
    in_t = np.zeros(m, dtype=bool)
    in_t[list(group)] = True
    d_r = cophase_target(ch, "R")
    d_t = cophase_target(ch, "T")
    # unused side keeps the nu=0 companion phase
    phi_t = np.where(in_t, d_t, d_r - _HALF_PI)
    phi_r = np.where(in_t, d_t + _HALF_PI, d_r)
    shape = d_r.shape
    beta_t = np.broadcast_to(in_t.astype(float), shape).copy()
    beta_r = 1.0 - beta_t
    return SurfaceCoefficients(beta_t, beta_r, phi_t, phi_r, np.zeros(shape, dtype=np.int8))


def random_psc(spec: StrategySpec, rng: np.random.Generator, m: int, size=()) -> SurfaceCoefficients:
    """Uniform reflection phases, fair-coin auxiliary bits."""
    shape = (tuple(size) if isinstance(size, tuple) else (int(size),)) + (m,)
    phi_r = rng.uniform(0.0, 2.0 * math.pi, shape)
    nu = rng.integers(0, 2, shape, dtype=np.int8)
    phi_t = phi_r - _HALF_PI - math.pi * nu
    beta_t, beta_r = _amplitudes(spec, shape)
    return SurfaceCoefficients(beta_t, beta_r, phi_t, phi_r, nu)


def independent_psc(ch: ChannelRealization, spec: StrategySpec) -> SurfaceCoefficients:
    """Cophase both users with no phase coupling (performance upper bound)."""
    phi_t = cophase_target(ch, "T")
    phi_r = cophase_target(ch, "R")
    if spec.full_amplitude:
        beta_t = np.ones(phi_t.shape)
        beta_r = np.ones(phi_t.shape)
    else:
        beta_t, beta_r = _amplitudes(spec, phi_t.shape)
    nu = (wrap_phase(phi_r - phi_t) >= math.pi).astype(np.int8)
    return SurfaceCoefficients(beta_t, beta_r, phi_t, phi_r, nu)


def configure(ch: ChannelRealization, spec: StrategySpec, rng=None) -> SurfaceCoefficients:
    if spec.kind == "ps_psc":
        return ps_psc(ch, spec)
    if spec.kind == "dp_psc":
        return dp_psc(ch, spec)
    if spec.kind == "tr_psc":
        return tr_psc(ch, spec)
    if spec.kind == "independent":
        return independent_psc(ch, spec)
    if rng is None:
        raise ValueError("random strategy needs an rng")
    return random_psc(spec, rng, ch.num_elements, ch.batch_shape)
