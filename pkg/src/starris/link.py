"""End-to-end channels and OMA/NOMA rate, threshold and outage evaluation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .surface import SurfaceCoefficients

__all__ = [
    "ConfigError",
    "InfeasibleRateError",
    "MaConfig",
    "LinkOutcome",
    "end_to_end",
    "surface_component",
    "oma_rate",
    "noma_rates",
    "thresholds",
    "outage_event",
    "evaluate",
]


class ConfigError(ValueError):
    pass


class InfeasibleRateError(ConfigError):
    """NOMA target rate of user T cannot be met at any SNR."""


@dataclass(frozen=True)
class MaConfig:
    """Multiple-access settings.  ``c_*_sq`` are power fractions, rates are
    targets in bit/s/Hz, powers are linear."""

    scheme: str = "NOMA"
    c_t_sq: float = 0.6
    c_r_sq: float = 0.4
    rate_t: float = 1.0
    rate_r: float = 1.0
    noise_power: float = 1.0
    p_bs: float = 1.0

    def __post_init__(self):
        scheme = self.scheme.upper()
        if scheme not in ("OMA", "NOMA"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        if self.c_t_sq <= 0 or self.c_r_sq <= 0:
            raise ConfigError("power allocation coefficients must be > 0")
        if self.c_t_sq + self.c_r_sq > 1.0 + 1e-12:
            raise ConfigError("c_t_sq + c_r_sq must not exceed 1")
        if self.rate_t < 0 or self.rate_r < 0:
            raise ConfigError("target rates must be >= 0")
        if self.noise_power <= 0 or self.p_bs <= 0:
            raise ConfigError("noise_power and p_bs must be > 0")
        if scheme == "NOMA" and not self.c_r_sq < self.c_t_sq:
            raise ConfigError("NOMA requires c_r_sq < c_t_sq")

    def c_sq(self, user: str) -> float:
        return self.c_t_sq if user == "T" else self.c_r_sq


@dataclass
class LinkOutcome:
    h_t: np.ndarray
    h_r: np.ndarray
    rates: dict
    outage_t: np.ndarray
    outage_r: np.ndarray


def surface_component(ch: ChannelRealization, c: SurfaceCoefficients, user: str) -> np.ndarray:
    """The surface-only part of the end-to-end channel."""
    h, _ = ch.user_links(user)
    gain = c.complex_gain(user)
    if gain.shape[-1:] != h.shape[-1:]:
        raise ValueError("coefficient and channel element counts differ")
    # np.sum over the last axis is pairwise, hence independent of element order to rounding
    return np.sum(ch.g * h * gain, axis=-1)


def end_to_end(ch: ChannelRealization, c: SurfaceCoefficients, user: str) -> np.ndarray:
    """H = sum_m beta_m |g_m||h_m| exp(j(angle g_m + angle h_m + phi_m)) + h_d."""
    _, h_d = ch.user_links(user)
    out = surface_component(ch, c, user) + h_d
    return complex(out) if np.ndim(out) == 0 else out


def oma_rate(h, user: str, ma: MaConfig):
    snr = ma.p_bs * ma.c_sq(user) * np.abs(h) ** 2 / (ma.noise_power / 2.0)
    return 0.5 * np.log2(1.0 + snr)


def noma_rates(h_t, h_r, ma: MaConfig):
    """Return (R_{R,T}, R_{R,R}, R_{T,T}): user R decoding T's message,
    user R decoding its own after SIC, and user T decoding its own."""
    if not ma.c_r_sq < ma.c_t_sq:
        raise ConfigError("NOMA requires c_r_sq < c_t_sq")
    p, n0 = ma.p_bs, ma.noise_power
    g_r = np.abs(h_r) ** 2
    g_t = np.abs(h_t) ** 2
    r_rt = np.log2(1.0 + p * ma.c_t_sq * g_r / (p * ma.c_r_sq * g_r + n0))
    r_rr = np.log2(1.0 + p * ma.c_r_sq * g_r / n0)
    r_tt = np.log2(1.0 + p * ma.c_t_sq * g_t / (p * ma.c_r_sq * g_t + n0))
    return r_rt, r_rr, r_tt


def thresholds(ma: MaConfig, strict: bool = False):
    """Channel-gain thresholds (tau_t, tau_r); outage iff |H|^2 < tau / P_BS.

    An infeasible NOMA target for user T gives tau = inf (certain outage)
    with a warning, or raises :class:`InfeasibleRateError` when ``strict``.
    """
    n0 = ma.noise_power
    if ma.scheme == "OMA":
        tau_t = (2.0 ** (2 * ma.rate_t) - 1.0) * n0 / (2.0 * ma.c_t_sq)
        tau_r = (2.0 ** (2 * ma.rate_r) - 1.0) * n0 / (2.0 * ma.c_r_sq)
        return tau_t, tau_r
    x_t = 2.0**ma.rate_t - 1.0
    x_r = 2.0**ma.rate_r - 1.0
    denom = ma.c_t_sq - x_t * ma.c_r_sq
    if denom <= 0:
        msg = (
            f"NOMA target rate_t={ma.rate_t} infeasible with c_t_sq={ma.c_t_sq}, "
            f"c_r_sq={ma.c_r_sq}: outage probability is 1"
        )
        if strict:
            raise InfeasibleRateError(msg)
        warnings.warn(msg, RuntimeWarning)
        tau_t = math.inf
    else:
        tau_t = x_t * n0 / denom
    tau_r = max(tau_t, x_r * n0 / ma.c_r_sq)
    return tau_t, tau_r


def outage_event(h, tau: float, p_bs: float):
    """True where |H|^2 < tau / P_BS (strict, so equality is not an outage)."""
    return np.abs(h) ** 2 < tau / p_bs


def evaluate(ch: ChannelRealization, c: SurfaceCoefficients, ma: MaConfig) -> LinkOutcome:
    h_t = end_to_end(ch, c, "T")
    h_r = end_to_end(ch, c, "R")
    tau_t, tau_r = thresholds(ma)
    if ma.scheme == "OMA":
        rates = {"T": oma_rate(h_t, "T", ma), "R": oma_rate(h_r, "R", ma)}
    else:
        r_rt, r_rr, r_tt = noma_rates(h_t, h_r, ma)
        rates = {"R,T": r_rt, "R,R": r_rr, "T,T": r_tt}
    return LinkOutcome(
        h_t, h_r, rates, outage_event(h_t, tau_t, ma.p_bs), outage_event(h_r, tau_r, ma.p_bs)
    )
