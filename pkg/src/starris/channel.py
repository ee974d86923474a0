"""Rician fading links: parameters, moments, sampling and product statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .specfun import DomainError, laguerre_half, marcum_q1

__all__ = [
    "RicianParams",
    "Moments",
    "ChannelRealization",
    "db_to_linear",
    "linear_to_db",
    "rician_moments",
    "rician_pdf",
    "rician_cdf",
    "sample",
    "cascaded_pdf",
    "cascaded_cdf",
    "cascaded_asymptote_slope",
]

SERIES_TERMS = 40
TAIL_CUTOFF = 20.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class RicianParams:
    """One Rician link.

    ``omega`` is E|h|^2 of the small-scale part; the large-scale gain
    ``rho0 * distance_m**-alpha`` multiplies it.  All values are linear.
    """

    k_factor: float
    omega: float = 1.0
    rho0: float = 1.0
    distance_m: float = 1.0
    alpha: float = 2.2

    def __post_init__(self):
        if not self.k_factor >= 0:
            raise ValueError("k_factor must be >= 0")
        for name in ("omega", "rho0", "distance_m", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def pathloss(self) -> float:
        return self.rho0 * self.distance_m ** (-self.alpha)

    @property
    def effective_omega(self) -> float:
        """Mean-square gain including path loss."""
        return self.pathloss * self.omega

    @property
    def los_amplitude(self) -> float:
        return math.sqrt(self.k_factor / (self.k_factor + 1.0) * self.effective_omega)

    @property
    def sigma_sq(self) -> float:
        """Per-dimension variance of the scattered component."""
        return self.effective_omega / (2.0 * (self.k_factor + 1.0))

    def with_omega(self, omega: float) -> "RicianParams":
        return RicianParams(self.k_factor, omega, self.rho0, self.distance_m, self.alpha)


@dataclass(frozen=True)
class Moments:
    mu: float
    var: float
    omega: float


@dataclass
class ChannelRealization:
    """Complex coefficients for one or many trials.

    ``g``, ``h_t`` and ``h_r`` have shape ``batch + (M,)``; the direct links
    have shape ``batch``.  An absent direct link is stored as exact zeros.
    """

    g: np.ndarray
    h_t: np.ndarray
    h_r: np.ndarray
    h_d_t: np.ndarray | complex = 0j
    h_d_r: np.ndarray | complex = 0j
    direct_t_present: bool = True
    direct_r_present: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=complex)
        self.h_t = np.asarray(self.h_t, dtype=complex)
        self.h_r = np.asarray(self.h_r, dtype=complex)
        if not (self.g.shape == self.h_t.shape == self.h_r.shape):
            raise ValueError("g, h_t and h_r must share a shape")
        if self.g.ndim == 0:
            raise ValueError("element channels must have a trailing element axis")
        batch = self.g.shape[:-1]
        self.h_d_t = np.broadcast_to(np.asarray(self.h_d_t, dtype=complex), batch).copy()
        self.h_d_r = np.broadcast_to(np.asarray(self.h_d_r, dtype=complex), batch).copy()
        if not self.direct_t_present:
            self.h_d_t[...] = 0
        if not self.direct_r_present:
            self.h_d_r[...] = 0
        for name in ("g", "h_t", "h_r", "h_d_t", "h_d_r"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def num_elements(self) -> int:
        return self.g.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.g.shape[:-1]

    def user_links(self, user: str):
        """Return (h_elements, h_direct) for user 'T' or 'R'."""
        if user == "T":
            return self.h_t, self.h_d_t
        if user == "R":
            return self.h_r, self.h_d_r
        raise ValueError(f"unknown user {user!r}")


def rician_moments(p: RicianParams) -> Moments:
    """Mean and variance of |h| for a Rician link (path loss included)."""
    k = p.k_factor
    om = p.effective_omega
    mu = 0.5 * math.sqrt(math.pi * om / (k + 1.0)) * laguerre_half(-k)
    var = max(om - mu * mu, 0.0)
    return Moments(mu=mu, var=var, omega=om)


def rician_pdf(x, p: RicianParams):
    x = np.asarray(x, dtype=float)
    s2 = p.sigma_sq
    a = p.los_amplitude
    # exp(-(x-a)^2/2s2) * i0e(xa/s2) == exp(-(x^2+a^2)/2s2) * I0(xa/s2)
    return x / s2 * np.exp(-((x - a) ** 2) / (2 * s2)) * special.i0e(x * a / s2)


def rician_cdf(x, p: RicianParams):
    """Pr{|h| <= x} via the Marcum Q function."""
    x = np.asarray(x, dtype=float)
    a = math.sqrt(2.0 * p.k_factor)
    b = x * np.sqrt(2.0 * (p.k_factor + 1.0) / p.effective_omega)
    return 1.0 - marcum_q1(a, b)


def sample(p: RicianParams, rng: np.random.Generator, n) -> np.ndarray:
    """Draw Rician coefficients with shape ``n`` (int or tuple).

    Each coefficient gets its own uniformly drawn LoS phase, so entries are
    i.i.d. across elements and trials.
    """
    shape = (n,) if np.isscalar(n) else tuple(n)
    if math.prod(shape) == 0:
        return np.zeros(shape, dtype=complex)
    theta = rng.uniform(0.0, 2.0 * np.pi, shape)
    nlos = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    sigma = math.sqrt(p.sigma_sq)
    return p.los_amplitude * np.exp(1j * theta) + sigma * nlos


def _log_k_table(n_max, z):
    """log K_n(z) for n = 0..n_max, stacked along axis 0."""
    out = np.empty((n_max + 1,) + z.shape)
    out[0] = np.log(special.k0e(z)) - z
    ratio = special.k1e(z) / special.k0e(z)
    for n in range(1, n_max + 1):
        if n > 1:
            ratio = 1.0 / ratio + 2.0 * (n - 1) / z
        out[n] = out[n - 1] + np.log(ratio)
    return out


def cascaded_pdf(x, p_h: RicianParams, p_g: RicianParams, beta: float = 1.0):
    """Density of ``beta * |g| * |h|`` for independent Rician g and h.

    Double series over the LoS expansions of both factors, truncated at
    ``SERIES_TERMS`` per index and summed in the log domain.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x_arr)) or np.any(x_arr <= 0):
        raise DomainError("cascaded_pdf is defined for finite x > 0")
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    xs = np.atleast_1d(x_arr).ravel()
    s2h, s2g = p_h.sigma_sq, p_g.sigma_sq
    a_h, a_g = p_h.los_amplitude, p_g.los_amplitude
    n = SERIES_TERMS
    z = xs / beta
    idx = np.arange(n + 1)
    log_fact2 = 2.0 * special.gammaln(idx + 1.0)

    def _series_logs(amp, s2):
        # 2i*log(amp*sqrt(z)/(2 s2)) - 2 log i!, with the amp == 0 case exact
        if amp == 0.0:
            out = np.full((n + 1, z.size), -np.inf)
            out[0] = 0.0
            return out
        base = np.log(amp / (2.0 * s2)) + 0.5 * np.log(z)
        return 2.0 * idx[:, None] * base[None, :] - log_fact2[:, None]

    li = _series_logs(a_h, s2h)
    ll = _series_logs(a_g, s2g)
    log_k = _log_k_table(n, z / math.sqrt(s2h * s2g))
    diff = idx[:, None] - idx[None, :]
    log_terms = (
        li[:, None, :]
        + ll[None, :, :]
        + (0.5 * diff * math.log(s2h / s2g))[:, :, None]
        + log_k[np.abs(diff)]
    )
    log_pref = np.log(xs) - math.log(beta**2 * s2h * s2g) - (p_h.k_factor + p_g.k_factor)
    total = special.logsumexp(log_terms.reshape(-1, z.size), axis=0)
    edge = np.maximum(
        special.logsumexp(log_terms[n], axis=0), special.logsumexp(log_terms[:, n], axis=0)
    )
    if np.any(edge - total > math.log(1e-10)):
        warnings.warn("cascaded_pdf series tail exceeds 1e-10 relative", RuntimeWarning)
    out = np.exp(log_pref + total).reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def cascaded_cdf(t, p_h: RicianParams, p_g: RicianParams, beta: float = 1.0):
    """Pr{beta |g| |h| <= t}, by adaptive quadrature of ``cascaded_pdf``."""
    t_arr = np.asarray(t, dtype=float)
    out = np.empty(t_arr.shape)
    scale = beta * math.sqrt(p_h.effective_omega * p_g.effective_omega)
    for i, tv in np.ndenumerate(t_arr):
        if tv <= 0:
            out[i] = 0.0
            continue
        f = lambda u: cascaded_pdf(u, p_h, p_g, beta)  # noqa: E731
        if tv <= 2.0 * scale:
            val, _ = integrate.quad(f, 0.0, tv, limit=200, epsabs=0.0, epsrel=1e-11)
        elif tv < TAIL_CUTOFF * scale:
            # mass beyond the cutoff is far below double precision for K <= 20
            upper, _ = integrate.quad(
                f, tv, TAIL_CUTOFF * scale, limit=200, epsabs=1e-14, epsrel=1e-11
            )
            val = 1.0 - upper
        else:
            val = 1.0
        out[i] = min(max(val, 0.0), 1.0)
    return float(out) if out.ndim == 0 else out


def cascaded_asymptote_slope(p_h: RicianParams, p_g: RicianParams, beta: float = 1.0) -> float:
    """Coefficient C of the small-x form f(x) ~ C x of the product density."""
    return math.exp(-(p_h.k_factor + p_g.k_factor)) / (beta**2 * p_h.sigma_sq * p_g.sigma_sq)
