"""Closed-form outage asymptotes, bounds, diversity orders and power
scaling laws for the configuration strategies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .channel import Moments, RicianParams, cascaded_cdf, rician_cdf
from .specfun import log_factorial, marcum_q1, sinc_u

__all__ = [
    "AnalyticPrediction",
    "RicianApprox",
    "clamp_outage",
    "ps_primary_outage_asymptote",
    "primary_asymptotic_pdf",
    "dp_outage_upper_bound",
    "tr_outage_asymptote",
    "random_surface_omega",
    "random_outage_bound",
    "diversity_order",
    "power_scaling",
    "rician_sum_approx",
    "ASYMPTOTE_VALID_BELOW",
]

ASYMPTOTE_VALID_BELOW = 0.1


@dataclass(frozen=True)
class AnalyticPrediction:
    kind: str  # outage_asymptote | outage_bound | power_scaling | pdf
    strategy: str
    user: str
    value: float
    raw: float
    exceeded_one: bool = False
    validity: str = ""


def clamp_outage(raw: float) -> tuple[float, bool]:
    """Clamp an outage formula to [0, 1]; the flag marks raw values above 1."""
    return min(max(raw, 0.0), 1.0), raw > 1.0


def _predict(kind, strategy, user, raw):
    value, over = clamp_outage(raw)
    if kind == "outage_asymptote":
        validity = "asymptotic" if raw < ASYMPTOTE_VALID_BELOW else "asymptote outside validity range"
    else:
        validity = "upper bound"
    return AnalyticPrediction(kind, strategy, user, value, raw, over, validity)


def _log_cophased_coeff(p_g, p_h, p_d, m, beta):
    """log of the coefficient multiplying (tau/P)^(order) in the cophased-sum
    asymptote, and the order itself."""
    k_h, k_g = p_h.k_factor, p_g.k_factor
    om_h, om_g = p_h.effective_omega, p_g.effective_omega
    log_c = (
        m * math.log(2.0)
        + m * (math.log1p(k_h) + math.log1p(k_g) - math.log(om_h) - math.log(om_g))
        - 2.0 * m * math.log(beta)
        - m * (k_h + k_g)
    )
    order = m
    if p_d is not None:
        k_d = p_d.k_factor
        log_c += math.log(2.0) + math.log1p(k_d) - math.log(p_d.effective_omega) - k_d
        order += 1
    return log_c - log_factorial(2 * order), order


def ps_primary_outage_asymptote(
    p_g: RicianParams,
    p_h: RicianParams,
    p_d: RicianParams | None,
    m: int,
    beta_r: float,
    tau: float,
    p_bs: float,
    clamp: bool = True,
) -> float:
    """High-SNR outage of a cophased user (the PS-PSC primary user).

    (2^{M+1} (K_h+1)^M (K_g+1)^M (K_d+1)) / ((2M+2)! Omega_h^M Omega_g^M Omega_d)
    * beta^{-2M} * exp(-M K_h - M K_g - K_d) * (tau/P)^{M+1}

    Evaluated in log space so that large M does not overflow.  Without a
    direct link the direct-link factor is dropped and the order becomes M.
    """
    if tau <= 0:
        return 0.0
    if math.isinf(tau):
        return 1.0
    log_c, order = _log_cophased_coeff(p_g, p_h, p_d, m, beta_r)
    raw = math.exp(min(log_c + order * math.log(tau / p_bs), 700.0))
    return clamp_outage(raw)[0] if clamp else raw


def primary_asymptotic_pdf(x, p_g, p_h, p_d, m, beta_r):
    """Small-x density of |H| for the cophased user:
    coefficient * x^{2M+1} / (2M+1)!, computed in plain arithmetic."""
    x = np.asarray(x, dtype=float)
    k_h, k_g, k_d = p_h.k_factor, p_g.k_factor, p_d.k_factor
    coef = (
        2.0 ** (m + 1)
        * (k_h + 1.0) ** m
        * (k_g + 1.0) ** m
        * (k_d + 1.0)
        / (beta_r ** (2 * m) * p_h.effective_omega**m * p_g.effective_omega**m * p_d.effective_omega)
        * math.exp(-m * k_h - m * k_g - k_d)
    )
    return coef * x ** (2 * m + 1) / math.factorial(2 * m + 1)


def dp_outage_upper_bound(
    p_g: RicianParams,
    p_h: RicianParams,
    p_d: RicianParams | None,
    m: int,
    beta: float,
    tau: float,
    p_bs: float,
    include_beta: bool = True,
) -> float:
    """Product bound F^M * Pr{|h_d| <= sqrt(tau/P)} for diversity-preserving
    configurations, where F = Pr{beta |g||h| <= sqrt(tau/P)}.

    Valid because every surface term lies within pi/4 of the direct-link
    phase, so |H| below the threshold forces each term below it.
    ``include_beta=False`` drops beta from F, which is tighter but no longer
    a bound when beta < 1.
    """
    if tau <= 0:
        return 0.0
    if math.isinf(tau):
        return 1.0
    t = math.sqrt(tau / p_bs)
    f = cascaded_cdf(t, p_h, p_g, beta if include_beta else 1.0)
    direct = 1.0 if p_d is None else float(rician_cdf(t, p_d))
    return min(1.0, f**m * direct)


def tr_outage_asymptote(
    p_g: RicianParams,
    p_h: RicianParams,
    p_d: RicianParams | None,
    m_chi: int,
    tau: float,
    p_bs: float,
    literal: bool = False,
    clamp: bool = True,
) -> float:
    """Group-split outage asymptote: the cophased form with M -> M_chi and
    unit amplitude.

    ``literal=True`` evaluates the alternative printed form instead: no BS-link
    factors, a beta^{-M_chi/2} amplitude term (beta = 1 here, so it drops out)
    and K_h standing in for the undefined exponent symbol.
    """
    if not literal:
        return ps_primary_outage_asymptote(p_g, p_h, p_d, m_chi, 1.0, tau, p_bs, clamp)
    if tau <= 0:
        return 0.0
    k_h, k_d = p_h.k_factor, p_d.k_factor
    log_c = (
        (m_chi + 1) * math.log(2.0)
        + m_chi * math.log1p(k_h)
        + math.log1p(k_d)
        - log_factorial(2 * m_chi + 2)
        - m_chi * math.log(p_h.effective_omega)
        - math.log(p_d.effective_omega)
        - m_chi * k_h
        - k_d
    )
    raw = math.exp(min(log_c + (m_chi + 1) * math.log(tau / p_bs), 700.0))
    return clamp_outage(raw)[0] if clamp else raw


def _g_moments(g):
    """(E|g|, E|g|^2) from a deterministic magnitude or a Moments record."""
    if isinstance(g, Moments):
        return g.mu, g.omega
    return float(g), float(g) ** 2


def random_surface_omega(m: int, g, beta: float, omega_h: float) -> float:
    """Mean-square gain of the surface term under random phases."""
    _, g_ms = _g_moments(g)
    return m * g_ms * beta**2 * omega_h


def random_outage_bound(omega_r, k_d, omega_d, tau, p_bs) -> float:
    """(1 - exp(-tau/(Omega_r P))) (1 - Q1(sqrt(2K_d), sqrt(2 tau (K_d+1)/(Omega_d P))))."""
    if tau <= 0:
        return 0.0
    if math.isinf(tau):
        return 1.0
    surf = -math.expm1(-tau / (omega_r * p_bs))
    if omega_d is None:
        return surf
    direct = 1.0 - marcum_q1(math.sqrt(2.0 * k_d), math.sqrt(2.0 * tau * (k_d + 1.0) / (omega_d * p_bs)))
    return surf * direct


def _kind(strategy):
    from .psc import StrategySpec

    return StrategySpec(strategy).kind


def _group_sizes(m, m_r, m_t):
    if m_t is None and m_r is None:
        m_t = int(round(m / 2))
    if m_t is None:
        m_t = m - m_r
    if m_r is None:
        m_r = m - m_t
    return m_r, m_t


def diversity_order(
    strategy: str,
    user: str,
    m: int,
    m_r: int | None = None,
    m_t: int | None = None,
    direct_present: bool = True,
    primary: str = "R",
) -> Fraction:
    """Outage diversity order of ``user`` under ``strategy``."""
    kind = _kind(strategy)
    if user not in ("T", "R"):
        raise ValueError(f"unknown user {user!r}")
    d = 1 if direct_present else 0
    if kind in ("dp_psc", "independent"):
        return Fraction(m + d)
    if kind == "ps_psc":
        if user == primary:
            return Fraction(m + d)
        return Fraction(m + 1 + 2 * d, 2)
    if kind == "tr_psc":
        m_r, m_t = _group_sizes(m, m_r, m_t)
        return Fraction((m_r if user == "R" else m_t) + d)
    # random phases: Rayleigh-like surface term plus the direct link
    return Fraction(1 + d)


def power_scaling(
    strategy: str,
    user: str,
    m: int,
    h: Moments,
    g,
    beta: float,
    direct: Moments | None = None,
    primary: str = "R",
    m_r: int | None = None,
    m_t: int | None = None,
) -> float:
    """Mean received power E|H|^2 (unit transmit power) predicted by the
    scaling laws.

    ``g`` is either the deterministic magnitude |g| or the BS-link Moments; in
    the latter case the summand moments use E|g| and E|g|^2 separately.
    """
    kind = _kind(strategy)
    g_mu, g_ms = _g_moments(g)
    e_d = direct.mu if direct is not None else 0.0
    e_d2 = direct.omega if direct is not None else 0.0
    if kind == "tr_psc":
        m_r, m_t = _group_sizes(m, m_r, m_t)
        m = m_r if user == "R" else m_t
        beta = 1.0
    mu = beta * g_mu * h.mu
    ms = beta**2 * g_ms * h.omega
    var = ms - mu**2
    if kind == "random":
        return m * ms + e_d2
    if kind == "dp_psc":
        return 8.0 / math.pi**2 * m**2 * mu**2 + (1.0 - 2.0 / math.pi) * m * var
    lead = m**2 * mu**2
    if kind == "ps_psc" and user != primary:
        lead *= 4.0 / math.pi**2
    return lead + m * (var + 2.0 * mu * e_d) + e_d2


@dataclass(frozen=True)
class RicianApprox:
    """Rician approximation of a sum of M terms whose phases spread over a
    sector of width Delta."""

    alpha_shape: float
    beta_shape_sq: float
    degenerate: bool = False

    def pdf(self, x):
        if self.degenerate:
            raise ValueError("degenerate approximation is a point mass at alpha_shape")
        x = np.asarray(x, dtype=float)
        a, s2 = self.alpha_shape, self.beta_shape_sq
        return x / s2 * np.exp(-((x - a) ** 2) / (2.0 * s2)) * special.i0e(x * a / s2)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            return (x >= self.alpha_shape).astype(float)
        s = math.sqrt(self.beta_shape_sq)
        return 1.0 - marcum_q1(self.alpha_shape / s, np.maximum(x, 0.0) / s)

    def mean_square(self) -> float:
        return self.alpha_shape**2 + 2.0 * self.beta_shape_sq


def rician_sum_approx(delta: float, m: int, mu_term: float, omega_term: float) -> RicianApprox:
    """Shape factors alpha = M mu sinc(Delta/2), beta^2 = (M/2) omega (1 - sinc(Delta)).

    ``mu_term`` and ``omega_term`` are E|X| and E|X|^2 of one summand.
    """
    if delta > math.pi:
        raise ValueError("phase spread must not exceed pi")
    if delta <= 0:
        return RicianApprox(m * mu_term, 0.0, degenerate=True)
    alpha = m * mu_term * sinc_u(delta / 2.0)
    beta_sq = 0.5 * m * omega_term * (1.0 - sinc_u(delta))
    if beta_sq <= 0:
        return RicianApprox(alpha, 0.0, degenerate=True)
    return RicianApprox(alpha, beta_sq)


def outage_prediction(kind, strategy, user, raw) -> AnalyticPrediction:
    return _predict(kind, strategy, user, raw)
