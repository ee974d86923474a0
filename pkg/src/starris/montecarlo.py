"""Seeded Monte Carlo engine: outage vs SNR, mean power vs M, slope fits.

Trials are split into fixed-size blocks whose size depends only on M.  Block
``b`` of sweep point ``p`` draws from its own Philox stream keyed on
``(seed, p, b)``, and block results are merged in block order, so estimates
are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import analysis
from .channel import ChannelRealization, RicianParams, rician_moments, sample
from .link import MaConfig, end_to_end, surface_component, thresholds
from .psc import StrategySpec, configure, default_t_group

__all__ = [
    "InsufficientDataError",
    "Scenario",
    "RngPlan",
    "SweepResult",
    "direct_for_eta",
    "draw_realizations",
    "channel_gains",
    "estimate_outage",
    "estimate_power",
    "fit_exponent",
    "fit_diversity",
    "wilson_interval",
    "analytic_outage",
    "analytic_power",
]

DIVERSITY_WINDOW = (1e-5, 1e-1)


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Link statistics for one surface size.

    ``random_combining='power'`` scores random-phase outage on
    |h_s|^2 + |h_d|^2 (the analysed quantity); ``'coherent'`` uses |h_s + h_d|^2.
    """

    m: int
    p_g: RicianParams
    p_h_t: RicianParams
    p_h_r: RicianParams
    p_d_t: RicianParams | None = None
    p_d_r: RicianParams | None = None
    ma: MaConfig = field(default_factory=MaConfig)
    random_combining: str = "power"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.random_combining not in ("power", "coherent"):
            raise ValueError("random_combining must be 'power' or 'coherent'")

    def links(self, user: str):
        if user == "T":
            return self.p_h_t, self.p_d_t
        if user == "R":
            return self.p_h_r, self.p_d_r
        raise ValueError(f"unknown user {user!r}")

    def with_m(self, m: int) -> "Scenario":
        return replace(self, m=int(m))


def direct_for_eta(eta: float, p_h: RicianParams, k_d: float) -> RicianParams:
    """Direct link with Rician factor ``k_d`` scaled so E|h_d| = eta E|h_m|."""
    if not eta > 0:
        raise ValueError("eta must be > 0")
    mu_h = rician_moments(p_h).mu
    mu_unit = rician_moments(RicianParams(k_d)).mu
    return RicianParams(k_d, omega=(eta * mu_h / mu_unit) ** 2)


@dataclass(frozen=True)
class RngPlan:
    """Counter-based stream per (sweep point, trial block)."""

    seed: int

    def generator(self, point: int, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(point, block))
        return np.random.Generator(np.random.Philox(ss))


def block_size(m: int) -> int:
    return int(min(65536, max(256, 2**19 // m)))


def _blocks(trials: int, m: int):
    size = block_size(m)
    return [(b, min(size, trials - b * size)) for b in range(math.ceil(trials / size))]


@dataclass
class SweepResult:
    kind: str  # "outage" (axis = SNR dB) or "power" (axis = M)
    strategy: str
    user: str
    axis: np.ndarray
    estimate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    trials: np.ndarray
    analytic: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        if np.any(self.trials < 1):
            raise ValueError("every point needs at least one trial")

    @property
    def x(self) -> np.ndarray:
        """Linear abscissa: SNR as a power ratio, or M."""
        if self.kind == "outage":
            return 10.0 ** (self.axis / 10.0)
        return self.axis.astype(float)


def wilson_interval(k: int, n: int, level: float = 0.95):
    """Wilson score interval; zero observed events fall back to the rule of three."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if k == 0:
        return 0.0, min(1.0, 3.0 / n)
    ci = stats.binomtest(int(k), int(n)).proportion_ci(level, method="wilson")
    return float(ci.low), float(ci.high)


def draw_realizations(scn: Scenario, rng: np.random.Generator, n: int) -> ChannelRealization:
    shape = (n, scn.m)
    g = sample(scn.p_g, rng, shape)
    h_t = sample(scn.p_h_t, rng, shape)
    h_r = sample(scn.p_h_r, rng, shape)
    d_t = sample(scn.p_d_t, rng, n) if scn.p_d_t is not None else 0j
    d_r = sample(scn.p_d_r, rng, n) if scn.p_d_r is not None else 0j
    return ChannelRealization(
        g, h_t, h_r, d_t, d_r, scn.p_d_t is not None, scn.p_d_r is not None
    )


def channel_gains(scn: Scenario, spec: StrategySpec, ch: ChannelRealization, rng) -> dict:
    """|H|^2 per user for a batch of realizations."""
    coeffs = configure(ch, spec, rng)
    out = {}
    for user in ("T", "R"):
        if spec.kind == "random" and scn.random_combining == "power":
            _, h_d = ch.user_links(user)
            out[user] = np.abs(surface_component(ch, coeffs, user)) ** 2 + np.abs(h_d) ** 2
        else:
            out[user] = np.abs(end_to_end(ch, coeffs, user)) ** 2
    return out


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _user_beta(spec: StrategySpec, user: str) -> float:
    if spec.kind == "independent" and spec.full_amplitude:
        return 1.0
    return spec.beta_r if user == "R" else spec.beta_t


def _group_sizes(spec: StrategySpec, m: int):
    group = spec.t_group if spec.t_group is not None else default_t_group(m, spec.t_group_fraction)
    return m - len(group), len(group)


def analytic_outage(scn: Scenario, spec: StrategySpec, user: str, tau: float, p_bs: float) -> float:
    """Closed-form overlay for one SNR point (NaN where no formula applies)."""
    if math.isinf(tau):
        return 1.0
    p_h, p_d = scn.links(user)
    beta = _user_beta(spec, user)
    kind = spec.kind
    if kind == "ps_psc":
        if user != spec.primary_user:
            return math.nan
        return analysis.ps_primary_outage_asymptote(scn.p_g, p_h, p_d, scn.m, beta, tau, p_bs)
    if kind == "independent":
        return analysis.ps_primary_outage_asymptote(scn.p_g, p_h, p_d, scn.m, beta, tau, p_bs)
    if kind == "dp_psc":
        return analysis.dp_outage_upper_bound(scn.p_g, p_h, p_d, scn.m, beta, tau, p_bs)
    if kind == "tr_psc":
        m_r, m_t = _group_sizes(spec, scn.m)
        m_chi = m_r if user == "R" else m_t
        if m_chi == 0:
            return math.nan
        return analysis.tr_outage_asymptote(scn.p_g, p_h, p_d, m_chi, tau, p_bs)
    omega_r = analysis.random_surface_omega(scn.m, rician_moments(scn.p_g), beta, p_h.effective_omega)
    if p_d is None:
        return analysis.random_outage_bound(omega_r, 0.0, None, tau, p_bs)
    return analysis.random_outage_bound(omega_r, p_d.k_factor, p_d.effective_omega, tau, p_bs)


def analytic_power(scn: Scenario, spec: StrategySpec, user: str) -> float:
    p_h, p_d = scn.links(user)
    m_r, m_t = _group_sizes(spec, scn.m)
    return analysis.power_scaling(
        spec.kind,
        user,
        scn.m,
        rician_moments(p_h),
        rician_moments(scn.p_g),
        _user_beta(spec, user),
        rician_moments(p_d) if p_d is not None else None,
        primary=spec.primary_user,
        m_r=m_r,
        m_t=m_t,
    )


def estimate_outage(
    scn: Scenario,
    spec: StrategySpec,
    snr_grid_db,
    trials: int,
    seed: int,
    workers: int = 1,
    with_analytic: bool = True,
    progress: bool = False,
) -> dict:
    """Outage probability per user over a transmit-SNR grid (P_BS / sigma^2 in dB).

    Every SNR point reuses the same channel draws, so curves are smooth and
    monotone in SNR.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    snr_db = np.asarray(snr_grid_db, dtype=float)
    if snr_db.ndim != 1 or snr_db.size == 0:
        raise ValueError("snr grid must be a non-empty vector")
    ma = scn.ma
    taus = dict(zip(("T", "R"), thresholds(ma)))
    p_bs = 10.0 ** (snr_db / 10.0) * ma.noise_power
    plan = RngPlan(seed)

    def run_block(item):
        b, n = item
        rng = plan.generator(0, b)
        gains = channel_gains(scn, spec, draw_realizations(scn, rng, n), rng)
        out = {}
        for user, g2 in gains.items():
            # count of |H|^2 < tau/P, via one sort per block
            out[user] = np.searchsorted(np.sort(g2), taus[user] / p_bs, side="left")
        return out

    blocks = _blocks(trials, scn.m)
    parts = _map(run_block, blocks, workers)
    results = {}
    for user in ("T", "R"):
        counts = np.zeros(snr_db.size, dtype=np.int64)
        for part in parts:
            counts += part[user]
        est = counts / trials
        lo, hi = np.array([wilson_interval(int(k), trials) for k in counts]).T
        if with_analytic:
            ana = np.array([analytic_outage(scn, spec, user, taus[user], p) for p in p_bs])
        else:
            ana = np.full(snr_db.size, np.nan)
        results[user] = SweepResult(
            "outage", spec.kind, user, snr_db, est, lo, hi,
            np.full(snr_db.size, trials), ana, counts,
        )
    if progress:
        print(f"[outage] {spec.kind}: {trials} trials x {snr_db.size} SNR points", file=sys.stderr)
    return results


def estimate_power(
    scn: Scenario,
    spec: StrategySpec,
    m_grid,
    trials: int,
    seed: int,
    workers: int = 1,
    with_analytic: bool = True,
    progress: bool = False,
) -> dict:
    """Mean |H|^2 per user (unit transmit power) over a grid of element counts,
    with normal-approximation 95% intervals."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ms = np.asarray(m_grid, dtype=int)
    if ms.ndim != 1 or ms.size == 0:
        raise ValueError("m grid must be a non-empty vector")
    plan = RngPlan(seed)
    acc = {u: np.zeros((ms.size, 2)) for u in ("T", "R")}
    for i, m in enumerate(ms):
        sub = scn.with_m(m)

        def run_block(item, i=i, sub=sub):
            b, n = item
            rng = plan.generator(i, b)
            gains = channel_gains(sub, spec, draw_realizations(sub, rng, n), rng)
            return {u: (g2.sum(), (g2**2).sum()) for u, g2 in gains.items()}

        for part in _map(run_block, _blocks(trials, int(m)), workers):
            for u in ("T", "R"):
                acc[u][i] += part[u]
        if progress:
            print(f"[power] {spec.kind}: M={m} done", file=sys.stderr)
    results = {}
    for user in ("T", "R"):
        mean = acc[user][:, 0] / trials
        var = np.maximum(acc[user][:, 1] / trials - mean**2, 0.0) * trials / max(trials - 1, 1)
        half = 1.96 * np.sqrt(var / trials)
        if with_analytic:
            ana = np.array([analytic_power(scn.with_m(m), spec, user) for m in ms])
        else:
            ana = np.full(ms.size, np.nan)
        results[user] = SweepResult(
            "power", spec.kind, user, ms, mean, mean - half, mean + half,
            np.full(ms.size, trials), ana,
        )
    return results


def fit_exponent(result: SweepResult, window=None, on: str = "auto"):
    """Least-squares slope of log(estimate) against log(x).

    ``window`` restricts the points used: for outage curves it bounds the
    estimate (default [1e-5, 1e-1]), for power curves it bounds the axis.
    Points with zero observed events are always dropped.  Returns
    (slope, stderr).
    """
    if on == "auto":
        on = "estimate" if result.kind == "outage" else "axis"
    if window is None and result.kind == "outage":
        window = DIVERSITY_WINDOW
    x = result.x
    y = result.estimate
    keep = y > 0
    if result.counts is not None:
        keep &= result.counts > 0
    if window is not None:
        ref = y if on == "estimate" else result.axis
        keep &= (ref >= window[0]) & (ref <= window[1])
    if keep.sum() < 3:
        raise InsufficientDataError(
            f"need >= 3 usable points for a slope fit, got {int(keep.sum())}"
        )
    fit = stats.linregress(np.log(x[keep]), np.log(y[keep]))
    return float(fit.slope), float(fit.stderr)


def fit_diversity(result: SweepResult, window=DIVERSITY_WINDOW):
    """Empirical diversity order: minus the outage slope against P_BS."""
    slope, err = fit_exponent(result, window, on="estimate")
    return -slope, err
