"""Internal consistency checks between the closed forms, the special
functions and the strategy implementations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import analysis
from .channel import cascaded_pdf, rician_moments
from .montecarlo import RngPlan, draw_realizations
from .psc import configure
from .specfun import marcum_q1
from .surface import validate

__all__ = ["CheckResult", "run_checks", "format_table"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _asymptote_vs_pdf(scn, beta):
    worst = 0.0
    p_h, p_d = scn.links("R")
    if p_d is None:
        return CheckResult("asymptote == integral of small-x pdf", True, "skipped: no direct link")
    tau, p_bs = 1.0, 1e3
    for m in (1, 2, 4):
        closed = analysis.ps_primary_outage_asymptote(scn.p_g, p_h, p_d, m, beta, tau, p_bs, clamp=False)
        quad, _ = integrate.quad(
            lambda x: analysis.primary_asymptotic_pdf(x, scn.p_g, p_h, p_d, m, beta),
            0.0, math.sqrt(tau / p_bs), epsabs=0.0, epsrel=1e-13,
        )
        worst = max(worst, abs(closed - quad) / quad)
    return CheckResult("asymptote == integral of small-x pdf", worst < 1e-10, f"max rel err {worst:.2e}")


def _sum_approx_normalized():
    worst = 0.0
    for delta in (math.pi, math.pi / 2, 0.3):
        ra = analysis.rician_sum_approx(delta, 256, 0.6, 0.5)
        s = math.sqrt(ra.beta_shape_sq)
        hi = ra.alpha_shape + 40.0 * s
        val, _ = integrate.quad(ra.pdf, 0.0, hi, points=[ra.alpha_shape], limit=200, epsrel=1e-10)
        worst = max(worst, abs(val - 1.0))
    return CheckResult("sum-approximation pdf integrates to 1", worst < 1e-6, f"max |1-I| {worst:.2e}")


def _asymptote_slopes(scn, specs):
    p_h, p_d = scn.links("R")
    lo, hi = 1e3, 1e6
    worst = 0.0
    checked = []
    for spec in specs:
        if spec.kind not in ("ps_psc", "tr_psc", "independent"):
            continue
        for user in ("T", "R"):
            if spec.kind == "ps_psc" and user != spec.primary_user:
                continue
            p_h, p_d = scn.links(user)
            if spec.kind == "tr_psc":
                m_t = int(round(spec.t_group_fraction * scn.m))
                m_chi = scn.m - m_t if user == "R" else m_t
                if m_chi == 0:
                    continue
                f = lambda p: analysis.tr_outage_asymptote(scn.p_g, p_h, p_d, m_chi, 1.0, p, clamp=False)  # noqa: E731
                d = analysis.diversity_order("tr", user, scn.m, m_t=m_t, direct_present=p_d is not None)
            else:
                beta = 1.0 if spec.kind == "independent" and spec.full_amplitude else (
                    spec.beta_r if user == "R" else spec.beta_t
                )
                f = lambda p: analysis.ps_primary_outage_asymptote(scn.p_g, p_h, p_d, scn.m, beta, 1.0, p, clamp=False)  # noqa: E731
                d = analysis.diversity_order(
                    spec.kind, user, scn.m, direct_present=p_d is not None, primary=spec.primary_user
                )
            slope = -(math.log(f(hi)) - math.log(f(lo))) / (math.log(hi) - math.log(lo))
            worst = max(worst, abs(slope - float(d)))
            checked.append(f"{spec.kind}/{user}")
    if not checked:
        return CheckResult("asymptote slopes == diversity order", True, "skipped: no asymptotic strategy")
    return CheckResult("asymptote slopes == diversity order", worst < 1e-6, f"{len(checked)} curves, max dev {worst:.1e}")


def _marcum_identity():
    b = np.linspace(0.0, 6.0, 31)
    err = float(np.max(np.abs(marcum_q1(np.zeros_like(b), b) - np.exp(-(b**2) / 2))))
    return CheckResult("Q1(0, b) == exp(-b^2/2)", err < 1e-12, f"max err {err:.1e}")


def _cascaded_normalized(scn, beta):
    p_h = scn.p_h_r
    scale = math.sqrt(p_h.effective_omega * scn.p_g.effective_omega)
    val, _ = integrate.quad(lambda x: cascaded_pdf(x, p_h, scn.p_g, beta), 0.0, 20.0 * scale, limit=200)
    return CheckResult("cascaded pdf integrates to 1", abs(val - 1.0) < 1e-4, f"|1-I| {abs(val - 1.0):.1e}")


def _rician_moments(scn):
    mom = rician_moments(scn.p_h_r)
    err = abs(mom.var + mom.mu**2 - mom.omega) / mom.omega
    return CheckResult("omega == var + mu^2", err < 1e-12, f"rel err {err:.1e}")


def _constraints(scn, specs, seed, n=1000):
    bad = []
    for i, spec in enumerate(specs):
        rng = RngPlan(seed).generator(10_000 + i, 0)
        ch = draw_realizations(scn, rng, n)
        rep = validate(configure(ch, spec, rng), "independent" if spec.kind == "independent" else "constrained")
        if not rep.ok:
            bad.append(f"{spec.kind}:{len(rep.violations)}")
    return CheckResult("strategy outputs satisfy the element constraints", not bad, ", ".join(bad) or f"{n} draws each")


def run_checks(cfg) -> list:
    """Run every check for a :class:`~starris.config.ScenarioConfig`."""
    scn = cfg.scenario()
    specs = cfg.strategies
    beta = cfg.raw["surface"]["beta_r"] or 1.0
    return [
        _asymptote_vs_pdf(scn, beta),
        _sum_approx_normalized(),
        _asymptote_slopes(scn, specs),
        _marcum_identity(),
        _cascaded_normalized(scn, beta),
        _rician_moments(scn),
        _constraints(scn, specs, cfg.seed),
    ]


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.ok else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)
