import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from starris.channel import (
    ChannelRealization,
    RicianParams,
    cascaded_asymptote_slope,
    cascaded_cdf,
    cascaded_pdf,
    db_to_linear,
    rician_cdf,
    rician_moments,
    rician_pdf,
    sample,
)
from starris.specfun import DomainError

K13 = float(db_to_linear(1.3))


def rician_mean_quadrature(p):
    val, _ = integrate.quad(lambda x: x * rician_pdf(x, p), 0, np.inf, epsabs=0, epsrel=1e-12)
    return val


def test_params_validation_and_pathloss():
    p = RicianParams(1.0, omega=2.0, rho0=1e-3, distance_m=10.0, alpha=2.2)
    assert p.effective_omega == pytest.approx(2.0 * 1e-3 * 10.0**-2.2)
    with pytest.raises(ValueError):
        RicianParams(-1.0)
    with pytest.raises(ValueError):
        RicianParams(1.0, omega=0.0)


def test_moments_rayleigh_and_los_limit():
    m = rician_moments(RicianParams(0.0))
    assert m.mu == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert m.var == pytest.approx(1 - math.pi / 4, rel=1e-13)
    los = rician_moments(RicianParams(1e6))
    assert 0.999 <= los.mu <= 1.0 and los.var < 1e-3


@pytest.mark.parametrize("k", [0.0, 0.3, K13, 5.0, 20.0])
def test_moments_against_density_quadrature(k):
    p = RicianParams(k, omega=1.7, rho0=0.5, distance_m=2.0)
    m = rician_moments(p)
    assert m.mu == pytest.approx(rician_mean_quadrature(p), rel=1e-9)
    assert m.omega == pytest.approx(m.var + m.mu**2, rel=1e-12)


def test_pdf_normalised_and_cdf_consistent():
    p = RicianParams(K13, omega=0.8)
    total, _ = integrate.quad(lambda x: rician_pdf(x, p), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)
    for t in (0.2, 0.9, 2.0):
        val, _ = integrate.quad(lambda x: rician_pdf(x, p), 0, t)
        assert rician_cdf(t, p) == pytest.approx(val, abs=1e-9)


def test_sample_reproducible_and_empty():
    p = RicianParams(K13)
    a = sample(p, np.random.default_rng(5), 3)
    b = sample(p, np.random.default_rng(5), 3)
    assert np.array_equal(a, b)
    assert sample(p, np.random.default_rng(0), 0).shape == (0,)


def test_sample_moments():
    rng = np.random.default_rng(11)
    h = sample(RicianParams(0.0), rng, 1_000_000)
    a = np.abs(h)
    se = a.std() / math.sqrt(a.size)
    assert abs(a.mean() - 0.886227) < 4 * se
    h = sample(RicianParams(K13), rng, 1_000_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.01)


@pytest.mark.parametrize("k", [0.0, 1.0, 10.0])
def test_sample_k_factor_method_of_moments(k):
    # K from the amplitude moments: E|h|^4/E|h|^2^2 = (2 + 4K + K^2)/(1+K)^2
    a2 = np.abs(sample(RicianParams(k), np.random.default_rng(3), 1_000_000)) ** 2
    r = np.mean(a2**2) / np.mean(a2) ** 2
    # solve (r-1)K^2 + (2r-4)K + (r-2) = 0 for the nonnegative root
    disc = (2 * r - 4) ** 2 - 4 * (r - 1) * (r - 2)
    k_hat = max(0.0, (-(2 * r - 4) + math.sqrt(max(disc, 0.0))) / (2 * (r - 1)))
    if k == 0:
        assert k_hat < 0.03
    else:
        assert k_hat == pytest.approx(k, rel=0.03)


def test_sample_elements_independent():
    # per-element LoS phases: the summed LoS power does not scale with M^2
    p = RicianParams(100.0)
    h = sample(p, np.random.default_rng(1), (20000, 16))
    s = np.abs(h.sum(axis=1)) ** 2
    assert np.mean(s) == pytest.approx(16.0, rel=0.05)


def test_realization_shapes_and_absent_direct():
    g = np.ones((3, 4))
    ch = ChannelRealization(g, g, g, 1 + 1j, 2.0, direct_t_present=False)
    assert ch.num_elements == 4 and ch.batch_shape == (3,)
    assert np.all(ch.h_d_t == 0) and np.all(ch.h_d_r == 2.0)
    with pytest.raises(ValueError):
        ChannelRealization(np.ones(3), np.ones(4), np.ones(3))
    with pytest.raises(ValueError):
        ChannelRealization(np.array([np.nan]), np.ones(1), np.ones(1))


def test_cascaded_pdf_normalisation():
    p = RicianParams(1.0)
    val, _ = integrate.quad(lambda x: cascaded_pdf(x, p, p, 1.0), 0, 20.0, limit=200)
    assert val == pytest.approx(1.0, abs=1e-4)


def test_cascaded_pdf_rayleigh_product_closed_form():
    # K=0, Omega=1: f(x) = 4x K0(2x)
    p = RicianParams(0.0)
    x = np.array([0.01, 0.3, 1.0, 2.5])
    assert np.allclose(cascaded_pdf(x, p, p), 4 * x * special.k0(2 * x), rtol=1e-12)


def test_cascaded_pdf_against_convolution_oracle():
    # f_{XY}(z) = int f_X(x) f_Y(z/x)/x dx, with the two Rician densities
    ph, pg = RicianParams(K13, omega=1.3), RicianParams(3.0, omega=0.7)
    for z in (0.2, 0.8, 1.7):
        want, _ = integrate.quad(
            lambda x: rician_pdf(x, ph) * rician_pdf(z / x, pg) / x, 1e-12, 30, limit=400, epsrel=1e-11
        )
        assert cascaded_pdf(z, ph, pg) == pytest.approx(want, rel=1e-8)


def test_cascaded_pdf_beta_scaling():
    p = RicianParams(K13)
    b = 1 / math.sqrt(2)
    x = 0.6
    assert cascaded_pdf(x, p, p, b) == pytest.approx(cascaded_pdf(x / b, p, p, 1.0) / b, rel=1e-12)


def test_cascaded_pdf_matches_samples():
    p_h, p_g = RicianParams(K13), RicianParams(K13)
    rng = np.random.default_rng(7)
    prod = np.abs(sample(p_h, rng, 1_000_000)) * np.abs(sample(p_g, rng, 1_000_000))
    edges = np.quantile(prod, np.linspace(0, 1, 41))
    edges[0], edges[-1] = 1e-9, 25.0
    probs = np.diff(cascaded_cdf(edges, p_h, p_g))
    counts, _ = np.histogram(prod, edges)
    expected = probs / probs.sum() * counts.sum()
    chi2 = np.sum((counts - expected) ** 2 / expected)
    assert stats.chi2.sf(chi2, len(counts) - 1) > 0.01


def test_cascaded_pdf_domain_and_tail_warning():
    p = RicianParams(1.0)
    with pytest.raises(DomainError):
        cascaded_pdf(0.0, p, p)
    with pytest.raises(ValueError):
        cascaded_pdf(1.0, p, p, beta=1.5)
    with pytest.warns(RuntimeWarning):
        cascaded_pdf(2.0, RicianParams(20.0), RicianParams(20.0))


def test_cascaded_cdf_monotone_and_nonnegative():
    p = RicianParams(K13)
    t = np.linspace(0.01, 6, 40)
    c = cascaded_cdf(t, p, p, 0.7)
    assert np.all(np.diff(c) >= -1e-12) and np.all((c >= 0) & (c <= 1))
    assert np.all(cascaded_pdf(t, p, p, 0.7) >= 0)


def test_asymptote_slope_values():
    p0 = RicianParams(0.0)
    assert cascaded_asymptote_slope(p0, p0) == pytest.approx(4.0)
    p1 = RicianParams(1.0)
    assert cascaded_asymptote_slope(p1, p1) == pytest.approx(16 * math.exp(-2), rel=1e-12)
    b = 1 / math.sqrt(2)
    assert cascaded_asymptote_slope(p1, p1, b) == pytest.approx(2 * cascaded_asymptote_slope(p1, p1), rel=1e-12)


def test_asymptote_slope_order_only():
    # near zero the density is C x times a logarithmic factor; the ratio
    # f(x)/(C x) must therefore grow like log(1/x), not converge to 1
    p = RicianParams(K13)
    c = cascaded_asymptote_slope(p, p)
    r = [cascaded_pdf(x, p, p) / (c * x) for x in (1e-2, 1e-4, 1e-6)]
    assert r[0] < r[1] < r[2]
    slope = (math.log(cascaded_pdf(1e-6, p, p)) - math.log(cascaded_pdf(1e-5, p, p))) / math.log(0.1)
    assert slope == pytest.approx(1.0, abs=0.1)
