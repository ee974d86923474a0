import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starris.specfun import (
    DomainError,
    bessel_i0,
    bessel_i1,
    bessel_ive_sequence,
    bessel_k,
    laguerre_half,
    log_bessel_k,
    log_factorial,
    marcum_q1,
    sinc_u,
)

mp.mp.dps = 40


def series_i(nu, x, terms=60):
    # power-series oracle at extended precision
    x = mp.mpf(x)
    return sum((x / 2) ** (2 * k + nu) / (mp.factorial(k) * mp.factorial(k + nu)) for k in range(terms))


def marcum_oracle(a, b):
    f = lambda x: x * mp.exp(-(x**2 + a**2) / 2) * mp.besseli(0, a * x)  # noqa: E731
    return float(mp.quad(f, [b, b + 10, mp.inf]))


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 3.0, 10.0, 25.0])
def test_i0_i1_match_series(x):
    assert bessel_i0(x) == pytest.approx(float(series_i(0, x)), rel=1e-10)
    assert bessel_i1(x) == pytest.approx(float(series_i(1, x)), rel=1e-10)


def test_bessel_examples():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520082, rel=1e-12)
    assert bessel_i0(10.0) == pytest.approx(2815.716628466254, rel=1e-12)
    assert bessel_i1(0.0) == 0.0
    assert bessel_i1(0.5) == pytest.approx(0.2578943053908963, rel=1e-12)


def test_scaled_regime_avoids_overflow():
    x = 800.0
    assert math.isinf(bessel_i0(x)) or bessel_i0(x) > 1e300
    want = float(mp.besseli(0, x) * mp.exp(-x))
    assert bessel_i0(x, scaled=True) == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
def test_i0_domain(bad):
    with pytest.raises(DomainError):
        bessel_i0(bad)


def k_integral(n, x):
    # integrand exp(-x cosh t + n t) is below e^-150 past t_max
    t_max = 1.0
    while x * math.cosh(t_max) - n * t_max < 150.0:
        t_max += 0.5
    f = lambda t: mp.exp(-x * mp.cosh(t)) * mp.cosh(n * t)  # noqa: E731
    return float(mp.quad(f, mp.linspace(0, t_max, 8)))


@pytest.mark.parametrize("n", range(0, 7))
@pytest.mark.parametrize("x", [0.05, 1.0, 4.0, 30.0])
def test_bessel_k_vs_integral(n, x):
    assert bessel_k(n, x) == pytest.approx(k_integral(n, x), rel=1e-8)
    assert math.exp(log_bessel_k(n, x)) == pytest.approx(k_integral(n, x), rel=1e-8)


def test_bessel_k_examples_and_recurrence():
    assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-10)
    assert bessel_k(1, 1.0) == pytest.approx(0.6019072301972346, rel=1e-10)
    for x in (0.3, 2.0, 9.0):
        assert bessel_k(2, x) == pytest.approx(bessel_k(0, x) + 2 / x * bessel_k(1, x), rel=1e-12)


def test_log_bessel_k_large_order_small_argument():
    # K_40(1e-3) overflows double precision; the log form does not
    want = float(mp.log(mp.besselk(40, mp.mpf("1e-3"))))
    assert log_bessel_k(40, 1e-3) == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_bessel_k_domain(bad):
    with pytest.raises(DomainError):
        bessel_k(1, bad)


def test_ive_sequence_matches_mpmath():
    x = 7.5
    seq = bessel_ive_sequence(30, x)
    for n in (0, 1, 5, 17, 30):
        assert seq[n] == pytest.approx(float(mp.besseli(n, x) * mp.exp(-x)), rel=1e-10)


def test_marcum_examples():
    assert marcum_q1(3.0, 0.0) == 1.0
    assert marcum_q1(0.0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert marcum_q1(1.0, 2.0) == pytest.approx(0.26901206, abs=1e-8)


@pytest.mark.parametrize(
    "a,b", [(1.0, 2.0), (0.3, 0.1), (2.0, 1.0), (5.0, 5.5), (10.0, 7.0), (12.0, 16.0), (30.0, 29.0), (0.01, 3.0)]
)
def test_marcum_vs_quadrature(a, b):
    assert marcum_q1(a, b) == pytest.approx(marcum_oracle(a, b), abs=1e-9)


def test_marcum_large_arguments_stable():
    # far in both tails; the quadrature oracle at 40 digits is still reliable
    for a, b in ((60.0, 40.0), (40.0, 60.0), (200.0, 199.0)):
        assert marcum_q1(a, b) == pytest.approx(marcum_oracle(a, b), abs=1e-9)


def test_marcum_monotone_grid():
    g = np.linspace(0.0, 5.0, 21)
    a, b = np.meshgrid(g, g, indexing="ij")
    q = marcum_q1(a, b)
    assert np.all((q >= 0) & (q <= 1))
    assert np.all(np.diff(q, axis=1) <= 1e-15)  # non-increasing in b
    assert np.all(np.diff(q, axis=0) >= -1e-15)  # non-decreasing in a


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 20), st.floats(0, 20))
def test_marcum_in_unit_interval(a, b):
    q = marcum_q1(a, b)
    assert 0.0 <= q <= 1.0


def test_marcum_domain():
    with pytest.raises(DomainError):
        marcum_q1(float("nan"), 1.0)
    with pytest.raises(DomainError):
        marcum_q1(1.0, -1.0)


def rician_mean_oracle(k):
    # (2/sqrt(pi)) E|h| for Omega'=1 ... scaled so it equals L_{1/2}(-K) when K=0
    s2 = mp.mpf(1) / (2 * (k + 1))
    a = mp.sqrt(mp.mpf(k) / (k + 1))
    pdf = lambda x: x / s2 * mp.exp(-(x**2 + a**2) / (2 * s2)) * mp.besseli(0, x * a / s2)  # noqa: E731
    mean = mp.quad(lambda x: x * pdf(x), [0, 1, mp.inf])
    return float(mean / (mp.mpf(1) / 2 * mp.sqrt(mp.pi / (k + 1))))


def test_laguerre_half_against_rician_mean_quadrature():
    assert laguerre_half(0.0) == 1.0
    for k in (0.5, 1.0, 1.349, 10.0):
        assert laguerre_half(-k) == pytest.approx(rician_mean_oracle(k), rel=1e-10)
    # independent check against the hypergeometric definition
    assert laguerre_half(-1.0) == pytest.approx(float(mp.laguerre(0.5, 0, -1)), rel=1e-12)
    assert laguerre_half(-1.0) == pytest.approx(1.4464913, rel=1e-7)


def test_laguerre_half_large_k():
    assert laguerre_half(-1e6) == pytest.approx(2 * math.sqrt(1e6 / math.pi), rel=1e-3)


def test_laguerre_half_monotone_and_domain():
    k = np.linspace(0, 50, 200)
    assert np.all(np.diff(laguerre_half(-k)) > 0)
    with pytest.raises(DomainError):
        laguerre_half(0.5)


def test_sinc_u():
    assert sinc_u(0.0) == 1.0
    assert sinc_u(math.pi) == pytest.approx(0.0, abs=1e-15)
    assert sinc_u(math.pi / 2) == pytest.approx(2 / math.pi, rel=1e-15)
    x = np.linspace(-7, 7, 29)
    assert np.allclose(sinc_u(-x), sinc_u(x))


def test_log_factorial():
    assert log_factorial(0) == 0.0
    assert log_factorial(10) == pytest.approx(math.log(math.factorial(10)), rel=1e-14)
    assert log_factorial(600) == pytest.approx(float(mp.log(mp.factorial(600))), rel=1e-14)
