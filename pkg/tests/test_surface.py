import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starris.surface import (
    SurfaceCoefficients,
    SurfaceGeometry,
    element_positions,
    read_coefficients_csv,
    validate,
    wrap_phase,
    wrap_signed,
    write_coefficients_csv,
)

S = 1 / math.sqrt(2)


def coeffs(bt, br, pt, pr, nu):
    return SurfaceCoefficients(np.atleast_1d(bt), np.atleast_1d(br), np.atleast_1d(pt), np.atleast_1d(pr), np.atleast_1d(nu))


def test_wrap_ranges():
    x = np.array([-7.0, -2 * np.pi, -1e-18, 0.0, np.pi, 2 * np.pi, 13.0])
    w = wrap_phase(x)
    assert np.all((w >= 0) & (w < 2 * np.pi))
    s = wrap_signed(x)
    assert np.all((s >= -np.pi) & (s < np.pi))


def test_validate_examples():
    assert validate(coeffs(S, S, 0.3, 0.3 + np.pi / 2, 0)).ok
    rep = validate(coeffs(0.6, 0.8, 0.0, np.pi, 0))
    assert not rep.ok and rep.indices("phase") == [(0,)]
    # coupling only binds when both amplitudes are nonzero
    assert validate(coeffs(0.0, 1.0, 0.0, np.pi, 0)).ok


def test_validate_reports_amplitude_and_aux_bit():
    rep = validate(coeffs([S, 0.5], [S, 0.5], [0, 0], [np.pi / 2, np.pi / 2], [0, 0]))
    assert rep.indices("amplitude") == [(1,)]
    rep = validate(coeffs(S, S, 0.0, 3 * np.pi / 2, 0))
    assert rep.indices("aux_bit") == [(0,)] and not rep.indices("phase")
    assert validate(coeffs(S, S, 0.0, 3 * np.pi / 2, 1)).ok


def test_validate_independent_mode_skips_phase():
    c = coeffs(0.6, 0.8, 0.0, np.pi, 0)
    assert validate(c, "independent").ok
    with pytest.raises(ValueError):
        validate(c, "bogus")


def test_validate_length_mismatch():
    c = SurfaceCoefficients(np.ones(2), np.zeros(3), np.zeros(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        validate(c)


def test_phase_tolerance_boundary():
    ok = coeffs(S, S, 0.0, np.pi / 2 + 5e-10, 0)
    bad = coeffs(S, S, 0.0, np.pi / 2 + 5e-9, 0)
    assert validate(ok).ok and not validate(bad).ok


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(-20, 20), st.integers(0, 1))
def test_constructed_coefficients_always_valid(br, phi_r, nu):
    bt = math.sqrt(1 - br * br)
    c = coeffs(bt, br, phi_r - np.pi / 2 - nu * np.pi, phi_r, nu)
    assert validate(c).ok


def test_positions():
    p = element_positions(SurfaceGeometry(1, 1), 0.1)
    assert np.allclose(p, 0)
    p = element_positions(SurfaceGeometry(2, 1), 2.0)
    assert np.allclose(sorted(p[:, 1]), [-0.5, 0.5]) and np.allclose(p[:, [0, 2]], 0)
    lam = 0.1
    p = element_positions(SurfaceGeometry(18, 18), lam)
    assert p.shape == (324, 3)
    assert p[:, 1].max() - p[:, 1].min() == pytest.approx(17 * lam / 2)
    assert np.allclose(p.mean(axis=0), 0, atol=1e-15)


def test_geometry_validation():
    with pytest.raises(ValueError):
        SurfaceGeometry(0, 3)
    with pytest.raises(ValueError):
        element_positions(SurfaceGeometry(2, 2), 0.0)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    br = rng.uniform(0, 1, 7)
    pr = rng.uniform(0, 2 * np.pi, 7)
    nu = rng.integers(0, 2, 7)
    c = coeffs(np.sqrt(1 - br**2), br, pr - np.pi / 2 - nu * np.pi, pr, nu)
    path = tmp_path / "c.csv"
    write_coefficients_csv(c, path)
    header = path.read_text().splitlines()[0]
    assert header == "m,beta_t,beta_r,phi_t,phi_r,nu"
    back = read_coefficients_csv(path)
    for a, b in ((c.beta_r, back.beta_r), (c.phi_t, back.phi_t), (c.phi_r, back.phi_r)):
        assert np.allclose(a, b, rtol=1e-11, atol=1e-11)
    assert np.array_equal(c.nu, back.nu)


def test_rotation_keeps_constraints():
    c = coeffs([S, 1.0], [S, 0.0], [0.1, 2.0], [0.1 + np.pi / 2, 2.0 + np.pi / 2], [0, 0])
    assert validate(c.rotated(1.234)).ok
