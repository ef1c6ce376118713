import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radial_euler.gas import (CellState, DomainError, FlowField, GasParams, LeftBoundary, Scenario,
                              cell_faces, rho_from_sound_speed, riemann_variables, sound_speed,
                              stretched_grid, supersonic_lower_bound, uniform_grid, wave_speeds)


def test_sound_speed_values():
    p = GasParams(2.0, 1.0, 1)
    assert sound_speed(0.5, p) == pytest.approx(1.0, rel=1e-15)
    assert sound_speed(2.0, p) == pytest.approx(2.0, rel=1e-15)
    assert sound_speed(0.0, p) == 0.0


def test_inverse_sound_speed():
    assert rho_from_sound_speed(1.0, GasParams(2.0)) == pytest.approx(0.5, rel=1e-15)


def test_riemann_variables_values():
    assert riemann_variables(1.0, 3.0, GasParams(2.0)) == pytest.approx((5.0, 1.0))
    assert riemann_variables(0.2, 1.0, GasParams(1.4)) == pytest.approx((2.0, 0.0), abs=1e-14)


def test_wave_speeds_values():
    assert wave_speeds(1.0, 3.0) == (2.0, 4.0)


@pytest.mark.parametrize("gamma", [0.9, 1.0, 3.0, 3.5])
def test_gamma_outside_range_rejected(gamma):
    with pytest.raises(DomainError, match=r"gamma out of \(1,3\)"):
        GasParams(gamma)


def test_bad_parameters_rejected():
    with pytest.raises(DomainError):
        GasParams(2.0, K=0.0)
    with pytest.raises(DomainError):
        GasParams(2.0, m=3)
    with pytest.raises(DomainError):
        sound_speed(-1.0, GasParams(2.0))
    with pytest.raises(DomainError):
        CellState(-1.0, 1.0, GasParams(2.0))


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-8, 1e3), st.floats(1.05, 2.95), st.floats(0.1, 10.0))
def test_density_round_trip(rho, gamma, K):
    p = GasParams(gamma, K)
    assert rho_from_sound_speed(sound_speed(rho, p), p) == pytest.approx(rho, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e2), st.floats(1.05, 2.95), st.floats(1.0, 3.0))
def test_supersonic_states_have_positive_speeds(rho, gamma, excess):
    p = GasParams(gamma)
    u = excess * float(supersonic_lower_bound(rho, p))
    s = CellState(rho, u, p)
    assert s.z >= -1e-12 * u
    assert s.c1 >= (3.0 - gamma) / (gamma - 1.0) * s.h * (1 - 1e-12)
    assert s.c1 > 0.0
    assert s.w - s.z == pytest.approx(4.0 * s.h / (gamma - 1.0), rel=1e-12)


def test_flow_field_validation():
    p = GasParams(2.0)
    r = np.linspace(1.0, 2.0, 5)
    with pytest.raises(DomainError):
        FlowField(0.0, r[::-1], np.ones(5), np.ones(5), p)
    with pytest.raises(DomainError):
        FlowField(0.0, r, -np.ones(5), np.ones(5), p)
    with pytest.raises(DomainError):
        FlowField(0.0, r, np.ones(5), np.full(5, np.nan), p)
    f = FlowField(0.0, r, np.ones(5), np.ones(5), p)
    with pytest.raises(ValueError):
        f.rho[0] = 2.0


def test_flow_field_derived_quantities():
    p = GasParams(2.0)
    f = FlowField(0.0, np.linspace(1, 2, 4), np.full(4, 0.5), np.full(4, 3.0), p)
    np.testing.assert_allclose(f.h, 1.0)
    np.testing.assert_allclose(f.w, 5.0)
    np.testing.assert_allclose(f.z, 1.0)
    np.testing.assert_allclose(f.c1, 2.0)
    np.testing.assert_allclose(f.c2, 4.0)


def test_grids():
    r = uniform_grid(1.0, 2.0, 10)
    assert r.size == 10 and r[0] == pytest.approx(1.05) and r[-1] == pytest.approx(1.95)
    faces = cell_faces(r)
    assert faces.size == 11
    assert faces[0] == pytest.approx(1.0) and faces[-1] == pytest.approx(2.0)
    s = stretched_grid(0.9, 1.5, (1.17, 1.32), 1e-3, 1e-2)
    assert np.all(np.diff(s) > 0)
    inside = s[(s > 1.18) & (s < 1.31)]
    spacing = np.diff(inside)
    np.testing.assert_allclose(spacing, spacing[0], rtol=1e-9)
    assert 0.99e-3 <= spacing[0] <= 1e-3
    assert np.max(np.diff(s)) < 1.5e-2


def _scenario(u_scale=3.0, C0=10.0):
    p = GasParams(2.0)
    return Scenario(p, 1.0, 2.0, 1.0, lambda r: (np.full_like(r, 0.5), u_scale * np.ones_like(r)),
                    C0, LeftBoundary.DEPENDENCE_CONE)


def test_assumption_check():
    assert _scenario().check_assumption().ok
    rep = _scenario(u_scale=1.0).check_assumption()
    assert not rep.ok
    assert "subsonic" in rep.describe() or "violation" in rep.describe()
    assert not _scenario(C0=2.0).check_assumption().ok


def test_scenario_validation():
    p = GasParams(2.0)
    with pytest.raises(DomainError):
        Scenario(p, 2.0, 1.0, 1.0, lambda r: r, 1.0)
    with pytest.raises(DomainError):
        Scenario(p, 1.0, 2.0, 1.0, lambda r: r, 1.0, LeftBoundary.CHARACTERISTIC)
