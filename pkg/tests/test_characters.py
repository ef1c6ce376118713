import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radial_euler.affine import AffineMotion, AffineSolution
from radial_euler.characters import (CharacterUndefined, RiccatiCoeffs, character_field,
                                     characters_along_chords, characters_from_gradients,
                                     characters_from_momentum_flux, dh_along_characteristics,
                                     gradients_from_characters, lambda_hat, lambda_tilde,
                                     riccati_coeffs, riccati_rhs, weighted, weighted_rhs)
from radial_euler.gas import DomainError, FlowField, GasParams, uniform_grid
from radial_euler.profiles import SteadyFlow

P2 = GasParams(2.0, 1.0, 1)


def admissible_states(rng, n, low=1e-2):
    """Random (gamma, m, r, h, u) with low (g-1) u/2 <= h <= (g-1) u/2."""
    gamma = rng.uniform(1.01, 2.99, n)
    m = rng.integers(1, 3, n)
    r = rng.uniform(0.05, 20.0, n)
    u = rng.uniform(0.01, 10.0, n)
    h = rng.uniform(low, 1.0, n) * 0.5 * (gamma - 1.0) * u
    return gamma, m, r, h, u


def test_characters_worked_example():
    a, b = characters_from_gradients(1.0, 0.5, 2.0, 0.0, 0.0, P2)
    assert a == pytest.approx(0.4, rel=1e-14)
    assert b == pytest.approx(-2.0 / 3.0, rel=1e-14)


def test_gradient_inversion_round_trip(rng):
    r = rng.uniform(0.5, 3, 50)
    u = rng.uniform(2, 4, 50)
    h = rng.uniform(0.1, 0.9, 50)
    hr, ur = rng.normal(size=50), rng.normal(size=50)
    a, b = characters_from_gradients(r, h, u, hr, ur, P2)
    hr2, ur2 = gradients_from_characters(r, h, u, a, b, P2)
    np.testing.assert_allclose(hr2, hr, atol=1e-12)
    np.testing.assert_allclose(ur2, ur, atol=1e-12)


def test_undefined_at_origin_and_sonic_point():
    with pytest.raises(CharacterUndefined, match="origin"):
        characters_from_gradients(0.0, 0.0, 0.0, 0.0, 0.0, P2)
    with pytest.raises(CharacterUndefined, match="sonic"):
        characters_from_gradients(1.0, 1.0, 1.0, 0.0, 0.0, P2)


def test_riccati_coefficient_worked_example():
    co = riccati_coeffs(1.0, 0.5, 2.0, P2)
    assert co.A1 == pytest.approx(2.5 / (2 * 2.25) * (2 - 0.25), rel=1e-14)
    assert co.A1 == pytest.approx(0.9722222222222222, rel=1e-14)
    assert co.B1 - co.A1 == pytest.approx(0.17777777777777778, rel=1e-13)
    assert co.d1 == pytest.approx(co.B1 - co.A1, rel=1e-13)


@pytest.mark.parametrize("gamma,m", [(1.4, 1), (2.0, 2), (2.5, 1)])
def test_coefficients_small_sound_speed_limit(gamma, m):
    p = GasParams(gamma, 1.0, m)
    u, r = 1.7, 1.3
    co = riccati_coeffs(r, 1e-6, u, p)
    assert co.A1 == pytest.approx((gamma - 1) * m * u / (4 * r), rel=1e-5)
    assert abs(co.B1 - co.A1) < 1e-9


def test_riccati_rhs_homogeneity_and_boundary_sign():
    co = riccati_coeffs(1.0, 0.5, 2.0, P2)
    assert riccati_rhs(0.0, 0.0, co, P2) == (0.0, 0.0)
    for alpha in (0.0, 0.3, 2.0):
        d1b, _ = riccati_rhs(alpha, 0.0, co, P2)
        assert d1b == pytest.approx(co.A1 * alpha)
        assert d1b >= 0.0


def test_riccati_rhs_worked_example():
    zero = RiccatiCoeffs(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    d1b, d2a = riccati_rhs(1.0, 1.0, zero, P2)
    assert d1b == pytest.approx(-1.0) and d2a == pytest.approx(-1.0)


def test_coefficient_identities_and_signs(rng):
    gamma, m, r, h, u = admissible_states(rng, 2000)
    for i in range(gamma.size):
        p = GasParams(gamma[i], 1.0, int(m[i]))
        co = riccati_coeffs(r[i], h[i], u[i], p)
        assert co.B1 - co.A1 == pytest.approx(co.d1, rel=1e-10, abs=1e-300)
        assert co.B2 - co.A2 == pytest.approx(co.d2, rel=1e-10, abs=1e-300)
        assert min(co.A1, co.A2, co.d1, co.d2) >= 0.0


def test_coefficient_identity_near_cold_limit(rng):
    """For h << u the difference B - A cancels; compare at the operand scale."""
    gamma, m, r, h, u = admissible_states(rng, 2000, low=1e-3)
    for i in range(gamma.size):
        p = GasParams(gamma[i], 1.0, int(m[i]))
        co = riccati_coeffs(r[i], h[i], u[i], p)
        assert abs(co.B1 - co.A1 - co.d1) <= 1e-12 * max(abs(co.A1), abs(co.B1))
        assert abs(co.B2 - co.A2 - co.d2) <= 1e-12 * max(abs(co.A2), abs(co.B2))


@settings(max_examples=300, deadline=None)
@given(st.floats(1.05, 2.95), st.integers(1, 2), st.floats(0.1, 5.0), st.floats(0.1, 5.0),
       st.floats(0.01, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_invariant_domain_boundary_flux(gamma, m, r, u, hfrac, s, M):
    """On beta = 0 the 1-rate is non-negative; on alpha = M the 2-rate is non-positive."""
    p = GasParams(gamma, 1.0, m)
    h = hfrac * 0.5 * (gamma - 1.0) * u
    co = riccati_coeffs(r, h, u, p)
    d1b, _ = riccati_rhs(s * M, 0.0, co, p)
    assert d1b >= -1e-12 * max(1.0, abs(co.A1) * M)
    _, d2a = riccati_rhs(M, s * M, co, p)
    assert d2a <= 1e-12 * max(1.0, abs(co.B2) * M + M * M)


def test_weighted_cross_term_vanishes():
    for g in (1.2, 1.4, 2.0, 2.5):
        lam = lambda_tilde(GasParams(g))
        assert 0.25 * (g - 3.0) + 0.5 * (g - 1.0) * lam == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("which", ["plain", "tilde", "hat"])
def test_weighted_rhs_matches_product_rule(which, rng):
    for _ in range(200):
        g = rng.uniform(1.05, 2.95)
        p = GasParams(g, 1.0, int(rng.integers(1, 3)))
        lam = {"plain": 0.0, "tilde": lambda_tilde(p), "hat": lambda_hat(p)}[which]
        u = rng.uniform(0.5, 3.0)
        h = rng.uniform(0.05, 1.0) * 0.5 * (g - 1.0) * u
        r = rng.uniform(0.5, 3.0)
        alpha, beta = rng.normal(size=2)
        co = riccati_coeffs(r, h, u, p)
        d1b, d2a = riccati_rhs(alpha, beta, co, p)
        d1h, d2h = dh_along_characteristics(r, h, u, alpha, beta, p)
        want1 = h ** (-lam) * d1b - lam * h ** (-lam - 1) * d1h * beta
        want2 = h ** (-lam) * d2a - lam * h ** (-lam - 1) * d2h * alpha
        got1, got2 = weighted_rhs(lam, alpha, beta, h, r, u, co, p)
        scale = max(abs(want1), abs(want2), 1.0)
        assert got1 == pytest.approx(want1, abs=1e-10 * scale)
        assert got2 == pytest.approx(want2, abs=1e-10 * scale)


def test_weighted_inputs_validated():
    co = riccati_coeffs(1.0, 0.5, 2.0, P2)
    with pytest.raises(DomainError):
        weighted_rhs(-1.0, 0.0, 0.0, 0.5, 1.0, 2.0, co, P2)
    with pytest.raises(DomainError):
        weighted(1.0, 0.0, 1.0)


def test_dh_along_characteristics_signs():
    assert dh_along_characteristics(1.0, 0.0, 2.0, 0.3, 0.2, P2) == (0.0, 0.0)
    d1h, d2h = dh_along_characteristics(1.0, 0.5, 2.0, 0.0, 0.0, P2)
    assert d1h < 0.0 and d2h < 0.0


def test_momentum_flux_manufactured_field():
    """r^m rho u = C + delta r at frozen time gives closed-form characters."""
    p, C, delta, U = GasParams(2.0, 1.0, 2), 3.0, 0.4, 2.5

    def state(r, t):
        return (C + delta * r) / (r**2 * U), np.full_like(r, U)

    r = np.linspace(1.5, 2.5, 7)
    rho, u = state(r, 0.0)
    h = p.sqrt_kg * rho ** 0.5
    c1, c2 = u - h, u + h
    a, b = characters_along_chords(state, r, 0.0, p, 1e-3)
    np.testing.assert_allclose(a, -delta * c1 / (r**2 * rho * c2), rtol=1e-9)
    np.testing.assert_allclose(b, -delta * c2 / (r**2 * rho * c1), rtol=1e-9)
    a2, b2 = characters_from_momentum_flux(r, rho, u, delta * c1, delta * c2, p)
    np.testing.assert_allclose(a2, a, rtol=1e-9)
    np.testing.assert_allclose(b2, b, rtol=1e-9)


def test_two_character_forms_agree_under_refinement():
    sol = AffineSolution.build(AffineMotion(1.0, 3.0, 1.0, P2), 1.0, limit=1.9)
    r = np.linspace(0.8, 1.6, 9)
    a_ref, b_ref = sol.characters(r, 0.4)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        a, b = characters_along_chords(sol.state, r, 0.4, P2, dt)
        errs.append(max(np.max(np.abs(a - a_ref)), np.max(np.abs(b - b_ref))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.0)


def test_steady_flow_characters_vanish():
    for g, m in [(1.4, 1), (2.0, 2), (2.5, 1)]:
        p = GasParams(g, 1.0, m)
        flow = SteadyFlow.through(p, 1.0, 0.2, 3.0)
        r = uniform_grid(1.0, 3.0, 400)
        chars = character_field(FlowField(0.0, r, *flow(r), p))
        inner = slice(4, -4)
        assert np.max(np.abs(chars.alpha[inner])) < 1e-5
        assert np.max(np.abs(chars.beta[inner])) < 1e-5


def test_character_field_weights():
    p = P2
    r = np.linspace(1.0, 2.0, 50)
    f = FlowField(0.3, r, 0.1 + 0.01 * r, 2.0 + 0.1 * r, p)
    ch = character_field(f)
    at, bt = ch.tilde()
    lam = lambda_tilde(p)
    np.testing.assert_allclose(at, ch.h ** (-lam) * ch.alpha, rtol=1e-14)
    np.testing.assert_allclose(bt, ch.h ** (-lam) * ch.beta, rtol=1e-14)
    ah, _ = ch.hat()
    np.testing.assert_allclose(ah, ch.h ** (-2.0) * ch.alpha, rtol=1e-14)
    abar, _ = ch.bar(C_b=1.5)
    np.testing.assert_allclose(abar, np.exp(-1.5 * 0.3) * ah, rtol=1e-14)
    with pytest.raises(ValueError):
        ch.bar()
