"""Rarefaction/compression characters and their Riccati dynamics.

alpha tracks 2-family rarefaction, beta 1-family rarefaction. Both vanish on
stationary flows, where r^m rho u is constant. Along the characteristics
d1 = d/dt + c1 d/dr and d2 = d/dt + c2 d/dr they obey Riccati equations
whose coefficients depend only on (r, h, u).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .gas import DomainError, FlowField, GasParams, sound_speed
from .stencils import radial_derivative

SONIC_RTOL = 1e-12


class CharacterUndefined(DomainError):
    """Characters are undefined at sonic points and at the origin."""


def _arrays(*xs):
    # float64 at least; extended-precision inputs keep their precision
    return [np.asarray(x, dtype=np.result_type(np.asarray(x).dtype, np.float64)) for x in xs]


def _out(x):
    if np.ndim(x) == 0 and np.asarray(x).dtype != object:
        return float(x)
    return x


def defined_mask(r, h, u):
    """True where r > 0 and both wave speeds clear the sonic guard."""
    r, h, u = _arrays(r, h, u)
    scale = SONIC_RTOL * np.maximum(np.maximum(np.abs(u), h), 1.0)
    return (r > 0.0) & (np.abs(u - h) > scale) & (np.abs(u + h) > scale)


def _require_defined(r, h, u):
    ok = defined_mask(r, h, u)
    if not np.all(ok):
        i = int(np.flatnonzero(~np.atleast_1d(ok))[0])
        rr = float(np.ravel(np.broadcast_to(r, np.shape(ok)))[i]) if np.ndim(ok) else float(r)
        where = "at origin" if rr <= 0.0 else "at sonic point"
        raise CharacterUndefined(f"characters undefined {where} (index {i}, r={rr:g})")


def characters_from_gradients(r, h, u, h_r, u_r, params: GasParams):
    """alpha = u_r + 2h_r/(g-1) + (m/r) h u/c2, beta = u_r - 2h_r/(g-1) - (m/r) h u/c1."""
    r, h, u, h_r, u_r = _arrays(r, h, u, h_r, u_r)
    _require_defined(r, h, u)
    k = params.riemann_factor
    geo = params.m * h * u / r
    alpha = u_r + k * h_r + geo / (u + h)
    beta = u_r - k * h_r - geo / (u - h)
    return _out(alpha), _out(beta)


def gradients_from_characters(r, h, u, alpha, beta, params: GasParams):
    """Invert the character definitions: return (h_r, u_r)."""
    r, h, u, alpha, beta = _arrays(r, h, u, alpha, beta)
    g = params.gamma
    geo = params.m * u * h / r
    c1, c2 = u - h, u + h
    h_r = 0.25 * (g - 1.0) * (alpha - beta - geo * (1.0 / c1 + 1.0 / c2))
    u_r = 0.5 * (alpha + beta - geo * (1.0 / c2 - 1.0 / c1))
    return _out(h_r), _out(u_r)


def momentum_flux(r, rho, u, params: GasParams):
    """r^m rho u, the quantity that is constant on stationary flows."""
    r, rho, u = _arrays(r, rho, u)
    return r ** params.m * rho * u


def characters_from_momentum_flux(r, rho, u, d1_flux, d2_flux, params: GasParams):
    """alpha = -d1(r^m rho u)/(r^m rho c2), beta = -d2(r^m rho u)/(r^m rho c1)."""
    r, rho, u, d1_flux, d2_flux = _arrays(r, rho, u, d1_flux, d2_flux)
    h = np.asarray(sound_speed(rho, params))
    _require_defined(r, h, u)
    w = r ** params.m * rho
    return _out(-d1_flux / (w * (u + h))), _out(-d2_flux / (w * (u - h)))


def characters_along_chords(state: Callable, r, t: float, params: GasParams, dt: float):
    """Momentum-flux characters with d1, d2 taken as centred differences
    along straight characteristic chords of half-length ``dt``.

    ``state(r, t)`` must return ``(rho, u)`` arrays for arrays of radii.
    """
    r = np.asarray(r, dtype=float)
    rho, u = _arrays(*state(r, t))
    h = np.asarray(sound_speed(rho, params))
    derivs = []
    for c in (u - h, u + h):
        fwd = momentum_flux(r + c * dt, *state(r + c * dt, t + dt), params)
        bwd = momentum_flux(r - c * dt, *state(r - c * dt, t - dt), params)
        derivs.append((fwd - bwd) / (2.0 * dt))
    return characters_from_momentum_flux(r, rho, u, derivs[0], derivs[1], params)


@dataclass(frozen=True)
class RiccatiCoeffs:
    A1: np.ndarray
    B1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def _exact_like(x, value):
    """``value`` in the arithmetic of array ``x`` (Fraction for object arrays)."""
    if x.dtype == object:
        return Fraction(value)
    return x.dtype.type(value)


def riccati_coeffs(r, h, u, params: GasParams) -> RiccatiCoeffs:
    # integer constants keep the formulas exact for Fraction inputs
    r, h, u = _arrays(r, h, u)
    _require_defined(r, h, u)
    g, m = _exact_like(r, params.gamma), params.m
    c1, c2 = u - h, u + h
    q = (g - 1) / 2 * u * u - h * h
    A1 = m * c2 / (2 * r * c1**2) * q
    A2 = m * c1 / (2 * r * c2**2) * q
    k = (g - 1) / 4
    B1 = m / (r * c1**2) * (
        k * u**3 - h**3 / 2 - k * u * u * h + u * h * h / 2
        + h * u * c1 / c2 * (h + (g - 1) / 2 * u)
    )
    B2 = m / (r * c2**2) * (
        k * u**3 + h**3 / 2 + k * u * u * h + u * h * h / 2
        + h * u * c2 / c1 * (h - (g - 1) / 2 * u)
    )
    uh2 = (u * h) ** 2
    d1 = (3 - g) * m * uh2 / (r * c1**2 * c2)
    d2 = (3 - g) * m * uh2 / (r * c2**2 * c1)
    return RiccatiCoeffs(*(_out(x) for x in (A1, B1, A2, B2, d1, d2)))


def riccati_rhs(alpha, beta, coeffs: RiccatiCoeffs, params: GasParams):
    """Return (d1 beta, d2 alpha)."""
    alpha, beta = _arrays(alpha, beta)
    g = params.gamma
    cross = 0.25 * (3.0 - g) * alpha * beta
    d1_beta = -0.25 * (1.0 + g) * beta**2 - cross + coeffs.A1 * alpha - coeffs.B1 * beta
    d2_alpha = -0.25 * (1.0 + g) * alpha**2 - cross + coeffs.A2 * beta - coeffs.B2 * alpha
    return _out(d1_beta), _out(d2_alpha)


def dh_along_characteristics(r, h, u, alpha, beta, params: GasParams):
    """Return (d1 h, d2 h)."""
    r, h, u, alpha, beta = _arrays(r, h, u, alpha, beta)
    _require_defined(r, h, u)
    k = 0.5 * (params.gamma - 1.0)
    geo = params.m * u * u * h / r
    d1h = -k * geo / (u + h) - k * h * alpha
    d2h = -k * geo / (u - h) - k * h * beta
    return _out(d1h), _out(d2h)


def lambda_tilde(params: GasParams) -> float:
    """Weight that removes the alpha*beta cross term: (3-g)/(2(g-1))."""
    return (3.0 - params.gamma) / (2.0 * (params.gamma - 1.0))


def lambda_hat(params: GasParams) -> float:
    return 2.0 / (params.gamma - 1.0)


LAMBDA_PRESETS = {
    "plain": lambda p: 0.0,
    "tilde": lambda_tilde,
    "hat": lambda_hat,
}


def weighted(x, h, lam: float):
    """h^(-lam) x."""
    x, h = _arrays(x, h)
    if np.any(h <= 0.0):
        raise DomainError("weighted characters need h > 0 (vacuum)")
    return _out(h ** (-lam) * x)


def weighted_rhs(lam: float, alpha, beta, h, r, u, coeffs: RiccatiCoeffs, params: GasParams):
    """Return (d1 (h^-lam beta), d2 (h^-lam alpha)) for any lam >= 0."""
    if lam < 0.0:
        raise DomainError("weight exponent must be non-negative")
    alpha, beta, h, r, u = _arrays(alpha, beta, h, r, u)
    if np.any(h <= 0.0):
        raise DomainError("weighted characters need h > 0 (vacuum)")
    g, m = params.gamma, params.m
    hl = h**lam
    wa, wb = alpha / hl, beta / hl
    cross = (0.25 * (g - 3.0) + 0.5 * (g - 1.0) * lam) * hl * wa * wb
    stretch = 0.5 * (g - 1.0) * lam * m * u * u / r
    d1 = (-0.25 * (1.0 + g) * hl * wb**2 + cross + coeffs.A1 * wa - coeffs.B1 * wb
          + stretch / (u + h) * wb)
    d2 = (-0.25 * (1.0 + g) * hl * wa**2 + cross + coeffs.A2 * wb - coeffs.B2 * wa
          + stretch / (u - h) * wa)
    return _out(d1), _out(d2)


@dataclass(frozen=True, eq=False)
class CharacterField:
    """alpha, beta and their weighted variants on a snapshot grid.

    Entries where characters are undefined hold NaN and are False in
    ``defined``.
    """

    t: float
    r: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    h: np.ndarray
    defined: np.ndarray
    params: GasParams
    C_b: Optional[float] = None

    def tilde(self):
        lam = lambda_tilde(self.params)
        return self._weight(lam)

    def hat(self):
        return self._weight(lambda_hat(self.params))

    def bar(self, C_b: Optional[float] = None):
        C_b = self.C_b if C_b is None else C_b
        if C_b is None:
            raise ValueError("bar variables need the ledger constant C_b")
        a_hat, b_hat = self.hat()
        s = np.exp(-C_b * self.t)
        return s * a_hat, s * b_hat

    def _weight(self, lam):
        out = []
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(self.h > 0.0, self.h ** (-lam), np.nan)
        for x in (self.alpha, self.beta):
            out.append(np.where(self.defined, x * scale, np.nan))
        return tuple(out)


def character_field(field: FlowField, mask: Optional[np.ndarray] = None) -> CharacterField:
    """Gradient-form characters of a snapshot (4th-order interior stencils)."""
    r, h, u = field.r, field.h, field.u
    ok = defined_mask(r, h, u)
    if mask is not None:
        ok &= mask
    h_r = radial_derivative(h, r)
    u_r = radial_derivative(u, r)
    alpha = np.full(r.shape, np.nan)
    beta = np.full(r.shape, np.nan)
    if np.any(ok):
        a, b = characters_from_gradients(r[ok], h[ok], u[ok], h_r[ok], u_r[ok], field.params)
        alpha[ok], beta[ok] = a, b
    return CharacterField(field.t, r, alpha, beta, h, ok, field.params)
