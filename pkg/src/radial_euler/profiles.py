"""Initial data built in character space, plus the steady Bernoulli oracle.

The hypotheses of the existence and blowup results are stated on the
initial characters, so data are produced by prescribing alpha_0(r) and
beta_0(r) (optionally through a weight h^lam) and integrating

    (h_r, u_r) = gradients_from_characters(r, h, u, alpha_0, beta_0)

outward from a given state at the left edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .affine import AffineMotion, AffineSolution, check_admissibility
from .characters import gradients_from_characters
from .gas import DomainError, GasParams, LeftBoundary, Scenario, rho_from_sound_speed
from .ode import IntegrationError, Trajectory, dopri5


# --------------------------------------------------------------------------
# steady supersonic flow


@dataclass(frozen=True)
class SteadyFlow:
    """Stationary solution with r^m rho u = Q and u^2/2 + h^2/(g-1) = E.

    The supersonic branch is selected; it exists for r >= ``sonic_radius``.
    """

    params: GasParams
    Q: float
    E: float

    @classmethod
    def through(cls, params: GasParams, r0: float, rho0: float, u0: float):
        h0 = params.sqrt_kg * rho0 ** (0.5 * (params.gamma - 1.0))
        if not u0 > h0:
            raise DomainError("steady flow must be supersonic at the anchor point")
        return cls(params, r0**params.m * rho0 * u0, 0.5 * u0 * u0 + h0 * h0 / (params.gamma - 1.0))

    def _flux_density(self, u):
        g = self.params.gamma
        h2 = max((g - 1.0) * (self.E - 0.5 * u * u), 0.0)
        return rho_from_sound_speed(np.sqrt(h2), self.params) * u

    @property
    def sonic_speed(self) -> float:
        g = self.params.gamma
        return float(np.sqrt(2.0 * (g - 1.0) * self.E / (g + 1.0)))

    @property
    def sonic_radius(self) -> float:
        return float((self.Q / self._flux_density(self.sonic_speed)) ** (1.0 / self.params.m))

    def velocity(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= self.sonic_radius):
            raise DomainError("no supersonic steady state inside the sonic radius")
        lo, hi = self.sonic_speed, np.sqrt(2.0 * self.E)
        out = np.empty_like(r)
        for i, x in enumerate(r):
            target = self.Q / x**self.params.m
            out[i] = brentq(lambda v: self._flux_density(v) - target, lo, hi,
                            xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
        return out

    def state(self, r):
        u = self.velocity(r)
        g = self.params.gamma
        h = np.sqrt(np.maximum((g - 1.0) * (self.E - 0.5 * u * u), 0.0))
        return rho_from_sound_speed(h, self.params), u

    def __call__(self, r):
        return self.state(r)


# --------------------------------------------------------------------------
# character-space construction


def smooth_bump(center: float, width: float) -> Callable:
    """exp(-((r - center)/width)^2), peak 1."""
    def phi(r):
        return np.exp(-(((np.asarray(r, dtype=float) - center) / width) ** 2))
    return phi


def constant(value: float) -> Callable:
    def f(r):
        return np.full(np.shape(r), float(value)) if np.ndim(r) else float(value)
    return f


@dataclass(frozen=True, eq=False)
class CharacterProfile:
    """Data on [left, right] whose characters equal prescribed functions.

    ``alpha0(r)`` and ``beta0(r)`` give h^(-lam) alpha_0 and
    h^(-lam) beta_0 with ``lam`` the weight exponent (0 for plain
    characters).
    """

    params: GasParams
    left: float
    right: float
    path: Trajectory
    alpha0: Callable
    beta0: Callable
    lam: float = 0.0

    def state(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.left - 1e-12) or np.any(r > self.right + 1e-12):
            raise DomainError("radius outside the constructed profile")
        y = self.path(np.clip(np.ravel(r), self.left, self.right))
        y = np.atleast_2d(y)
        h, u = y[:, 0].reshape(np.shape(r)), y[:, 1].reshape(np.shape(r))
        return rho_from_sound_speed(h, self.params), u

    def __call__(self, r):
        return self.state(r)

    def characters(self, r):
        rho, u = self.state(r)
        h = self.params.sqrt_kg * rho ** (0.5 * (self.params.gamma - 1.0))
        w = h**self.lam
        return w * self.alpha0(r), w * self.beta0(r)

    def velocity_max(self, n: int = 20001) -> float:
        _, u = self.state(np.linspace(self.left, self.right, n))
        return float(np.max(u))


SONIC_MARGIN = 1e-6


def build_profile(params: GasParams, left: float, right: float, h_left: float, u_left: float,
                  alpha0: Callable, beta0: Callable, lam: float = 0.0,
                  max_step: Optional[float] = None, rtol: float = 1e-12,
                  max_steps: int = 50_000) -> CharacterProfile:
    """Integrate the inverted character relations from ``left`` to ``right``."""
    if not (h_left > 0.0 and u_left > h_left):
        raise DomainError("left state must have h > 0 and supersonic u")
    if left <= 0.0:
        raise DomainError("construction needs a positive left edge")

    def rhs(r, y):
        h, u = y
        w = h**lam
        return np.array(gradients_from_characters(r, h, u, w * alpha0(r), w * beta0(r), params))

    def stop(r, y):
        # the sonic line is singular for the inversion; steps collapse near it
        if not (y[0] > 0.0 and y[1] - y[0] > SONIC_MARGIN * y[1]):
            return "left the supersonic region"
        return None

    span = right - left
    try:
        path = dopri5(rhs, left, [h_left, u_left], right, rtol=rtol, atol=1e-14,
                      max_step=max_step or span / 200.0, stop=stop, max_steps=max_steps)
    except IntegrationError as exc:
        raise DomainError(f"profile construction failed at r={exc.t:.6g}: {exc}") from exc
    if path.terminated:
        raise DomainError(f"profile construction failed at r={path.t[-1]:.6g}: {path.terminated}")
    return CharacterProfile(params, left, right, path, alpha0, beta0, lam)


def left_state_for(params: GasParams, u_left: float, mach_ratio: float = 0.5):
    """(h, u) at the left edge with u = 2h/((g-1) mach_ratio), i.e. z > 0 when ratio < 1."""
    h = mach_ratio * 0.5 * (params.gamma - 1.0) * u_left
    return h, u_left


@dataclass(frozen=True)
class PresetSpec:
    """Knobs shared by the rarefaction and compressive presets."""

    u_left: float = 1.0
    mach_ratio: float = 0.5
    alpha_amp: float = 0.2
    beta_amp: float = 0.2
    center: float = 1.8
    width: float = 0.3
    background: float = 0.0


def rarefaction_scenario(params: GasParams, b: float = 1.0, R: float = 5.0,
                         T: Optional[float] = None, spec: PresetSpec = PresetSpec(),
                         pad: float = 0.5, name: str = "rarefaction") -> Scenario:
    """Outer-domain data with alpha_0, beta_0 >= 0 given as background plus bumps.

    The data are anchored at the padded left edge (b - pad*b) so the
    computational window extends behind the dependence cone. ``C0`` is the
    sampled maximum of u_0 on [b, R]; the default horizon is 2b/C0.
    """
    h_b, u_b = left_state_for(params, spec.u_left, spec.mach_ratio)
    bump = smooth_bump(spec.center * b, spec.width * b)
    alpha0 = lambda r: spec.background + spec.alpha_amp * bump(r)
    beta0 = lambda r: spec.background + spec.beta_amp * bump(r)
    left = b * (1.0 - pad)
    prof = build_profile(params, left, R, h_b, u_b, alpha0, beta0,
                         max_step=0.25 * spec.width * b)
    C0 = _velocity_max(prof, b, R)
    T = 2.0 * b / C0 if T is None else T
    return Scenario(params, b, R, T, prof, C0, LeftBoundary.DEPENDENCE_CONE, name=name,
                    meta={"preset": name, "profile": prof, "spec": spec}, pad=b - left)


def _velocity_max(data, left, right, n=20001):
    _, u = data(np.linspace(left, right, n))
    return float(np.max(u))


COMPRESSIVE_SPEC = PresetSpec(alpha_amp=0.0, beta_amp=0.0, center=1.2, width=0.002)


def compressive_scenario(params: GasParams, seed: float, b: float = 1.0, R: float = 1.5,
                         T: float = 0.1, spec: PresetSpec = COMPRESSIVE_SPEC, pad: float = 0.1,
                         name: str = "compressive") -> Scenario:
    """Steady-like background plus a localised negative weighted-beta bump.

    The weight is the decoupling exponent (3-g)/(2(g-1)), so the minimum
    of the weighted initial beta equals ``seed`` exactly. A zero seed gives
    the bump-free background used to size the threshold.
    """
    from .characters import lambda_tilde

    if seed > 0.0:
        raise DomainError("compressive seed must not be positive")
    lam = lambda_tilde(params)
    h_b, u_b = left_state_for(params, spec.u_left, spec.mach_ratio)
    bump = smooth_bump(spec.center * b, spec.width * b)
    bg = spec.background
    alpha0 = lambda r: bg + spec.alpha_amp * bump(r)
    beta0 = lambda r: bg + (seed - bg) * bump(r)
    left = b * (1.0 - pad)
    prof = build_profile(params, left, R, h_b, u_b, alpha0, beta0, lam=lam,
                         max_step=0.1 * spec.width * b)
    C0 = _velocity_max(prof, b, R)
    return Scenario(params, b, R, T, prof, C0, LeftBoundary.DEPENDENCE_CONE, name=name,
                    meta={"preset": name, "profile": prof, "seed": seed, "lam": lam, "spec": spec},
                    pad=b - left)


@dataclass(frozen=True, eq=False)
class LinearVacuumData:
    """u_0 = v r, h_0 = c r: vacuum at the origin, constant characters."""

    params: GasParams
    v: float
    c: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return rho_from_sound_speed(self.c * r, self.params), self.v * r

    def characters(self):
        p = self.params
        k, m, v, c = p.riemann_factor, p.m, self.v, self.c
        alpha = v + k * c + m * c * v / (v + c)
        beta = v - k * c - m * c * v / (v - c)
        return alpha, beta


def vacuum_origin_scenario(params: GasParams, b: float, v: float = 1.0, c: Optional[float] = None,
                           R: float = 1.0, T: Optional[float] = None,
                           name: str = "vacuum-origin") -> Scenario:
    """Data vanishing at the origin, posed on [b, R] for the small-b limit."""
    if c is None:
        # beta_0 = v - 2c/(g-1) - m c v/(v-c) positive with margin
        c = 0.15 * (params.gamma - 1.0) * v / (1.0 + params.m)
    data = LinearVacuumData(params, v, c)
    alpha, beta = data.characters()
    if beta < 0.0:
        raise DomainError("linear vacuum data is compressive for these parameters")
    C0 = v * R
    T = 2.0 * b / C0 if T is None else T
    return Scenario(params, b, R, T, data, C0, LeftBoundary.DEPENDENCE_CONE, name=name,
                    meta={"preset": name, "M0": max(alpha, beta)})


# --------------------------------------------------------------------------
# affine core glued to outer rarefaction data


@dataclass(frozen=True, eq=False)
class CompositeData:
    affine: AffineSolution
    outer: CharacterProfile

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        rho = np.empty(r.shape)
        u = np.empty(r.shape)
        inner = r <= self.affine.motion.b
        if np.any(inner):
            rho[inner], u[inner] = self.affine.state(r[inner], 0.0)
        if np.any(~inner):
            rho[~inner], u[~inner] = self.outer.state(r[~inner])
        return rho, u


def composite_scenario(params: GasParams, rho_c: float = 1.0, v_a: float = 3.0, b: float = 1.0,
                       R: float = 5.0, T: Optional[float] = None, far_alpha: float = 0.3,
                       far_beta: float = 0.3, blend: float = 0.5,
                       name: str = "affine-composite") -> Scenario:
    """Affine patch on [0, b], outer data on [b, R] with matched characters at b.

    Outer characters blend from the affine values at b to constants
    ``far_alpha``, ``far_beta`` over a length ``blend*b`` with a C^1 step,
    so the glued data are C^1 and the corner compatibility holds.
    """
    motion = AffineMotion(rho_c, v_a, b, params)
    report = check_admissibility(motion)
    if not report.ok:
        raise DomainError("affine core not admissible: " + ", ".join(report.violated))
    horizon = 2.0 / v_a if T is None else T
    affine = AffineSolution.build(motion, max(horizon, 1e-6) * 1.05 + 1e-3,
                                  limit=0.999 * motion.vacuum_radius)
    a_b, b_b = affine.characters(np.array([b]), 0.0)
    a_b, b_b = float(a_b[0]), float(b_b[0])
    rho_b, u_b = affine.state(np.array([b]), 0.0)
    h_b = params.sqrt_kg * float(rho_b[0]) ** (0.5 * (params.gamma - 1.0))
    L = blend * b

    def weight(r):
        s = np.clip((np.asarray(r, dtype=float) - b) / L, 0.0, 1.0)
        return 1.0 - s * s * (3.0 - 2.0 * s)

    alpha0 = lambda r: far_alpha + (a_b - far_alpha) * weight(r)
    beta0 = lambda r: far_beta + (b_b - far_beta) * weight(r)
    outer = build_profile(params, b, R, h_b, float(u_b[0]), alpha0, beta0, max_step=0.02 * b)
    data = CompositeData(affine, outer)
    C0 = max(outer.velocity_max(), float(affine.state(np.array([b]), 0.0)[1][0]))
    T = 2.0 * b / C0 if T is None else T
    return Scenario(params, b, R, T, data, C0, LeftBoundary.CHARACTERISTIC,
                    left_state=affine.state, left_curve=affine.curve, name=name,
                    meta={"preset": name, "affine": affine, "outer": outer,
                          "M0": max(a_b, b_b, far_alpha, far_beta)})
