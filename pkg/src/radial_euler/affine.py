"""Exact affine motions r = a(t) y and their use as a positive-density core.

The expansion factor obeys a'' = a^(-(m+1)(gamma-1)-1), a(0)=1, a'(0)=v_a,
with first integral a'^2 - 2/k (1 - a^-k) = v_a^2, k = (m+1)(gamma-1).
The second-order form is integrated; the first integral is only monitored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .characters import characters_from_gradients
from .gas import DomainError, GasParams, sound_speed
from .ode import IntegrationError, Trajectory, dopri5

FIRST_INTEGRAL_TOL = 1e-10


@dataclass(frozen=True)
class AffineMotion:
    rho_c: float
    v_a: float
    b: float
    params: GasParams

    def __post_init__(self):
        if not self.rho_c > 0.0:
            raise DomainError("central density must be positive")
        if not self.v_a > 0.0:
            raise DomainError("initial expansion rate v_a must be positive")
        if not self.b > 0.0:
            raise DomainError("patch radius b must be positive")

    @property
    def k(self) -> float:
        return (self.params.m + 1) * (self.params.gamma - 1.0)

    @property
    def bracket_scale(self) -> float:
        """(gamma-1)/(2 gamma K), the y^2 coefficient inside the profile bracket."""
        g = self.params.gamma
        return (g - 1.0) / (2.0 * g * self.params.K)

    def bracket(self, y):
        """rho_c^(gamma-1) - (gamma-1) y^2 / (2 gamma K)."""
        y = np.asarray(y, dtype=float)
        return self.rho_c ** (self.params.gamma - 1.0) - self.bracket_scale * y * y

    @property
    def vacuum_radius(self) -> float:
        g = self.params.gamma
        return float(np.sqrt(2.0 * g * self.params.K / (g - 1.0)) * self.rho_c ** (0.5 * (g - 1.0)))

    @property
    def terminal_speed(self) -> float:
        """sup of a'(t): sqrt(2/k + v_a^2)."""
        return float(np.sqrt(2.0 / self.k + self.v_a**2))

    def first_integral(self, a, a_prime):
        a, a_prime = np.asarray(a, dtype=float), np.asarray(a_prime, dtype=float)
        return a_prime**2 - (2.0 / self.k) * (1.0 - a ** (-self.k)) - self.v_a**2


def initial_profile(y, motion: AffineMotion):
    """rho_0A(y) = (rho_c^(g-1) - (g-1) y^2/(2 g K))^(1/(g-1)) for 0 <= y <= y_vac."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError("material radius must be non-negative")
    if np.any(y > motion.vacuum_radius * (1.0 + 1e-14)):
        raise DomainError(f"material radius beyond vacuum radius {motion.vacuum_radius:g}")
    br = np.maximum(motion.bracket(y), 0.0)
    out = br ** (1.0 / (motion.params.gamma - 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class MotionTrajectory:
    motion: AffineMotion
    path: Trajectory

    @property
    def t(self):
        return self.path.t

    @property
    def a(self):
        return self.path.y[:, 0]

    @property
    def a_prime(self):
        return self.path.y[:, 1]

    @property
    def residual(self):
        return self.motion.first_integral(self.a, self.a_prime)

    @property
    def horizon(self) -> float:
        return self.path.t_end

    def __call__(self, t):
        """Dense (a, a') at time(s) t."""
        y = self.path(t)
        if np.ndim(t) == 0:
            return float(y[0]), float(y[1])
        return y[:, 0], y[:, 1]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "a", "a_prime", "first_integral_residual"])
            for row in zip(self.t, self.a, self.a_prime, self.residual):
                wr.writerow([repr(float(x)) for x in row])
        return path


def integrate_motion(motion: AffineMotion, T: float, rtol: float = 1e-13,
                     atol: float = 1e-13, max_step: float = np.inf) -> MotionTrajectory:
    if not T > 0.0:
        raise DomainError("horizon must be positive")
    k = motion.k

    def rhs(t, y):
        return np.array([y[1], y[0] ** (-k - 1.0)])

    path = dopri5(rhs, 0.0, [1.0, motion.v_a], T, rtol=rtol, atol=atol, max_step=max_step)
    traj = MotionTrajectory(motion, path)
    drift = float(np.max(np.abs(traj.residual)))
    if drift > FIRST_INTEGRAL_TOL:
        raise IntegrationError(f"first-integral drift {drift:.3g} exceeds {FIRST_INTEGRAL_TOL:g}",
                               t=T)
    a, ap = traj.a[1:], traj.a_prime[1:]
    if np.any(a < 1.0) or np.any(ap <= motion.v_a) or np.any(ap > motion.terminal_speed):
        raise IntegrationError("trajectory left the bounds v_a < a' <= terminal speed, a >= 1", t=T)
    return traj


@dataclass(frozen=True, eq=False)
class AffineSolution:
    """Closed-form affine field on the patch r/a(t) <= b (or up to ``limit``)."""

    motion: AffineMotion
    trajectory: MotionTrajectory
    limit: Optional[float] = None

    @classmethod
    def build(cls, motion: AffineMotion, T: float, limit: Optional[float] = None,
              max_step: float = np.inf):
        return cls(motion, integrate_motion(motion, T, max_step=max_step), limit)

    @property
    def patch_radius(self) -> float:
        return self.motion.b if self.limit is None else self.limit

    def _material(self, r, t):
        r = np.asarray(r, dtype=float)
        a, ap = self.trajectory(t)
        y = r / a
        if np.any(y > self.patch_radius * (1.0 + 1e-12)) or np.any(r < 0.0):
            raise DomainError(f"radius outside affine patch at t={t:g}")
        return r, y, a, ap

    def state(self, r, t: float):
        """(rho, u) = (rho_0A(r/a)/a^(m+1), a' r / a)."""
        r, y, a, ap = self._material(r, t)
        rho = initial_profile(y, self.motion) / a ** (self.motion.params.m + 1)
        return rho, ap / a * r

    def gradients(self, r, t: float):
        """Analytic (h_r, u_r)."""
        r, y, a, ap = self._material(r, t)
        mo, p = self.motion, self.motion.params
        br = mo.bracket(y)
        amp = p.sqrt_kg * a ** (-0.5 * mo.k)
        h_r = amp * 0.5 / np.sqrt(br) * (-2.0 * mo.bracket_scale * y) / a
        u_r = np.full_like(r, ap / a)
        return h_r, u_r

    def characters(self, r, t: float):
        r = np.asarray(r, dtype=float)
        rho, u = self.state(r, t)
        h = sound_speed(rho, self.motion.params)
        h_r, u_r = self.gradients(r, t)
        return characters_from_gradients(r, h, u, h_r, u_r, self.motion.params)

    def trace_boundary(self, max_step: float = np.inf) -> Trajectory:
        """B_b(t): dB/dt = u - h along the affine field, B(0) = b."""
        p = self.motion.params

        def rhs(t, y):
            rho, u = self.state(y[0], t)
            return np.array([u - sound_speed(rho, p)])

        return dopri5(rhs, 0.0, [self.motion.b], self.trajectory.horizon, rtol=1e-12, atol=1e-14,
                      max_step=max_step)

    @cached_property
    def boundary_curve(self) -> Trajectory:
        return self.trace_boundary()

    def curve(self, t: float) -> float:
        return float(np.ravel(self.boundary_curve(t))[0])

    def boundary_state(self, t: float, curve: Optional[Trajectory] = None):
        rb = self.curve(t) if curve is None else float(np.ravel(curve(t))[0])
        rho, u = self.state(np.array([rb]), t)
        return float(rho[0]), float(u[0])


@dataclass
class Condition:
    name: str
    passed: bool
    value: float
    required: float
    note: str = ""


@dataclass
class AdmissibilityReport:
    conditions: list
    near_degenerate: bool
    conclusions: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def violated(self) -> list:
        return [c.name for c in self.conditions if not c.passed]


ADMISSIBILITY_CONDITIONS = (
    "corner_beta_nonnegative",
    "boundary_supersonic",
    "boundary_alpha_positive",
)


def check_admissibility(motion: AffineMotion, degeneracy_ratio: float = 1e3) -> AdmissibilityReport:
    """Parameter conditions that make the affine core a rarefactive,
    supersonic left boundary: the bracket at b is positive and v_a clears
    three thresholds.
    """
    p = motion.params
    g, m, skg = p.gamma, p.m, p.sqrt_kg
    br = float(motion.bracket(motion.b))
    conds = [Condition("bracket_positive", br > 0.0, br, 0.0, "b below the vacuum radius")]
    if br <= 0.0:
        for name in ADMISSIBILITY_CONDITIONS:
            conds.append(Condition(name, False, motion.v_a, np.inf, "undefined past vacuum radius"))
        return AdmissibilityReport(conds, True)
    s = np.sqrt(br)
    required = (
        (m + 1) * skg * s / motion.b,
        2.0 * skg * s / ((g - 1.0) * motion.b),
        motion.b / (skg * s),
    )
    for name, req in zip(ADMISSIBILITY_CONDITIONS, required):
        conds.append(Condition(name, motion.v_a >= req, motion.v_a, float(req)))
    near = required[2] > degeneracy_ratio * max(required[0], required[1], 1.0)
    return AdmissibilityReport(conds, bool(near))


def boundary_conclusions(solution: AffineSolution, n: int = 201) -> dict:
    """Evaluate alpha, z, c1 along the traced boundary curve and beta at (b, 0).

    Returns minima over ``n`` sample times on [0, horizon].
    """
    p = solution.motion.params
    ts = np.linspace(0.0, solution.trajectory.horizon, n)
    alpha_min = z_min = c1_min = np.inf
    wz_gap = np.inf
    for t in ts:
        rb = np.array([solution.curve(t)])
        rho, u = solution.state(rb, t)
        h = sound_speed(rho, p)
        a, _ = solution.characters(rb, t)
        z = u - p.riemann_factor * h
        w = u + p.riemann_factor * h
        alpha_min = min(alpha_min, float(a[0]))
        z_min = min(z_min, float(z[0]))
        c1_min = min(c1_min, float((u - h)[0]))
        wz_gap = min(wz_gap, float((w - z)[0]))
    _, beta0 = solution.characters(np.array([solution.motion.b]), 0.0)
    return {
        "alpha_min_on_boundary": alpha_min,
        "beta_at_corner": float(beta0[0]),
        "z_min_on_boundary": z_min,
        "c1_min_on_boundary": c1_min,
        "w_minus_z_min_on_boundary": wz_gap,
    }


@dataclass
class CompatibilityReport:
    conditions: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def violated(self) -> list:
        return [c.name for c in self.conditions if not c.passed]


def _one_sided_derivative(f: Callable, x0: float, step: float) -> float:
    xs = x0 + step * np.arange(5)
    v = np.array([float(np.ravel(f(x))[0]) for x in xs])
    return float((-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12.0 * step))


def _centred_derivative(f: Callable, x0: float, step: float) -> float:
    v = [f(x0 + k * step) for k in (-2, -1, 1, 2)]
    return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * step)


def check_compatibility(solution: AffineSolution, outer: Callable, tol: float = 1e-8,
                        dt: float = 1e-3, ode_rtol: float = 1e-6,
                        samples: int = 41) -> CompatibilityReport:
    """Corner and boundary compatibility between the affine core and outer data.

    ``outer(r)`` returns ``(rho0, u0)`` for r >= b. Checks, in order: value
    match at (b, 0); the 2-family first-order corner condition (the outer
    slope of w implied by the boundary data); and the boundary law
    d z_b/dt = m u_b h_b / B_b along the traced curve, by 4th-order
    differences of step ``dt`` at ``samples`` interior times. For that last
    check the motion and the curve are re-integrated with steps capped at
    ``dt``, so the residual converges as dt is refined (the cubic dense
    output would otherwise dominate the differences).
    """
    mo, p = solution.motion, solution.motion.params
    b, kf = mo.b, p.riemann_factor

    rho_o, u_o = (float(np.ravel(x)[0]) for x in outer(np.array([b])))
    rho_a, u_a = solution.boundary_state(0.0)
    scale = max(abs(rho_a), abs(u_a), 1.0)
    mismatch = max(abs(rho_o - rho_a), abs(u_o - u_a)) / scale
    conds = [Condition("corner_values", mismatch <= tol, mismatch, tol)]

    def w_outer(r):
        rho, u = outer(np.array([r]))
        return u + kf * sound_speed(rho, p)

    def w_boundary(t):
        rho, u = solution.boundary_state(t)
        return u + kf * sound_speed(rho, p)

    horizon = solution.trajectory.horizon
    fine = AffineSolution.build(mo, horizon, solution.limit, max_step=dt)
    fine_curve = fine.trace_boundary(max_step=dt)

    def z_boundary(t):
        rho, u = fine.boundary_state(t, fine_curve)
        return u - kf * sound_speed(rho, p)

    h_b = sound_speed(rho_a, p)
    dwb_dt = _one_sided_derivative(w_boundary, 0.0, dt)
    implied = -(dwb_dt + p.m * u_a * h_b / b) / (2.0 * h_b)
    slope = _one_sided_derivative(w_outer, b, 1e-4 * b)
    res2 = abs(slope - implied)
    tol2 = tol * max(abs(implied), 1.0)
    conds.append(Condition("corner_w_slope", res2 <= tol2, res2, tol2,
                           f"outer w' = {slope:.10g}, implied {implied:.10g}"))

    ts = np.linspace(2 * dt, horizon - 2 * dt, samples) if horizon > 5 * dt else np.array([])
    worst, law_scale = 0.0, 0.0
    for t in ts:
        dz = _centred_derivative(z_boundary, t, dt)
        rho, u = fine.boundary_state(t, fine_curve)
        law = p.m * u * sound_speed(rho, p) / float(np.ravel(fine_curve(t))[0])
        worst = max(worst, abs(dz - law))
        law_scale = max(law_scale, abs(law))
    ode_tol = ode_rtol * max(law_scale, 1.0)
    conds.append(Condition("boundary_z_law", worst <= ode_tol, worst, ode_tol,
                           f"4th-order differences with dt={dt:g}"))
    return CompatibilityReport(conds)
