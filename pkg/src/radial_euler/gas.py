"""Isentropic gamma-law gas primitives and the radial state model.

Everything here works on floats and on numpy arrays alike. States are
immutable snapshots: arrays held by :class:`FlowField` are flagged
read-only after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional

import numpy as np


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a formula."""


@dataclass(frozen=True)
class GasParams:
    gamma: float
    K: float = 1.0
    m: int = 1

    def __post_init__(self):
        if not (1.0 < self.gamma < 3.0):
            raise DomainError(f"gamma out of (1,3): {self.gamma}")
        if not self.K > 0.0:
            raise DomainError(f"pressure constant K must be positive: {self.K}")
        if self.m not in (1, 2):
            raise DomainError(f"symmetry index m must be 1 or 2: {self.m}")

    @property
    def sqrt_kg(self) -> float:
        return float(np.sqrt(self.K * self.gamma))

    @property
    def riemann_factor(self) -> float:
        """2/(gamma-1), the weight of h in the Riemann variables."""
        return 2.0 / (self.gamma - 1.0)

    def pressure(self, rho):
        return self.K * np.asarray(rho, dtype=float) ** self.gamma


def _check_nonnegative(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be finite and non-negative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def sound_speed(rho, params: GasParams):
    """h = sqrt(K gamma) rho^((gamma-1)/2); zero at vacuum."""
    rho = _check_nonnegative(rho, "density")
    return _out(params.sqrt_kg * rho ** (0.5 * (params.gamma - 1.0)))


def rho_from_sound_speed(h, params: GasParams):
    h = _check_nonnegative(h, "sound speed")
    return _out((h / params.sqrt_kg) ** (2.0 / (params.gamma - 1.0)))


def riemann_variables(h, u, params: GasParams):
    """Return (w, z) = (u + 2h/(gamma-1), u - 2h/(gamma-1))."""
    h = _check_nonnegative(h, "sound speed")
    u = np.asarray(u, dtype=float)
    k = params.riemann_factor * h
    return _out(u + k), _out(u - k)


def wave_speeds(h, u):
    """Return (c1, c2) = (u - h, u + h)."""
    h = _check_nonnegative(h, "sound speed")
    u = np.asarray(u, dtype=float)
    return _out(u - h), _out(u + h)


def supersonic_lower_bound(rho, params: GasParams):
    """The velocity floor 2 sqrt(K gamma) rho^((gamma-1)/2) / (gamma-1)."""
    return params.riemann_factor * np.asarray(sound_speed(rho, params))


@dataclass(frozen=True)
class CellState:
    rho: float
    u: float
    params: GasParams

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho >= 0.0):
            raise DomainError(f"density must be non-negative: {self.rho}")
        if not np.isfinite(self.u):
            raise DomainError("velocity must be finite")

    @cached_property
    def h(self) -> float:
        return sound_speed(self.rho, self.params)

    @property
    def w(self) -> float:
        return self.u + self.params.riemann_factor * self.h

    @property
    def z(self) -> float:
        return self.u - self.params.riemann_factor * self.h

    @property
    def c1(self) -> float:
        return self.u - self.h

    @property
    def c2(self) -> float:
        return self.u + self.h


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FlowField:
    """A radial snapshot of (rho, u) on cell centres ``r`` at time ``t``."""

    t: float
    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    params: GasParams

    def __post_init__(self):
        r, rho, u = _frozen(self.r), _frozen(self.rho), _frozen(self.u)
        if r.ndim != 1 or r.size < 3:
            raise DomainError("a flow field needs at least 3 cells")
        if rho.shape != r.shape or u.shape != r.shape:
            raise DomainError("r, rho and u must have the same shape")
        if np.any(np.diff(r) <= 0.0):
            raise DomainError("grid radii must be strictly increasing")
        if r[0] < 0.0:
            raise DomainError("grid radii must be non-negative")
        if self.t < 0.0:
            raise DomainError("time must be non-negative")
        if np.any(~np.isfinite(rho)) or np.any(rho < 0.0):
            bad = int(np.flatnonzero(~(rho >= 0.0))[0])
            raise DomainError(f"invalid density at cell {bad}: {rho[bad]}")
        if np.any(~np.isfinite(u)):
            bad = int(np.flatnonzero(~np.isfinite(u))[0])
            raise DomainError(f"non-finite velocity at cell {bad}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)

    def __len__(self):
        return self.r.size

    @cached_property
    def h(self) -> np.ndarray:
        return _frozen(sound_speed(self.rho, self.params))

    @property
    def w(self) -> np.ndarray:
        return self.u + self.params.riemann_factor * self.h

    @property
    def z(self) -> np.ndarray:
        return self.u - self.params.riemann_factor * self.h

    @property
    def c1(self) -> np.ndarray:
        return self.u - self.h

    @property
    def c2(self) -> np.ndarray:
        return self.u + self.h

    @property
    def p(self) -> np.ndarray:
        return self.params.pressure(self.rho)

    def cell(self, i: int) -> CellState:
        return CellState(float(self.rho[i]), float(self.u[i]), self.params)

    def with_state(self, t, rho, u) -> "FlowField":
        return FlowField(t, self.r, rho, u, self.params)


def uniform_grid(left: float, right: float, n: int) -> np.ndarray:
    """Cell centres of ``n`` equal cells tiling [left, right]."""
    if n < 3 or not right > left:
        raise DomainError("need right > left and at least 3 cells")
    dr = (right - left) / n
    return left + dr * (np.arange(n) + 0.5)


def stretched_grid(left: float, right: float, zone: tuple, dr_fine: float, dr_coarse: float,
                   growth: float = 1.05) -> np.ndarray:
    """Cell centres with spacing ``dr_fine`` on ``zone`` growing geometrically
    (ratio ``growth`` per cell) to ``dr_coarse`` towards both edges. The
    outermost cell on each side absorbs the remainder (under 1.5 dr_coarse)."""
    z0, z1 = zone
    if not (left <= z0 < z1 <= right) or not (0.0 < dr_fine <= dr_coarse) or growth < 1.0:
        raise DomainError("invalid stretched-grid specification")
    n_fine = max(int(np.ceil((z1 - z0) / dr_fine)), 1)
    faces = list(z0 + (z1 - z0) * np.arange(n_fine + 1) / n_fine)
    for direction, edge in ((1.0, right), (-1.0, left)):
        x, dx = (faces[-1] if direction > 0 else faces[0]), dr_fine
        side = []
        while direction * (edge - x) > 1e-12:
            dx = min(dx * growth, dr_coarse)
            x = x + direction * dx
            if direction * (x - edge) > -0.5 * dx:
                x = edge
            side.append(x)
        faces = faces + side if direction > 0 else side[::-1] + faces
    faces = np.array(faces)
    return 0.5 * (faces[1:] + faces[:-1])


def cell_faces(r: np.ndarray) -> np.ndarray:
    """Face radii for centres ``r``: midpoints inside, mirrored at the ends."""
    r = np.asarray(r, dtype=float)
    mid = 0.5 * (r[1:] + r[:-1])
    left = r[0] - (mid[0] - r[0])
    right = r[-1] + (r[-1] - mid[-1])
    return np.concatenate(([max(left, 0.0)], mid, [right]))


class LeftBoundary(str, Enum):
    CHARACTERISTIC = "characteristic-left"
    DEPENDENCE_CONE = "dependence-cone"
    ORIGIN = "full-half-line"


Profile = Callable[[np.ndarray], tuple]
StateFn = Callable[[np.ndarray, float], tuple]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A posed problem: gas, window [b, R], horizon, data and left boundary.

    ``initial`` maps radii to ``(rho0, u0)``. For the characteristic-left
    mode ``left_state(r, t)`` supplies the state left of the boundary curve
    ``left_curve(t)`` (the 1-characteristic from (b, 0)). In dependence-cone
    mode ``pad`` extends the computational window to [b - pad, R] so that
    the artificial inflow edge stays behind the 2-characteristic from b.
    """

    params: GasParams
    b: float
    R: float
    T: float
    initial: Profile
    C0: float
    boundary: LeftBoundary = LeftBoundary.DEPENDENCE_CONE
    left_state: Optional[StateFn] = None
    left_curve: Optional[Callable[[float], float]] = None
    name: str = "custom"
    meta: dict = field(default_factory=dict)
    pad: float = 0.0

    def __post_init__(self):
        if self.b < 0.0 or not self.R > self.b:
            raise DomainError(f"need 0 <= b < R, got b={self.b}, R={self.R}")
        if self.T < 0.0:
            raise DomainError("horizon must be non-negative")
        if not self.C0 > 0.0:
            raise DomainError("velocity ceiling C0 must be positive")
        if not 0.0 <= self.pad <= self.b:
            raise DomainError("left padding must lie in [0, b]")
        boundary = LeftBoundary(self.boundary)
        object.__setattr__(self, "boundary", boundary)
        if boundary is LeftBoundary.CHARACTERISTIC and (
            self.left_state is None or self.left_curve is None
        ):
            raise DomainError("characteristic-left mode needs left_state and left_curve")

    def left_edge(self) -> float:
        """Left edge of the computational window (b minus any padding)."""
        return 0.0 if self.boundary is LeftBoundary.ORIGIN else self.b - self.pad

    def sample(self, r) -> FlowField:
        rho, u = self.initial(np.asarray(r, dtype=float))
        return FlowField(0.0, r, rho, u, self.params)

    def check_assumption(self, n: int = 2001) -> "AssumptionReport":
        """Sampled check of 0 < 2h/(gamma-1) <= u <= C0 on (b, R]."""
        r = np.linspace(self.b, self.R, n)[1:]
        rho, u = self.initial(r)
        rep = _assumption_report(r, np.asarray(rho), np.asarray(u), self.params, self.C0)
        if self.boundary is LeftBoundary.CHARACTERISTIC:
            ts = np.linspace(0.0, self.T, 201)
            rb = np.array([self.left_curve(t) for t in ts])
            pairs = [self.left_state(np.array([x]), t) for x, t in zip(rb, ts)]
            rho_b = np.array([float(np.ravel(p[0])[0]) for p in pairs])
            u_b = np.array([float(np.ravel(p[1])[0]) for p in pairs])
            brep = _assumption_report(ts, rho_b, u_b, self.params, self.C0)
            rep = AssumptionReport(rep.violations + [("boundary",) + v[1:] for v in brep.violations])
        return rep


@dataclass
class AssumptionReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        if self.ok:
            return "ok"
        where, x, kind, margin = self.violations[0]
        return f"{len(self.violations)} violation(s); first: {kind} at {where}={x:.6g} (margin {margin:.3g})"


def _assumption_report(x, rho, u, params, C0):
    lower = supersonic_lower_bound(rho, params)
    out = []
    for i in np.flatnonzero(~(rho > 0.0)):
        out.append(("r", float(x[i]), "vacuum", float(rho[i])))
    for i in np.flatnonzero(u < lower):
        out.append(("r", float(x[i]), "subsonic", float(u[i] - lower[i])))
    for i in np.flatnonzero(u > C0):
        out.append(("r", float(x[i]), "above C0", float(C0 - u[i])))
    return AssumptionReport(out)
