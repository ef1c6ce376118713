"""Finite-volume solver for the radially symmetric isentropic Euler system.

Unsplit mode evolves volume averages of (rho, rho u) with face areas r^m:

    d/dt (V rho)   = -[A rho u]
    d/dt (V rho u) = -[A (rho u^2 + p)] + p [A]

which is the conservative form of (r^m rho)_t + (r^m rho u)_r = 0 and
(r^m rho u)_t + (r^m (rho u^2 + p))_r = m r^(m-1) p. Mass is conserved to
roundoff up to boundary fluxes. Strang mode instead advances the planar
system and applies the sources -(m/r)(rho u, rho u^2) in half steps.

Fluxes are HLL with Davis wave-speed bounds on minmod-limited linear
reconstructions of (rho, u); time stepping is two-stage SSP Runge-Kutta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .characters import (CharacterField, character_field, riccati_coeffs, riccati_rhs,
                         CharacterUndefined)
from .gas import DomainError, FlowField, GasParams, LeftBoundary, Scenario, cell_faces
from .ode import IntegrationError, Trajectory, dopri5

log = logging.getLogger(__name__)


class StepError(RuntimeError):
    def __init__(self, message, cell=None, t=None):
        super().__init__(message if cell is None else f"{message} (cell {cell})")
        self.cell, self.t = cell, t


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.45
    order: int = 2
    source: str = "unsplit"
    right: str = "outflow"
    snapshot_every: float = 0.05
    blowup_factor: float = 1e3
    g_max: Optional[float] = None
    dt_collapse: float = 1e-10
    cone_margin: float = 2.0
    edge_trim: int = 4
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise DomainError(f"cfl must lie in (0, 1]: {self.cfl}")
        if self.order not in (1, 2):
            raise DomainError("reconstruction order must be 1 or 2")
        if self.source not in ("unsplit", "strang"):
            raise DomainError("source treatment must be 'unsplit' or 'strang'")
        if self.right != "outflow":
            raise DomainError("only outflow extrapolation is supported on the right")
        if not self.snapshot_every > 0.0:
            raise DomainError("snapshot cadence must be positive")
        if self.g_max is not None and not self.g_max > 0.0:
            raise DomainError("G_max must be positive")
        if not self.blowup_factor > 0.0:
            raise DomainError("blowup factor must be positive")


NGHOST = 2


@dataclass(frozen=True, eq=False)
class Boundary:
    """Ghost-cell rules at both ends plus optional cut-cell masking.

    ``left`` / ``right`` are 'extrapolate', 'reflect' or 'prescribed'. For
    'prescribed' the matching ``*_state(r, t)`` returns (rho, u). With a
    ``left_curve`` every cell whose centre lies left of ``left_curve(t)``
    is inactive and overwritten by ``left_state``.
    """

    left: str = "extrapolate"
    right: str = "extrapolate"
    left_state: Optional[Callable] = None
    right_state: Optional[Callable] = None
    left_curve: Optional[Callable[[float], float]] = None

    def active(self, r, t):
        if self.left_curve is None:
            return np.ones(r.shape, dtype=bool)
        return r > self.left_curve(t)


def boundary_for(scenario: Scenario) -> Boundary:
    mode = scenario.boundary
    if mode is LeftBoundary.DEPENDENCE_CONE:
        return Boundary("extrapolate", "extrapolate")
    if mode is LeftBoundary.ORIGIN:
        return Boundary("reflect", "extrapolate")
    return Boundary("prescribed", "extrapolate", left_state=scenario.left_state,
                    left_curve=scenario.left_curve)


@dataclass(frozen=True, eq=False)
class _Grid:
    r: np.ndarray
    faces: np.ndarray
    area: np.ndarray
    vol: np.ndarray
    width: np.ndarray
    r_ext: np.ndarray
    m: int

    @classmethod
    def build(cls, r, m):
        faces = cell_faces(r)
        area = faces**m
        vol = (faces[1:] ** (m + 1) - faces[:-1] ** (m + 1)) / (m + 1)
        width = np.diff(faces)
        gl = r[0] - np.array([2.0, 1.0]) * (r[1] - r[0])
        gr = r[-1] + np.array([1.0, 2.0]) * (r[-1] - r[-2])
        return cls(r, faces, area, vol, width, np.concatenate((gl, r, gr)), m)


def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _hll(rl, ul, rr, ur, params):
    K, g = params.K, params.gamma
    pl, pr = K * rl**g, K * rr**g
    hl = params.sqrt_kg * rl ** (0.5 * (g - 1.0))
    hr = params.sqrt_kg * rr ** (0.5 * (g - 1.0))
    sl = np.minimum(ul - hl, ur - hr)
    sr = np.maximum(ul + hl, ur + hr)
    f0l, f0r = rl * ul, rr * ur
    f1l, f1r = f0l * ul + pl, f0r * ur + pr
    den = np.where(sr > sl, sr - sl, 1.0)
    f0m = (sr * f0l - sl * f0r + sl * sr * (rr - rl)) / den
    f1m = (sr * f1l - sl * f1r + sl * sr * (f0r - f0l)) / den
    left_up = sl >= 0.0
    right_up = sr <= 0.0
    f0 = np.where(left_up, f0l, np.where(right_up, f0r, f0m))
    f1 = np.where(left_up, f1l, np.where(right_up, f1r, f1m))
    return f0, f1


class _Operator:
    """Spatial operator L(U, t) for one grid, gas and boundary."""

    def __init__(self, grid: _Grid, params: GasParams, config: SolverConfig, bc: Boundary):
        self.g, self.p, self.cfg, self.bc = grid, params, config, bc
        self.planar = config.source == "strang"
        # split steps evolve S(dt/2)U, so prescribed data get the same source shift
        self.split_mid = None

    def extend(self, rho, u, t):
        g, bc = self.g, self.bc
        rl, ul = self._ghost(bc.left, bc.left_state, g.r_ext[:NGHOST], rho[:NGHOST][::-1],
                             u[:NGHOST][::-1], rho[0], u[0], t)
        rr, ur = self._ghost(bc.right, bc.right_state, g.r_ext[-NGHOST:], rho[-NGHOST:][::-1],
                             u[-NGHOST:][::-1], rho[-1], u[-1], t)
        return np.concatenate((rl, rho, rr)), np.concatenate((ul, u, ur))

    def prescribed(self, fn, r, t):
        """Prescribed (rho, u) at stage time t, source-shifted in split mode."""
        rho, u = fn(r, t)
        rho, u = np.asarray(rho, dtype=float), np.asarray(u, dtype=float)
        if self.planar and self.split_mid is not None:
            rho, mom = self.source_step(r, rho, rho * u, self.split_mid - t)
            u = np.where(rho > 0.0, mom / np.where(rho > 0.0, rho, 1.0), 0.0)
        return rho, u

    def _ghost(self, kind, fn, rg, rho_mirror, u_mirror, rho_edge, u_edge, t):
        if kind == "extrapolate":
            return np.full(NGHOST, rho_edge), np.full(NGHOST, u_edge)
        if kind == "reflect":
            return rho_mirror.copy(), -u_mirror
        if kind == "prescribed":
            return self.prescribed(fn, rg, t)
        raise DomainError(f"unknown boundary kind {kind!r}")

    def impose(self, rho, mom, t):
        """Overwrite inactive cells with prescribed data; returns the active mask."""
        active = self.bc.active(self.g.r, t)
        if not np.all(active):
            idx = ~active
            rho_p, u_p = self.prescribed(self.bc.left_state, self.g.r[idx], t)
            rho[idx] = rho_p
            mom[idx] = rho_p * u_p
        return active

    def face_states(self, rho_e, u_e, first_order=None):
        if self.cfg.order == 1:
            return rho_e[1:-2], u_e[1:-2], rho_e[2:-1], u_e[2:-1]
        r = self.g.r_ext
        dr = np.diff(r)
        drho, du = np.diff(rho_e) / dr, np.diff(u_e) / dr
        s_rho = _minmod(drho[:-1], drho[1:])
        s_u = _minmod(du[:-1], du[1:])
        if first_order is not None:
            s_rho = np.where(first_order, 0.0, s_rho)
            s_u = np.where(first_order, 0.0, s_u)
        # slopes live on extended cells 1 .. n+2; faces between ext cells k, k+1 for k = 1 .. n+1
        rc = r[1:-1]
        faces = np.concatenate(([r[0] + 0.5 * (r[1] - r[0])], 0.5 * (r[1:] + r[:-1])))
        fr = 0.5 * (rc + np.roll(rc, -1))
        fl = 0.5 * (rc + np.roll(rc, 1))
        del faces
        rho_c, u_c = rho_e[1:-1], u_e[1:-1]
        rho_plus = rho_c + s_rho * (fr - rc)
        u_plus = u_c + s_u * (fr - rc)
        rho_minus = rho_c + s_rho * (fl - rc)
        u_minus = u_c + s_u * (fl - rc)
        return rho_plus[:-1], u_plus[:-1], rho_minus[1:], u_minus[1:]

    def fluxes(self, rho, u, t, first_order=None):
        rho_e, u_e = self.extend(rho, u, t)
        rl, ul, rr, ur = self.face_states(rho_e, u_e, first_order)
        return _hll(rl, ul, rr, ur, self.p)

    def rates(self, rho, mom, t, first_order=None):
        u = np.where(rho > 0.0, mom / np.where(rho > 0.0, rho, 1.0), 0.0)
        f0, f1 = self.fluxes(rho, u, t, first_order)
        g = self.g
        if self.planar:
            d0 = -(f0[1:] - f0[:-1]) / g.width
            d1 = -(f1[1:] - f1[:-1]) / g.width
            return d0, d1, f0, f1
        a = g.area
        d0 = -(a[1:] * f0[1:] - a[:-1] * f0[:-1]) / g.vol
        p = self.p.pressure(rho)
        d1 = (-(a[1:] * f1[1:] - a[:-1] * f1[:-1]) + p * (a[1:] - a[:-1])) / g.vol
        return d0, d1, f0, f1

    def source_half_step(self, rho, mom, dt):
        return self.source_step(self.g.r, rho, mom, dt)

    def source_step(self, r, rho, mom, dt):
        """Midpoint (RK2) integration of the geometric source over dt."""
        k = self.p.m / r

        def s(rh, mo):
            u = np.where(rh > 0.0, mo / np.where(rh > 0.0, rh, 1.0), 0.0)
            return -k * rh * u, -k * mo * u

        a0, a1 = s(rho, mom)
        b0, b1 = s(rho + 0.5 * dt * a0, mom + 0.5 * dt * a1)
        return rho + dt * b0, mom + dt * b1

    def stable_dt(self, rho, mom, t):
        active = self.bc.active(self.g.r, t)
        u = np.where(rho > 0.0, mom / np.where(rho > 0.0, rho, 1.0), 0.0)
        h = self.p.sqrt_kg * rho ** (0.5 * (self.p.gamma - 1.0))
        speed = np.abs(u) + h
        with np.errstate(divide="ignore"):
            lim = np.where(speed > 0.0, self.g.width / speed, np.inf)
        dt = float(np.min(lim[active])) if np.any(active) else np.inf
        return self.cfg.cfl * dt

    def euler_stage(self, rho, mom, t, dt):
        d0, d1, f0, f1 = self.rates(rho, mom, t)
        rho_n, mom_n = rho + dt * d0, mom + dt * d1
        bad = rho_n < 0.0
        if np.any(bad):
            # positivity fallback: first-order states around offending cells
            fo = np.zeros(self.g.r.size + 2, dtype=bool)
            for off in (0, 1, 2):
                fo[np.flatnonzero(bad) + off] = True
            d0, d1, f0, f1 = self.rates(rho, mom, t, first_order=fo)
            rho_n, mom_n = rho + dt * d0, mom + dt * d1
            if np.any(rho_n < 0.0):
                i = int(np.flatnonzero(rho_n < 0.0)[0])
                raise StepError("negative density after positivity limiting", i, t)
        return rho_n, mom_n, f0, f1


@dataclass
class StepInfo:
    dt: float
    mass_flux_left: float
    mass_flux_right: float


def _advance(op: _Operator, rho, mom, t, dt):
    """One SSP-RK2 step; returns new (rho, mom) and time-averaged boundary mass fluxes."""
    if op.planar:
        rho, mom = op.source_half_step(rho, mom, 0.5 * dt)
        op.split_mid = t + 0.5 * dt
    op.impose(rho, mom, t)
    r1, m1, f0a, _ = op.euler_stage(rho, mom, t, dt)
    op.impose(r1, m1, t + dt)
    r2, m2, f0b, _ = op.euler_stage(r1, m1, t + dt, dt)
    rho_n = 0.5 * (rho + r2)
    mom_n = 0.5 * (mom + m2)
    if op.planar:
        op.split_mid = None
        rho_n, mom_n = op.source_half_step(rho_n, mom_n, 0.5 * dt)
    if np.any(rho_n < 0.0):
        i = int(np.flatnonzero(rho_n < 0.0)[0])
        raise StepError("negative density", i, t)
    if not (np.all(np.isfinite(rho_n)) and np.all(np.isfinite(mom_n))):
        i = int(np.flatnonzero(~(np.isfinite(rho_n) & np.isfinite(mom_n)))[0])
        raise StepError("non-finite state", i, t)
    op.impose(rho_n, mom_n, t + dt)
    a = op.g.area
    info = StepInfo(dt, 0.5 * dt * a[0] * (f0a[0] + f0b[0]), 0.5 * dt * a[-1] * (f0a[-1] + f0b[-1]))
    return rho_n, mom_n, info


def _operator(field: FlowField, config: SolverConfig, boundary: Optional[Boundary]):
    grid = _Grid.build(field.r, field.params.m)
    return _Operator(grid, field.params, config, boundary or Boundary())


def stable_dt(field: FlowField, config: SolverConfig, boundary: Optional[Boundary] = None) -> float:
    op = _operator(field, config, boundary)
    return op.stable_dt(np.array(field.rho), field.rho * field.u, field.t)


def step(field: FlowField, config: SolverConfig, boundary: Optional[Boundary] = None,
         dt: Optional[float] = None, return_info: bool = False):
    """Advance one conservative update; dt defaults to the CFL limit."""
    op = _operator(field, config, boundary)
    rho, mom = np.array(field.rho), field.rho * field.u
    dt_max = op.stable_dt(rho, mom, field.t)
    if dt is None:
        dt = dt_max
    elif dt > dt_max * (1.0 + 1e-12):
        raise StepError(f"CFL violation: dt={dt:.3g} exceeds stable {dt_max:.3g}", t=field.t)
    rho_n, mom_n, info = _advance(op, rho, mom, field.t, dt)
    u_n = np.where(rho_n > 0.0, mom_n / np.where(rho_n > 0.0, rho_n, 1.0), 0.0)
    new = field.with_state(field.t + dt, rho_n, u_n)
    return (new, info) if return_info else new


def evolve(field: FlowField, config: SolverConfig, t_end: float,
           boundary: Optional[Boundary] = None) -> FlowField:
    """Advance ``field`` to ``t_end`` at the CFL limit, landing exactly on t_end."""
    op = _operator(field, config, boundary)
    rho, mom, t = np.array(field.rho), field.rho * field.u, field.t
    if t_end < t:
        raise DomainError("cannot evolve backwards in time")
    while t < t_end - 1e-14 * max(1.0, t_end):
        dt = min(op.stable_dt(rho, mom, t), t_end - t)
        rho, mom, _ = _advance(op, rho, mom, t, dt)
        t = t + dt
    u = np.where(rho > 0.0, mom / np.where(rho > 0.0, rho, 1.0), 0.0)
    return field.with_state(t_end if t >= t_end - 1e-14 * max(1.0, t_end) else t, rho, u)


def total_mass(field: FlowField) -> float:
    """Sum of V_i rho_i, the discrete integral of r^m rho."""
    g = _Grid.build(field.r, field.params.m)
    return float(np.sum(g.vol * field.rho))


def max_gradients(field: FlowField, mask: Optional[np.ndarray] = None):
    """Largest |u_r| and |h_r| (centred differences) over masked cells."""
    u_r = np.gradient(field.u, field.r)
    h_r = np.gradient(field.h, field.r)
    if mask is not None:
        if not np.any(mask):
            return 0.0, 0.0
        u_r, h_r = u_r[mask], h_r[mask]
    return float(np.max(np.abs(u_r))), float(np.max(np.abs(h_r)))


@dataclass
class RunRecord:
    scenario: Scenario
    config: SolverConfig
    snapshots: list
    masks: list
    cause: str
    blowup_time: Optional[float] = None
    steps: int = 0
    error: Optional[str] = None
    cone: Optional[Trajectory] = None
    diagnostics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    _chars: dict = field(default_factory=dict, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> FlowField:
        return self.snapshots[-1]

    def characters(self, k: int) -> CharacterField:
        if k not in self._chars:
            self._chars[k] = character_field(self.snapshots[k], self.masks[k])
        return self._chars[k]

    def valid_left_edge(self, t: float) -> float:
        """Left edge of the region where the run represents the posed problem."""
        sc = self.scenario
        if sc.boundary is LeftBoundary.DEPENDENCE_CONE:
            cone = float(np.interp(t, self.diagnostics["cone_t"], self.diagnostics["cone_r"]))
            return cone + _cone_margin(self.config, self.snapshots[0].r)
        if sc.boundary is LeftBoundary.CHARACTERISTIC:
            return float(sc.left_curve(t))
        return 0.0


def _cone_margin(config, r):
    return config.cone_margin * float(np.max(np.diff(r)))


def run(scenario: Scenario, config: SolverConfig, r: Optional[np.ndarray] = None,
        n: int = 1000, on_snapshot: Optional[Callable] = None) -> RunRecord:
    """Integrate a scenario to its horizon, stopping at detected blowup.

    ``r`` overrides the default uniform grid of ``n`` cells on the window.
    ``on_snapshot(record, k)`` is called after each stored snapshot; its
    return value is appended to ``record.checks``.
    """
    from .gas import uniform_grid

    if r is None:
        r = uniform_grid(scenario.left_edge(), scenario.R, n)
    field0 = scenario.sample(r)
    bc = boundary_for(scenario)
    op = _operator(field0, config, bc)
    params = scenario.params
    rho, mom = np.array(field0.rho), field0.rho * field0.u
    op.impose(rho, mom, 0.0)
    t = 0.0
    cone = scenario.boundary is LeftBoundary.DEPENDENCE_CONE
    cone_t, cone_r = [0.0], [scenario.b]
    margin = _cone_margin(config, r)

    def mask_at(t_, rho_, u_):
        if cone:
            m = r >= cone_r[-1] + margin
        else:
            m = bc.active(r, t_)
        # the outflow edge and its one-sided stencils are not part of the posed problem
        m[r.size - config.edge_trim:] = False
        return m

    def snap(t_, rho_, mom_):
        u_ = np.where(rho_ > 0.0, mom_ / np.where(rho_ > 0.0, rho_, 1.0), 0.0)
        return FlowField(t_, r, rho_, u_, params)

    record = RunRecord(scenario, config, [], [], "horizon reached")
    record.diagnostics.update(cone_t=cone_t, cone_r=cone_r, mass=[], dt=[])

    def store(f):
        record.snapshots.append(f)
        record.masks.append(mask_at(f.t, f.rho, f.u))
        record.diagnostics["mass"].append(total_mass(f))
        if on_snapshot is not None:
            record.checks.append(on_snapshot(record, len(record.snapshots) - 1))

    current = snap(0.0, rho, mom)
    store(current)
    g0 = max(max_gradients(current, record.masks[0]))
    g_max = config.g_max if config.g_max is not None else config.blowup_factor * max(g0, 1e-300)
    record.diagnostics["g_max"] = g_max
    record.diagnostics["initial_gradient"] = g0
    if scenario.T <= 0.0:
        return record
    dt0 = op.stable_dt(rho, mom, 0.0)
    next_snap = config.snapshot_every
    nsteps = 0
    try:
        while t < scenario.T - 1e-14 * max(1.0, scenario.T):
            nsteps += 1
            if nsteps > config.max_steps:
                raise StepError("maximum number of steps exceeded", t=t)
            dt = op.stable_dt(rho, mom, t)
            if dt < config.dt_collapse * dt0:
                record.cause, record.blowup_time = "blowup detected", t
                record.diagnostics["blowup_trigger"] = "dt collapse"
                break
            target = min(next_snap, scenario.T)
            hit = t + dt >= target - 1e-12 * max(1.0, target)
            if hit:
                dt = target - t
            if cone:
                c_prev = _interp_speed(r, rho, mom, params, cone_r[-1], +1)
            rho, mom, info = _advance(op, rho, mom, t, dt)
            t = target if hit else t + dt
            if cone:
                pred = cone_r[-1] + dt * c_prev
                c_new = _interp_speed(r, rho, mom, params, pred, +1)
                cone_t.append(t)
                cone_r.append(cone_r[-1] + 0.5 * dt * (c_prev + c_new))
            record.diagnostics["dt"].append(dt)
            current = snap(t, rho, mom)
            gmax = max(max_gradients(current, mask_at(t, current.rho, current.u)))
            if gmax > g_max:
                record.cause, record.blowup_time = "blowup detected", t
                record.diagnostics["blowup_trigger"] = "gradient"
                store(current)
                break
            if hit:
                store(current)
                if target >= next_snap - 1e-12:
                    next_snap += config.snapshot_every
    except (StepError, DomainError) as exc:
        record.cause, record.error = "fatal", str(exc)
        log.warning("run stopped: %s", exc)
    record.steps = nsteps
    if record.snapshots[-1].t < t and record.cause != "fatal":
        store(snap(t, rho, mom))
    return record


def _interp_speed(r, rho, mom, params, x, sign):
    rho_x = float(np.interp(x, r, rho))
    u_x = float(np.interp(x, r, np.where(rho > 0, mom / np.where(rho > 0, rho, 1.0), 0.0)))
    h_x = params.sqrt_kg * max(rho_x, 0.0) ** (0.5 * (params.gamma - 1.0))
    return u_x + sign * h_x


class FieldInterpolator:
    """Bilinear (r, t) interpolation of snapshot quantities."""

    def __init__(self, record: RunRecord):
        self.record = record
        self.t = record.times
        self.r = record.snapshots[0].r

    def _bracket(self, t):
        if t < self.t[0] - 1e-12 or t > self.t[-1] + 1e-12:
            raise DomainError(f"time {t:g} outside recorded interval")
        k = int(np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2))
        span = self.t[k + 1] - self.t[k]
        return k, (t - self.t[k]) / span if span > 0 else 0.0

    def __call__(self, getter: Callable[[int], np.ndarray], r, t):
        if len(self.t) == 1:
            return np.interp(r, self.r, getter(0))
        k, s = self._bracket(t)
        a = np.interp(r, self.r, getter(k))
        b = np.interp(r, self.r, getter(k + 1))
        return (1.0 - s) * a + s * b

    def state(self, r, t):
        snaps = self.record.snapshots
        rho = self(lambda k: snaps[k].rho, r, t)
        u = self(lambda k: snaps[k].u, r, t)
        return rho, u


@dataclass
class CharacteristicTrace:
    family: int
    path: Trajectory
    truncated: bool
    reason: str = ""

    @property
    def t(self):
        return self.path.t

    @property
    def r(self):
        return self.path.y[:, 0]

    def position(self, t):
        return float(np.ravel(self.path(t))[0])


def trace_characteristic(family: int, start, record: RunRecord, rtol: float = 1e-9,
                         t_end: Optional[float] = None) -> CharacteristicTrace:
    """Follow dr/dt = c_family through the recorded field from ``start=(r0, t0)``."""
    if family not in (1, 2):
        raise DomainError("family must be 1 or 2")
    r0, t0 = map(float, start)
    interp = FieldInterpolator(record)
    params = record.scenario.params
    sign = -1.0 if family == 1 else 1.0
    t_last = float(record.times[-1]) if t_end is None else min(t_end, float(record.times[-1]))
    r_lo, r_hi = float(record.snapshots[0].r[0]), float(record.snapshots[0].r[-1])
    if not (r_lo <= r0 <= r_hi and record.times[0] <= t0 <= t_last):
        raise DomainError("start point outside the computed space-time domain")
    cadence = record.config.snapshot_every

    def rhs(t, y):
        rho, u = interp.state(y[0], t)
        h = params.sqrt_kg * max(float(rho), 0.0) ** (0.5 * (params.gamma - 1.0))
        return np.array([float(u) + sign * h])

    # keep clear of masked cells so interpolated characters stay defined
    dr = float(np.max(np.diff(record.snapshots[0].r)))
    hi = r_hi - (record.config.edge_trim + 1) * dr

    def stop(t, y):
        # bilinear interpolation also reads the next snapshot, whose valid region is smaller
        edge = record.valid_left_edge(min(t + cadence, t_last))
        if y[0] > hi or y[0] < max(r_lo, edge + 2.0 * dr):
            return "left the computed domain"
        return None

    path = dopri5(rhs, t0, [r0], t_last, rtol=rtol, atol=1e-12, max_step=0.5 * cadence, stop=stop)
    reason = path.terminated or ""
    if reason and len(path.t) > 2:
        # drop the step that crossed out of the valid region
        path = Trajectory(path.t[:-1], path.y[:-1], path.dydt[:-1], reason)
    return CharacteristicTrace(family, path, bool(reason), reason)


@dataclass
class RiccatiHistory:
    t: np.ndarray
    integrated: np.ndarray
    field: np.ndarray
    max_relative_deviation: float
    diverged_at: Optional[float] = None
    note: str = ""


def integrate_riccati_along(trace: CharacteristicTrace, record: RunRecord,
                            rtol: float = 1e-9, blowup_value: float = 1e8) -> RiccatiHistory:
    """Integrate the Riccati law for the trace's own character.

    Family 1 carries beta (partner alpha read from the field); family 2
    carries alpha. The deviation from the field-derived character is
    normalised by the largest field magnitude along the trace.
    """
    interp = FieldInterpolator(record)
    params = record.scenario.params
    nsnap = len(record.snapshots)
    chars = [record.characters(k) for k in range(nsnap)]
    own = (lambda k: chars[k].beta) if trace.family == 1 else (lambda k: chars[k].alpha)
    partner = (lambda k: chars[k].alpha) if trace.family == 1 else (lambda k: chars[k].beta)
    snaps = record.snapshots

    def field_values(t):
        r = trace.position(t)
        rho = float(interp(lambda k: snaps[k].rho, r, t))
        u = float(interp(lambda k: snaps[k].u, r, t))
        h = params.sqrt_kg * max(rho, 0.0) ** (0.5 * (params.gamma - 1.0))
        return r, h, u

    def rhs(t, y):
        r, h, u = field_values(t)
        co = riccati_coeffs(r, h, u, params)
        p = float(interp(partner, r, t))
        if trace.family == 1:
            d, _ = riccati_rhs(p, y[0], co, params)
        else:
            _, d = riccati_rhs(y[0], p, co, params)
        return np.array([d])

    t0, t1 = float(trace.t[0]), float(trace.t[-1])
    y0 = float(interp(own, trace.position(t0), t0))
    note, diverged = "", None

    def stop(t, y):
        return "diverged" if abs(y[0]) > blowup_value else None

    try:
        path = dopri5(rhs, t0, [y0], t1, rtol=rtol, atol=1e-10,
                      max_step=0.5 * record.config.snapshot_every, stop=stop)
        if path.terminated:
            diverged, note = float(path.t[-1]), "integrated character diverged"
    except (IntegrationError, CharacterUndefined) as exc:
        note = f"truncated: {exc}"
        t_fail = getattr(exc, "t", None)
        diverged = t_fail
        path = None
    if path is None:
        return RiccatiHistory(np.array([t0]), np.array([y0]), np.array([y0]), np.inf, diverged, note)
    ts = path.t
    integ = path.y[:, 0]
    fld = np.array([float(interp(own, trace.position(t), t)) for t in ts])
    scale = max(float(np.max(np.abs(fld))), 1e-300)
    dev = float(np.max(np.abs(integ - fld))) / scale
    return RiccatiHistory(ts, integ, fld, dev, diverged, note)
