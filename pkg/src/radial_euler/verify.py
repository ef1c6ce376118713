"""Executable forms of the bounds: invariant regions, floors, t* and N(b, T).

Every check is report-style: it returns the worst margin and where it
occurred, and never raises on a failed assertion. ``verify_run`` bundles
the checks that apply to a run record into a ``VerificationReport``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .characters import CharacterField, riccati_coeffs
from .gas import DomainError, FlowField, GasParams, LeftBoundary, supersonic_lower_bound

# Slack constant for discrete character signs: max |character error| / dr
# measured on the affine exact-solution ladder (256 cells, window [0.6, 1.6],
# gamma=2, rho_c=1, v_a=3, b=1, t=0.5), maximised over m in {1, 2}, rounded up.
EPS_GRID_CONSTANT = 0.016
# Upper bound hypothesis M above the initial maximum.
M_MARGIN = 1e-6


class NoBound(DomainError):
    """t* is only defined for a negative seed."""


@dataclass(frozen=True)
class Violation:
    r: float
    t: float
    kind: str
    margin: float


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    r: Optional[float] = None
    t: Optional[float] = None
    detail: str = ""

    def line(self) -> str:
        where = "" if self.r is None else f" at r={self.r:.6g}, t={self.t:.6g}"
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst margin {self.worst_margin:.6g}{where} {self.detail}".rstrip()


def _worse(current: Optional[CheckResult], name, margin, r, t):
    if current is None or margin < current.worst_margin:
        return CheckResult(name, margin >= 0.0, float(margin), r, t)
    return current


# --------------------------------------------------------------------------
# pointwise assertions


def check_supersonic_region(field: FlowField, C0: float, mask: Optional[np.ndarray] = None):
    """Cells violating 2h/(g-1) <= u <= 2 C0, each with its (negative) margin."""
    sel = np.ones(field.r.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    lower = supersonic_lower_bound(field.rho, field.params)
    lo_margin = field.u - lower
    hi_margin = 2.0 * C0 - field.u
    out = []
    for i in np.flatnonzero(sel & (lo_margin < 0.0)):
        out.append(Violation(float(field.r[i]), field.t, "subsonic", float(lo_margin[i])))
    for i in np.flatnonzero(sel & (hi_margin < 0.0)):
        out.append(Violation(float(field.r[i]), field.t, "above 2C0", float(hi_margin[i])))
    return out


def supersonic_margin(field: FlowField, C0: float, mask=None):
    """Smallest margin of the supersonic-region inequalities and its radius."""
    sel = np.ones(field.r.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not np.any(sel):
        return math.inf, None
    lower = supersonic_lower_bound(field.rho, field.params)
    margin = np.minimum(field.u - lower, 2.0 * C0 - field.u)[sel]
    i = int(np.argmin(margin))
    return float(margin[i]), float(field.r[sel][i])


@dataclass
class SignReport:
    t: float
    min_value: float
    min_r: Optional[float]
    max_value: float
    max_r: Optional[float]
    eps: float
    M: float

    @property
    def lower_ok(self) -> bool:
        return self.min_value >= -self.eps

    @property
    def upper_ok(self) -> bool:
        return self.max_value < self.M

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def eps_grid(r: np.ndarray, constant: float = EPS_GRID_CONSTANT) -> float:
    """Discrete slack C dr for sign assertions on computed characters."""
    return constant * float(np.max(np.diff(r)))


def check_character_signs(chars: CharacterField, M: float, eps: Optional[float] = None) -> SignReport:
    """min(alpha, beta) >= -eps and max(alpha, beta) < M over defined cells."""
    eps = eps_grid(chars.r) if eps is None else eps
    ok = chars.defined
    if not np.any(ok):
        return SignReport(chars.t, math.inf, None, -math.inf, None, eps, M)
    lo = np.minimum(chars.alpha, chars.beta)
    hi = np.maximum(chars.alpha, chars.beta)
    i = np.flatnonzero(ok)[np.argmin(lo[ok])]
    j = np.flatnonzero(ok)[np.argmax(hi[ok])]
    return SignReport(chars.t, float(lo[i]), float(chars.r[i]), float(hi[j]), float(chars.r[j]), eps, M)


def coefficient_sign_margin(field: FlowField, mask=None):
    """min over cells of (B1 - A1, B2 - A2) from the closed forms, and its radius."""
    from .characters import defined_mask

    sel = defined_mask(field.r, field.h, field.u)
    if mask is not None:
        sel &= mask
    if not np.any(sel):
        return math.inf, None
    co = riccati_coeffs(field.r[sel], field.h[sel], field.u[sel], field.params)
    d = np.minimum(np.atleast_1d(co.d1), np.atleast_1d(co.d2))
    i = int(np.argmin(d))
    return float(d[i]), float(field.r[sel][i])


# --------------------------------------------------------------------------
# ledger


def box_coefficient_profile(params: GasParams, n: int = 20001):
    """Sampled max over s = h/u in (0, (g-1)/2] of |A_i|, |B_i| at m u / r = 1."""
    s = np.linspace(0.0, 0.5 * (params.gamma - 1.0), n)[1:]
    unit = GasParams(params.gamma, params.K, 1)
    co = riccati_coeffs(np.ones_like(s), s, np.ones_like(s), unit)
    vals = np.max(np.abs(np.vstack([co.A1, co.A2, co.B1, co.B2])), axis=0)
    return s, vals


def _unit_coefficient_sup(params: GasParams) -> float:
    """sup_s max |A_i|, |B_i| at m u / r = 1, refined by bounded search."""
    s, vals = box_coefficient_profile(params, 2001)
    top = 0.5 * (params.gamma - 1.0)
    unit = GasParams(params.gamma, params.K, 1)

    def neg(x):
        co = riccati_coeffs(1.0, x, 1.0, unit)
        return -max(abs(co.A1), abs(co.A2), abs(co.B1), abs(co.B2))

    k = int(np.argmax(vals))
    lo, hi = s[max(k - 1, 0)], s[min(k + 1, s.size - 1)]
    best = float(vals[k])
    if hi > lo:
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    best = max(best, -neg(top), -neg(1e-12))
    return best


def k_hat(params: GasParams, b: float, C0: float) -> float:
    """sup |A_i|, |B_i| over r >= b, u <= 2 C0, 0 < h <= (g-1) u / 2.

    All four coefficients equal (m u / r) g(h/u), so the supremum sits at
    u = 2 C0, r = b and only the one-dimensional profile g is searched.
    """
    return params.m * 2.0 * C0 / b * _unit_coefficient_sup(params)


def k_hat_sampled(params: GasParams, b: float, C0: float, n: int = 60) -> float:
    """Dense-grid oracle for K_hat over the three-dimensional state box."""
    u = np.linspace(2.0 * C0 / n, 2.0 * C0, n)
    frac = np.linspace(1.0 / n, 1.0, n)
    r = b * np.linspace(1.0, 4.0, n)
    U, F, Rr = np.meshgrid(u, frac, r, indexing="ij")
    H = F * 0.5 * (params.gamma - 1.0) * U
    co = riccati_coeffs(Rr.ravel(), H.ravel(), U.ravel(), params)
    return float(np.max(np.abs(np.vstack([co.A1, co.A2, co.B1, co.B2]))))


def c_b(params: GasParams, b: float, C0: float) -> float:
    """1 + sup m u^2 / (r c_i): u <= 2C0, u/c1 <= 2/(3-g), r >= b."""
    return 1.0 + 4.0 * params.m * C0 / ((3.0 - params.gamma) * b)


def c_b_sampled(params: GasParams, b: float, C0: float, n: int = 200) -> float:
    u = np.linspace(2.0 * C0 / n, 2.0 * C0, n)
    frac = np.linspace(0.0, 1.0, n)
    U, F = np.meshgrid(u, frac, indexing="ij")
    H = F * 0.5 * (params.gamma - 1.0) * U
    val = params.m * U * U / (b * (U - H))
    return 1.0 + float(np.max(val))


@dataclass(frozen=True)
class BoundLedger:
    gamma: float
    K: float
    m: int
    b: float
    T: float
    C0: float
    M: float
    M0: float
    rho_bar: float
    K_hat: float
    M_b: float
    C_b: float
    M_bar: float
    M_bar_b: float
    C_hat: float
    A_tilde: float

    @property
    def params(self) -> GasParams:
        return GasParams(self.gamma, self.K, self.m)

    def as_dict(self) -> dict:
        return asdict(self)


def build_ledger(params: GasParams, b: float, T: float, C0: float, M0: float, rho_bar: float,
                 M: Optional[float] = None) -> BoundLedger:
    """Evaluate every ledger constant from the hypotheses."""
    if not b > 0.0:
        raise DomainError("ledger constants need b > 0")
    if not rho_bar > 0.0:
        raise DomainError("ledger constants need a positive density infimum")
    g, K, m = params.gamma, params.K, params.m
    M = M0 + M_MARGIN if M is None else M
    geo = 2.0 * m * (g - 1.0) * C0 / (b * (3.0 - g))
    Cb = c_b(params, b, C0)
    M0_pos = max(M0, 0.0)
    M_bar = 1.0 + (K * g) ** (-1.0 / (g - 1.0)) * M0_pos / rho_bar
    grow = math.exp(Cb * T)
    M_bar_b = grow * ((g - 1.0) * C0) ** (2.0 / (g - 1.0)) * M_bar + geo
    C_hat = ((K * g) ** ((3.0 - g) / (4.0 * (g - 1.0))) * rho_bar ** ((3.0 - g) / 4.0)
             * math.exp(-M_bar_b * (3.0 - g) * T / 4.0))
    A_tilde = grow * ((g - 1.0) * C0) ** ((g + 1.0) / (2.0 * (g - 1.0))) * M_bar
    return BoundLedger(g, K, m, b, T, C0, M, M0, rho_bar, k_hat(params, b, C0), M + geo, Cb,
                       M_bar, M_bar_b, C_hat, A_tilde)


def initial_extremes(record):
    """(M0, rho_bar) from the initial snapshot, plus boundary data when a curve is prescribed."""
    sc = record.scenario
    f0 = record.snapshots[0]
    mask = record.masks[0] & (f0.r >= sc.b)
    chars = record.characters(0)
    sel = mask & chars.defined
    M0 = float(np.max(np.maximum(chars.alpha[sel], chars.beta[sel])))
    rho_bar = float(np.min(f0.rho[mask]))
    if sc.boundary is LeftBoundary.CHARACTERISTIC:
        affine = sc.meta.get("affine")
        ts = np.linspace(0.0, sc.T, 201)
        for t in ts:
            rb = sc.left_curve(t)
            rho_b, _ = sc.left_state(np.array([rb]), t)
            rho_bar = min(rho_bar, float(np.ravel(rho_b)[0]))
            if affine is not None:
                a, _ = affine.characters(np.array([rb]), t)
                M0 = max(M0, float(a[0]))
    return M0, rho_bar


def compute_ledger(record, M: Optional[float] = None) -> BoundLedger:
    sc = record.scenario
    M0, rho_bar = initial_extremes(record)
    return build_ledger(sc.params, sc.b, sc.T, sc.C0, M0, rho_bar, M)


# --------------------------------------------------------------------------
# floors and blowup


def _floor(t, rho_bar, b, C0, m, rate):
    return rho_bar * (b / (b + 2.0 * C0 * t)) ** m * np.exp(-rate * t)


def density_floor_rarefaction(t, ledger: BoundLedger, b: Optional[float] = None,
                              C0: Optional[float] = None):
    """rho_bar (b/(b + 2 C0 t))^m exp(-M_b t)."""
    b = ledger.b if b is None else b
    C0 = ledger.C0 if C0 is None else C0
    if not b > 0.0:
        raise DomainError("density floor needs b > 0")
    return _floor(t, ledger.rho_bar, b, C0, ledger.m, ledger.M_b)


def density_floor_general(t, ledger: BoundLedger, b: Optional[float] = None,
                          C0: Optional[float] = None):
    """rho_bar (b/(b + 2 C0 t))^m exp(-M_bar_b t); needs no sign hypothesis."""
    b = ledger.b if b is None else b
    C0 = ledger.C0 if C0 is None else C0
    if not b > 0.0:
        raise DomainError("density floor needs b > 0")
    return _floor(t, ledger.rho_bar, b, C0, ledger.m, ledger.M_bar_b)


def blowup_time_bound(seed: float, C_hat: float, b: float, C0: float, m: int, gamma: float) -> float:
    """Upper bound t* on the singularity time for a negative weighted seed."""
    if not seed < 0.0:
        raise NoBound("blowup bound needs a negative seed character")
    q = 4.0 - m * (3.0 - gamma)
    x = 4.0 * C0 * q / (-seed * (gamma + 1.0) * C_hat * b)
    # (1 + x)^p - 1 without cancellation for tiny x
    return b / (2.0 * C0) * math.expm1(4.0 / q * math.log1p(x))


def ledger_t_star(seed: float, ledger: BoundLedger) -> float:
    return blowup_time_bound(seed, ledger.C_hat, ledger.b, ledger.C0, ledger.m, ledger.gamma)


def remainder_bound(Y: float, ledger: BoundLedger) -> float:
    """Upper bound of the bracketed remainder at weighted character -Y.

    With H the lower bound of h^((3-g)/(2(g-1))) up to T, the remainder is
    at most -(1+g)/8 H Y^2 + K_hat Y + K_hat A_tilde (the geometric term
    -(3-g)/4 m u^2/(r c) Y is non-positive and dropped).
    """
    g = ledger.gamma
    H = ledger.C_hat * (ledger.b / (ledger.b + 2.0 * ledger.C0 * ledger.T)) ** (ledger.m * (3.0 - g) / 4.0)
    return -(1.0 + g) / 8.0 * H * Y * Y + ledger.K_hat * Y + ledger.K_hat * max(ledger.A_tilde, 0.0)


def compression_threshold(ledger: BoundLedger, rtol: float = 1e-3) -> float:
    """Smallest N with a negative remainder for all Y >= N and t*(-N) < T.

    Both conditions are monotone in N (the remainder bound is a downward
    parabola in Y and t* decreases with |seed|), so bisection on N applies.
    """
    for name in ("K_hat", "A_tilde", "C_hat"):
        v = getattr(ledger, name)
        if not math.isfinite(v):
            raise DomainError(f"ledger bound {name} is not finite")
    if not ledger.T > 0.0:
        raise DomainError("threshold needs a positive horizon")
    if not ledger.C_hat > 0.0:
        raise DomainError("threshold undefined: the density bound C_hat underflows at this horizon")

    def ok(N):
        return remainder_bound(N, ledger) < 0.0 and ledger_t_star(-N, ledger) < ledger.T

    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e300:
            raise DomainError("no finite compression threshold")
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid > 0.0 and ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------
# run-level verification


@dataclass
class VerificationReport:
    results: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def get(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def text(self) -> str:
        return "\n".join(r.line() for r in self.results) + "\n"

    def records(self) -> list:
        return [asdict(r) for r in self.results]


def verify_run(record, ledger: Optional[BoundLedger] = None, rarefaction: Optional[bool] = None,
               eps: Optional[float] = None) -> VerificationReport:
    """Apply the checks that the run's hypotheses license.

    Rarefaction runs (non-negative initial characters) get the sign,
    upper-bound and first floor assertions; every run gets the supersonic
    region, coefficient signs and the general floor before blowup.
    """
    sc = record.scenario
    ledger = compute_ledger(record) if ledger is None else ledger
    if rarefaction is None:
        c0 = record.characters(0)
        sel = c0.defined & record.masks[0]
        slack = eps_grid(c0.r) if eps is None else eps
        rarefaction = bool(np.min(np.minimum(c0.alpha[sel], c0.beta[sel])) >= -slack)
    rep = VerificationReport()
    sup = coef = floor_g = floor_r = lower = upper = None
    mins, maxs, times = [], [], []
    blow = record.blowup_time
    for k, snap in enumerate(record.snapshots):
        t = snap.t
        mask = record.masks[k] & (snap.r >= sc.b)
        if blow is not None and t >= blow:
            # state at detection is already past the smooth regime
            continue
        mg, rr = supersonic_margin(snap, sc.C0, mask)
        sup = _worse(sup, "supersonic_region", mg, rr, t)
        dg, rr = coefficient_sign_margin(snap, mask)
        coef = _worse(coef, "coefficient_signs", dg, rr, t)
        if np.any(mask):
            fl = density_floor_general(t, ledger)
            i = int(np.argmin(snap.rho[mask]))
            floor_g = _worse(floor_g, "density_floor_general", float(snap.rho[mask][i] - fl),
                             float(snap.r[mask][i]), t)
            if rarefaction:
                fl = density_floor_rarefaction(t, ledger)
                floor_r = _worse(floor_r, "density_floor_rarefaction",
                                 float(snap.rho[mask][i] - fl), float(snap.r[mask][i]), t)
        chars = record.characters(k)
        s = check_character_signs(chars, ledger.M, eps)
        times.append(t)
        mins.append(s.min_value)
        maxs.append(s.max_value)
        if rarefaction and s.min_r is not None:
            lower = _worse(lower, "character_lower_bound", s.min_value + s.eps, s.min_r, t)
            upper = _worse(upper, "character_upper_bound", ledger.M - s.max_value, s.max_r, t)
    for res in (sup, coef, floor_r, floor_g, lower, upper):
        if res is not None:
            rep.results.append(res)
    if upper is not None and upper.worst_margin == 0.0:
        upper.passed = False
    rep.series = {"t": times, "min_character": mins, "max_character": maxs}
    if record.cause == "fatal":
        rep.results.append(CheckResult("solver", False, -math.inf, detail=record.error or ""))
    return rep
