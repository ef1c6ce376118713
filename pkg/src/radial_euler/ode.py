"""Adaptive Dormand-Prince 5(4) integrator with cubic Hermite dense output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# Dormand-Prince tableau (FSAL)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights minus embedded 4th-order weights
_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


class IntegrationError(RuntimeError):
    def __init__(self, message, t=None, step=None, y=None):
        super().__init__(message)
        self.t, self.step, self.y = t, step, y


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps of an integration; callable for dense output."""

    t: np.ndarray
    y: np.ndarray
    dydt: np.ndarray
    terminated: Optional[str] = None

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(tq < self.t[0] - 1e-14) or np.any(tq > self.t[-1] + 1e-14):
            raise ValueError(f"dense output requested outside [{self.t[0]}, {self.t[-1]}]")
        k = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[k], self.t[k + 1]
        hstep = t1 - t0
        s = ((tq - t0) / hstep)[:, None]
        y0, y1 = self.y[k], self.y[k + 1]
        f0, f1 = self.dydt[k] * hstep[:, None], self.dydt[k + 1] * hstep[:, None]
        s2, s3 = s * s, s * s * s
        out = ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * f0
               + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * f1)
        return out[0] if scalar else out

    @property
    def t_end(self) -> float:
        return float(self.t[-1])


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h0: Optional[float] = None,
    max_step: float = np.inf,
    max_steps: int = 1_000_000,
    stop: Optional[Callable[[float, np.ndarray], Optional[str]]] = None,
) -> Trajectory:
    """Integrate y' = f(t, y) from t0 to t_end.

    ``stop(t, y)`` may return a reason string to end the integration early
    after an accepted step; the trajectory then records it in ``terminated``.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    ts, ys, fs = [t], [y.copy()], []
    span = t_end - t0
    if span < 0:
        raise ValueError("backward integration is not supported")
    k1 = np.asarray(f(t, y), dtype=float)
    fs.append(k1)
    if span == 0.0:
        return Trajectory(np.array(ts), np.array(ys), np.array(fs))
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((k1 / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    hstep = min(h0, span, max_step)
    terminated = None
    n = 0
    while t < t_end:
        n += 1
        if n > max_steps:
            raise IntegrationError("maximum number of steps exceeded", t, hstep, y)
        if t + hstep > t_end:
            hstep = t_end - t
        ks = [k1]
        # non-finite trial stages are detected below and the step retried
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(1, 7):
                yi = y + hstep * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(np.asarray(f(t + _C[i] * hstep, yi), dtype=float))
            y_new = y + hstep * sum(a * k for a, k in zip(_A[6], ks[:6]))
            err = hstep * sum(e * k for e, k in zip(_E, ks))
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            enorm = np.sqrt(np.mean((err / scale) ** 2))
        if not np.isfinite(enorm):
            hstep *= 0.25
            if hstep < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("non-finite derivative; step size collapsed", t, hstep, y)
            continue
        if enorm <= 1.0:
            t = t + hstep if t + hstep < t_end else t_end
            y = y_new
            k1 = ks[6]
            ts.append(t)
            ys.append(y.copy())
            fs.append(k1)
            fac = 0.9 * enorm ** (-0.2) if enorm > 0 else 5.0
            hstep = min(hstep * min(5.0, max(0.2, fac)), max_step)
            if stop is not None:
                terminated = stop(t, y)
                if terminated:
                    break
        else:
            hstep *= max(0.2, 0.9 * enorm ** (-0.2))
            if hstep < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError(
                    f"tolerance unachievable (error norm {enorm:.3g})", t, hstep, y
                )
    return Trajectory(np.array(ts), np.array(ys), np.array(fs), terminated)
