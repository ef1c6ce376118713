"""Finite-difference radial derivatives on (possibly non-uniform) grids.

Interior points use 5-point, 4th-order stencils; the two cells at each end
fall back to 3-point 2nd-order stencils (one-sided at the boundary cell).
"""

import numpy as np


def fornberg_weights(x0: float, x: np.ndarray, k: int = 1) -> np.ndarray:
    """Weights of the k-th derivative at ``x0`` from nodes ``x`` (Fornberg 1988)."""
    n = len(x)
    c = np.zeros((n, k + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, k)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, k]


def _is_uniform(r):
    d = np.diff(r)
    return np.allclose(d, d[0], rtol=1e-10, atol=0.0)


def radial_derivative(f: np.ndarray, r: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    n = r.size
    if n < 3:
        raise ValueError("need at least 3 points")
    out = np.empty_like(f)
    if _is_uniform(r):
        dr = r[1] - r[0]
        if n >= 5:
            out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dr)
            out[1] = (f[2] - f[0]) / (2.0 * dr)
            out[-2] = (f[-1] - f[-3]) / (2.0 * dr)
        else:
            out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dr)
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr)
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dr)
        return out
    idx, w = _stencil_table(r)
    return np.sum(w * f[idx], axis=1)


_TABLES: dict = {}


def _stencil_table(r):
    """Per-point stencil indices and weights, cached per grid."""
    key = (r.size, hash(r.tobytes()))
    hit = _TABLES.get(key)
    if hit is not None and np.array_equal(hit[0], r):
        return hit[1], hit[2]
    n = r.size
    idx = np.empty((n, 5), dtype=int)
    w = np.zeros((n, 5))
    for i in range(n):
        if 2 <= i <= n - 3:
            sel = np.arange(i - 2, i + 3)
        elif i == 0:
            sel = np.arange(0, 3)
        elif i == n - 1:
            sel = np.arange(n - 3, n)
        else:
            sel = np.arange(i - 1, i + 2)
        idx[i, :] = sel[0]
        idx[i, : sel.size] = sel
        w[i, : sel.size] = fornberg_weights(r[i], r[sel])
    if len(_TABLES) > 32:
        _TABLES.clear()
    _TABLES[key] = (r.copy(), idx, w)
    return idx, w
