"""Shared test utilities: independent finite-difference oracles and fitting."""

import numpy as np


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient; independent of any analytic oracle."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_field_jacobian_vec(F, z, v, h=1e-6):
    """Central finite-difference directional derivative of a vector field."""
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    return (F(z + h * v) - F(z - h * v)) / (2 * h)


def loglog_slope(xs, ys):
    """Least-squares slope of log ys against log xs (both must be positive)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    mask = (xs > 0) & (ys > 0)
    lx, ly = np.log(xs[mask]), np.log(ys[mask])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, _), *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(slope)


def max_step_ratio(values):
    """Largest consecutive ratio v_{k+1} / v_k of a positive sequence."""
    values = np.asarray(values, dtype=float)
    return float(np.max(values[1:] / values[:-1]))
