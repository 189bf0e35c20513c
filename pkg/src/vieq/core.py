"""Vector math, constraint sets, and the problem abstractions shared by all solvers.

Points are plain 1-D float64 numpy arrays. Every oracle is a pure function of
its arguments, and problem/field objects are immutable after construction, so
everything in this module is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

Array = np.ndarray


class MissingOracleError(ValueError):
    """Raised when an algorithm needs an oracle the problem does not provide."""


def as_point(x, dim: Optional[int] = None) -> Array:
    """Validate ``x`` as a finite 1-D float vector, optionally of dimension ``dim``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point contains non-finite entries")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    return arr


def inner(x, y) -> float:
    """Euclidean inner product <x, y>."""
    xa = as_point(x)
    ya = as_point(y, dim=xa.size)
    return float(np.dot(xa, ya))


# ---------------------------------------------------------------------------
# Constraint sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WholeSpace:
    """Unconstrained R^d; projection is the identity."""

    dim: int

    def project(self, x) -> Array:
        return as_point(x, dim=self.dim)

    def contains(self, x, tol: float = 1e-12) -> bool:
        as_point(x, dim=self.dim)
        return True


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lower <= x <= upper}."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lo = as_point(self.lower)
        hi = as_point(self.upper, dim=lo.size)
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, x) -> Array:
        return np.clip(as_point(x, dim=self.dim), self.lower, self.upper)

    def contains(self, x, tol: float = 1e-12) -> bool:
        xa = as_point(x, dim=self.dim)
        return bool(np.all(xa >= self.lower - tol) and np.all(xa <= self.upper + tol))


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: Array
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    def project(self, x) -> Array:
        xa = as_point(x, dim=self.dim)
        diff = xa - self.center
        norm = float(np.linalg.norm(diff))
        if norm <= self.radius:
            return xa
        return self.center + diff * (self.radius / norm)

    def contains(self, x, tol: float = 1e-12) -> bool:
        xa = as_point(x, dim=self.dim)
        return float(np.linalg.norm(xa - self.center)) <= self.radius + tol


ConstraintSet = Union[WholeSpace, Box, Ball]


def project(cset: ConstraintSet, x) -> Array:
    """Euclidean projection of ``x`` onto a convex constraint set."""
    return cset.project(x)


# ---------------------------------------------------------------------------
# Problems and vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarProblem:
    """An objective with value/derivative oracles and declared regularity constants.

    The constants are trusted inputs: ``L`` (smoothness), ``mu`` (strong
    convexity), ``rho`` (Hessian Lipschitz), ``G`` (subgradient bound) and
    ``R`` (initial-distance bound). Diagnostics can falsify them by sampling
    but never infer them.
    """

    dim: int
    value: Callable[[Array], float]
    gradient: Optional[Callable[[Array], Array]] = None
    subgradient: Optional[Callable[[Array], Array]] = None
    hessian_vec: Optional[Callable[[Array, Array], Array]] = None
    L: Optional[float] = None
    mu: Optional[float] = None
    rho: Optional[float] = None
    G: Optional[float] = None
    R: Optional[float] = None
    x_star: Optional[Array] = None
    f_star: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if self.x_star is not None:
            object.__setattr__(self, "x_star", as_point(self.x_star, dim=self.dim))

    def f(self, x) -> float:
        return float(self.value(as_point(x, dim=self.dim)))

    def grad(self, x) -> Array:
        if self.gradient is None:
            raise MissingOracleError(f"problem {self.name!r} has no gradient oracle")
        return as_point(self.gradient(as_point(x, dim=self.dim)), dim=self.dim)

    def subgrad(self, x) -> Array:
        """A deterministic element of the subdifferential (gradient where smooth)."""
        if self.subgradient is not None:
            return as_point(self.subgradient(as_point(x, dim=self.dim)), dim=self.dim)
        return self.grad(x)

    def hess_vec(self, x, v) -> Array:
        if self.hessian_vec is None:
            raise MissingOracleError(f"problem {self.name!r} has no Hessian-vector oracle")
        xa = as_point(x, dim=self.dim)
        va = as_point(v, dim=self.dim)
        return as_point(self.hessian_vec(xa, va), dim=self.dim)

    def hessian(self, x) -> Array:
        """Dense Hessian assembled column by column from the hvp oracle."""
        xa = as_point(x, dim=self.dim)
        cols = [self.hess_vec(xa, e) for e in np.eye(self.dim)]
        return np.column_stack(cols)

    @property
    def has_optimum(self) -> bool:
        return self.x_star is not None and self.f_star is not None


@dataclass(frozen=True)
class VectorField:
    """An operator F with evaluation and optional Jacobian-vector oracles.

    Affine fields F(z) = matrix @ z + offset carry their coefficients so that
    the exact resolvent backend can solve the linear system directly.
    """

    dim: int
    func: Callable[[Array], Array]
    jacobian_vec: Optional[Callable[[Array, Array], Array]] = None
    L: Optional[float] = None
    mu: Optional[float] = None
    alpha: Optional[float] = None
    fixed_point: Optional[Array] = None
    matrix: Optional[Array] = None
    offset: Optional[Array] = None
    name: str = ""

    def __post_init__(self):
        if self.fixed_point is not None:
            fp = as_point(self.fixed_point, dim=self.dim)
            object.__setattr__(self, "fixed_point", fp)
            resid = float(np.linalg.norm(self.func(fp)))
            if resid > 1e-10 * (1.0 + float(np.linalg.norm(fp))):
                raise ValueError(
                    f"declared fixed point of {self.name!r} has residual {resid:.3e}"
                )
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.dim, self.dim):
                raise ValueError("affine matrix shape does not match field dimension")
            object.__setattr__(self, "matrix", m)
            q = np.zeros(self.dim) if self.offset is None else as_point(self.offset, dim=self.dim)
            object.__setattr__(self, "offset", q)

    def __call__(self, z) -> Array:
        return as_point(self.func(as_point(z, dim=self.dim)), dim=self.dim)

    def jac_vec(self, z, v) -> Array:
        if self.jacobian_vec is None:
            raise MissingOracleError(f"field {self.name!r} has no Jacobian-vector oracle")
        za = as_point(z, dim=self.dim)
        va = as_point(v, dim=self.dim)
        return as_point(self.jacobian_vec(za, va), dim=self.dim)

    @property
    def is_affine(self) -> bool:
        return self.matrix is not None


def bregman_divergence(h: ScalarProblem, y, x) -> float:
    """D_h(y, x) = h(y) - h(x) - <grad h(x), y - x>; nonnegative for convex h."""
    ya = as_point(y, dim=h.dim)
    xa = as_point(x, dim=h.dim)
    if h.gradient is None:
        raise MissingOracleError("Bregman divergence needs a gradient oracle for h")
    return h.f(ya) - h.f(xa) - float(np.dot(h.grad(xa), ya - xa))


# ---------------------------------------------------------------------------
# Run traces
# ---------------------------------------------------------------------------


class RunTrace:
    """Immutable per-iteration record of an algorithm run.

    Columns are stored as read-only arrays; metrics that are unavailable for a
    run (an unknown optimum, say) are ``None`` rather than NaN so that CSV
    output renders them as empty cells.
    """

    def __init__(
        self,
        config: dict,
        ks: Sequence[int],
        ts: Sequence[float],
        xs: Sequence[Array],
        dist_err: Optional[Sequence[float]] = None,
        f_err: Optional[Sequence[float]] = None,
        grad_norm: Optional[Sequence[float]] = None,
        extras: Optional[dict] = None,
    ):
        self.config = dict(config)
        self.ks = self._freeze(np.asarray(ks, dtype=int))
        self.ts = self._freeze(np.asarray(ts, dtype=float))
        self.xs = self._freeze(np.asarray(xs, dtype=float))
        n = self.ks.size
        if self.ts.size != n or self.xs.shape[0] != n:
            raise ValueError("trace columns have inconsistent lengths")
        if np.any(np.diff(self.ks) <= 0):
            raise ValueError("trace records must be sorted by iteration index")
        self.dist_err = self._freeze_opt(dist_err, n)
        self.f_err = self._freeze_opt(f_err, n)
        self.grad_norm = self._freeze_opt(grad_norm, n)
        self.extras = {}
        for key, col in (extras or {}).items():
            self.extras[key] = self._freeze(np.asarray(col))

    @staticmethod
    def _freeze(arr: Array) -> Array:
        arr.setflags(write=False)
        return arr

    def _freeze_opt(self, col, n) -> Optional[Array]:
        if col is None:
            return None
        arr = np.asarray(col, dtype=float)
        if arr.size != n:
            raise ValueError("trace columns have inconsistent lengths")
        return self._freeze(arr)

    def __len__(self) -> int:
        return int(self.ks.size)

    @property
    def dim(self) -> int:
        return int(self.xs.shape[1])

    @property
    def final_x(self) -> Array:
        return self.xs[-1]

    def column(self, name: str) -> Optional[Array]:
        if name in ("k", "ks"):
            return self.ks
        if name in ("t", "ts"):
            return self.ts
        if name in ("dist_err", "f_err", "grad_norm"):
            return getattr(self, name)
        return self.extras.get(name)


def trace_metrics(problem_or_field, x: Array):
    """(dist_err, f_err, grad_norm) of one iterate, with None for unknowable metrics."""
    if isinstance(problem_or_field, ScalarProblem):
        p = problem_or_field
        dist = float(np.linalg.norm(x - p.x_star)) if p.x_star is not None else None
        ferr = p.f(x) - p.f_star if p.f_star is not None else None
        if p.gradient is not None:
            gnorm = float(np.linalg.norm(p.grad(x)))
        elif p.subgradient is not None:
            gnorm = float(np.linalg.norm(p.subgrad(x)))
        else:
            gnorm = None
        return dist, ferr, gnorm
    fld = problem_or_field
    dist = float(np.linalg.norm(x - fld.fixed_point)) if fld.fixed_point is not None else None
    return dist, None, float(np.linalg.norm(fld(x)))
