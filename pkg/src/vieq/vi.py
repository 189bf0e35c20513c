"""Fixed-point algorithms for variational inequalities: projected forward
iteration, proximal point with three resolvent back-ends, extragradient,
optimistic gradient, and lookahead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    Array,
    ConstraintSet,
    MissingOracleError,
    RunTrace,
    VectorField,
    WholeSpace,
    as_point,
    project,
    trace_metrics,
)


# ---------------------------------------------------------------------------
# Resolvent backends
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactAffine:
    """Solve (I + eta M) y = x - eta q directly; affine fields only."""


@dataclass(frozen=True)
class FixedPointIter:
    """Picard iteration y <- x - eta F(y); contracts when eta L < 1."""

    tol: float = 1e-12
    max_inner: int = 100_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class TruncatedSeries:
    """Power-series resolvent sum_{j<=m} (-eta M)^j (x - eta q); affine fields only."""

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("series order must be at least 1")


ResolventBackend = Union[ExactAffine, FixedPointIter, TruncatedSeries]


def resolvent(field: VectorField, eta: float, backend: ResolventBackend, x) -> Array:
    """Apply the backward operator (I + eta F)^{-1} to x, to backend accuracy."""
    xa = as_point(x, dim=field.dim)
    if isinstance(backend, ExactAffine):
        if not field.is_affine:
            raise MissingOracleError("the exact backend needs an affine field")
        A = np.eye(field.dim) + eta * field.matrix
        try:
            return np.linalg.solve(A, xa - eta * field.offset)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"resolvent system is singular at eta={eta}") from exc
    if isinstance(backend, TruncatedSeries):
        if not field.is_affine:
            raise MissingOracleError("the truncated-series backend needs an affine field")
        w = xa - eta * field.offset
        acc = w.copy()
        term = w
        for _ in range(backend.order):
            term = -eta * (field.matrix @ term)
            acc += term
        return acc
    if isinstance(backend, FixedPointIter):
        y = xa.copy()
        for _ in range(backend.max_inner):
            y_next = xa - eta * field(y)
            if np.linalg.norm(y_next + eta * field(y_next) - xa) <= backend.tol:
                return y_next
            y = y_next
        raise RuntimeError(
            f"resolvent iteration failed to reach tol={backend.tol} "
            f"within {backend.max_inner} inner steps (eta L < 1 required)"
        )
    raise TypeError(f"unknown resolvent backend {backend!r}")


def backend_from_string(text: str) -> ResolventBackend:
    """Parse 'affine', 'picard[:tol]', or 'series:m'."""
    parts = text.split(":")
    kind = parts[0]
    if kind == "affine":
        return ExactAffine()
    if kind == "picard":
        return FixedPointIter(tol=float(parts[1])) if len(parts) > 1 else FixedPointIter()
    if kind == "series":
        if len(parts) < 2:
            raise ValueError("series backend needs a truncation order, e.g. series:8")
        return TruncatedSeries(order=int(parts[1]))
    raise ValueError(f"unknown resolvent backend {text!r} (use affine, picard:tol, series:m)")


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def _trace(field, algorithm, step, xs, extras=None, **config):
    cols = [trace_metrics(field, x) for x in xs]
    dist, _, gnorm = zip(*cols)
    n = len(xs)
    cfg = {"algorithm": algorithm, "problem": field.name, "step": step}
    cfg.update(config)
    return RunTrace(
        config=cfg,
        ks=np.arange(n),
        ts=np.arange(n) * step,
        xs=np.asarray(xs),
        dist_err=None if dist[0] is None else dist,
        grad_norm=gnorm,
        extras=extras,
    )


def run_forward(
    field: VectorField,
    cset: Optional[ConstraintSet],
    z0,
    iters: int,
    step: Optional[float] = None,
) -> RunTrace:
    """Projected forward iteration z_{k+1} = proj(z_k - step F(z_k)).

    The default step mu / L^2 is the one that contracts squared distance by
    1 - (mu/L)^2 per iteration on strongly monotone Lipschitz fields.
    """
    if step is None:
        if not field.mu or field.L is None:
            raise MissingOracleError("default forward step needs declared mu > 0 and L")
        step = field.mu / field.L**2
    if cset is None:
        cset = WholeSpace(field.dim)

    z = as_point(z0, dim=field.dim)
    zs = [z]
    for _ in range(iters):
        z = project(cset, z - step * field(z))
        zs.append(z)
    return _trace(field, "forward", step, zs, constraint=type(cset).__name__)


def run_ppm(
    field: VectorField,
    z0,
    iters: int,
    step: float,
    backend: ResolventBackend = ExactAffine(),
) -> RunTrace:
    """Proximal point method z_{k+1} = (I + step F)^{-1} z_k.

    When the field declares a fixed point, the trace records the per-step
    descent slack ||z_k - z*||^2 - ||z_{k+1} - z*||^2 - step^2 ||F(z_{k+1})||^2,
    which is nonnegative for monotone fields.
    """
    z = as_point(z0, dim=field.dim)
    zs = [z]
    slacks = [0.0]
    zstar = field.fixed_point
    for _ in range(iters):
        z_next = resolvent(field, step, backend, z)
        if zstar is not None:
            slack = (
                float(np.linalg.norm(z - zstar) ** 2)
                - float(np.linalg.norm(z_next - zstar) ** 2)
                - step**2 * float(np.linalg.norm(field(z_next)) ** 2)
            )
            slacks.append(slack)
        z = z_next
        zs.append(z)
    extras = {"descent_slack": np.asarray(slacks)} if zstar is not None else None
    return _trace(field, "ppm", step, zs, extras=extras, backend=repr(backend))


def run_eg(field: VectorField, z0, iters: int, step: Optional[float] = None) -> RunTrace:
    """Extragradient: evaluate F at the extrapolated midpoint.

    z~_k = z_k - step F(z_k);  z_{k+1} = z_k - step F(z~_k).
    Default step 1 / (2 (L + mu)) when the constants are declared.
    """
    if step is None:
        if field.L is None or field.mu is None:
            raise MissingOracleError("default extragradient step needs declared L and mu")
        step = 1.0 / (2.0 * (field.L + field.mu))

    z = as_point(z0, dim=field.dim)
    zs = [z]
    for _ in range(iters):
        z_mid = z - step * field(z)
        z = z - step * field(z_mid)
        zs.append(z)
    return _trace(field, "eg", step, zs)


def run_ogda(field: VectorField, z0, iters: int, step: float) -> RunTrace:
    """Optimistic update z_{k+1} = z_k - 2 step F(z_k) + step F(z_{k-1}).

    Initialized with z_{-1} = z_0, so the first step is a plain forward step.
    """
    z = as_point(z0, dim=field.dim)
    f_prev = field(z)
    zs = [z]
    for _ in range(iters):
        f_curr = field(z)
        z = z - 2.0 * step * f_curr + step * f_prev
        f_prev = f_curr
        zs.append(z)
    return _trace(field, "ogda", step, zs)


def run_lookahead(
    field: VectorField,
    z0,
    iters: int,
    step: float,
    inner_steps: int = 2,
    averaging: float = 0.5,
) -> RunTrace:
    """Lookahead over a forward-step base: run ``inner_steps`` base updates,
    then average back, z_{k+1} = z_k + averaging * (z~ - z_k)."""
    if inner_steps < 1:
        raise ValueError("lookahead needs at least one inner step")
    if not 0.0 < averaging <= 1.0:
        raise ValueError("averaging coefficient must lie in (0, 1]")

    z = as_point(z0, dim=field.dim)
    zs = [z]
    for _ in range(iters):
        fast = z
        for _ in range(inner_steps):
            fast = fast - step * field(fast)
        z = z + averaging * (fast - z)
        zs.append(z)
    return _trace(field, "la", step, zs, inner_steps=inner_steps, averaging=averaging)


def vi_residual(field: VectorField, cset: Optional[ConstraintSet], x) -> float:
    """Natural-map residual ||x - proj(x - F(x))||; zero exactly at solutions."""
    xa = as_point(x, dim=field.dim)
    if cset is None:
        cset = WholeSpace(field.dim)
    return float(np.linalg.norm(xa - project(cset, xa - field(xa))))
