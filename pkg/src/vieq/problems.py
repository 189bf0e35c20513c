"""Test-problem zoo with analytically known optima, fixed points, and constants.

Constants (extreme eigenvalues, singular values) are computed eagerly at
construction; instances are small (d <= 100) so this is cheap and the
convergence theorems get exact inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Array, ScalarProblem, VectorField, as_point


def quadratic(Q, b=None, name: str = "quadratic") -> ScalarProblem:
    """f(x) = 0.5 x'Qx - b'x for symmetric PSD Q; L, mu are the extreme eigenvalues."""
    Qm = np.asarray(Q, dtype=float)
    if Qm.ndim != 2 or Qm.shape[0] != Qm.shape[1]:
        raise ValueError("Q must be a square matrix")
    if not np.allclose(Qm, Qm.T, atol=1e-12):
        raise ValueError("Q must be symmetric")
    d = Qm.shape[0]
    bv = np.zeros(d) if b is None else as_point(b, dim=d)
    eigs = np.linalg.eigvalsh(Qm)
    lmax = float(eigs[-1])
    lmin = float(eigs[0])

    x_star = None
    f_star = None
    candidate = np.linalg.pinv(Qm) @ bv
    if np.linalg.norm(Qm @ candidate - bv) <= 1e-10 * (1.0 + np.linalg.norm(bv)):
        x_star = candidate
        f_star = float(0.5 * candidate @ Qm @ candidate - bv @ candidate)

    return ScalarProblem(
        dim=d,
        value=lambda x: float(0.5 * x @ Qm @ x - bv @ x),
        gradient=lambda x: Qm @ x - bv,
        hessian_vec=lambda x, v: Qm @ v,
        L=lmax,
        mu=max(lmin, 0.0),
        x_star=x_star,
        f_star=f_star,
        name=name,
    )


def abs_value(name: str = "abs") -> ScalarProblem:
    """f(x) = |x| on R, with the minimal-norm subgradient 0 at the kink."""

    def sub(x: Array) -> Array:
        v = x[0]
        if v > 0:
            return np.array([1.0])
        if v < 0:
            return np.array([-1.0])
        return np.array([0.0])

    return ScalarProblem(
        dim=1,
        value=lambda x: float(abs(x[0])),
        subgradient=sub,
        G=1.0,
        R=1.0,
        x_star=np.array([0.0]),
        f_star=0.0,
        name=name,
    )


# The strict-saddle instance confines iterates with a quartic so that minima
# exist and the Hessian-Lipschitz constant is finite on the box |x_0| <= 2.
SADDLE_BOX_HALFWIDTH = 2.0


def strict_saddle(dim: int, lam_neg: float = -1.0, name: str = "") -> ScalarProblem:
    """f(x) = 0.5 (lam_neg x_0^2 + sum_{i>0} x_i^2) + 0.25 x_0^4.

    The origin is a strict saddle with smallest Hessian eigenvalue ``lam_neg``;
    the two minima sit at x_0 = +-sqrt(-lam_neg) with all other coordinates 0.
    Declared L and rho hold on the box |x_0| <= 2.
    """
    if dim < 2:
        raise ValueError("strict saddle instance needs dim >= 2")
    if not lam_neg < 0:
        raise ValueError("lam_neg must be negative")

    def value(x: Array) -> float:
        return float(
            0.5 * (lam_neg * x[0] ** 2 + np.sum(x[1:] ** 2)) + 0.25 * x[0] ** 4
        )

    def gradient(x: Array) -> Array:
        g = x.copy()
        g[0] = lam_neg * x[0] + x[0] ** 3
        return g

    def hessian_vec(x: Array, v: Array) -> Array:
        out = v.copy()
        out[0] = (lam_neg + 3.0 * x[0] ** 2) * v[0]
        return out

    w = SADDLE_BOX_HALFWIDTH
    L = max(abs(lam_neg), lam_neg + 3.0 * w * w, 1.0)
    rho = 6.0 * w
    root = float(np.sqrt(-lam_neg))
    x_star = np.zeros(dim)
    x_star[0] = root

    return ScalarProblem(
        dim=dim,
        value=value,
        gradient=gradient,
        hessian_vec=hessian_vec,
        L=float(L),
        rho=rho,
        x_star=x_star,
        f_star=-0.25 * lam_neg**2,
        name=name or f"strict-saddle-d{dim}",
    )


def bilinear_game(A, name: str = "bilinear") -> tuple[ScalarProblem, VectorField]:
    """Zero-sum payoff f(x1, x2) = x1'A x2 and its two-player field (A x2, -A' x1)."""
    Am = np.atleast_2d(np.asarray(A, dtype=float))
    d1, d2 = Am.shape
    d = d1 + d2

    def value(z: Array) -> float:
        return float(z[:d1] @ Am @ z[d1:])

    def gradient(z: Array) -> Array:
        return np.concatenate([Am @ z[d1:], Am.T @ z[:d1]])

    payoff = ScalarProblem(dim=d, value=value, gradient=gradient, name=f"{name}-payoff")

    M = np.zeros((d, d))
    M[:d1, d1:] = Am
    M[d1:, :d1] = -Am.T
    fixed = None
    if d1 == d2 and np.linalg.matrix_rank(Am) == d1:
        fixed = np.zeros(d)
    field = VectorField(
        dim=d,
        func=lambda z: M @ z,
        jacobian_vec=lambda z, v: M @ v,
        L=float(np.linalg.norm(Am, 2)),
        mu=0.0,
        fixed_point=fixed,
        matrix=M,
        offset=np.zeros(d),
        name=name,
    )
    return payoff, field


def affine_field(M, q=None, name: str = "affine") -> VectorField:
    """F(z) = Mz + q with exact constants from the symmetric part and singular values."""
    Mm = np.atleast_2d(np.asarray(M, dtype=float))
    if Mm.shape[0] != Mm.shape[1]:
        raise ValueError("M must be square")
    d = Mm.shape[0]
    qv = np.zeros(d) if q is None else as_point(q, dim=d)

    sym_min = float(np.linalg.eigvalsh(0.5 * (Mm + Mm.T))[0])
    mu = sym_min if sym_min > -1e-12 else None
    if mu is not None:
        mu = max(mu, 0.0)
    L = float(np.linalg.norm(Mm, 2))

    fixed = None
    if np.linalg.matrix_rank(Mm) == d:
        fixed = np.linalg.solve(Mm, -qv)

    return VectorField(
        dim=d,
        func=lambda z: Mm @ z + qv,
        jacobian_vec=lambda z, v: Mm @ v,
        L=L,
        mu=mu,
        fixed_point=fixed,
        matrix=Mm,
        offset=qv,
        name=name,
    )


def game_field(costs: Sequence[ScalarProblem], dims: Sequence[int], name: str = "game") -> VectorField:
    """Stack each player's own-block gradient grad_{x_i} g_i(x) into one field."""
    dims = [int(di) for di in dims]
    if len(costs) != len(dims):
        raise ValueError("need one cost per player block")
    total = sum(dims)
    offsets = np.concatenate([[0], np.cumsum(dims)])
    for g in costs:
        if g.dim != total:
            raise ValueError(
                f"cost {g.name!r} is defined on dim {g.dim}, expected the stacked dim {total}"
            )

    def func(z: Array) -> Array:
        out = np.empty(total)
        for i, g in enumerate(costs):
            lo, hi = offsets[i], offsets[i + 1]
            out[lo:hi] = g.grad(z)[lo:hi]
        return out

    jac_vec = None
    if all(g.hessian_vec is not None for g in costs):
        def jac_vec(z: Array, v: Array) -> Array:
            out = np.empty(total)
            for i, g in enumerate(costs):
                lo, hi = offsets[i], offsets[i + 1]
                out[lo:hi] = g.hess_vec(z, v)[lo:hi]
            return out

    return VectorField(dim=total, func=func, jacobian_vec=jac_vec, name=name)


# ---------------------------------------------------------------------------
# Named registry (CLI-addressable)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    kind: str  # "scalar" or "field"
    make: Callable[[], object]
    x0: Array
    description: str


def _rotation_field() -> VectorField:
    _, field = bilinear_game(np.array([[1.0]]), name="rotation")
    return field


def _strongmono_field() -> VectorField:
    root3 = float(np.sqrt(3.0))
    M = np.array([[1.0, root3], [-root3, 1.0]])
    return affine_field(M, np.zeros(2), name="strongmono-affine")


def _gaussian_potential() -> ScalarProblem:
    return quadratic(np.eye(1), np.zeros(1), name="gaussian")


REGISTRY: dict[str, RegistryEntry] = {}


def _register(name, kind, make, x0, description):
    REGISTRY[name] = RegistryEntry(name, kind, make, np.asarray(x0, dtype=float), description)


_register(
    "quadratic-identity",
    "scalar",
    lambda: quadratic(np.eye(2), np.zeros(2), name="quadratic-identity"),
    [5.0, 5.0],
    "f(x) = 0.5||x||^2 in R^2; L = mu = 1",
)
_register(
    "quadratic-cond100",
    "scalar",
    lambda: quadratic(np.diag([1.0, 100.0]), np.array([1.0, 100.0]), name="quadratic-cond100"),
    [0.0, 0.0],
    "diagonal quadratic with condition number 100; optimum (1, 1)",
)
_register(
    "abs",
    "scalar",
    abs_value,
    [1.0],
    "f(x) = |x| on R with subgradient oracle; G = R = 1",
)
_register(
    "strict-saddle-d2",
    "scalar",
    lambda: strict_saddle(2),
    [0.0, 0.1],
    "strict saddle at the origin, minima at (+-1, 0); start on the stable manifold",
)
_register(
    "strict-saddle-d10",
    "scalar",
    lambda: strict_saddle(10),
    [0.0, 0.1] + [0.0] * 8,
    "10-dimensional strict saddle; start on the stable manifold",
)
_register(
    "rotation",
    "field",
    _rotation_field,
    [1.0, 0.0],
    "pure rotation field F(z) = (z2, -z1); monotone with mu = 0",
)
_register(
    "strongmono-affine",
    "field",
    _strongmono_field,
    [1.0, 1.0],
    "strongly monotone affine field with mu = 1, L = 2",
)
_register(
    "gaussian",
    "scalar",
    _gaussian_potential,
    [0.0],
    "standard Gaussian potential U(x) = 0.5 x^2 for the samplers",
)


def get_problem(name: str):
    """Instantiate a registry problem; returns (entry, problem_or_field)."""
    try:
        entry = REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise KeyError(f"unknown problem {name!r}; known problems: {known}") from None
    return entry, entry.make()


def list_problems() -> list[str]:
    return sorted(REGISTRY)
