"""Continuous-time dynamics: gradient flow, the Nesterov ODE, Bregman
Euler-Lagrange dynamics with a Lyapunov monitor, and high-resolution limits of
the fixed-point algorithms, with pluggable integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Array, MissingOracleError, ScalarProblem, VectorField, as_point, bregman_divergence


class IntegrationError(RuntimeError):
    """Non-finite state during integration; carries the offending time."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"non-finite state encountered at t={t:g}")


@dataclass(frozen=True)
class Dynamics:
    """A first- or second-order ODE right-hand side.

    ``rhs(t, x)`` returns the velocity for first-order dynamics;
    ``rhs(t, x, v)`` returns the acceleration for second-order dynamics.
    Second-order dynamics of the form  a = -c(t) v + g(t, x)  may expose the
    ``damping``/``force`` split, which the leapfrog integrator requires.
    ``singular_at_zero`` marks right-hand sides with a 1/t term.
    """

    order: int
    rhs: Callable
    t0: float = 0.0
    name: str = ""
    params: dict = field(default_factory=dict)
    damping: Optional[Callable[[float], float]] = None
    force: Optional[Callable[[float, Array], Array]] = None
    singular_at_zero: bool = False

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("dynamics order must be 1 or 2")


class Trajectory:
    """Sampled (t, x, v) output of an integrator; arrays are read-only."""

    def __init__(self, ts, xs, vs=None, meta: Optional[dict] = None):
        self.ts = np.asarray(ts, dtype=float)
        self.xs = np.asarray(xs, dtype=float)
        self.vs = None if vs is None else np.asarray(vs, dtype=float)
        self.meta = dict(meta or {})
        for arr in (self.ts, self.xs) + (() if self.vs is None else (self.vs,)):
            arr.setflags(write=False)

    def __len__(self):
        return int(self.ts.size)


INTEGRATORS = ("euler", "rk4", "leapfrog")


def integrate(
    dyn: Dynamics,
    method: str,
    t0: float,
    t1: float,
    dt: float,
    x0,
    v0=None,
) -> Trajectory:
    """Fixed-step integration of ``dyn`` from t0 to t1; deterministic."""
    if method not in INTEGRATORS:
        raise ValueError(f"unknown integrator {method!r}; use one of {INTEGRATORS}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if dyn.singular_at_zero and t0 <= 0:
        raise ValueError(f"dynamics {dyn.name!r} is singular at t=0; start at t0 > 0")

    x = as_point(x0)
    n_steps = int(round((t1 - t0) / dt))

    if dyn.order == 1:
        if method == "leapfrog":
            raise ValueError("leapfrog applies to second-order dynamics only")
        return _integrate_first_order(dyn, method, t0, dt, n_steps, x)

    if v0 is None:
        raise ValueError("second-order dynamics need an initial velocity v0")
    v = as_point(v0, dim=x.size)
    if method == "leapfrog":
        if dyn.damping is None or dyn.force is None:
            raise ValueError(
                "leapfrog needs the damping/force split of the dynamics "
                "(acceleration = -c(t) v + g(t, x))"
            )
        return _integrate_leapfrog(dyn, t0, dt, n_steps, x, v)
    return _integrate_second_order(dyn, method, t0, dt, n_steps, x, v)


def _check_finite(t, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise IntegrationError(t)


def _integrate_first_order(dyn, method, t0, dt, n_steps, x):
    ts, xs = [t0], [x.copy()]
    t = t0
    for _ in range(n_steps):
        if method == "euler":
            x = x + dt * dyn.rhs(t, x)
        else:  # rk4
            k1 = dyn.rhs(t, x)
            k2 = dyn.rhs(t + dt / 2, x + dt / 2 * k1)
            k3 = dyn.rhs(t + dt / 2, x + dt / 2 * k2)
            k4 = dyn.rhs(t + dt, x + dt * k3)
            x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        _check_finite(t, x)
        ts.append(t)
        xs.append(x.copy())
    return Trajectory(ts, xs, meta={"method": method, "dynamics": dyn.name, "dt": dt})


def _integrate_second_order(dyn, method, t0, dt, n_steps, x, v):
    ts, xs, vs = [t0], [x.copy()], [v.copy()]
    t = t0
    for _ in range(n_steps):
        if method == "euler":
            a = dyn.rhs(t, x, v)
            x = x + dt * v
            v = v + dt * a
        else:  # rk4 on the stacked (x, v) system
            k1x, k1v = v, dyn.rhs(t, x, v)
            k2x = v + dt / 2 * k1v
            k2v = dyn.rhs(t + dt / 2, x + dt / 2 * k1x, k2x)
            k3x = v + dt / 2 * k2v
            k3v = dyn.rhs(t + dt / 2, x + dt / 2 * k2x, k3x)
            k4x = v + dt * k3v
            k4v = dyn.rhs(t + dt, x + dt * k3x, k4x)
            x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += dt
        _check_finite(t, x, v)
        ts.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
    return Trajectory(ts, xs, vs, meta={"method": method, "dynamics": dyn.name, "dt": dt})


def _damping_integral(c, a, b):
    """Simpson approximation of the damping integral over [a, b]."""
    return (b - a) / 6.0 * (c(a) + 4.0 * c(0.5 * (a + b)) + c(b))


def _integrate_leapfrog(dyn, t0, dt, n_steps, x, v):
    # Kick-drift-kick with the damping factor integrated exactly over each
    # half step; reduces to velocity Verlet when the damping is zero.
    c, g = dyn.damping, dyn.force
    ts, xs, vs = [t0], [x.copy()], [v.copy()]
    t = t0
    for _ in range(n_steps):
        v = v * math.exp(-_damping_integral(c, t, t + dt / 2))
        v = v + dt / 2 * g(t, x)
        x = x + dt * v
        v = v + dt / 2 * g(t + dt, x)
        v = v * math.exp(-_damping_integral(c, t + dt / 2, t + dt))
        t += dt
        _check_finite(t, x, v)
        ts.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
    return Trajectory(ts, xs, vs, meta={"method": "leapfrog", "dynamics": dyn.name, "dt": dt})


# ---------------------------------------------------------------------------
# Named dynamics
# ---------------------------------------------------------------------------


def gradient_flow(problem: ScalarProblem) -> Dynamics:
    """First-order flow dx/dt = -grad f(x)."""
    if problem.gradient is None:
        raise MissingOracleError("gradient flow needs a gradient oracle")
    return Dynamics(
        order=1,
        rhs=lambda t, x: -problem.grad(x),
        name=f"gradflow({problem.name})",
    )


def nesterov_ode(problem: ScalarProblem, t0: float = 0.1) -> Dynamics:
    """The continuous-time limit of Nesterov's method: x'' + (3/t) x' + grad f(x) = 0.

    The vanishing 3/t damping is what produces the accelerated 1/t^2 decay in
    function value for convex objectives. Singular at t = 0, so the default
    start time is 0.1 and v0 = 0 is the conventional initial velocity.
    """
    if problem.gradient is None:
        raise MissingOracleError("the Nesterov ODE needs a gradient oracle")
    return Dynamics(
        order=2,
        rhs=lambda t, x, v: -(3.0 / t) * v - problem.grad(x),
        t0=t0,
        name=f"nesterov({problem.name})",
        damping=lambda t: 3.0 / t,
        force=lambda t, x: -problem.grad(x),
        singular_at_zero=True,
    )


@dataclass(frozen=True)
class ScalingFunctions:
    """Time scalings (alpha, beta, gamma) with derivatives for the Bregman dynamics.

    Construction verifies the ideal-scaling conditions numerically on
    ``t_range``:  beta' <= exp(alpha)  and  gamma' = exp(alpha).  gamma enters
    only through this check; it cancels from the equations of motion.
    """

    alpha: Callable[[float], float]
    alpha_dot: Callable[[float], float]
    beta: Callable[[float], float]
    beta_dot: Callable[[float], float]
    gamma: Callable[[float], float]
    gamma_dot: Callable[[float], float]
    family: str = ""
    t_range: tuple = (0.1, 100.0)

    def __post_init__(self):
        lo, hi = self.t_range
        for t in np.linspace(lo, hi, 257):
            ea = math.exp(self.alpha(t))
            slack = 1e-8 * (1.0 + abs(ea))
            if self.beta_dot(t) > ea + slack:
                raise ValueError(
                    f"scaling family {self.family!r} violates beta' <= exp(alpha) at t={t:g}"
                )
            if abs(self.gamma_dot(t) - ea) > slack:
                raise ValueError(
                    f"scaling family {self.family!r} violates gamma' = exp(alpha) at t={t:g}"
                )


def polynomial_scaling(p: float, C: Optional[float] = None) -> ScalingFunctions:
    """The t^p family: alpha = log p - log t, beta = p log t + log C, gamma = p log t.

    The default C = 1/p^2 makes the p = 2 member coincide exactly with the
    3/t-damped momentum ODE.
    """
    if C is None:
        C = 1.0 / (p * p)
    if not (p > 0 and C > 0):
        raise ValueError("polynomial scaling needs p > 0 and C > 0")
    logC = math.log(C)
    return ScalingFunctions(
        alpha=lambda t: math.log(p) - math.log(t),
        alpha_dot=lambda t: -1.0 / t,
        beta=lambda t: p * math.log(t) + logC,
        beta_dot=lambda t: p / t,
        gamma=lambda t: p * math.log(t),
        gamma_dot=lambda t: p / t,
        family=f"poly(p={p:g}, C={C:g})",
    )


def bregman_dynamics(
    problem: ScalarProblem, h: ScalarProblem, scaling: ScalingFunctions
) -> Dynamics:
    """Euler-Lagrange dynamics of the Bregman kinetic energy under scalings.

    x'' + (e^a - a') x' + e^{2a + b} [hess h(x + e^{-a} x')]^{-1} grad f(x) = 0

    h must provide gradient and Hessian-vector oracles, and its Hessian must be
    invertible along the trajectory; the linear system is solved afresh at each
    evaluation (intended for d <= 100). With Euclidean h and the polynomial
    p = 2 family this is exactly the Nesterov ODE.
    """
    if problem.gradient is None:
        raise MissingOracleError("Bregman dynamics needs a gradient oracle for f")
    if h.gradient is None or h.hessian_vec is None:
        raise MissingOracleError("the distance generator h needs gradient and Hessian oracles")

    s = scaling

    def rhs(t, x, v):
        ea = math.exp(s.alpha(t))
        w = x + v / ea
        H = h.hessian(w)
        try:
            direction = np.linalg.solve(H, problem.grad(x))
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"hessian of h is singular at t={t:g}") from exc
        return -(ea - s.alpha_dot(t)) * v - math.exp(2.0 * s.alpha(t) + s.beta(t)) * direction

    return Dynamics(
        order=2,
        rhs=rhs,
        t0=0.1,
        name=f"bregman({problem.name}, {s.family})",
        params={"family": s.family},
        singular_at_zero=True,
    )


def lyapunov(
    problem: ScalarProblem, h: ScalarProblem, scaling: ScalingFunctions, t: float, x, v
) -> float:
    """Energy D_h(x*, x + e^{-alpha} v) + e^{beta} (f(x) - f*).

    Nonincreasing along the generalized momentum dynamics; certifies the
    exp(-beta_t) convergence rate.
    """
    if not problem.has_optimum:
        raise ValueError("the Lyapunov monitor needs a problem with a known optimum")
    xa = as_point(x, dim=problem.dim)
    va = as_point(v, dim=problem.dim)
    ea = math.exp(scaling.alpha(t))
    div = bregman_divergence(h, problem.x_star, xa + va / ea)
    return div + math.exp(scaling.beta(t)) * (problem.f(xa) - problem.f_star)


HIGHRES_VARIANTS = ("gda", "eg", "ogda", "la2")


def highres(
    field: VectorField, variant: str, eta: float, averaging: Optional[float] = None
) -> Dynamics:
    """High-resolution second-order limits of the fixed-point algorithms.

    With b = 2/eta:
        gda:   z'' = -b z' - b F(z)
        eg:    z'' = -b z' - b F(z) + 2 J(z) F(z)
        ogda:  z'' = -b z' - b F(z) - 2 J(z) z'
        la2:   z'' = -b z' - 2 a b F(z) + 2 a J(z) F(z)   (two inner steps,
               averaging coefficient a)

    The Jacobian terms are what separate the convergent variants from gda;
    eg/ogda/la2 therefore require the field's Jacobian-vector oracle.
    """
    if variant not in HIGHRES_VARIANTS:
        raise ValueError(f"unknown high-resolution variant {variant!r}; use {HIGHRES_VARIANTS}")
    if not eta > 0:
        raise ValueError("eta must be positive")
    beta = 2.0 / eta
    params = {"variant": variant, "eta": eta, "beta": beta}

    if variant == "gda":
        rhs = lambda t, z, v: -beta * v - beta * field(z)
        force = lambda t, z: -beta * field(z)
    elif variant == "eg":
        if field.jacobian_vec is None:
            raise MissingOracleError("the eg high-resolution limit needs a Jacobian-vector oracle")
        rhs = lambda t, z, v: -beta * v - beta * field(z) + 2.0 * field.jac_vec(z, field(z))
        force = lambda t, z: -beta * field(z) + 2.0 * field.jac_vec(z, field(z))
    elif variant == "ogda":
        if field.jacobian_vec is None:
            raise MissingOracleError("the ogda high-resolution limit needs a Jacobian-vector oracle")
        rhs = lambda t, z, v: -beta * v - beta * field(z) - 2.0 * field.jac_vec(z, v)
        force = None  # velocity enters the Jacobian term; no damping/force split
    else:  # la2
        if field.jacobian_vec is None:
            raise MissingOracleError("the la2 high-resolution limit needs a Jacobian-vector oracle")
        if averaging is None:
            raise ValueError("the la2 high-resolution limit needs an averaging coefficient")
        if not 0.0 < averaging <= 1.0:
            raise ValueError("averaging coefficient must lie in (0, 1]")
        a = averaging
        params["averaging"] = a
        rhs = (
            lambda t, z, v: -beta * v
            - 2.0 * a * beta * field(z)
            + 2.0 * a * field.jac_vec(z, field(z))
        )
        force = lambda t, z: -2.0 * a * beta * field(z) + 2.0 * a * field.jac_vec(z, field(z))

    return Dynamics(
        order=2,
        rhs=rhs,
        name=f"highres-{variant}({field.name})",
        params=params,
        damping=None if force is None else (lambda t: beta),
        force=force,
    )
