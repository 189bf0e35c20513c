"""Discrete-time optimization methods: subgradient, gradient descent,
accelerated gradient descent, and perturbed gradient descent.

Every runner returns an immutable :class:`~vieq.core.RunTrace` and is
deterministic given (problem, configuration, seed).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import Array, MissingOracleError, RunTrace, ScalarProblem, as_point, trace_metrics


def _require(condition, message):
    if not condition:
        raise MissingOracleError(message)


def _trace(problem, algorithm, step, xs, extras=None, seed=None, **config):
    cols = [trace_metrics(problem, x) for x in xs]
    dist, ferr, gnorm = zip(*cols)
    n = len(xs)
    cfg = {"algorithm": algorithm, "problem": problem.name, "step": step}
    if seed is not None:
        cfg["seed"] = seed
    cfg.update(config)
    return RunTrace(
        config=cfg,
        ks=np.arange(n),
        ts=np.arange(n) * step,
        xs=np.asarray(xs),
        dist_err=None if dist[0] is None else dist,
        f_err=None if ferr[0] is None else ferr,
        grad_norm=None if gnorm[0] is None else gnorm,
        extras=extras,
    )


def run_subgradient(
    problem: ScalarProblem, x0, iters: int, step: Optional[float] = None
) -> RunTrace:
    """Constant-step subgradient method x_{k+1} = x_k - step * g_k.

    With ``step`` omitted, uses R / (G sqrt(T)), the choice that optimizes the
    1/sqrt(T) guarantee on the average iterate. The trace carries the running
    average iterate (over records 0..k) and the objective at the average,
    since the guarantee is for the averaged sequence, not the last iterate.
    """
    _require(
        problem.subgradient is not None or problem.gradient is not None,
        "subgradient method needs a subgradient (or gradient) oracle",
    )
    if step is None:
        if problem.G is None or problem.R is None or iters <= 0:
            raise MissingOracleError(
                "default subgradient step needs declared G and R and iters > 0"
            )
        step = problem.R / (problem.G * math.sqrt(iters))

    x = as_point(x0, dim=problem.dim)
    xs = [x]
    running = x.copy()
    avgs = [x.copy()]
    for k in range(iters):
        x = x - step * problem.subgrad(x)
        xs.append(x)
        running += x
        avgs.append(running / (k + 2))
    extras = {
        "avg_x": np.asarray(avgs),
        "f_avg": np.array([problem.f(a) for a in avgs]),
    }
    return _trace(problem, "subgradient", step, xs, extras=extras)


def run_gd(problem: ScalarProblem, x0, iters: int, step: Optional[float] = None) -> RunTrace:
    """Gradient descent x_{k+1} = x_k - step * grad f(x_k); default step 1/L."""
    _require(problem.gradient is not None, "gradient descent needs a gradient oracle")
    if step is None:
        if not problem.L:
            raise MissingOracleError("default gradient step needs a declared L")
        step = 1.0 / problem.L

    x = as_point(x0, dim=problem.dim)
    xs = [x]
    for _ in range(iters):
        x = x - step * problem.grad(x)
        xs.append(x)
    return _trace(problem, "gd", step, xs)


def run_agd(problem: ScalarProblem, x0, iters: int, step: Optional[float] = None) -> RunTrace:
    """Accelerated gradient descent (two-sequence momentum form).

    y_{k+1} = x_k - step * grad f(x_k)
    x_{k+1} = y_{k+1} + lambda_k (y_{k+1} - y_k),   lambda_k = (k - 1) / (k + 2)

    Indexing starts at k = 1 with y_1 = x_0, so lambda_1 = 0 and the first
    update is a plain gradient step.
    """
    _require(problem.gradient is not None, "accelerated gradient descent needs a gradient oracle")
    if step is None:
        if not problem.L:
            raise MissingOracleError("default accelerated step needs a declared L")
        step = 1.0 / problem.L

    x = as_point(x0, dim=problem.dim)
    y = x.copy()
    xs = [x]
    for k in range(1, iters + 1):
        lam = (k - 1) / (k + 2)
        y_next = x - step * problem.grad(x)
        x = y_next + lam * (y_next - y)
        y = y_next
        xs.append(x)
    return _trace(problem, "agd", step, xs)


def pgd_defaults(problem: ScalarProblem, epsilon: float) -> dict:
    """Perturbation hyperparameters derived from a target accuracy epsilon.

    radius = epsilon, grad_threshold = epsilon, and a cool-down of
    ceil(L / sqrt(rho * epsilon)) steps between noise injections, matching the
    scales in the approximate-second-order-stationarity condition.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if problem.L is None or problem.rho is None:
        raise MissingOracleError("pgd defaults need declared L and rho")
    return {
        "radius": epsilon,
        "grad_threshold": epsilon,
        "cooldown": int(math.ceil(problem.L / math.sqrt(problem.rho * epsilon))),
    }


def run_pgd(
    problem: ScalarProblem,
    x0,
    iters: int,
    step: Optional[float] = None,
    *,
    seed: int,
    epsilon: Optional[float] = None,
    radius: Optional[float] = None,
    grad_threshold: Optional[float] = None,
    cooldown: Optional[int] = None,
) -> RunTrace:
    """Perturbed gradient descent: plain GD plus uniform-ball noise at flat points.

    When the gradient norm falls to ``grad_threshold`` or below and at least
    ``cooldown`` steps have passed since the last injection, a perturbation
    sampled uniformly from the ball of radius ``radius`` is added before the
    gradient step. ``radius = 0`` disables the noise entirely (and draws no
    random numbers), making the run bit-identical to :func:`run_gd`.

    Unspecified hyperparameters are filled from ``epsilon`` via
    :func:`pgd_defaults`. The trace records injection events in the
    ``perturbed`` extra column.
    """
    _require(problem.gradient is not None, "perturbed gradient descent needs a gradient oracle")
    if step is None:
        if not problem.L:
            raise MissingOracleError("default gradient step needs a declared L")
        step = 1.0 / problem.L

    if None in (radius, grad_threshold, cooldown):
        if epsilon is None:
            raise ValueError(
                "run_pgd needs either epsilon or explicit (radius, grad_threshold, cooldown)"
            )
        defaults = pgd_defaults(problem, epsilon)
        radius = defaults["radius"] if radius is None else radius
        grad_threshold = defaults["grad_threshold"] if grad_threshold is None else grad_threshold
        cooldown = defaults["cooldown"] if cooldown is None else cooldown
    if radius < 0:
        raise ValueError("perturbation radius must be nonnegative")

    rng = np.random.default_rng(seed)
    x = as_point(x0, dim=problem.dim)
    xs = [x]
    perturbed = [False]
    last_injection = -cooldown - 1
    for k in range(iters):
        g = problem.grad(x)
        injected = False
        if (
            radius > 0
            and float(np.linalg.norm(g)) <= grad_threshold
            and k - last_injection >= cooldown
        ):
            x = x + _uniform_ball(rng, problem.dim, radius)
            last_injection = k
            injected = True
            g = problem.grad(x)
        x = x - step * g
        xs.append(x)
        perturbed.append(injected)

    extras = {"perturbed": np.asarray(perturbed, dtype=bool)}
    return _trace(
        problem,
        "pgd",
        step,
        xs,
        extras=extras,
        seed=seed,
        radius=radius,
        grad_threshold=grad_threshold,
        cooldown=cooldown,
    )


def _uniform_ball(rng: np.random.Generator, dim: int, radius: float) -> Array:
    """Exact uniform draw from the ball: gaussian direction, radius ~ r u^(1/d)."""
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    return radius * rng.random() ** (1.0 / dim) * direction
