"""Langevin MCMC chains: the unadjusted overdamped sampler and an
Euler-Maruyama discretization of the underdamped diffusion.

Chains are deterministic given a seed; independent chains with distinct seeds
can run concurrently.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import Array, MissingOracleError, ScalarProblem, as_point


class SampleTrace:
    """Positions (and velocities, for underdamped chains) of one MCMC run."""

    def __init__(self, config: dict, xs, vs=None):
        self.config = dict(config)
        self.xs = np.asarray(xs, dtype=float)
        self.vs = None if vs is None else np.asarray(vs, dtype=float)
        self.xs.setflags(write=False)
        if self.vs is not None:
            self.vs.setflags(write=False)

    def __len__(self):
        return int(self.xs.shape[0])

    @property
    def dim(self):
        return int(self.xs.shape[1])

    def mean(self, burn_in: int = 0) -> Array:
        return self.xs[burn_in:].mean(axis=0)

    def variance(self, burn_in: int = 0) -> Array:
        return self.xs[burn_in:].var(axis=0)

    def velocity_variance(self, burn_in: int = 0) -> Array:
        if self.vs is None:
            raise ValueError("this trace has no velocity samples")
        return self.vs[burn_in:].var(axis=0)


def run_ula(
    potential: ScalarProblem,
    x0,
    steps: int,
    delta: float,
    seed: int,
    *,
    zero_noise: bool = False,
) -> SampleTrace:
    """Unadjusted overdamped chain x_{k+1} = x_k - delta grad U(x_k) + sqrt(2 delta) xi_k.

    The gradient term carries the delta factor of the Euler-Maruyama scheme
    (see the module notes on discretizing dx = -grad U dt + sqrt(2) dB).
    With ``zero_noise`` the injection is skipped entirely, which makes the
    chain identical to gradient descent with step ``delta``.
    """
    if potential.gradient is None:
        raise MissingOracleError("the overdamped chain needs a gradient oracle")
    if not delta > 0:
        raise ValueError("delta must be positive")

    x = as_point(x0, dim=potential.dim)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(2.0 * delta)
    grad = potential.gradient  # raw oracle; the entry state was validated above
    xs = np.empty((steps + 1, potential.dim))
    xs[0] = x
    if zero_noise:
        for k in range(steps):
            x = x - delta * grad(x)
            xs[k + 1] = x
    else:
        # noise drawn in blocks; the value stream is the same as per-step draws
        block = 65_536
        k = 0
        while k < steps:
            noise = rng.standard_normal((min(block, steps - k), potential.dim))
            for xi in noise:
                x = x - delta * grad(x) + scale * xi
                k += 1
                xs[k] = x
    return SampleTrace(
        {"chain": "ula", "problem": potential.name, "delta": delta, "seed": seed,
         "steps": steps, "zero_noise": zero_noise},
        xs,
    )


def run_underdamped(
    potential: ScalarProblem,
    x0,
    v0,
    steps: int,
    delta: float,
    friction: float,
    temperature: float = 1.0,
    seed: int = 0,
    *,
    zero_noise: bool = False,
) -> SampleTrace:
    """Euler-Maruyama discretization of the underdamped diffusion

        dx = v dt,
        dv = -friction v dt - temperature grad U(x) dt
             + sqrt(2 friction temperature) dB,

    whose stationary law is proportional to exp(-U(x) - ||v||^2 / (2 temperature)).
    The drift sign on grad U is the one consistent with that stationary law.
    """
    if potential.gradient is None:
        raise MissingOracleError("the underdamped chain needs a gradient oracle")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if friction < 0 or temperature <= 0:
        raise ValueError("friction must be >= 0 and temperature > 0")

    x = as_point(x0, dim=potential.dim)
    v = as_point(v0, dim=potential.dim)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(2.0 * friction * temperature * delta)
    grad = potential.gradient
    xs = np.empty((steps + 1, potential.dim))
    vs = np.empty((steps + 1, potential.dim))
    xs[0], vs[0] = x, v
    if zero_noise:
        for k in range(steps):
            drift = -friction * v - temperature * grad(x)
            x, v = x + delta * v, v + delta * drift
            xs[k + 1], vs[k + 1] = x, v
    else:
        block = 65_536
        k = 0
        while k < steps:
            noise = scale * rng.standard_normal((min(block, steps - k), potential.dim))
            for xi in noise:
                drift = -friction * v - temperature * grad(x)
                x, v = x + delta * v, v + delta * drift + xi
                k += 1
                xs[k], vs[k] = x, v
    return SampleTrace(
        {"chain": "underdamped", "problem": potential.name, "delta": delta,
         "friction": friction, "temperature": temperature, "seed": seed,
         "steps": steps, "zero_noise": zero_noise},
        xs,
        vs,
    )
