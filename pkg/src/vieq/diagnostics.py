"""Property certifiers and rate fitting.

Sampling gives one-sided evidence: a clean report is consistent with the
declared constants, while any violation falsifies them. Nothing here infers
constants with guarantees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .core import Array, RunTrace, ScalarProblem, VectorField, as_point


@dataclass(frozen=True)
class PairSampler:
    """Uniform pairs from a box, with a minimum separation guard.

    Each pair is derived from (seed, pair index), so reports do not depend on
    how the pair stream is partitioned across workers.
    """

    low: Array
    high: Array
    count: int
    seed: int = 0
    min_separation: float = 1e-8

    def __post_init__(self):
        lo = as_point(self.low)
        hi = as_point(self.high, dim=lo.size)
        if np.any(hi <= lo):
            raise ValueError("sampler box must have positive volume")
        if self.count < 1:
            raise ValueError("sampler count must be at least 1")
        object.__setattr__(self, "low", lo)
        object.__setattr__(self, "high", hi)

    @property
    def dim(self) -> int:
        return self.low.size

    def pairs(self) -> Iterator[tuple[Array, Array]]:
        span = self.high - self.low
        for i in range(self.count):
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, i]))
            while True:
                x = self.low + span * rng.random(self.dim)
                y = self.low + span * rng.random(self.dim)
                if np.linalg.norm(x - y) >= self.min_separation:
                    break
            yield x, y


def box_sampler(dim: int, count: int, seed: int = 0, halfwidth: float = 2.0) -> PairSampler:
    return PairSampler(-halfwidth * np.ones(dim), halfwidth * np.ones(dim), count, seed)


@dataclass
class MonotonicityReport:
    count: int
    mu_hat: float          # min of <F(x)-F(y), x-y> / ||x-y||^2
    lipschitz_hat: float   # max of ||F(x)-F(y)|| / ||x-y||
    violations: int        # pairs with a negative normalized product
    tol: float

    @property
    def monotone(self) -> bool:
        return self.violations == 0


def check_monotone(F: VectorField, sampler: PairSampler, tol: float = 1e-12) -> MonotonicityReport:
    """Evaluate the monotonicity inequality on sampled pairs.

    mu_hat is the empirical strong-monotonicity certificate (the smallest
    normalized product seen); lipschitz_hat the matching Lipschitz estimate,
    so mu_hat <= lipschitz_hat always holds in a consistent report.
    """
    mu_hat = math.inf
    lip_hat = 0.0
    violations = 0
    for x, y in sampler.pairs():
        diff = x - y
        dF = F(x) - F(y)
        denom = float(diff @ diff)
        ratio = float(dF @ diff) / denom
        mu_hat = min(mu_hat, ratio)
        lip_hat = max(lip_hat, float(np.linalg.norm(dF)) / math.sqrt(denom))
        if ratio < -tol:
            violations += 1
    return MonotonicityReport(sampler.count, mu_hat, lip_hat, violations, tol)


@dataclass
class CocoercivityReport:
    count: int
    alpha_hat: float   # max of ||F(x)-F(y)||^2 / <F(x)-F(y), x-y>
    violations: int    # pairs with nonpositive denominator but positive numerator
    tol: float

    @property
    def cocoercive(self) -> bool:
        return self.violations == 0


def check_cocoercive(F: VectorField, sampler: PairSampler, tol: float = 1e-12) -> CocoercivityReport:
    """Empirical co-coercivity constant; gradient fields of L-smooth convex
    functions must report alpha_hat <= L."""
    alpha_hat = 0.0
    violations = 0
    for x, y in sampler.pairs():
        dF = F(x) - F(y)
        num = float(dF @ dF)
        den = float(dF @ (x - y))
        if den <= tol * (1.0 + num):
            if num > tol:
                violations += 1
            continue
        alpha_hat = max(alpha_hat, num / den)
    return CocoercivityReport(sampler.count, alpha_hat, violations, tol)


@dataclass
class FirmNonexpansivityReport:
    count: int
    min_slack: float             # worst slack of the two-term inequality
    min_reflected_slack: float   # worst slack of non-expansivity of 2B - I
    violations: int
    tol: float

    @property
    def firmly_nonexpansive(self) -> bool:
        return self.violations == 0


def check_firmly_nonexpansive(
    B: Callable[[Array], Array], sampler: PairSampler, tol: float = 1e-9
) -> FirmNonexpansivityReport:
    """Check ||Bx-By||^2 + ||(I-B)x-(I-B)y||^2 <= ||x-y||^2 on sampled pairs,
    and non-expansivity of the reflected operator 2B - I."""
    min_slack = math.inf
    min_refl = math.inf
    violations = 0
    for x, y in sampler.pairs():
        bx, by = B(x), B(y)
        d2 = float(np.linalg.norm(x - y) ** 2)
        slack = d2 - float(np.linalg.norm(bx - by) ** 2) - float(
            np.linalg.norm((x - bx) - (y - by)) ** 2
        )
        refl = d2 - float(np.linalg.norm((2.0 * bx - x) - (2.0 * by - y)) ** 2)
        min_slack = min(min_slack, slack)
        min_refl = min(min_refl, refl)
        if slack < -tol or refl < -tol:
            violations += 1
    return FirmNonexpansivityReport(sampler.count, min_slack, min_refl, violations, tol)


@dataclass
class RateFit:
    model: str                 # "power" or "linear"
    parameter: float           # exponent s (power) or per-step ratio r (linear)
    intercept: float
    residual: float            # rms residual of the least-squares fit in log space
    window: tuple


def fit_rate(
    trace: RunTrace,
    model: str,
    metric: str = "f_err",
    window: Optional[tuple] = None,
    burn_in: float = 0.1,
) -> RateFit:
    """Least-squares rate fit on a trace error column.

    power:  err ~ C k^s    (fit log err against log k)
    linear: err ~ C r^k    (fit log err against k; returns r)

    ``window`` restricts to iteration indices [k_lo, k_hi]; otherwise the
    first ``burn_in`` fraction of iterations is excluded, since the rate
    statements are asymptotic. Nonpositive errors inside the window are an
    error: the model is undefined there.
    """
    if model not in ("power", "linear"):
        raise ValueError("model must be 'power' or 'linear'")
    errs = trace.column(metric)
    if errs is None:
        raise ValueError(f"trace has no {metric!r} column")
    ks = trace.ks.astype(float)
    if window is not None:
        mask = (ks >= window[0]) & (ks <= window[1])
    else:
        mask = ks >= burn_in * ks[-1]
    mask &= ks > 0
    if mask.sum() < 10:
        raise ValueError("rate fit needs at least 10 records in the window")
    err_win = errs[mask]
    if np.any(err_win <= 0):
        raise ValueError("nonpositive errors in the fit window")
    ks_win = ks[mask]
    predictor = np.log(ks_win) if model == "power" else ks_win
    target = np.log(err_win)
    A = np.column_stack([predictor, np.ones_like(predictor)])
    (slope, intercept), *_ = np.linalg.lstsq(A, target, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, intercept] - target) ** 2)))
    lo, hi = int(ks_win[0]), int(ks_win[-1])
    if model == "power":
        return RateFit("power", float(slope), float(intercept), resid, (lo, hi))
    return RateFit("linear", float(math.exp(slope)), float(intercept), resid, (lo, hi))


DESCENT_LEMMAS = ("gd-smooth", "ppm-monotone", "eg-stronglymonotone")


def check_descent_lemma(trace: RunTrace, lemma: str, problem) -> float:
    """Maximum per-step violation of the matching descent inequality.

    gd-smooth            f(x_{k+1}) <= f(x_k) - ||grad f(x_k)||^2 / (2L)
    ppm-monotone         ||z_{k+1}-z*||^2 <= ||z_k-z*||^2 - step^2 ||F(z_{k+1})||^2
    eg-stronglymonotone  ||z_{k+1}-z*||^2 <= (1 - step mu) ||z_k-z*||^2
                         + (step^2 L^2 - 1 + 2 step mu) ||z_k - z~_k||^2

    A nonpositive return value means the lemma held at every step.
    """
    if lemma not in DESCENT_LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}; use one of {DESCENT_LEMMAS}")
    alg = trace.config.get("algorithm")
    step = trace.config.get("step")
    xs = trace.xs

    if lemma == "gd-smooth":
        if alg not in ("gd", "agd", "pgd"):
            raise ValueError(f"gd-smooth applies to gradient-descent traces, not {alg!r}")
        if alg != "gd":
            raise ValueError("the smooth descent lemma is stated for plain gradient descent")
        p: ScalarProblem = problem
        if p.L is None:
            raise ValueError("the smooth descent lemma needs a declared L")
        worst = -math.inf
        for k in range(len(trace) - 1):
            g2 = float(np.linalg.norm(p.grad(xs[k])) ** 2)
            worst = max(worst, p.f(xs[k + 1]) - p.f(xs[k]) + g2 / (2.0 * p.L))
        return worst

    F: VectorField = problem
    if F.fixed_point is None:
        raise ValueError("operator descent lemmas need a declared fixed point")
    zstar = F.fixed_point

    if lemma == "ppm-monotone":
        if alg != "ppm":
            raise ValueError(f"ppm-monotone applies to proximal-point traces, not {alg!r}")
        worst = -math.inf
        for k in range(len(trace) - 1):
            lhs = float(np.linalg.norm(xs[k + 1] - zstar) ** 2)
            rhs = float(np.linalg.norm(xs[k] - zstar) ** 2) - step**2 * float(
                np.linalg.norm(F(xs[k + 1])) ** 2
            )
            worst = max(worst, lhs - rhs)
        return worst

    # eg-stronglymonotone
    if alg != "eg":
        raise ValueError(f"eg-stronglymonotone applies to extragradient traces, not {alg!r}")
    if F.mu is None or F.L is None:
        raise ValueError("the extragradient descent lemma needs declared mu and L")
    worst = -math.inf
    for k in range(len(trace) - 1):
        z = xs[k]
        z_mid = z - step * F(z)
        lhs = float(np.linalg.norm(xs[k + 1] - zstar) ** 2)
        rhs = (1.0 - step * F.mu) * float(np.linalg.norm(z - zstar) ** 2) + (
            step**2 * F.L**2 - 1.0 + 2.0 * step * F.mu
        ) * float(np.linalg.norm(z - z_mid) ** 2)
        worst = max(worst, lhs - rhs)
    return worst
