"""Deterministic property suites behind the ``check`` subcommand.

Each check returns its worst observed slack so a report reads as evidence,
not just a verdict. Sampling-based checks derive all randomness from the
suite seed; two runs with the same seed print identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics, optimize, problems, vi
from .core import RunTrace, VectorField


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} value={self.value:.12g} bound=[{self.bound}]"


SUITES = ("monotone", "resolvent", "descent", "rates", "all")


def gradient_field(p) -> VectorField:
    """View a smooth problem's gradient as an operator (for the certifiers)."""
    return VectorField(
        dim=p.dim,
        func=p.grad,
        jacobian_vec=None if p.hessian_vec is None else p.hess_vec,
        L=p.L,
        mu=p.mu,
        fixed_point=p.x_star,
        name=f"grad({p.name})",
    )


def _sampler(dim, samples, seed, halfwidth=2.0):
    return diagnostics.box_sampler(dim, samples, seed, halfwidth)


def _monotone_suite(samples, seed):
    results = []
    rotation = problems.REGISTRY["rotation"].make()
    strongmono = problems.REGISTRY["strongmono-affine"].make()
    quad = problems.REGISTRY["quadratic-cond100"].make()
    quad_field = gradient_field(quad)

    rep_rot = diagnostics.check_monotone(rotation, _sampler(2, samples, seed))
    results.append(CheckResult(
        "monotone-rotation-zero-product",
        rep_rot.violations == 0 and abs(rep_rot.mu_hat) <= 1e-9,
        rep_rot.mu_hat,
        "|min ratio| <= 1e-9, no violations",
    ))

    rep_quad = diagnostics.check_monotone(quad_field, _sampler(2, samples, seed + 1))
    results.append(CheckResult(
        "monotone-quadratic-gradient",
        rep_quad.violations == 0 and rep_quad.mu_hat >= quad.mu - 1e-9,
        rep_quad.mu_hat,
        f"min ratio >= mu = {quad.mu:g}",
    ))

    rep_sm = diagnostics.check_monotone(strongmono, _sampler(2, samples, seed + 2))
    results.append(CheckResult(
        "monotone-strongmono-certificate",
        abs(rep_sm.mu_hat - strongmono.mu) <= 1e-9,
        rep_sm.mu_hat,
        f"min ratio = mu = {strongmono.mu:g} +- 1e-9",
    ))

    anti = problems.affine_field(-np.eye(2), name="anti-identity")
    rep_anti = diagnostics.check_monotone(anti, _sampler(2, samples, seed + 3))
    results.append(CheckResult(
        "monotone-antimonotone-detected",
        rep_anti.violations > 0,
        float(rep_anti.violations),
        "violations > 0 on an anti-monotone field",
    ))

    worst_gap = max(
        rep.mu_hat - rep.lipschitz_hat for rep in (rep_rot, rep_quad, rep_sm)
    )
    results.append(CheckResult(
        "monotone-mu-below-lipschitz",
        worst_gap <= 1e-9,
        worst_gap,
        "mu_hat - L_hat <= 1e-9",
    ))

    rep_coco = diagnostics.check_cocoercive(quad_field, _sampler(2, samples, seed + 4))
    results.append(CheckResult(
        "cocoercive-smooth-gradient",
        rep_coco.violations == 0 and rep_coco.alpha_hat <= quad.L + 1e-9,
        rep_coco.alpha_hat,
        f"alpha_hat <= L = {quad.L:g}",
    ))

    rep_rot_coco = diagnostics.check_cocoercive(rotation, _sampler(2, samples, seed + 5))
    results.append(CheckResult(
        "cocoercive-rotation-detected",
        rep_rot_coco.violations > 0,
        float(rep_rot_coco.violations),
        "violations > 0 on the rotation field",
    ))

    scaled = problems.affine_field(3.0 * np.eye(2), name="triple-identity")
    rep_scaled = diagnostics.check_cocoercive(scaled, _sampler(2, samples, seed + 6))
    results.append(CheckResult(
        "cocoercive-scaled-identity",
        abs(rep_scaled.alpha_hat - 3.0) <= 1e-9,
        rep_scaled.alpha_hat,
        "alpha_hat = 3 +- 1e-9",
    ))
    return results


def _resolvent_suite(samples, seed):
    results = []
    rotation = problems.REGISTRY["rotation"].make()
    strongmono = problems.REGISTRY["strongmono-affine"].make()
    exact = vi.ExactAffine()

    ident = problems.affine_field(np.eye(2), name="identity")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(min(samples, 100)):
        x = rng.uniform(-2, 2, size=2)
        worst = max(worst, float(np.linalg.norm(vi.resolvent(ident, 1.0, exact, x) - x / 2)))
    results.append(CheckResult(
        "resolvent-identity-halves",
        worst <= 1e-12,
        worst,
        "||B(x) - x/2|| <= 1e-12 at eta = 1",
    ))

    for label, field, eta, off in (
        ("rotation", rotation, 1.0, 10),
        ("strongmono", strongmono, 0.1, 11),
    ):
        B = lambda x, f=field, e=eta: vi.resolvent(f, e, exact, x)
        rep = diagnostics.check_firmly_nonexpansive(B, _sampler(2, samples, seed + off))
        value = min(rep.min_slack, rep.min_reflected_slack)
        results.append(CheckResult(
            f"resolvent-firmly-nonexpansive-{label}",
            rep.violations == 0 and value >= -1e-9,
            value,
            "slack >= -1e-9 for B and 2B - I",
        ))

    expansive = lambda x: 2.0 * x
    rep_bad = diagnostics.check_firmly_nonexpansive(expansive, _sampler(2, samples, seed + 12))
    results.append(CheckResult(
        "resolvent-expansive-detected",
        rep_bad.violations > 0,
        float(rep_bad.violations),
        "violations > 0 for B(x) = 2x",
    ))

    eta = 0.5
    worst = math.inf
    for field, off in ((rotation, 13), (strongmono, 14)):
        for x, y in _sampler(2, samples, seed + off).pairs():
            fx, fy = field(x), field(y)
            lhs = float(np.linalg.norm((x + eta * fx) - (y + eta * fy)) ** 2)
            rhs = float(np.linalg.norm(x - y) ** 2) + eta**2 * float(np.linalg.norm(fx - fy) ** 2)
            worst = min(worst, lhs - rhs)
    results.append(CheckResult(
        "resolvent-forward-operator-expansive",
        worst >= -1e-9,
        worst,
        "||(I+eta F)x - (I+eta F)y||^2 - ||x-y||^2 - eta^2||Fx-Fy||^2 >= -1e-9",
    ))

    eta, order = 0.1, 12
    picard = vi.FixedPointIter(tol=1e-12)
    series = vi.TruncatedSeries(order=order)
    rng = np.random.default_rng(seed + 15)
    worst_excess = -math.inf
    for _ in range(min(samples, 200)):
        x = rng.uniform(-2, 2, size=2)
        ys = [vi.resolvent(strongmono, eta, b, x) for b in (exact, picard, series)]
        dev = max(
            float(np.linalg.norm(ys[i] - ys[j])) for i in range(3) for j in range(i + 1, 3)
        )
        envelope = max(
            1e-10,
            (eta * strongmono.L) ** (order + 1)
            * (float(np.linalg.norm(x)) + eta * float(np.linalg.norm(strongmono.offset)))
            + 1e-11,
        )
        worst_excess = max(worst_excess, dev - envelope)
    results.append(CheckResult(
        "resolvent-backends-agree",
        worst_excess <= 0.0,
        worst_excess,
        "pairwise deviation within max(1e-10, (eta L)^(m+1) ||x - eta q|| + 10 tol)",
    ))
    return results


def _descent_suite(samples, seed):
    del samples, seed  # trajectory checks are deterministic without sampling
    results = []
    for name in ("quadratic-identity", "quadratic-cond100", "strict-saddle-d2"):
        entry, prob = problems.get_problem(name)
        trace = optimize.run_gd(prob, entry.x0, 300)
        worst = diagnostics.check_descent_lemma(trace, "gd-smooth", prob)
        results.append(CheckResult(
            f"descent-gd-{name}",
            worst <= 1e-9,
            worst,
            "per-step violation <= 1e-9 at eta = 1/L",
        ))

    for name in ("rotation", "strongmono-affine"):
        entry, field = problems.get_problem(name)
        for eta in (0.1, 1.0):
            trace = vi.run_ppm(field, entry.x0, 80, eta, vi.ExactAffine())
            worst = diagnostics.check_descent_lemma(trace, "ppm-monotone", field)
            results.append(CheckResult(
                f"descent-ppm-{name}-eta{eta:g}",
                worst <= 1e-9,
                worst,
                "per-step violation <= 1e-9",
            ))

    entry, strongmono = problems.get_problem("strongmono-affine")
    eta = 1.0 / (2.0 * (strongmono.L + strongmono.mu))
    trace = vi.run_eg(strongmono, entry.x0, 80, eta)
    worst = diagnostics.check_descent_lemma(trace, "eg-stronglymonotone", strongmono)
    results.append(CheckResult(
        "descent-eg-strongmono",
        worst <= 1e-9,
        worst,
        "per-step violation <= 1e-9 at eta = 1/(2(L+mu))",
    ))

    entry, quad = problems.get_problem("quadratic-cond100")
    bad = optimize.run_gd(quad, entry.x0, 8, 10.0 / quad.L)
    worst = diagnostics.check_descent_lemma(bad, "gd-smooth", quad)
    results.append(CheckResult(
        "descent-oversized-step-detected",
        worst > 1e-6,
        worst,
        "violation > 1e-6 at eta = 10/L",
    ))
    return results


def _max_step_ratio(trace: RunTrace) -> float:
    d2 = trace.dist_err**2
    return float(np.max(d2[1:] / d2[:-1]))


def _rates_suite(samples, seed):
    del samples, seed
    results = []

    n = 201
    geo = RunTrace(
        config={"algorithm": "synthetic", "step": 1.0},
        ks=np.arange(n),
        ts=np.arange(n, dtype=float),
        xs=np.zeros((n, 1)),
        f_err=0.9 ** np.arange(n),
    )
    fit = diagnostics.fit_rate(geo, "linear")
    results.append(CheckResult(
        "rates-fit-geometric-exact",
        abs(fit.parameter - 0.9) <= 1e-10,
        abs(fit.parameter - 0.9),
        "|ratio - 0.9| <= 1e-10",
    ))

    ks = np.arange(n)
    power = RunTrace(
        config={"algorithm": "synthetic", "step": 1.0},
        ks=ks,
        ts=ks.astype(float),
        xs=np.zeros((n, 1)),
        f_err=np.where(ks > 0, 7.0 * np.maximum(ks, 1) ** -2.0, 7.0),
    )
    fit = diagnostics.fit_rate(power, "power")
    results.append(CheckResult(
        "rates-fit-power-exact",
        abs(fit.parameter + 2.0) <= 1e-8,
        abs(fit.parameter + 2.0),
        "|exponent + 2| <= 1e-8",
    ))

    entry, strongmono = problems.get_problem("strongmono-affine")
    mu, L = strongmono.mu, strongmono.L
    trace = vi.run_forward(strongmono, None, entry.x0, 60)
    ratio = _max_step_ratio(trace)
    bound = 1.0 - (mu / L) ** 2
    results.append(CheckResult(
        "rates-forward-contraction",
        ratio <= bound + 1e-9,
        ratio,
        f"squared-distance ratio <= {bound:g}",
    ))

    trace = vi.run_eg(strongmono, entry.x0, 60)
    ratio = _max_step_ratio(trace)
    bound = 1.0 - mu / (4.0 * L)
    results.append(CheckResult(
        "rates-eg-contraction",
        ratio <= bound + 1e-9,
        ratio,
        f"squared-distance ratio <= {bound:g}",
    ))

    entry, quad = problems.get_problem("quadratic-cond100")
    eta = 2.0 / (quad.L + quad.mu)
    trace = optimize.run_gd(quad, entry.x0, 200, eta)
    ratio = _max_step_ratio(trace)
    bound = 1.0 - 2.0 * eta * quad.mu * quad.L / (quad.mu + quad.L)
    results.append(CheckResult(
        "rates-gd-strongly-convex",
        ratio <= bound + 1e-9,
        ratio,
        f"squared-distance ratio <= {bound:g} at eta = 2/(L+mu)",
    ))

    entry, absf = problems.get_problem("abs")
    T = 2500
    trace = optimize.run_subgradient(absf, entry.x0, T)
    favg = float(trace.extras["f_avg"][T - 1])
    bound = absf.R * absf.G / math.sqrt(T)
    results.append(CheckResult(
        "rates-subgradient-average",
        favg <= bound + 1e-9,
        favg,
        f"f(average iterate) <= RG/sqrt(T) = {bound:g}",
    ))
    return results


_SUITE_BUILDERS = {
    "monotone": _monotone_suite,
    "resolvent": _resolvent_suite,
    "descent": _descent_suite,
    "rates": _rates_suite,
}


def run_suite(name: str, samples: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Run one suite (or all) and return results sorted by check name."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; use one of {SUITES}")
    names = [s for s in SUITES if s != "all"] if name == "all" else [name]
    results = []
    for suite in names:
        results.extend(_SUITE_BUILDERS[suite](samples, seed))
    return sorted(results, key=lambda r: r.name)
