import math

import numpy as np
import pytest

from helpers import loglog_slope, max_step_ratio
from vieq.core import MissingOracleError
from vieq.diagnostics import check_descent_lemma
from vieq.optimize import run_agd, run_gd, run_pgd, run_subgradient
from vieq.problems import abs_value, get_problem, quadratic, strict_saddle


def test_subgradient_single_step_to_optimum():
    p = abs_value()
    trace = run_subgradient(p, [1.0], 1, step=1.0)
    assert trace.xs[1, 0] == pytest.approx(0.0, abs=1e-15)


def test_subgradient_oscillates_not_descends():
    # From 0.5 with unit step: 0.5 -> -0.5 -> 0.5 -> ... never a descent method.
    p = abs_value()
    trace = run_subgradient(p, [0.5], 4, step=1.0)
    assert np.allclose(trace.xs[:, 0], [0.5, -0.5, 0.5, -0.5, 0.5])


def test_subgradient_average_rate_bound():
    p = abs_value()
    T = 10_000
    trace = run_subgradient(p, [1.0], T)
    assert trace.config["step"] == pytest.approx(1.0 / math.sqrt(T))
    f_avg_T = trace.extras["f_avg"][T - 1]
    assert f_avg_T <= p.R * p.G / math.sqrt(T) + 1e-9


def test_subgradient_needs_constants_for_default_step():
    p = quadratic(np.eye(2))  # no G/R declared
    with pytest.raises(MissingOracleError):
        run_subgradient(p, [1.0, 1.0], 10)


def test_gd_identity_one_step():
    p = quadratic(np.eye(2))
    trace = run_gd(p, [5.0, 5.0], 1, step=1.0)
    assert np.allclose(trace.xs[1], 0.0)


def test_gd_matches_scalar_recursion():
    # diag(1, 100) at step 1/100: coordinate factors 0.99 and 0 per step.
    p = quadratic(np.diag([1.0, 100.0]))
    trace = run_gd(p, [1.0, 1.0], 5, step=0.01)
    for k in range(6):
        assert trace.xs[k, 0] == pytest.approx(0.99**k, rel=1e-14)
        assert trace.xs[k, 1] == pytest.approx(0.0 if k else 1.0, abs=1e-15)


def test_gd_descent_lemma_every_step():
    entry, p = get_problem("quadratic-cond100")
    trace = run_gd(p, entry.x0, 500)
    assert check_descent_lemma(trace, "gd-smooth", p) <= 1e-9


def test_gd_strongly_convex_contraction():
    entry, p = get_problem("quadratic-cond100")
    eta = 2.0 / (p.L + p.mu)
    trace = run_gd(p, entry.x0, 300, eta)
    bound = 1.0 - 2.0 * eta * p.mu * p.L / (p.mu + p.L)
    assert max_step_ratio(trace.dist_err**2) <= bound + 1e-9


def test_agd_first_step_is_gradient_step():
    entry, p = get_problem("quadratic-cond100")
    gd = run_gd(p, entry.x0, 1)
    agd = run_agd(p, entry.x0, 1)
    assert np.allclose(agd.xs[1], gd.xs[1], atol=1e-15)


def test_agd_identity_single_step_convergence():
    p = quadratic(np.eye(2))
    trace = run_agd(p, [3.0, -2.0], 5, step=1.0)
    assert np.allclose(trace.xs[1:], 0.0, atol=1e-14)


def test_agd_accelerates_where_gd_stalls():
    # Shared small step exposes the sublinear regime: the momentum method's
    # fitted decay is far steeper than plain descent over the same window.
    entry, p = get_problem("quadratic-cond100")
    eta = 1e-4
    T = 3000
    window = slice(100, T + 1)
    gd = run_gd(p, entry.x0, T, eta)
    agd = run_agd(p, entry.x0, T, eta)
    ks = np.arange(T + 1)
    gd_slope = loglog_slope(ks[window], gd.f_err[window])
    agd_slope = loglog_slope(ks[window], agd.f_err[window])
    assert agd_slope <= -1.8
    assert gd_slope >= -1.0
    assert agd_slope < gd_slope - 1.0


def test_pgd_zero_radius_bit_identical_to_gd():
    entry, p = get_problem("strict-saddle-d2")
    gd = run_gd(p, entry.x0, 200)
    pgd = run_pgd(p, entry.x0, 200, seed=5, radius=0.0, grad_threshold=0.01, cooldown=10)
    assert np.array_equal(gd.xs, pgd.xs)


def test_pgd_matches_gd_until_threshold():
    p = quadratic(np.eye(2))
    gd = run_gd(p, [5.0, 5.0], 40, step=0.5)
    pgd = run_pgd(
        p, [5.0, 5.0], 40, 0.5, seed=0, radius=0.1, grad_threshold=1e-3, cooldown=5
    )
    grad_norms = gd.grad_norm
    still_large = np.nonzero(grad_norms <= 1e-3)[0]
    first_hit = int(still_large[0]) if still_large.size else 41
    assert np.array_equal(gd.xs[:first_hit], pgd.xs[:first_hit])
    assert not np.any(pgd.extras["perturbed"][:first_hit])


def test_pgd_deterministic_given_seed():
    entry, p = get_problem("strict-saddle-d2")
    a = run_pgd(p, entry.x0, 500, seed=11, epsilon=0.01)
    b = run_pgd(p, entry.x0, 500, seed=11, epsilon=0.01)
    assert np.array_equal(a.xs, b.xs)
    c = run_pgd(p, entry.x0, 500, seed=12, epsilon=0.01)
    assert not np.array_equal(a.xs, c.xs)


def test_pgd_escapes_saddle_where_gd_is_stuck():
    p = strict_saddle(2)
    x0 = [0.0, 0.1]  # stable manifold of the saddle
    gd = run_gd(p, x0, 2000)
    assert gd.f_err.min() + p.f_star > -1e-6  # f never drops below -1e-6
    escapes = 0
    for seed in range(10):
        trace = run_pgd(p, x0, 4000, seed=seed, epsilon=0.01)
        if np.min(trace.f_err + p.f_star) <= -0.2:
            escapes += 1
    assert escapes >= 8


def test_pgd_requires_seed_and_validates_radius():
    entry, p = get_problem("strict-saddle-d2")
    with pytest.raises(TypeError):
        run_pgd(p, entry.x0, 10)  # seed is keyword-required
    with pytest.raises(ValueError):
        run_pgd(p, entry.x0, 10, seed=0, radius=-1.0, grad_threshold=0.1, cooldown=1)
    with pytest.raises(ValueError):
        run_pgd(p, entry.x0, 10, seed=0)  # neither epsilon nor explicit knobs


def test_trace_records_time_and_config():
    entry, p = get_problem("quadratic-cond100")
    trace = run_gd(p, entry.x0, 3)
    assert trace.config["algorithm"] == "gd"
    assert np.allclose(trace.ts, trace.ks * trace.config["step"])
