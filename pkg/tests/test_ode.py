import math

import numpy as np
import pytest

from helpers import loglog_slope
from vieq.core import MissingOracleError, VectorField
from vieq.ode import (
    Dynamics,
    IntegrationError,
    ScalingFunctions,
    bregman_dynamics,
    gradient_flow,
    highres,
    integrate,
    lyapunov,
    nesterov_ode,
    polynomial_scaling,
)
from vieq.problems import get_problem, quadratic


def euclidean_h(dim):
    return quadratic(np.eye(dim), np.zeros(dim), name="euclidean")


# ---------------------------------------------------------------------------
# integrators
# ---------------------------------------------------------------------------


def test_rk4_matches_exponential_decay():
    p = quadratic(np.eye(1))
    traj = integrate(gradient_flow(p), "rk4", 0.0, 1.0, 0.01, [1.0])
    assert abs(traj.xs[-1, 0] - math.exp(-1.0)) <= 1e-8


def test_leapfrog_energy_drift_vs_euler():
    harmonic = Dynamics(
        order=2,
        rhs=lambda t, x, v: -x,
        damping=lambda t: 0.0,
        force=lambda t, x: -x,
        name="harmonic",
    )

    def drift(traj):
        energy = 0.5 * (traj.xs[:, 0] ** 2 + traj.vs[:, 0] ** 2)
        return np.max(np.abs(energy - energy[0]))

    lf = integrate(harmonic, "leapfrog", 0.0, 100.0, 1e-3, [1.0], [0.0])
    eu = integrate(harmonic, "euler", 0.0, 100.0, 1e-3, [1.0], [0.0])
    assert drift(lf) < 1e-6
    assert drift(eu) > 1e-3  # forward Euler gains energy without bound


def test_order_of_accuracy_under_dt_halving():
    p = quadratic(np.eye(1))
    flow = gradient_flow(p)
    exact = math.exp(-1.0)

    def err(method, dt):
        return abs(integrate(flow, method, 0.0, 1.0, dt, [1.0]).xs[-1, 0] - exact)

    euler_ratio = err("euler", 0.02) / err("euler", 0.01)
    rk4_ratio = err("rk4", 0.02) / err("rk4", 0.01)
    assert 1.7 <= euler_ratio <= 2.3
    assert 12.0 <= rk4_ratio <= 20.0


def test_integrator_validation():
    p = quadratic(np.eye(1))
    flow = gradient_flow(p)
    with pytest.raises(ValueError):
        integrate(flow, "leapfrog", 0.0, 1.0, 0.01, [1.0])
    with pytest.raises(ValueError):
        integrate(flow, "rk45", 0.0, 1.0, 0.01, [1.0])
    with pytest.raises(ValueError):
        integrate(flow, "rk4", 0.0, 1.0, -0.1, [1.0])
    ode = nesterov_ode(p)
    with pytest.raises(ValueError):
        integrate(ode, "rk4", 0.0, 1.0, 0.01, [1.0], [0.0])  # singular at t = 0
    with pytest.raises(ValueError):
        integrate(ode, "rk4", 0.1, 1.0, 0.01, [1.0])  # v0 missing


def test_blowup_reports_offending_time():
    stiff = Dynamics(order=1, rhs=lambda t, x: x**3, name="cubic")
    with np.errstate(over="ignore"):
        with pytest.raises(IntegrationError) as excinfo:
            integrate(stiff, "euler", 0.0, 50.0, 0.5, [2.0])
    assert excinfo.value.t > 0


# ---------------------------------------------------------------------------
# named dynamics
# ---------------------------------------------------------------------------


def test_nesterov_rhs_vanishes_at_optimum():
    _, p = get_problem("quadratic-cond100")
    ode = nesterov_ode(p)
    acc = ode.rhs(1e9, p.x_star, np.zeros(2))
    assert np.linalg.norm(acc) <= 1e-8


def test_nesterov_damping_coefficient():
    p = quadratic(np.eye(2))
    ode = nesterov_ode(p)
    # at t = 3 the damping 3/t equals one: rhs(3, x*, v) = -v
    v = np.array([0.4, -0.2])
    assert np.allclose(ode.rhs(3.0, np.zeros(2), v), -v, atol=1e-15)


def test_nesterov_inverse_square_function_decay():
    p = quadratic(np.eye(2))
    traj = integrate(nesterov_ode(p), "rk4", 0.1, 100.0, 0.01, [1.0, 1.0], [0.0, 0.0])
    f_err = 0.5 * np.sum(traj.xs**2, axis=1)
    mask = traj.ts >= 1.0
    scaled = f_err[mask] * traj.ts[mask] ** 2
    assert np.max(scaled) <= 2.0 * 2.0 + 0.5  # 2 ||x0 - x*||^2 plus slack


def test_polynomial_scaling_satisfies_ideal_conditions():
    s = polynomial_scaling(4)
    for t in (0.5, 1.0, 10.0):
        assert s.beta_dot(t) <= math.exp(s.alpha(t)) + 1e-12
        assert s.gamma_dot(t) == pytest.approx(math.exp(s.alpha(t)), rel=1e-12)


def test_ideal_scaling_check_rejects_violating_family():
    with pytest.raises(ValueError):
        ScalingFunctions(
            alpha=lambda t: 0.0,
            alpha_dot=lambda t: 0.0,
            beta=lambda t: math.exp(2 * t),
            beta_dot=lambda t: 2 * math.exp(2 * t),
            gamma=lambda t: t,
            gamma_dot=lambda t: 1.0,
            family="violating",
        )


def test_ideal_scaling_check_rejects_gamma_mismatch():
    with pytest.raises(ValueError):
        ScalingFunctions(
            alpha=lambda t: 0.0,
            alpha_dot=lambda t: 0.0,
            beta=lambda t: t,
            beta_dot=lambda t: 1.0,
            gamma=lambda t: 2 * t,
            gamma_dot=lambda t: 2.0,
            family="bad-gamma",
        )


def test_bregman_p2_reduces_to_nesterov_rhs():
    _, p = get_problem("quadratic-identity")
    dyn = bregman_dynamics(p, euclidean_h(2), polynomial_scaling(2))
    ode = nesterov_ode(p)
    rng = np.random.default_rng(13)
    for _ in range(100):
        t = rng.uniform(0.5, 20.0)
        x = rng.uniform(-2, 2, size=2)
        v = rng.uniform(-2, 2, size=2)
        assert np.linalg.norm(dyn.rhs(t, x, v) - ode.rhs(t, x, v)) <= 1e-12


def test_bregman_rhs_zero_at_rest_on_optimum():
    _, p = get_problem("quadratic-cond100")
    dyn = bregman_dynamics(p, euclidean_h(2), polynomial_scaling(4))
    assert np.linalg.norm(dyn.rhs(2.0, p.x_star, np.zeros(2))) <= 1e-12


def test_bregman_needs_hessian_oracle():
    _, p = get_problem("quadratic-identity")
    from vieq.core import ScalarProblem

    bare_h = ScalarProblem(dim=2, value=lambda x: 0.5 * float(x @ x), gradient=lambda x: x)
    with pytest.raises(MissingOracleError):
        bregman_dynamics(p, bare_h, polynomial_scaling(2))


def test_lyapunov_zero_at_optimum_and_nonnegative():
    _, p = get_problem("quadratic-identity")
    h = euclidean_h(2)
    s = polynomial_scaling(2)
    assert lyapunov(p, h, s, 1.0, p.x_star, np.zeros(2)) == pytest.approx(0.0, abs=1e-15)
    rng = np.random.default_rng(14)
    for _ in range(100):
        t = rng.uniform(0.2, 10.0)
        x = rng.uniform(-2, 2, size=2)
        v = rng.uniform(-2, 2, size=2)
        assert lyapunov(p, h, s, t, x, v) >= -1e-12


@pytest.mark.parametrize("p_order", [2, 4])
@pytest.mark.parametrize("problem_name", ["quadratic-identity", "quadratic-cond100"])
def test_lyapunov_nonincreasing_along_trajectory(p_order, problem_name):
    _, prob = get_problem(problem_name)
    h = euclidean_h(2)
    s = polynomial_scaling(p_order)
    dyn = bregman_dynamics(prob, h, s)
    x0 = prob.x_star + np.array([1.0, -1.0])
    traj = integrate(dyn, "rk4", 0.1, 20.0, 0.002, x0, np.zeros(2))
    energies = np.array(
        [lyapunov(prob, h, s, t, x, v) for t, x, v in zip(traj.ts, traj.xs, traj.vs)]
    )
    increments = np.diff(energies)
    allowed = 1e-6 * (1.0 + energies[:-1])
    assert np.all(increments <= allowed)


def test_bregman_p4_decays_no_slower_than_certified_envelope():
    # The certified rate is exp(-beta_t) = C^-1 t^-4; on a strongly convex
    # quadratic the trajectory decays strictly faster (slope near -6).
    p = quadratic(np.eye(2))
    dyn = bregman_dynamics(p, euclidean_h(2), polynomial_scaling(4))
    traj = integrate(dyn, "rk4", 0.1, 60.0, 0.002, [1.0, 1.0], [0.0, 0.0])
    f_err = 0.5 * np.sum(traj.xs**2, axis=1)
    mask = (traj.ts >= 1.0) & (f_err > 0)
    slope = loglog_slope(traj.ts[mask], f_err[mask])
    assert slope <= -3.7


# ---------------------------------------------------------------------------
# high-resolution dynamics
# ---------------------------------------------------------------------------


def test_highres_gda_rhs_at_rest_point():
    _, rot = get_problem("rotation")
    dyn = highres(rot, "gda", 0.1)
    assert np.allclose(dyn.rhs(0.0, np.zeros(2), np.zeros(2)), 0.0)


def test_highres_eg_rhs_on_rotation_matches_hand_formula():
    _, rot = get_problem("rotation")
    eta = 0.1
    beta = 2.0 / eta
    dyn = highres(rot, "eg", eta)
    rng = np.random.default_rng(15)
    for _ in range(50):
        z = rng.uniform(-2, 2, size=2)
        v = rng.uniform(-2, 2, size=2)
        # J = R and F = Rz give J F(z) = R^2 z = -z
        expected = -beta * v - beta * rot(z) - 2.0 * z
        assert np.allclose(dyn.rhs(0.0, z, v), expected, atol=1e-12)


def test_highres_jacobian_constant_for_bilinear_game():
    _, rot = get_problem("rotation")
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
    rng = np.random.default_rng(16)
    for _ in range(20):
        z = rng.uniform(-3, 3, size=2)
        v = rng.uniform(-1, 1, size=2)
        assert np.allclose(rot.jac_vec(z, v), R @ v, atol=1e-14)


def test_highres_requires_jacobian_oracle():
    bare = VectorField(dim=2, func=lambda z: np.array([z[1], -z[0]]), name="bare")
    with pytest.raises(MissingOracleError):
        highres(bare, "eg", 0.1)
    with pytest.raises(MissingOracleError):
        highres(bare, "ogda", 0.1)
    dyn = highres(bare, "gda", 0.1)  # gda needs no Jacobian
    assert dyn.order == 2


def test_highres_la2_requires_averaging():
    _, rot = get_problem("rotation")
    with pytest.raises(ValueError):
        highres(rot, "la2", 0.1)
    with pytest.raises(ValueError):
        highres(rot, "la2", 0.1, averaging=1.5)


def test_highres_unknown_variant():
    _, rot = get_problem("rotation")
    with pytest.raises(ValueError):
        highres(rot, "heavyball", 0.1)
