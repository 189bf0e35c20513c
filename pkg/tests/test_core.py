import math

import numpy as np
import pytest

from vieq.core import (
    Ball,
    Box,
    MissingOracleError,
    RunTrace,
    VectorField,
    WholeSpace,
    as_point,
    bregman_divergence,
    inner,
    project,
)
from vieq.problems import quadratic


def test_inner_direct_sum():
    assert inner([1, 2], [3, 4]) == 11


def test_inner_zero_and_orthogonal():
    x = np.array([2.0, -3.0, 5.0])
    assert inner(x, np.zeros(3)) == 0.0
    assert inner([1, 0], [0, 1]) == 0.0


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner([1, 2], [1, 2, 3])


def test_as_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])
    with pytest.raises(ValueError):
        as_point([np.inf])


def test_project_ball_radial_scaling():
    ball = Ball(np.zeros(2), 1.0)
    assert np.allclose(project(ball, [2.0, 0.0]), [1.0, 0.0])


def test_project_box_clamp():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    assert np.allclose(project(box, [0.5, 3.0]), [0.5, 1.0])


def test_project_wholespace_identity():
    x = np.array([3.0, -7.0])
    assert np.array_equal(project(WholeSpace(2), x), x)


def test_project_interior_point_unchanged():
    ball = Ball(np.zeros(3), 2.0)
    x = np.array([0.1, -0.2, 0.3])
    assert np.array_equal(project(ball, x), x)


def _random_sets_and_points(rng, count, dim=3):
    for _ in range(count):
        kind = rng.integers(3)
        x = rng.uniform(-5, 5, size=dim)
        if kind == 0:
            yield WholeSpace(dim), x
        elif kind == 1:
            lo = rng.uniform(-3, 0, size=dim)
            yield Box(lo, lo + rng.uniform(0.5, 3, size=dim)), x
        else:
            yield Ball(rng.uniform(-1, 1, size=dim), rng.uniform(0.5, 3)), x


def test_project_idempotent_on_random_sets():
    # Equality up to floating round-off: reprojecting a point that already
    # sits on a ball boundary can move it by one ulp of the radius.
    rng = np.random.default_rng(0)
    for cset, x in _random_sets_and_points(rng, 1000):
        once = project(cset, x)
        twice = project(cset, once)
        tol = 1e-15 * max(1.0, float(np.linalg.norm(once)))
        assert np.linalg.norm(twice - once) <= tol


def test_projection_firmly_nonexpansive():
    # ||Px-Py||^2 + ||(I-P)x-(I-P)y||^2 <= ||x-y||^2 for convex sets
    rng = np.random.default_rng(1)
    for cset, x in _random_sets_and_points(rng, 1000):
        y = rng.uniform(-5, 5, size=x.size)
        px, py = project(cset, x), project(cset, y)
        lhs = np.linalg.norm(px - py) ** 2 + np.linalg.norm((x - px) - (y - py)) ** 2
        assert lhs <= np.linalg.norm(x - y) ** 2 + 1e-12


def test_box_validation():
    with pytest.raises(ValueError):
        Box([1.0, 0.0], [0.0, 1.0])


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball([0.0], 0.0)


def test_bregman_euclidean_half_square():
    h = quadratic(np.eye(2))
    # h(y) - h(x) - <grad h(x), y - x> with h = 0.5||.||^2, y=(1,0), x=0
    assert bregman_divergence(h, [1.0, 0.0], [0.0, 0.0]) == pytest.approx(0.5, abs=1e-15)


def test_bregman_zero_at_equal_points():
    h = quadratic(np.eye(3))
    x = np.array([0.3, -0.4, 1.1])
    assert bregman_divergence(h, x, x) == pytest.approx(0.0, abs=1e-15)


def test_bregman_negative_entropy():
    # h(x) = sum x log x gives D_h(y, x) = sum y log(y/x) - y + x.
    # Expected value computed from that componentwise formula at
    # y = (1, 1), x = (e, 1):  (1*log(1/e) - 1 + e) + 0 = e - 2.
    from vieq.core import ScalarProblem

    h = ScalarProblem(
        dim=2,
        value=lambda x: float(np.sum(x * np.log(x))),
        gradient=lambda x: np.log(x) + 1.0,
        name="negentropy",
    )
    y = np.array([1.0, 1.0])
    x = np.array([math.e, 1.0])
    expected = sum(yi * math.log(yi / xi) - yi + xi for yi, xi in zip(y, x))
    assert expected == pytest.approx(math.e - 2.0, abs=1e-15)
    assert bregman_divergence(h, y, x) == pytest.approx(expected, abs=1e-12)


def test_bregman_nonnegative_for_convex_h():
    h = quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]))
    rng = np.random.default_rng(2)
    for _ in range(300):
        y, x = rng.uniform(-4, 4, size=2), rng.uniform(-4, 4, size=2)
        assert bregman_divergence(h, y, x) >= -1e-12


def test_bregman_requires_gradient_oracle():
    from vieq.core import ScalarProblem

    h = ScalarProblem(dim=1, value=lambda x: float(x[0] ** 2))
    with pytest.raises(MissingOracleError):
        bregman_divergence(h, [1.0], [0.0])


def test_vector_field_fixed_point_invariant():
    with pytest.raises(ValueError):
        VectorField(dim=1, func=lambda z: z + 1.0, fixed_point=np.array([0.0]))


def test_run_trace_sorted_and_immutable():
    trace = RunTrace(
        config={"algorithm": "t", "step": 1.0},
        ks=[0, 1, 2],
        ts=[0.0, 1.0, 2.0],
        xs=np.zeros((3, 2)),
        f_err=[3.0, 2.0, 1.0],
    )
    with pytest.raises(ValueError):
        RunTrace(config={}, ks=[0, 0], ts=[0.0, 1.0], xs=np.zeros((2, 1)))
    with pytest.raises(ValueError):
        trace.xs[0, 0] = 5.0
    assert trace.column("f_err")[2] == 1.0
    assert trace.dist_err is None
