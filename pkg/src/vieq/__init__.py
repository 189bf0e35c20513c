"""vieq: first-order solvers, continuous-time dynamics, and empirical
convergence diagnostics for optimization and variational inequality problems.
"""

from .core import (
    Ball,
    Box,
    ConstraintSet,
    MissingOracleError,
    RunTrace,
    ScalarProblem,
    VectorField,
    WholeSpace,
    as_point,
    bregman_divergence,
    inner,
    project,
)
from .problems import (
    abs_value,
    affine_field,
    bilinear_game,
    game_field,
    get_problem,
    list_problems,
    quadratic,
    strict_saddle,
)
from .optimize import run_agd, run_gd, run_pgd, run_subgradient
from .vi import (
    ExactAffine,
    FixedPointIter,
    TruncatedSeries,
    resolvent,
    run_eg,
    run_forward,
    run_lookahead,
    run_ogda,
    run_ppm,
    vi_residual,
)
from .ode import (
    Dynamics,
    ScalingFunctions,
    Trajectory,
    bregman_dynamics,
    gradient_flow,
    highres,
    integrate,
    lyapunov,
    nesterov_ode,
    polynomial_scaling,
)
from .sample import SampleTrace, run_ula, run_underdamped
from .diagnostics import (
    PairSampler,
    box_sampler,
    check_cocoercive,
    check_descent_lemma,
    check_firmly_nonexpansive,
    check_monotone,
    fit_rate,
)
from .suites import gradient_field, run_suite

__version__ = "0.1.0"
