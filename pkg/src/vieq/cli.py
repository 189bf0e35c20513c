"""Command-line entry point.

Subcommands:
    run     execute a discrete algorithm on a registry problem, write a trace CSV
    check   run deterministic property suites (exit 1 on any failure)
    ode     integrate a named dynamics, write a trajectory CSV
    sample  run an MCMC chain, print moment summary, optionally write samples

Exit codes: 0 success, 1 check failure, 2 usage/configuration error.
All randomness flows from --seed (default 0; the VIEQ_SEED environment
variable overrides the default, explicit flags win). Flags override values
from an optional flat key=value --config file.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import optimize, problems, sample as sampling, suites, vi
from . import ode as odes
from .core import MissingOracleError
from .output import samples_csv, trace_csv, trajectory_csv, write_svg_plot

SCALAR_ALGS = ("sub", "gd", "agd", "pgd")
FIELD_ALGS = ("forward", "ppm", "eg", "ogda", "la")


class UsageError(Exception):
    """Configuration problem; reported on stderr with exit code 2."""


def _default_seed() -> int:
    env = os.environ.get("VIEQ_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"VIEQ_SEED must be an integer, got {env!r}") from None


def _load_config(path):
    """Flat key=value file; blank lines and '#' comments are ignored."""
    values = {}
    try:
        with open(path) as handle:
            for lineno, raw in enumerate(handle, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args, name, cast, default):
    """Precedence: explicit flag > config file > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    config = getattr(args, "_config", {})
    if name in config:
        try:
            return cast(config[name])
        except ValueError as exc:
            raise UsageError(f"config key {name}: {exc}") from exc
    return default


def _resolve_seed(args) -> int:
    return _resolve(args, "seed", int, _default_seed())


def _get_problem(name):
    try:
        return problems.get_problem(name)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc


def _parse_x0(args, entry):
    text = _resolve(args, "x0", str, None)
    if text is None:
        return entry.x0
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError as exc:
        raise UsageError(f"--x0 expects comma-separated floats: {exc}") from exc


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    problem_name = _resolve(args, "problem", str, None)
    alg = _resolve(args, "alg", str, None)
    if problem_name is None or alg is None:
        raise UsageError("run needs --problem and --alg")
    if alg not in SCALAR_ALGS + FIELD_ALGS:
        raise UsageError(
            f"unknown algorithm {alg!r}; scalar algorithms: {', '.join(SCALAR_ALGS)}; "
            f"field algorithms: {', '.join(FIELD_ALGS)}"
        )
    entry, obj = _get_problem(problem_name)
    iters = _resolve(args, "iters", int, 100)
    eta = _resolve(args, "eta", float, None)
    seed = _resolve_seed(args)
    x0 = _parse_x0(args, entry)

    try:
        if alg in SCALAR_ALGS:
            if entry.kind != "scalar":
                raise UsageError(
                    f"algorithm {alg!r} needs a scalar problem; {problem_name!r} is a vector field"
                )
            if alg == "sub":
                trace = optimize.run_subgradient(obj, x0, iters, eta)
            elif alg == "gd":
                trace = optimize.run_gd(obj, x0, iters, eta)
            elif alg == "agd":
                trace = optimize.run_agd(obj, x0, iters, eta)
            else:  # pgd
                trace = optimize.run_pgd(
                    obj,
                    x0,
                    iters,
                    eta,
                    seed=seed,
                    epsilon=_resolve(args, "epsilon", float, 0.01),
                    radius=_resolve(args, "radius", float, None),
                    grad_threshold=_resolve(args, "grad_threshold", float, None),
                    cooldown=_resolve(args, "cooldown", int, None),
                )
        else:
            if entry.kind != "field":
                raise UsageError(
                    f"algorithm {alg!r} needs a vector field; {problem_name!r} is a scalar problem"
                )
            if alg == "forward":
                trace = vi.run_forward(obj, None, x0, iters, eta)
            elif alg == "ppm":
                if eta is None:
                    raise UsageError("ppm needs --eta")
                backend = vi.backend_from_string(_resolve(args, "resolvent", str, "affine"))
                trace = vi.run_ppm(obj, x0, iters, eta, backend)
            elif alg == "eg":
                trace = vi.run_eg(obj, x0, iters, eta)
            elif alg == "ogda":
                if eta is None:
                    raise UsageError("ogda needs --eta")
                trace = vi.run_ogda(obj, x0, iters, eta)
            else:  # la
                if eta is None:
                    raise UsageError("la needs --eta")
                trace = vi.run_lookahead(
                    obj,
                    x0,
                    iters,
                    eta,
                    inner_steps=_resolve(args, "inner_steps", int, 2),
                    averaging=_resolve(args, "averaging", float, 0.25),
                )
    except (MissingOracleError, ValueError) as exc:
        raise UsageError(str(exc)) from exc

    out = _resolve(args, "out", str, f"{problem_name}-{alg}.csv")
    trace_csv(out, trace)

    final = []
    for label in ("dist_err", "f_err", "grad_norm"):
        col = trace.column(label)
        if col is not None:
            final.append(f"{label}={col[-1]:.6g}")
    print(f"run problem={problem_name} alg={alg} iters={iters} "
          f"step={trace.config['step']:.6g} out={out} " + " ".join(final))

    plot = _resolve(args, "plot", str, None)
    if plot is not None:
        try:
            series = {}
            for label in ("dist_err", "f_err", "grad_norm"):
                col = trace.column(label)
                if col is not None:
                    series[label] = (trace.ks, col)
            write_svg_plot(plot, series, title=f"{problem_name} / {alg}", xlabel="k")
        except Exception as exc:  # plotting must never change the exit code
            print(f"warning: plot failed: {exc}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    suite = _resolve(args, "suite", str, "all")
    samples = _resolve(args, "samples", int, 1000)
    seed = _resolve_seed(args)
    try:
        results = suites.run_suite(suite, samples=samples, seed=seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    failures = 0
    for result in results:
        print(result.line())
        failures += 0 if result.passed else 1
    print(f"checks={len(results)} failures={failures} suite={suite} samples={samples} seed={seed}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# ode
# ---------------------------------------------------------------------------


def _build_dynamics(spec: str, entry, obj, args):
    kind, _, param = spec.partition(":")
    if kind == "gradflow":
        if entry.kind != "scalar":
            raise UsageError("gradflow needs a scalar problem")
        return odes.gradient_flow(obj), None
    if kind == "nesterov":
        if entry.kind != "scalar":
            raise UsageError("the nesterov dynamics needs a scalar problem")
        return odes.nesterov_ode(obj), None
    if kind == "bregman":
        if entry.kind != "scalar":
            raise UsageError("the bregman dynamics needs a scalar problem")
        p = float(param) if param else 2.0
        scaling = odes.polynomial_scaling(p)
        h = problems.quadratic(np.eye(obj.dim), np.zeros(obj.dim), name="euclidean")
        dyn = odes.bregman_dynamics(obj, h, scaling)
        monitor = None
        if obj.has_optimum:
            monitor = lambda t, x, v: odes.lyapunov(obj, h, scaling, t, x, v)
        return dyn, monitor
    if kind == "highres":
        if entry.kind != "field":
            raise UsageError("high-resolution dynamics need a vector field")
        variant = param or "gda"
        eta = _resolve(args, "eta", float, 0.1)
        averaging = _resolve(args, "averaging", float, 0.25)
        return odes.highres(obj, variant, eta, averaging=averaging), None
    raise UsageError(
        f"unknown dynamics {spec!r}; use gradflow, nesterov, bregman:p, highres:variant"
    )


def cmd_ode(args) -> int:
    spec = _resolve(args, "dynamics", str, None)
    if spec is None:
        raise UsageError("ode needs --dynamics")
    default_problem = "rotation" if spec.startswith("highres") else "quadratic-cond100"
    problem_name = _resolve(args, "problem", str, default_problem)
    entry, obj = _get_problem(problem_name)
    try:
        dyn, monitor = _build_dynamics(spec, entry, obj, args)
    except (MissingOracleError, ValueError) as exc:
        raise UsageError(str(exc)) from exc

    t0 = _resolve(args, "t0", float, dyn.t0)
    t1 = _resolve(args, "t1", float, 10.0)
    dt = _resolve(args, "dt", float, 0.01)
    method = _resolve(args, "integrator", str, "rk4")
    x0 = _parse_x0(args, entry)
    v0 = np.zeros_like(x0) if dyn.order == 2 else None
    try:
        traj = odes.integrate(dyn, method, t0, t1, dt, x0, v0)
    except (ValueError, odes.IntegrationError) as exc:
        raise UsageError(str(exc)) from exc

    lyap = None
    if monitor is not None:
        lyap = [monitor(t, x, v) for t, x, v in zip(traj.ts, traj.xs, traj.vs)]

    out = _resolve(args, "out", str, f"{problem_name}-ode.csv")
    trajectory_csv(out, traj, lyapunov=lyap)
    norm = float(np.linalg.norm(traj.xs[-1]))
    print(f"ode dynamics={spec} problem={problem_name} integrator={method} "
          f"t1={t1:g} dt={dt:g} out={out} final_norm={norm:.6g}")
    return 0


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def cmd_sample(args) -> int:
    chain = _resolve(args, "chain", str, None)
    if chain not in ("ula", "underdamped"):
        raise UsageError("sample needs --chain ula or --chain underdamped")
    problem_name = _resolve(args, "problem", str, "gaussian")
    entry, potential = _get_problem(problem_name)
    if entry.kind != "scalar":
        raise UsageError("sampling needs a scalar potential")
    steps = _resolve(args, "steps", int, 100_000)
    delta = _resolve(args, "delta", float, 0.01)
    seed = _resolve_seed(args)
    x0 = _parse_x0(args, entry)

    try:
        if chain == "ula":
            strace = sampling.run_ula(potential, x0, steps, delta, seed)
        else:
            friction = _resolve(args, "friction", float, 1.0)
            temperature = _resolve(args, "temperature", float, 1.0)
            strace = sampling.run_underdamped(
                potential, x0, np.zeros_like(x0), steps, delta, friction, temperature, seed
            )
    except (MissingOracleError, ValueError) as exc:
        raise UsageError(str(exc)) from exc

    mean = strace.mean()
    var = strace.variance()
    summary = (
        f"sample chain={chain} problem={problem_name} steps={steps} delta={delta:g} "
        f"seed={seed} mean={np.max(np.abs(mean)):.6g} variance={float(np.mean(var)):.6g}"
    )
    if strace.vs is not None:
        summary += f" velocity_variance={float(np.mean(strace.velocity_variance())):.6g}"
    print(summary)

    out = _resolve(args, "out", str, None)
    if out is not None:
        samples_csv(out, strace, thin=_resolve(args, "thin", int, 1))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--config", default=None, help="flat key=value config file")
    sub.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vieq",
        description="Run first-order solvers, dynamics, samplers, and property checks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run a discrete algorithm on a registry problem")
    run.add_argument("--problem", default=None, help=", ".join(problems.list_problems()))
    run.add_argument("--alg", default=None, help=f"{SCALAR_ALGS + FIELD_ALGS}")
    run.add_argument("--iters", type=int, default=None)
    run.add_argument("--eta", type=float, default=None)
    run.add_argument("--x0", default=None, help="comma-separated start point")
    run.add_argument("--plot", default=None, help="write an SVG convergence plot")
    run.add_argument("--epsilon", type=float, default=None, help="pgd target accuracy")
    run.add_argument("--radius", type=float, default=None, help="pgd perturbation radius")
    run.add_argument("--grad-threshold", dest="grad_threshold", type=float, default=None)
    run.add_argument("--cooldown", type=int, default=None, help="pgd steps between perturbations")
    run.add_argument("--resolvent", default=None, help="ppm backend: affine, picard:tol, series:m")
    run.add_argument("--inner-steps", dest="inner_steps", type=int, default=None)
    run.add_argument("--averaging", type=float, default=None)
    _add_common(run)
    run.set_defaults(func=cmd_run)

    check = subs.add_parser("check", help="run property suites")
    check.add_argument("--suite", default=None, choices=list(suites.SUITES))
    check.add_argument("--samples", type=int, default=None)
    _add_common(check)
    check.set_defaults(func=cmd_check)

    ode = subs.add_parser("ode", help="integrate a named dynamics")
    ode.add_argument("--dynamics", default=None,
                     help="gradflow | nesterov | bregman:p | highres:{gda,eg,ogda,la2}")
    ode.add_argument("--problem", default=None)
    ode.add_argument("--integrator", default=None, choices=list(odes.INTEGRATORS))
    ode.add_argument("--t0", type=float, default=None)
    ode.add_argument("--t1", type=float, default=None)
    ode.add_argument("--dt", type=float, default=None)
    ode.add_argument("--eta", type=float, default=None, help="high-resolution step parameter")
    ode.add_argument("--averaging", type=float, default=None, help="la2 averaging coefficient")
    ode.add_argument("--x0", default=None)
    _add_common(ode)
    ode.set_defaults(func=cmd_ode)

    samp = subs.add_parser("sample", help="run an MCMC chain")
    samp.add_argument("--chain", default=None, choices=["ula", "underdamped"])
    samp.add_argument("--problem", default=None)
    samp.add_argument("--steps", type=int, default=None)
    samp.add_argument("--delta", type=float, default=None)
    samp.add_argument("--friction", type=float, default=None)
    samp.add_argument("--temperature", type=float, default=None)
    samp.add_argument("--thin", type=int, default=None)
    samp.add_argument("--x0", default=None)
    _add_common(samp)
    samp.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _load_config(args.config) if args.config else {}
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
