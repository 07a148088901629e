"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
failure.  Profiles are written as CSV with the header ``r,u,du_dr,flux,w``,
scalar summaries as JSON.
"""

import argparse
import concurrent.futures
import dataclasses
import enum
import itertools
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ball_shooting, closed_forms, ground_state, verify
from ._numerics import spow
from .exceptions import (ConvergenceError, DomainError, MultipleRootsError,
                         NoSolutionError, ParameterError)
from .exponents import Params, derive
from .profile import RadialProfile

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
CSV_HEADER = "r,u,du_dr,flux,w"
NONEXISTENCE_MESSAGE = "no solution (consistent with nonexistence theorem)"


class Task(enum.Enum):
    EXPONENTS = "exponents"
    CLOSED_FORM = "closed-form"
    GROUND_STATE = "ground-state"
    BALL = "ball"
    EIGEN = "eigen"
    VERIFY = "verify"
    SWEEP = "sweep"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    task: Task
    params: Optional[Params]
    r_min: float = 1e-6
    r_max: float = 1e6
    samples: int = 2001
    quadrature_tol: float = ground_state.DEFAULT_TOL
    ode_tol: float = ball_shooting.DEFAULT_ODE_TOL
    root_tol: float = ball_shooting.DEFAULT_ROOT_TOL
    output: Optional[str] = None
    sweep: tuple = ()
    sweep_task: Task = Task.GROUND_STATE
    jobs: int = 1
    sweep_base: dict = field(default_factory=dict)
    family: Optional[str] = None
    lambda_frac: Optional[float] = None
    profile_path: Optional[str] = None
    timing: bool = False
    verbose: bool = False

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max:
            raise UsageError("--r-min/--r-max: requires 0 < r_min < r_max")
        if self.samples < 2:
            raise UsageError("--samples: requires samples >= 2")
        for flag, value in (("--quad-tol", self.quadrature_tol), ("--ode-tol", self.ode_tol),
                            ("--root-tol", self.root_tol)):
            if not 0.0 < value < 1.0:
                raise UsageError(f"{flag}: tolerance must lie in (0, 1)")
        if self.jobs < 1:
            raise UsageError("--jobs: requires at least 1")


# flag name -> (RunConfig field or Params field, converter, default, help)
_NUMERIC_FLAGS = {
    "N": ("N", int, None, "spatial dimension (integer >= 2)"),
    "p": ("p", float, None, "p-Laplacian exponent, 1 < p < N"),
    "mu": ("mu", float, 0.0, "Hardy coefficient, mu < ((N-p)/p)^p (default 0)"),
    "s": ("s", float, 0.0, "weight exponent of the critical term, 0 <= s < p (default 0)"),
    "lambda": ("lam", float, 0.0, "lower-order coefficient (default 0)"),
    "lambda-frac": ("lambda_frac", float, None,
                    "ball only: set lambda to this multiple of the first eigenvalue"),
    "r-min": ("r_min", float, 1e-6, "smallest radius; start radius of the ball shooting (1e-6)"),
    "r-max": ("r_max", float, 1e6, "largest radius of whole-space profiles (1e6)"),
    "samples": ("samples", int, 2001, "number of log-spaced radii (2001)"),
    "quad-tol": ("quadrature_tol", float, ground_state.DEFAULT_TOL,
                 "relative quadrature tolerance (1e-12)"),
    "ode-tol": ("ode_tol", float, ball_shooting.DEFAULT_ODE_TOL,
                "relative ODE tolerance (1e-11)"),
    "root-tol": ("root_tol", float, ball_shooting.DEFAULT_ROOT_TOL,
                 "relative tolerance of amplitude bisection (1e-13)"),
    "jobs": ("jobs", int, 1, "sweep: worker processes (1)"),
}
_PARAM_KEYS = ("N", "p", "mu", "s", "lam")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    common = _Parser(add_help=False)
    for flag, (_, conv, _default, text) in _NUMERIC_FLAGS.items():
        common.add_argument(f"--{flag}", type=conv, default=None,
                            help=text)
    common.add_argument("--out", default=None, help="output path prefix (.csv/.json appended)")
    common.add_argument("--config", default=None,
                        help="key=value file with flag names as keys; flags override it")
    common.add_argument("--timing", action="store_true",
                        help="add runtime_seconds to JSON summaries (output is then not reproducible)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")

    parser = _Parser(prog="hardyplap", description="Radial solutions of critical p-Laplacian "
                     "equations with a Hardy potential.")
    sub = parser.add_subparsers(dest="task", metavar="TASK")
    helps = {
        Task.EXPONENTS: "print the exponents gamma1, gamma2 and derived constants as JSON",
        Task.CLOSED_FORM: "sample an explicit solution (p = 2 or mu = 0) as CSV",
        Task.GROUND_STATE: "compute the whole-space ground state (lambda = 0)",
        Task.BALL: "solve the Dirichlet problem on the unit ball (lambda > 0)",
        Task.EIGEN: "first eigenvalue of the Hardy operator on the unit ball",
        Task.VERIFY: "run verification checks and print a pass/fail table",
        Task.SWEEP: "run a task over a grid of parameter values",
    }
    subs = {}
    for task in Task:
        subs[task] = sub.add_parser(task.value, parents=[common], help=helps[task])
    subs[Task.CLOSED_FORM].add_argument("--family", choices=[k.value for k in closed_forms.Kind
                                                             if k is not closed_forms.Kind.AUBIN_TALENTI],
                                        help="force a family (default: P2 when p = 2, else MU0)")
    subs[Task.VERIFY].add_argument("--profile", default=None,
                                   help="check a stored CSV profile instead of solving")
    subs[Task.SWEEP].add_argument("--sweep", action="append", default=[], metavar="AXIS=V1,V2,...",
                                  help="parameter axis (N, p, mu, s, lambda); repeatable")
    subs[Task.SWEEP].add_argument("--sweep-task", default=Task.GROUND_STATE.value,
                                  choices=[t.value for t in (Task.EXPONENTS, Task.GROUND_STATE,
                                                             Task.BALL, Task.EIGEN)],
                                  help="task evaluated at each point (ground-state)")
    return parser


def _read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {number} is not key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key == "lam":
            key = "lambda"
        if key not in _NUMERIC_FLAGS and key not in ("out",):
            raise UsageError(f"--config: unknown key '{key}' on line {number}")
        values[key] = value
    return values


def _convert(flag, text):
    conv = _NUMERIC_FLAGS[flag][1]
    try:
        return conv(text)
    except ValueError:
        raise UsageError(f"--{flag}: invalid value '{text}'") from None


def _parse_axis(text):
    if "=" not in text:
        raise UsageError(f"--sweep: expected AXIS=V1,V2,... got '{text}'")
    axis, values = text.split("=", 1)
    axis = axis.strip()
    if axis not in ("N", "p", "mu", "s", "lambda"):
        raise UsageError(f"--sweep: unknown axis '{axis}'")
    items = [v for v in values.split(",") if v.strip()]
    if not items:
        raise UsageError(f"--sweep: axis '{axis}' has no values")
    return axis, tuple(_convert(axis, v) for v in items)


def parse_args(argv):
    """Parse ``argv`` into a :class:`RunConfig`; raises :class:`UsageError` or
    :class:`ParameterError`."""
    ns = _build_parser().parse_args(argv)
    if ns.task is None:
        raise UsageError("a task is required (exponents, closed-form, ground-state, ball, "
                         "eigen, verify, sweep)")
    task = Task(ns.task)
    merged = {flag: spec[2] for flag, spec in _NUMERIC_FLAGS.items()}
    out = None
    if ns.config:
        for key, value in _read_config(ns.config).items():
            if key == "out":
                out = value
            else:
                merged[key] = _convert(key, value)
    for flag in _NUMERIC_FLAGS:
        value = getattr(ns, flag.replace("-", "_"))
        if value is not None:
            merged[flag] = value
    if ns.out is not None:
        out = ns.out

    sweep = tuple(_parse_axis(a) for a in getattr(ns, "sweep", []))
    swept = {axis for axis, _ in sweep}
    needs_params = task not in (Task.VERIFY, Task.SWEEP) or (
        task is Task.VERIFY and (merged["N"] is not None or merged["p"] is not None))
    params = None
    if task is Task.SWEEP:
        if not sweep:
            raise UsageError("--sweep: at least one axis is required")
        if out is None:
            raise UsageError("--out: sweep writes one file per point and needs a prefix")
    if needs_params or task is Task.SWEEP:
        for flag in ("N", "p"):
            if merged[flag] is None and flag not in swept:
                raise UsageError(f"--{flag}: required for task '{task.value}'")
        if task is not Task.SWEEP:
            params = Params(merged["N"], merged["p"], merged["mu"], merged["s"], merged["lambda"])
    if task is Task.VERIFY and ns.profile and params is None:
        raise UsageError("--profile: --N and --p are required to check a profile")

    fields = {_NUMERIC_FLAGS[f][0]: merged[f] for f in _NUMERIC_FLAGS
              if _NUMERIC_FLAGS[f][0] not in _PARAM_KEYS}
    base = {k: merged[f] for f, k in (("N", "N"), ("p", "p"), ("mu", "mu"), ("s", "s"),
                                      ("lambda", "lam"))}
    return RunConfig(
        task=task, params=params, output=out, sweep=sweep,
        sweep_base=base if task is Task.SWEEP else {},
        sweep_task=Task(getattr(ns, "sweep_task", Task.GROUND_STATE.value)),
        family=getattr(ns, "family", None), profile_path=getattr(ns, "profile", None),
        timing=ns.timing, verbose=ns.verbose, **fields)


# -- output ----------------------------------------------------------------
def _fmt(x):
    return repr(float(x))


def w_column(profile, p):
    r, u, du = np.asarray(profile.r), np.asarray(profile.u), np.asarray(profile.du_dr)
    with np.errstate(divide="ignore", invalid="ignore"):
        return spow(-r * du / u, p - 1.0)


def profile_csv(profile, w):
    rows = [CSV_HEADER]
    for row in zip(profile.r, profile.u, profile.du_dr, profile.flux, w):
        rows.append(",".join(_fmt(x) for x in row))
    return "\n".join(rows) + "\n"


def emit_profile(profile, w, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(profile_csv(profile, w))


def read_profile(path):
    """Profile stored by :func:`emit_profile`; raises ``ValueError`` on malformed input."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"expected header '{CSV_HEADER}'")
    rows = [[float(x) for x in line.split(",")] for line in lines[1:] if line.strip()]
    if any(len(row) != 5 for row in rows):
        raise ValueError("every row needs five columns")
    data = np.array(rows, dtype=float).reshape(-1, 5)
    return RadialProfile(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def _params_json(params):
    return {"N": params.N, "p": params.p, "mu": params.mu, "s": params.s, "lambda": params.lam}


def summary_dict(params, exps, runtime=None, **values):
    """Summary with the fixed key order; ``None`` and non-finite values are omitted."""
    out = {"params": _params_json(params), "gamma1": exps.gamma1, "gamma2": exps.gamma2,
           "M": exps.M}
    for key in ("C1", "C2", "t_minus", "max_first_integral", "max_ode_residual",
                "pohozaev_defect", "boundary_slope", "slope_fit_0", "slope_fit_inf"):
        value = values.pop(key, None)
        if value is not None and math.isfinite(value):
            out[key] = float(value)
    for key, value in values.items():
        if value is not None and (not isinstance(value, float) or math.isfinite(value)):
            out[key] = value
    if runtime is not None:
        out["runtime_seconds"] = runtime
    return out


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def emit_summary(summary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_json_text(summary))


def _write_outputs(config, summary, profile=None, w=None):
    if config.output is None:
        sys.stdout.write(_json_text(summary))
        return
    if profile is not None:
        emit_profile(profile, w, config.output + ".csv")
    emit_summary(summary, config.output + ".json")


# -- tasks -----------------------------------------------------------------
def _grid(config):
    return np.geomspace(config.r_min, config.r_max, config.samples)


def _exponents_summary(params):
    e = derive(params)
    return {"params": _params_json(params), "gamma1": e.gamma1, "gamma2": e.gamma2,
            "delta": e.delta, "mu_bar": e.mu_bar, "p_star_s": e.p_star_s, "M": e.M,
            "sphere_measure": e.sphere_measure}


def _ground_state(config, params):
    start = time.perf_counter()
    sol = ground_state.solve(params, r=_grid(config), tol=config.quadrature_tol)
    rep = sol.report
    summary = summary_dict(
        params, sol.exps, C1=sol.C1, C2=sol.C2, t_minus=sol.t_minus,
        max_first_integral=rep.max_first_integral, max_ode_residual=rep.max_ode_residual,
        slope_fit_0=rep.slope_fit_0, slope_fit_inf=rep.slope_fit_inf,
        runtime=time.perf_counter() - start if config.timing else None)
    return summary, sol.profile


def _ball_params(config, params):
    if config.lambda_frac is not None:
        lam1 = ball_shooting.first_eigenvalue(params.N, params.p, params.mu,
                                              ode_tol=config.ode_tol)
        params = params.replace(lam=config.lambda_frac * lam1)
    return params


def _ball(config, params):
    start = time.perf_counter()
    params = _ball_params(config, params)
    if params.lam <= 0.0:
        raise NoSolutionError(NONEXISTENCE_MESSAGE)
    sol = ball_shooting.solve_ball(params, tol=config.ode_tol, root_tol=config.root_tol,
                                   r0=config.r_min)
    summary = summary_dict(
        params, sol.exps, C1=sol.amplitude_C, pohozaev_defect=sol.pohozaev_defect,
        boundary_slope=sol.boundary_slope,
        runtime=time.perf_counter() - start if config.timing else None)
    return summary, sol.profile


def _eigen_summary(config, params):
    start = time.perf_counter()
    lam1 = ball_shooting.first_eigenvalue(params.N, params.p, params.mu, ode_tol=config.ode_tol)
    out = {"params": _params_json(params), "lambda1": lam1}
    if config.timing:
        out["runtime_seconds"] = time.perf_counter() - start
    return out


def _closed_form(config, params):
    if config.family is not None:
        kind = closed_forms.Kind(config.family)
        if kind is closed_forms.Kind.P2 and params.p != 2.0:
            raise DomainError("--family P2 requires p = 2")
        if kind is closed_forms.Kind.MU0 and params.mu != 0.0:
            raise DomainError("--family MU0 requires mu = 0")
        if kind is closed_forms.Kind.P2:
            family = closed_forms.ClosedFormFamily(kind, closed_forms.p2_constant(params),
                                                   math.sqrt(1.0 - params.mu / params.mu_bar))
        else:
            family = closed_forms.ClosedFormFamily(kind, closed_forms.mu0_constant(params))
    else:
        family = closed_forms.select(params)
        if family is None:
            raise DomainError("no closed form is known unless p = 2 or mu = 0")
    r = _grid(config)
    u, du = closed_forms.eval(family, params, r)
    profile = RadialProfile.from_values(r, u, du, params.N, params.p)
    exps = derive(params)
    summary = summary_dict(params, exps, C1=family.constant_c, C2=family.constant_c,
                           family=family.kind.value)
    return summary, profile


def _print_reports(reports, stream):
    for rep in reports:
        stream.write(rep.line() + "\n")
    failed = [r for r in reports if not r.passed]
    stream.write(f"{len(reports) - len(failed)} passed, {len(failed)} failed\n")
    return EXIT_FAIL if failed else EXIT_OK


def _verify(config):
    out = sys.stdout
    if config.profile_path is not None:
        try:
            profile = read_profile(config.profile_path)
        except OSError as exc:
            raise UsageError(f"--profile: cannot read {config.profile_path}: {exc.strerror}") \
                from None
        except ValueError as exc:
            out.write(f"FAIL  profile_format: {exc}\n")
            return EXIT_FAIL
        params = _ball_params(config, config.params)
        return _print_reports(verify.profile_checks(profile, params), out)
    if config.params is None:
        return _print_reports(verify.default_suite(timing=config.timing), out)
    params = _ball_params(config, config.params)
    reports, note = verify.params_suite(params)
    if note:
        out.write(note + "\n")
    return _print_reports(reports, out)


def _point_summary(task, config, params):
    if task is Task.EXPONENTS:
        return _exponents_summary(params)
    if task is Task.EIGEN:
        return _eigen_summary(config, params)
    if task is Task.BALL:
        return _ball(config, params)[0]
    return _ground_state(config, params)[0]


def _sweep_point(args):
    task, config, values = args
    params = Params(values["N"], values["p"], values["mu"], values["s"], values["lam"])
    try:
        return {"status": "ok", "summary": _point_summary(task, config, params)}
    except (ConvergenceError, NoSolutionError, MultipleRootsError, DomainError) as exc:
        return {"status": "failed", "error": str(exc), "params": _params_json(params)}


def _sweep(config):
    names = {"lambda": "lam"}
    axes = [(names.get(a, a), vals) for a, vals in config.sweep]
    points = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        values = dict(config.sweep_base)
        values.update({name: v for (name, _), v in zip(axes, combo)})
        Params(values["N"], values["p"], values["mu"], values["s"], values["lam"])
        points.append(values)
    point_config = dataclasses.replace(config, sweep=(), sweep_base={})
    jobs = [(config.sweep_task, point_config, v) for v in points]
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    index = []
    for i, result in enumerate(results):
        path = f"{config.output}_{i:04d}.json"
        emit_summary(result, path)
        index.append({"file": path, "status": result["status"]})
    emit_summary({"task": config.sweep_task.value,
                  "axes": {a: list(v) for a, v in config.sweep}, "points": index},
                 f"{config.output}_index.json")
    return EXIT_NUMERIC if any(r["status"] != "ok" for r in results) else EXIT_OK


def run(config):
    """Execute ``config``; returns the exit code."""
    task, params = config.task, config.params
    if task is Task.VERIFY:
        return _verify(config)
    if task is Task.SWEEP:
        return _sweep(config)
    if task is Task.EXPONENTS:
        summary = _exponents_summary(params)
        _write_outputs(config, summary)
    elif task is Task.EIGEN:
        _write_outputs(config, _eigen_summary(config, params))
    else:
        runner = {Task.CLOSED_FORM: _closed_form, Task.GROUND_STATE: _ground_state,
                  Task.BALL: _ball}[task]
        summary, profile = runner(config, params)
        w = w_column(profile, params.p)
        if config.output is None:
            sys.stdout.write(profile_csv(profile, w))
        else:
            emit_profile(profile, w, config.output + ".csv")
            emit_summary(summary, config.output + ".json")
    return EXIT_OK


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except (UsageError, ParameterError) as exc:
        sys.stderr.write(f"hardyplap: error: {exc}\n")
        return EXIT_USAGE
    if config.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        return run(config)
    except (UsageError, ParameterError, DomainError) as exc:
        sys.stderr.write(f"hardyplap: error: {exc}\n")
        return EXIT_USAGE
    except MultipleRootsError as exc:
        sys.stderr.write(f"hardyplap: verification failure: {exc}\n")
        return EXIT_FAIL
    except (ConvergenceError, NoSolutionError) as exc:
        sys.stderr.write(f"hardyplap: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"hardyplap: error: {exc}\n")
        return EXIT_NUMERIC
