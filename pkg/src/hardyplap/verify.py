"""Oracle checks shared by the tests, the CLI and the demos.

Every check returns a :class:`CheckReport` holding a measured value and the
allowed bound, so callers can tabulate results uniformly.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import closed_forms
from ._numerics import spow
from .exceptions import DomainError, NoSolutionError
from .exponents import Params, derive, gamma_mu

CLOSED_FORM_WINDOW = (1e-2, 1e2)
CLOSED_FORM_TOL = 1e-6
INVARIANT_TOL = 1e-8
SLOPE_TOL = 1e-3
ODE_RESIDUAL_TOL = 1e-6
IDENTITY_TOL = 1e-9
POHOZAEV_TOL = 1e-5
BOUNDARY_TOL = 1e-10
PROFILE_TOL = 1e-5


@dataclass(frozen=True)
class CheckReport:
    name: str
    measured: float
    allowed: float
    context: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.measured <= self.allowed)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: measured {self.measured:.3e}, allowed {self.allowed:.3e}"


def _echo(params):
    return dict(N=params.N, p=params.p, mu=params.mu, s=params.s, lam=params.lam)


def _log_argmax(profile, delta):
    """``log r`` where ``-r u'/u`` crosses ``delta`` (the maximum of ``r^delta u``)."""
    r = np.asarray(profile.r)
    x = np.log(r)
    h = -r * np.asarray(profile.du_dr) / np.asarray(profile.u)
    above = np.flatnonzero(h >= delta)
    if above.size == 0 or above[0] == 0:
        raise DomainError("profile does not contain the maximum of r^delta u")
    i = above[0]
    lo, hi = max(i - 4, 0), min(i + 4, r.size)
    spline = CubicSpline(x[lo:hi], h[lo:hi] - delta)
    return brentq(spline, x[i - 1], x[i], xtol=1e-15, rtol=1e-15)


def compare_to_closed_form(numeric, params, window=CLOSED_FORM_WINDOW, allowed=CLOSED_FORM_TOL):
    """Sup relative error against the explicit solution after argmax alignment."""
    family = closed_forms.select(params)
    if family is None:
        raise DomainError("no closed form is available for these parameters")
    delta = params.delta
    x_num = _log_argmax(numeric, delta)
    tau = math.exp(closed_forms.log_argmax_y(family, params) - x_num)
    exact = closed_forms.dilate(closed_forms.evaluator(family, params), tau, params)
    part = numeric.restrict(*window)
    if len(part) == 0:
        raise DomainError("profile does not overlap the comparison window")
    u, _ = exact(part.r)
    err = float(np.max(np.abs(part.u / u - 1.0)))
    return CheckReport("closed_form_sup_rel", err, allowed,
                       dict(_echo(params), family=family.kind.value, tau=tau))


def compare_invariant(C1, C2, params, exps=None, allowed=INVARIANT_TOL):
    """Dilation-invariant log combination of ``(C1, C2)`` against the closed form.

    Both explicit families satisfy ``C1 = C2 = c``.
    """
    family = closed_forms.select(params)
    if family is None:
        raise DomainError("no closed form is available for these parameters")
    exps = derive(params) if exps is None else exps
    g1, g2, d = exps.gamma1, exps.gamma2, exps.delta
    value = (g2 - d) * math.log(C1) + (d - g1) * math.log(C2)
    expected = (g2 - g1) * math.log(family.constant_c)
    return CheckReport("log_invariant", abs(value - expected), allowed * max(1.0, abs(expected)),
                       _echo(params))


def fit_power_slope(profile, end, decades, exclude=0.5):
    """Least-squares line through ``(log r, log u)`` near one end of ``profile``.

    The window spans ``decades`` decades after skipping ``exclude`` decades
    at the very end.  Returns ``(slope, intercept, stderr)``; ``exp(intercept)``
    estimates the asymptotic constant.
    """
    if end not in ("zero", "infinity"):
        raise DomainError("end must be 'zero' or 'infinity'")
    r = np.asarray(profile.r)
    lr = np.log10(r)
    if end == "zero":
        lo = lr[0] + exclude
        hi = lo + decades
    else:
        hi = lr[-1] - exclude
        lo = hi - decades
    eps = 1e-9
    keep = (lr >= lo - eps) & (lr <= hi + eps)
    if lr[-1] - lr[0] < decades + exclude - eps or keep.sum() < 3:
        raise DomainError("profile does not cover the requested decades")
    fit = stats.linregress(np.log(r[keep]), np.log(np.asarray(profile.u)[keep]))
    return float(fit.slope), float(fit.intercept), float(fit.stderr)


def slope_checks(profile, params, exps=None, decades=2, exclude=0.5, allowed=SLOPE_TOL):
    exps = derive(params) if exps is None else exps
    out = []
    for end, target in (("zero", -exps.gamma1), ("infinity", -exps.gamma2)):
        slope = fit_power_slope(profile, end, decades, exclude)[0]
        out.append(CheckReport(f"slope_{end}", abs(slope - target), allowed,
                               dict(_echo(params), slope=slope, expected=target)))
    return out


def conservation_monitor(solution, interior=None, allowed=None):
    """Max ``|V|`` along a ground state, or the worst Pohozaev defect of a ball solution."""
    from .ball_shooting import BallSolution, pohozaev_defect
    from .ground_state import GroundStateSolution

    if isinstance(solution, GroundStateSolution):
        rep = solution.report
        bound = rep.first_integral_allowed if allowed is None else allowed
        return CheckReport("first_integral", rep.max_first_integral, bound, _echo(solution.params))
    if isinstance(solution, BallSolution):
        radii = np.linspace(0.1, 0.9, 10) if interior is None else interior
        worst = max([solution.pohozaev_defect] + [pohozaev_defect(solution, r) for r in radii])
        return CheckReport("pohozaev_defect", worst,
                           POHOZAEV_TOL if allowed is None else allowed, _echo(solution.params))
    raise DomainError("conservation_monitor expects a ground-state or ball solution")


def ground_state_checks(sol):
    """Every necessary condition verified on a ground state."""
    params, exps, rep = sol.params, sol.exps, sol.report
    ctx = _echo(params)
    out = [
        conservation_monitor(sol),
        CheckReport("y_below_M", rep.max_y_over_M - 1.0, 1e-9, ctx),
        CheckReport("ode_residual", rep.max_ode_residual, ODE_RESIDUAL_TOL, ctx),
        CheckReport("identity_residual", rep.identity_residual, IDENTITY_TOL, ctx),
        CheckReport("monotone_y", 0.0 if rep.monotone else 1.0, 0.0, ctx),
        CheckReport("z_sign", 0.0 if rep.z_sign_ok else 1.0, 0.0, ctx),
    ]
    if rep.t_minus_level_error is not None:
        out.append(CheckReport("t_minus_level", rep.t_minus_level_error, 1e-8, ctx))
    try:
        out += slope_checks(sol.profile, params, exps)
    except DomainError:
        pass
    if closed_forms.select(params) is not None:
        out.append(compare_to_closed_form(sol.profile, params))
        out.append(compare_invariant(sol.C1, sol.C2, params, exps))
    return out


def ball_checks(sol):
    ctx = _echo(sol.params)
    scale = float(np.max(sol.profile.u))
    return [
        CheckReport("boundary_value", abs(sol.boundary_value) / scale, BOUNDARY_TOL, ctx),
        CheckReport("boundary_slope_negative", 0.0 if sol.boundary_slope < 0.0 else 1.0, 0.0, ctx),
        conservation_monitor(sol),
    ]


def nonexistence_check(params, n=40):
    """Shooting function keeps its sign over ``n`` amplitudes (``lam <= 0``)."""
    from .ball_shooting import scan

    _, vals = scan(params, n=n)
    changes = int(np.count_nonzero((vals[:-1] > 0.0) != (vals[1:] > 0.0)))
    return CheckReport("nonexistence_sign_changes", float(changes), 0.0, _echo(params))


def profile_checks(profile, params, allowed=PROFILE_TOL, trim=5):
    """Internal consistency of a stored profile.

    Compares the stored flux with ``du_dr``, the stored ``du_dr`` with the
    spline derivative of ``u`` and the spline derivative of the flux with
    the right side of the equation.  Derivatives are taken in ``log r`` and
    each residual is divided by the natural size of its terms.
    """
    N, p, mu, s, lam = params.N, params.p, params.mu, params.s, params.lam
    ps = params.p_star
    r, u, du, q = (np.asarray(a) for a in (profile.r, profile.u, profile.du_dr, profile.flux))
    ctx = _echo(params)
    if r.size < 2 * trim + 4:
        raise DomainError("profile too short to check")
    if not np.all(np.isfinite(u)) or np.any(u[:-1] <= 0.0):
        return [CheckReport("profile_positive", 1.0, 0.0, ctx)]
    x = np.log(r)
    q_ref = r ** (N - 1) * spow(du, p - 1.0)
    flux_err = np.max(np.abs(q - q_ref) / (np.abs(q) + np.abs(q_ref) + 1e-300))
    # derivatives in log r, compared against their natural local scales
    x_du = CubicSpline(x, u)(x, 1)
    x_dq = CubicSpline(x, q)(x, 1)
    coef = np.abs(mu) + np.abs(u) ** (ps - p) * r ** (p - s) + abs(lam) * r ** p
    source = -(mu + np.abs(u) ** (ps - p) * r ** (p - s) + lam * r ** p) * spow(u, p - 1.0)
    source = source * r ** (N - p)
    inner = np.zeros(r.size, dtype=bool)
    inner[trim:r.size - trim] = True
    if p > 2.0:
        # u'' is unbounded where u' changes sign, so splines are not accurate there
        for i in np.flatnonzero(np.sign(du[:-1]) != np.sign(du[1:])):
            inner[max(i - 4 * trim, 0):i + 4 * trim + 1] = False
    res_u = np.abs(x_du - r * du) / (np.abs(u) + np.abs(r * du))
    res_q = np.abs(x_dq - source) / (np.abs(q) + coef * np.abs(u) ** (p - 1.0) * r ** (N - p))
    return [
        CheckReport("profile_flux_consistency", float(flux_err), 1e-12, ctx),
        CheckReport("profile_derivative_consistency", float(np.max(res_u[inner])), allowed, ctx),
        CheckReport("profile_ode_residual", float(np.max(res_q[inner])), allowed, ctx),
    ]


def _timed(name, fn, out, budget):
    start = time.perf_counter()
    reports = fn()
    elapsed = time.perf_counter() - start
    out += reports
    if budget is not None:
        out.append(CheckReport(f"{name}_runtime_s", elapsed, budget))


def default_suite(timing=False):
    """Fixed-tolerance suite over the standard parameter points."""
    from . import ball_shooting, ground_state

    out = []
    budget = (lambda b: b) if timing else (lambda b: None)

    def exponent_checks():
        e = derive(Params(4, 2, 0.75))
        reps = [CheckReport("exponents_p2", max(abs(e.gamma1 - 0.5), abs(e.gamma2 - 1.5)), 1e-12)]
        for p in (1.5, 2.0, 3.0):
            e = derive(Params(5, p, 0.0))
            err = max(abs(e.gamma1), abs(e.gamma2 - (5 - p) / (p - 1.0)))
            reps.append(CheckReport("exponents_mu0", err, 1e-13, dict(p=p)))
        return reps

    def coincidence():
        r = np.geomspace(1e-3, 1e3, 601)
        worst = 0.0
        for s in (0.0, 0.5, 1.0):
            P = Params(4, 2, 0.0, s)
            a, _ = closed_forms.eval(closed_forms.ClosedFormFamily(
                closed_forms.Kind.P2, closed_forms.p2_constant(P), 1.0), P, r)
            b, _ = closed_forms.eval(closed_forms.ClosedFormFamily(
                closed_forms.Kind.MU0, closed_forms.mu0_constant(P)), P, r)
            worst = max(worst, float(np.max(np.abs(a / b - 1.0))))
        return [CheckReport("closed_form_coincidence", worst, 1e-12)]

    def ground_states():
        reps = []
        for P in (Params(4, 2, 0.5, 0.5), Params(5, 3, 0.0, 1.0), Params(5, 3, -2.0, 0.0)):
            sol = ground_state.solve(P)
            reps += ground_state_checks(sol)
            reps += slope_checks(sol.profile, P, sol.exps, exclude=0.0)
        return reps

    def identity():
        rng = np.random.default_rng(7)
        reps = []
        for _ in range(10):
            P = _random_params(rng)
            exps = derive(P)
            h = np.linspace(exps.gamma1, exps.gamma2, 202)[1:-1]
            y = ground_state.y_of_h(h, P, exps)
            ps = exps.p_star_s
            alg = np.array([ps * -gamma_mu(x, P) / P.p for x in h])
            reps.append(CheckReport("identity_y_of_h", float(np.max(np.abs(y ** (ps - P.p) - alg))),
                                    IDENTITY_TOL, _echo(P)))
        return reps

    def ball():
        lam1 = ball_shooting.first_eigenvalue(5, 2, 0.5)
        P = Params(5, 2, 0.5, 0.0, 0.3 * lam1)
        return ball_checks(ball_shooting.solve_ball(P))

    def nonexistence():
        return [nonexistence_check(Params(5, 2, 0.5, 0.0, lam)) for lam in (0.0, -1.0)]

    def eigen():
        lam = ball_shooting.first_eigenvalue(3, 2, 0.0)
        return [CheckReport("eigenvalue_pi_squared", abs(lam / math.pi ** 2 - 1.0), 1e-4)]

    def w_limit():
        P = Params(4, 2, 0.5, 0.0)
        sol = ground_state.solve(P)
        trace = ball_shooting.w_trace(sol.profile, sol.exps, sol.h_table.above_gamma1)
        tail = np.abs(trace.deviation[trace.r <= 1e-4])
        return [CheckReport("w_limit", float(tail[0]), 1e-4),
                CheckReport("w_monotone", 0.0 if np.all(np.diff(tail) > 0.0) else 1.0, 0.0)]

    _timed("exponents", exponent_checks, out, budget(0.05))
    _timed("coincidence", coincidence, out, budget(0.1))
    _timed("ground_states", ground_states, out, budget(15.0))
    _timed("identity", identity, out, budget(10.0))
    _timed("ball", ball, out, budget(10.0))
    _timed("nonexistence", nonexistence, out, budget(20.0))
    _timed("eigen", eigen, out, budget(5.0))
    _timed("w_limit", w_limit, out, None)
    return out


def _random_params(rng):
    """A valid parameter point with moderate exponents."""
    N = int(rng.integers(3, 8))
    p = float(rng.uniform(1.3, min(N - 0.5, 4.0)))
    mu_bar = ((N - p) / p) ** p
    mu = float(rng.uniform(-1.0, 0.9 * mu_bar))
    s = float(rng.uniform(0.0, 0.9 * p))
    return Params(N, p, mu, s)


def params_suite(params):
    """Checks in scope for one parameter point (ground state, ball or nonexistence)."""
    from . import ball_shooting, ground_state

    if params.lam == 0.0:
        reps = ground_state_checks(ground_state.solve(params))
        reps.append(nonexistence_check(params))
        return reps, None
    if params.lam < 0.0:
        return [nonexistence_check(params)], "no solution (consistent with nonexistence theorem)"
    try:
        return ball_checks(ball_shooting.solve_ball(params)), None
    except NoSolutionError as exc:
        return [], f"no solution found on the bracket ({exc})"
