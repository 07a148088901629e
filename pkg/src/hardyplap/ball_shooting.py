"""Dirichlet problem on the unit ball by shooting from the singular origin.

The radial equation is integrated in ``s = log r`` for the rescaled pair

    U = u r^{gamma1},   Q = q r^{-(N-p-(p-1) gamma1)},   q = r^{N-1} spow(u', p-1),

which satisfies

    U' = gamma1 U + spow(Q, 1/(p-1))
    Q' = -(N-p-(p-1)gamma1) Q - (mu + |U|^{p*-p} r^c + lam r^p) spow(U, p-1)

with ``c = (p-s)(1 - gamma1/delta) > 0``.  The leading-order start
``u = C r^-gamma1`` is the equilibrium ``(C, -spow(gamma1 C, p-1))`` of the
``r -> 0`` limit of this system.  Its error decays only like ``r^c``, which
is slow when ``s`` is close to ``p``, so shots start from the equilibrium
plus its first-order correction at a radius where that correction is
small (:func:`start_state`).  Both components stay of order ``C`` on the
whole interval, so a pure relative tolerance controls the error.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp

from ._numerics import bisect, spow
from .exceptions import (ConvergenceError, DomainError, MultipleRootsError,
                         NoSolutionError, ParameterError)
from .exponents import Params, derive
from .profile import RadialProfile

log = logging.getLogger(__name__)

DEFAULT_R0 = 1e-6
DEFAULT_ODE_TOL = 1e-11
DEFAULT_ROOT_TOL = 1e-13
SCAN_POINTS = 60
BRACKET_DECADES = 3.0
PROFILE_POINTS = 2001
#: ``eps`` of the relative Pohozaev defect, so that 0/0 reads as 0
POHOZAEV_EPS = 1e-300
METHOD = "DOP853"
#: relative size of the first-order start correction
START_ETA = 1e-6
MIN_R0 = 1e-250


@dataclass(frozen=True)
class WTrace:
    """``w = spow(-r u'/u, p-1)`` along a profile.

    ``deviation`` is ``w - spow(gamma1, p-1)``; ``limit`` is the value at the
    smallest radius and ``rate`` the fitted exponent of ``|deviation|``
    over the two smallest decades (nan when the deviation is at roundoff).
    """

    r: np.ndarray
    w: np.ndarray
    deviation: np.ndarray
    limit: float
    rate: float


@dataclass(frozen=True)
class Trajectory:
    profile: RadialProfile
    r_zero: Optional[float]
    u_end: float
    evaluate: Callable = field(repr=False)


@dataclass(frozen=True, eq=False)
class BallSolution:
    params: Params
    exps: object
    amplitude_C: float
    profile: RadialProfile
    boundary_value: float
    boundary_slope: float
    pohozaev_defect: float
    w_trace: WTrace
    r0: float
    start_sensitivity: float
    scan_monotone: bool
    evaluate: Callable = field(repr=False)


def singular_start(C, r0, params, exps):
    """Leading-order ``(u, u')`` at ``r0`` for amplitude ``C``."""
    if not C > 0.0:
        raise DomainError("amplitude C must be positive")
    if not 0.0 < r0 < 1.0:
        raise DomainError("start radius must satisfy 0 < r0 < 1")
    g1 = exps.gamma1
    u0 = C * r0 ** -g1
    return u0, -g1 * u0 / r0


def _forcing_terms(C, params, exps, linear):
    """``(kappa, phi)`` with forcing ``-phi e^{kappa s}`` of ``Q'`` at ``U = C``."""
    terms = []
    if not linear:
        c = (params.p - params.s) * (1.0 - exps.gamma1 / exps.delta)
        terms.append((c, C ** (exps.p_star_s - 1.0)))
    if params.lam != 0.0:
        terms.append((params.p, params.lam * C ** (params.p - 1.0)))
    return terms


def start_state(C, r0, params, exps, linear=False, eta=START_ETA):
    """Start radius and scaled state ``(r_start, U, Q)`` for amplitude ``C``.

    ``r_start <= r0`` is small enough that the first-order correction to
    the equilibrium ``(C, -spow(gamma1 C, p-1))`` is at most ``eta`` relative
    to ``C``; the correction is included, so the start is accurate to
    second order in the neglected terms.
    """
    if not C > 0.0:
        raise DomainError("amplitude C must be positive")
    if not r0 > 0.0:
        raise DomainError("start radius must be positive")
    p, a = params.p, exps.gamma1
    b = (params.N - p) - (p - 1.0) * a
    q = 1.0 / (p - 1.0)
    Q_eq = -spow(a * C, p - 1.0)
    terms = _forcing_terms(C, params, exps, linear)
    if a == 0.0:
        # regular start: Q is driven directly and U follows through spow(Q, q)
        coef = [(-phi / (kappa + b), kappa) for kappa, phi in terms]
        u_terms = [(abs(y) ** q / (kappa * q), kappa * q) for y, kappa in coef]
    else:
        D = abs(a * C) ** (2.0 - p) / (p - 1.0)
        lam2 = a - b
        coef = []
        u_terms = []
        for kappa, phi in terms:
            den = kappa * (kappa - lam2)
            coef.append((-phi * (kappa - a) / den, kappa))
            u_terms.append((abs(phi * D / den), kappa))
    s0 = math.log(r0)
    moved = False
    for size, expo in u_terms:
        limit = (math.log(eta * C) - math.log(size)) / expo if size > 0.0 else math.inf
        if limit < s0:
            s0, moved = max(limit, math.log(MIN_R0)), True
    Q = Q_eq + sum(y * math.exp(kappa * s0) for y, kappa in coef)
    if a == 0.0:
        U = C + _regular_drift(coef, q, s0)
    else:
        U = C + sum(-phi * D / (kappa * (kappa - lam2)) * math.exp(kappa * s0)
                    for kappa, phi in terms)
    return (math.exp(s0) if moved else r0), U, Q


def _regular_drift(coef, q, s0):
    """``int_{-inf}^{s0} spow(sum y e^{kappa s}, q) ds`` for the regular start."""
    if not coef:
        return 0.0
    if len(coef) == 1:
        y, kappa = coef[0]
        return spow(y, q) * math.exp(kappa * q * s0) / (kappa * q)
    slowest = min(kappa for _, kappa in coef) * q
    value, _ = quad(lambda s: spow(sum(y * math.exp(k * s) for y, k in coef), q),
                    s0 - 60.0 / slowest, s0, epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def _field(params, exps, linear=False):
    p, N, mu, lam = params.p, params.N, params.mu, params.lam
    a = exps.gamma1
    b = (N - p) - (p - 1.0) * a
    c = (params.p - params.s) * (1.0 - a / exps.delta)
    k = exps.p_star_s - p
    inv = 1.0 / (p - 1.0)

    def rhs(s, state):
        U, Q = state
        coef = mu + lam * math.exp(p * s)
        if not linear:
            coef += abs(U) ** k * math.exp(c * s)
        return [a * U + spow(Q, inv), -b * Q - coef * spow(U, p - 1.0)]
    return rhs


def _unscale(s, U, Q, params, exps):
    p, N, a = params.p, params.N, exps.gamma1
    r = np.exp(s)
    u = U * r ** -a
    du = spow(Q, 1.0 / (p - 1.0)) * r ** (-a - 1.0)
    flux = Q * r ** ((N - p) - (p - 1.0) * a)
    return r, u, du, flux


def _run(C, params, exps, r0, r_end, tol, linear=False, method=METHOD):
    if not C > 0.0:
        raise DomainError("amplitude C must be positive")
    if not 0.0 < r0 < r_end:
        raise DomainError("requires 0 < r0 < r_end")
    r0, U0, Q0 = start_state(C, r0, params, exps, linear)

    def hit_zero(s, state):
        return state[0]
    hit_zero.terminal = True
    hit_zero.direction = -1.0

    # rejected trial steps may overflow |U|^{p*-p}; the step control discards them
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(_field(params, exps, linear), (math.log(r0), math.log(r_end)), [U0, Q0],
                        method=method, rtol=tol, atol=tol * 1e-6 * C, dense_output=True,
                        events=hit_zero)
    if sol.status == -1:
        raise ConvergenceError(f"radial integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise ConvergenceError("radial integration overflowed")
    r_zero = None
    if sol.status == 1 and sol.t_events[0].size:
        r_zero = math.exp(sol.t_events[0][0])
    return sol, r_zero, r0


def integrate_radial(C, params, exps=None, r0=DEFAULT_R0, r_end=1.0, tol=DEFAULT_ODE_TOL,
                     n_points=PROFILE_POINTS, linear=False, method=METHOD):
    """Integrate outward from the singular start to ``r_end`` or the first zero.

    The start radius is :func:`start_state`'s ``r_start <= r0``.  Returns a
    :class:`Trajectory` whose profile is sampled log-uniformly on
    ``[r_start, min(r_end, r_zero)]``.  ``linear=True`` drops the critical term
    (the eigenvalue problem); ``method`` is any explicit
    :func:`scipy.integrate.solve_ivp` method name.
    """
    if exps is None:
        exps = derive(params)
    sol, r_zero, r0 = _run(C, params, exps, r0, r_end, tol, linear, method)

    def evaluate(r):
        s = np.log(np.asarray(r, dtype=float))
        U, Q = sol.sol(s)
        return _unscale(s, U, Q, params, exps)[1:3]

    s_end = sol.t[-1]
    s = np.linspace(sol.t[0], s_end, int(n_points))
    U, Q = sol.sol(s)
    U[0], Q[0] = sol.y[0][0], sol.y[1][0]
    U[-1], Q[-1] = sol.y[0][-1], sol.y[1][-1]
    r, u, du, flux = _unscale(s, U, Q, params, exps)
    r[0], r[-1] = r0, (r_zero if r_zero is not None else r_end)
    u_end = float(sol.y[0][-1] * math.exp(s_end) ** -exps.gamma1)
    return Trajectory(RadialProfile(r, u, du, flux), r_zero, u_end, evaluate)


def _shoot_value(C, params, exps, r0, tol, linear=False):
    sol, r_zero, _ = _run(C, params, exps, r0, 1.0, tol, linear)
    if r_zero is not None:
        return -(1.0 - r_zero)
    return float(sol.y[0][-1])


def shoot(C, params, exps=None, tol=DEFAULT_ODE_TOL, r0=DEFAULT_R0):
    """``u(1)`` if ``u`` stays positive on ``(r0, 1)``, else ``-(1 - first zero)``.

    ``u(1)`` is reported through ``U(1) = u(1)``.
    """
    if exps is None:
        exps = derive(params)
    return _shoot_value(C, params, exps, r0, tol)


def default_bracket(params, exps=None):
    """``C1 * [1e-3, 1e3]`` with ``C1`` from the ground state of ``lam = 0``."""
    from .ground_state import asymptotic_constants

    base = params.replace(lam=0.0)
    c1, _ = asymptotic_constants(base, derive(base) if exps is None else exps)
    scale = 10.0 ** BRACKET_DECADES
    return c1 / scale, c1 * scale


def scan(params, exps=None, C_bracket=None, n=SCAN_POINTS, tol=DEFAULT_ODE_TOL, r0=DEFAULT_R0):
    """``(C, shoot(C))`` at ``n`` log-spaced amplitudes of the bracket."""
    if exps is None:
        exps = derive(params)
    lo, hi = default_bracket(params, exps) if C_bracket is None else C_bracket
    if not 0.0 < lo < hi:
        raise ParameterError("requires 0 < C_lo < C_hi")
    cs = np.geomspace(lo, hi, int(n))
    return cs, np.array([_shoot_value(c, params, exps, r0, tol) for c in cs])


def _sign_changes(values):
    pos = values > 0.0
    return np.flatnonzero(pos[:-1] != pos[1:])


def solve_ball(params, exps=None, C_bracket=None, tol=DEFAULT_ODE_TOL, root_tol=DEFAULT_ROOT_TOL,
               r0=DEFAULT_R0, n_scan=SCAN_POINTS):
    """Positive solution of the ball problem.

    Raises :class:`NoSolutionError` when the shooting function keeps its
    sign on the bracket and :class:`MultipleRootsError` when it has more
    than one root there.
    """
    if exps is None:
        exps = derive(params)
    cs, vals = scan(params, exps, C_bracket, n_scan, tol, r0)
    idx = _sign_changes(vals)
    if idx.size == 0:
        raise NoSolutionError("no sign change of the shooting function on the C bracket")

    def f(c):
        return _shoot_value(c, params, exps, r0, tol)

    roots = [bisect(f, cs[i], cs[i + 1], rtol=root_tol) for i in idx]
    if len(roots) > 1:
        raise MultipleRootsError(
            f"{len(roots)} shooting roots on the C bracket: {', '.join(map(repr, roots))}", roots)
    # take the side of the root where u is still positive on the whole interval
    C = roots[0]
    step = C * root_tol
    for _ in range(64):
        if f(C) >= 0.0:
            break
        C += step if vals[idx[0]] < vals[idx[0] + 1] else -step
    monotone = bool(np.all(np.diff(vals) > 0.0) or np.all(np.diff(vals) < 0.0))
    log.info("shooting map on the bracket is %smonotone in C", "" if monotone else "not ")

    r0 = start_state(C, r0, params, exps)[0]
    traj = integrate_radial(C, params, exps, r0, 1.0, tol)
    half = _shoot_value(C, params, exps, 0.5 * r0, tol)
    slope_scale = abs(traj.profile.du_dr[-1])
    sensitivity = abs(half - traj.u_end) / slope_scale if slope_scale else math.inf
    sol = BallSolution(
        params=params, exps=exps, amplitude_C=C, profile=traj.profile,
        boundary_value=traj.u_end, boundary_slope=float(traj.profile.du_dr[-1]),
        pohozaev_defect=math.nan, w_trace=w_trace(traj.profile, exps), r0=r0,
        start_sensitivity=sensitivity, scan_monotone=monotone, evaluate=traj.evaluate)
    return dataclasses.replace(sol, pohozaev_defect=pohozaev_defect(sol, 1.0))


def pohozaev_sides(sol, r, n_points=PROFILE_POINTS):
    """Both sides of the integral identity at radius ``r``.

    Left: ``lam * int_0^r u^p t^{N-1} dt``, by Simpson's rule in ``log t``
    on ``(r0, r)`` plus the power-law tail ``C^p r0^{N-p gamma1}/(N-p gamma1)``.
    Right: the boundary terms at ``r``.
    """
    params, exps = sol.params, sol.exps
    N, p, mu, lam = params.N, params.p, params.mu, params.lam
    r0 = sol.r0
    if not r0 < r <= 1.0:
        raise DomainError("Pohozaev radius must lie in (r0, 1]")
    s = np.linspace(math.log(r0), math.log(r), int(n_points) | 1)
    u, _ = sol.evaluate(np.exp(s))
    integrand = np.abs(u) ** p * np.exp(N * s)
    g1 = exps.gamma1
    tail = sol.amplitude_C ** p * r0 ** (N - p * g1) / (N - p * g1)
    lhs = lam * (simpson(integrand, x=s) + tail)
    u, du = sol.evaluate(r)
    u, du = float(u), float(du)
    ps = exps.p_star_s
    rhs = ((p - 1.0) / p * abs(du) ** p * r ** N
           + exps.delta * u * spow(du, p - 1.0) * r ** (N - 1)
           + (mu * r ** (N - p) + lam * r ** N) * abs(u) ** p / p
           + abs(u) ** ps * r ** (N - params.s) / ps)
    return lhs, rhs


def pohozaev_defect(sol, r):
    """``|L - R| / (|L| + |R| + eps)`` of the integral identity at ``r``."""
    lhs, rhs = pohozaev_sides(sol, r)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + POHOZAEV_EPS)


def w_trace(profile, exps, above_gamma1=None):
    """``w(r) = -r^{p-1} spow(u', p-1) / u^{p-1}`` and its approach to ``spow(gamma1, p-1)``.

    When the offsets ``H - gamma1`` are known separately (ground states),
    pass them as ``above_gamma1`` so the deviation is free of cancellation.
    """
    p, g1 = exps.p, exps.gamma1
    r = np.asarray(profile.r)
    u = np.asarray(profile.u)
    h = -r * np.asarray(profile.du_dr) / u
    w = spow(h, p - 1.0)
    w1 = spow(g1, p - 1.0)
    if above_gamma1 is None:
        deviation = w - w1
    elif g1 == 0.0:
        deviation = np.asarray(above_gamma1) ** (p - 1.0)
    else:
        ratio = np.log1p(np.asarray(above_gamma1) / g1)
        deviation = w1 * np.expm1((p - 1.0) * ratio)
    window = (r <= r[0] * 100.0) & (np.abs(deviation) > 1e-13 * max(1.0, abs(w1)))
    rate = math.nan
    if window.sum() >= 3:
        rate = float(np.polyfit(np.log(r[window]), np.log(np.abs(deviation[window])), 1)[0])
    return WTrace(r=r, w=w, deviation=deviation, limit=float(w[0]), rate=rate)


def first_eigenvalue(N, p, mu, tol=1e-10, r0=DEFAULT_R0, ode_tol=DEFAULT_ODE_TOL):
    """First Dirichlet eigenvalue on the unit ball of ``-Delta_p - mu |x|^-p``.

    Bisection on ``lam`` of the shooting function of the linear radial
    equation (its first zero moves inward as ``lam`` grows).
    """
    base = Params(N, p, mu, 0.0, 0.0)
    exps = derive(base)

    def f(lam):
        return _shoot_value(1.0, base.replace(lam=lam), exps, r0, ode_tol, linear=True)

    lo, hi = 0.0, 1.0
    if f(lo) <= 0.0:
        raise ConvergenceError("eigenvalue bracket: the linear solution vanishes at lam = 0")
    while f(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ConvergenceError("eigenvalue bracket could not be found")
    return bisect(f, lo, hi, rtol=tol)
