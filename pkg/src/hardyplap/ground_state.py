"""Ground state on the whole space by quadrature of the separable H-flow.

Along the ground state the observable ``H = -r u'/u`` solves the autonomous
equation ``H' = f(H)`` with ``H(0) = delta`` and runs monotonically from
``gamma1`` (as ``t -> -inf``) to ``gamma2`` (as ``t -> +inf``).  With
``v = spow(H, p-1)`` the flow becomes

    dv/dt = -kappa * G(v),   G(v) = (p-1)|v|^{p'} - (N-p) v + mu,

``kappa = (p* - p)/p``.  ``G`` is continuously differentiable with simple
zeros ``v1 = spow(gamma1, p-1)`` and ``v2 = spow(gamma2, p-1)``, so the
non-Lipschitz point ``H = 0`` (p > 2, mu < 0) disappears.  Time and
``log y`` follow by quadrature in the exponential charts

    left   v = v1 + (vd - v1) e^theta       theta <= 0
    right  v = v2 - (v2 - vd) e^-theta      theta >= 0

(``vd = delta^{p-1}``) in which both integrands tend to constants at the
far ends and the endpoint offsets ``H - gamma1``, ``gamma2 - H`` are
evaluated without cancellation.
"""

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import integrate_intervals, integrate_panels, spow
from .ef_system import first_integral
from .exceptions import DomainError, ParameterError
from .exponents import Params, derive, t_minus_level
from .profile import RadialProfile

DEFAULT_TOL = 1e-12
#: panel width of the node table: one halving of the distance to a root
LEVEL_WIDTH = math.log(2.0)
DEFAULT_LEVELS = 60
MAX_LEVELS = 1000
#: refinement depth of the nodes around the zero of v (mu < 0)
GRADING_DEPTH = 40
#: e^-TAIL_DECAY is the neglected tail of the asymptotic-constant integrals
TAIL_DECAY = 45.0
NEWTON_MAX_ITER = 60


@dataclass(frozen=True, eq=False)
class HTable:
    """Samples of ``H(t)`` with the endpoint offsets kept separately.

    ``above_gamma1 = H - gamma1`` and ``below_gamma2 = gamma2 - H`` stay
    accurate (and positive) long after ``H`` itself has rounded to a root.
    """

    t: np.ndarray
    h: np.ndarray
    above_gamma1: np.ndarray
    below_gamma2: np.ndarray


@dataclass(frozen=True)
class GroundStateReport:
    max_first_integral: float
    first_integral_allowed: float
    max_y_over_M: float
    max_ode_residual: float
    identity_residual: float
    monotone: bool
    z_sign_ok: bool
    slope_fit_0: Optional[float] = None
    slope_fit_inf: Optional[float] = None
    t_minus_level_error: Optional[float] = None


@dataclass(frozen=True, eq=False)
class GroundStateSolution:
    params: Params
    exps: object
    h_table: HTable
    profile: RadialProfile
    C1: float
    C2: float
    t_minus: Optional[float]
    report: GroundStateReport
    t: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def log_invariant(self):
        """``(gamma2-delta) log C1 + (delta-gamma1) log C2``, unchanged by dilation."""
        return log_invariant(self.C1, self.C2, self.exps)


def log_invariant(C1, C2, exps):
    g1, g2, d = exps.gamma1, exps.gamma2, exps.delta
    return (g2 - d) * math.log(C1) + (d - g1) * math.log(C2)


class HFlow:
    """Chart evaluations and the cumulative node table of one parameter point."""

    def __init__(self, params, exps, tol):
        p, N = params.p, params.N
        self.params, self.exps, self.tol = params, exps, tol
        self.p, self.N, self.mu = p, N, params.mu
        self.pp = p / (p - 1.0)
        self.kappa = (exps.p_star_s - p) / p
        self.g1, self.g2, self.delta = exps.gamma1, exps.gamma2, exps.delta
        self.v1 = spow(self.g1, p - 1.0)
        self.v2 = spow(self.g2, p - 1.0)
        self.vd = self.delta ** (p - 1.0)
        self.aL = self.vd - self.v1
        self.aR = self.v2 - self.vd
        self.logM = math.log(exps.M)
        # zero of v on the left chart, where |v|^{p'} is not smooth
        self.theta0 = math.log(-self.v1 / self.aL) if self.v1 < 0.0 else None
        self.left_rate = 1.0 / (self.kappa * p * (self.delta - self.g1))
        self.right_rate = 1.0 / (self.kappa * p * (self.g2 - self.delta))
        self._levels = (0, 0)
        self._build(DEFAULT_LEVELS, DEFAULT_LEVELS)

    # -- chart ---------------------------------------------------------
    def chart(self, theta):
        """``(v, sigma, offset, rate)`` at ``theta``.

        ``sigma = H``, ``offset`` is ``H - gamma1`` on the left chart and
        ``gamma2 - H`` on the right one, ``rate = dt/dtheta``.
        """
        th = np.asarray(theta, dtype=float)
        p, pp, N, mu = self.p, self.pp, self.N, self.mu
        v1, v2 = self.v1, self.v2
        left = th < 0.0
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            eta = np.where(left, self.aL * np.exp(th), self.aR * np.exp(-th))
            v = np.where(left, v1 + eta, v2 - eta)
            g_direct = (p - 1.0) * np.abs(v) ** pp - (N - p) * v + mu
            sigma_direct = spow(v, 1.0 / (p - 1.0))

            if v1 != 0.0:
                lnl = np.log1p(eta / v1)
                g_left = (p - 1.0) * abs(v1) ** pp * np.expm1(pp * lnl) - (N - p) * eta
                off_left = self.g1 * np.expm1(lnl / (p - 1.0))
                near_left = eta <= 0.5 * abs(v1)
                g_left = np.where(near_left, g_left, g_direct)
                off_left = np.where(near_left, off_left, sigma_direct - self.g1)
            else:
                g_left = g_direct
                off_left = eta ** (1.0 / (p - 1.0))

            lnr = np.log1p(-eta / v2)
            near_right = eta <= 0.5 * v2
            g_right = np.where(near_right,
                               (p - 1.0) * v2 ** pp * np.expm1(pp * lnr) + (N - p) * eta,
                               g_direct)
            off_right = np.where(near_right, -self.g2 * np.expm1(lnr / (p - 1.0)),
                                 self.g2 - sigma_direct)

            g = np.where(left, g_left, g_right)
            off = np.where(left, off_left, off_right)
            sigma = np.where(left, self.g1 + off, self.g2 - off)
            rate = -eta / (self.kappa * g)
        return v, sigma, off, rate

    def _time_and_logy(self, theta):
        _, sigma, _, rate = self.chart(theta)
        return np.stack([rate, (self.delta - sigma) * rate])

    def _offset_integrand(self, theta):
        _, _, off, rate = self.chart(theta)
        return (off * rate)[None]

    def theta_of_h(self, h):
        """Chart coordinate of ``h`` in ``(gamma1, gamma2)``."""
        h = np.asarray(h, dtype=float)
        if np.any(~(h > self.g1)) or np.any(~(h < self.g2)):
            raise DomainError("h must lie strictly between gamma1 and gamma2")
        v = spow(h, self.p - 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            left = np.log((v - self.v1) / self.aL)
            right = -np.log((self.v2 - v) / self.aR)
        theta = np.where(h < self.delta, np.minimum(left, 0.0), np.maximum(right, 0.0))
        if not np.all(np.isfinite(theta)):
            raise DomainError("h is too close to gamma1 or gamma2 to be resolved")
        return theta

    # -- node table ----------------------------------------------------
    def _left_nodes(self, theta_lo):
        nodes = [-k * LEVEL_WIDTH for k in range(int(math.ceil(-theta_lo / LEVEL_WIDTH)) + 1)]
        nodes.append(theta_lo)
        if self.theta0 is not None:
            nodes.append(self.theta0)
            for j in range(1, GRADING_DEPTH + 1):
                step = LEVEL_WIDTH * 2.0 ** -j
                nodes += [self.theta0 - step, self.theta0 + step]
        nodes = np.unique(np.asarray(nodes))
        return nodes[(nodes >= theta_lo) & (nodes <= 0.0)]

    def _build(self, left_levels, right_levels):
        left = self._left_nodes(-left_levels * LEVEL_WIDTH)
        right = np.arange(1, right_levels + 1) * LEVEL_WIDTH
        theta = np.concatenate([left, right])
        pieces = integrate_panels(self._time_and_logy, theta, rtol=self.tol,
                                  atol=1e-3 * self.tol)
        cum = np.concatenate([[[0.0], [0.0]], np.cumsum(pieces, axis=1)], axis=1)
        i0 = int(np.searchsorted(theta, 0.0))
        cum -= cum[:, i0:i0 + 1]
        self.theta, self.T, self.L = theta, cum[0], cum[1]
        self._levels = (left_levels, right_levels)

    def _levels_for(self, t_lo, t_hi):
        left, right = self._levels
        if t_lo < self.T[0]:
            left = max(left, int((-t_lo / self.left_rate + 4.0) / LEVEL_WIDTH) + 1)
        if t_hi > self.T[-1]:
            right = max(right, int((t_hi / self.right_rate + 4.0) / LEVEL_WIDTH) + 1)
        return left, right

    def ensure_time(self, t_lo, t_hi):
        for _ in range(8):
            if self.T[0] <= t_lo and t_hi <= self.T[-1]:
                return
            left, right = self._levels_for(t_lo, t_hi)
            if (left, right) == self._levels:
                left, right = 2 * left, 2 * right
            if max(left, right) > MAX_LEVELS:
                raise DomainError("requested range of t is beyond the resolvable range")
            self._build(min(left, MAX_LEVELS), min(right, MAX_LEVELS))
        raise DomainError("could not extend the node table to the requested t range")

    def ensure_theta(self, th_lo, th_hi):
        left, right = self._levels
        need_left = max(left, int(math.ceil(-th_lo / LEVEL_WIDTH)) + 1)
        need_right = max(right, int(math.ceil(th_hi / LEVEL_WIDTH)) + 1)
        if (need_left, need_right) != (left, right):
            if max(need_left, need_right) > MAX_LEVELS:
                raise DomainError("h is too close to gamma1 or gamma2 to be resolved")
            self._build(need_left, need_right)

    # -- evaluation ----------------------------------------------------
    def integrals_at(self, theta):
        """``(t, log(y/M))`` at chart coordinates ``theta`` (1-D array)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        self.ensure_theta(theta.min(initial=0.0), theta.max(initial=0.0))
        k = np.clip(np.searchsorted(self.theta, theta, side="right") - 1, 0, self.theta.size - 2)
        parts = integrate_intervals(self._time_and_logy, self.theta[k], theta,
                                    rtol=self.tol, atol=1e-3 * self.tol)
        return self.T[k] + parts[0], self.L[k] + parts[1]

    def invert(self, t):
        """Chart coordinate and ``log(y/M)`` at times ``t`` (1-D array)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not np.all(np.isfinite(t)):
            raise DomainError("t must be finite")
        self.ensure_time(t.min(initial=0.0), t.max(initial=0.0))
        T, Th = self.T, self.theta
        k = np.clip(np.searchsorted(T, t, side="right") - 1, 0, T.size - 2)
        lo, hi = Th[k], Th[k + 1]
        theta = lo + (t - T[k]) / (T[k + 1] - T[k]) * (hi - lo)
        active = np.arange(t.size)
        for _ in range(NEWTON_MAX_ITER):
            if active.size == 0:
                break
            a = active
            part = integrate_intervals(self._time_and_logy, lo[a], theta[a],
                                       rtol=self.tol, atol=1e-3 * self.tol)[0]
            resid = T[k[a]] + part - t[a]
            rate = self.chart(theta[a])[3]
            new = np.clip(theta[a] - resid / rate, lo[a], hi[a])
            moved = np.abs(new - theta[a])
            theta[a] = new
            active = a[moved > 1e-12 * np.maximum(1.0, np.abs(new))]
        _, logy = self.integrals_at_panel(k, theta)
        return theta, logy

    def integrals_at_panel(self, k, theta):
        parts = integrate_intervals(self._time_and_logy, self.theta[k], theta,
                                    rtol=self.tol, atol=1e-3 * self.tol)
        return self.T[k] + parts[0], self.L[k] + parts[1]

    def log_constants(self):
        """``(log C1, log C2)``."""
        a = 1.0 if self.v1 != 0.0 else 1.0 / (self.p - 1.0)
        left = self._left_nodes(-TAIL_DECAY / a)
        right = np.arange(0, int(TAIL_DECAY / LEVEL_WIDTH) + 2) * LEVEL_WIDTH
        i1 = integrate_panels(self._offset_integrand, left, rtol=self.tol, atol=1e-3 * self.tol).sum()
        i2 = integrate_panels(self._offset_integrand, right, rtol=self.tol, atol=1e-3 * self.tol).sum()
        return self.logM + i1, self.logM + i2

    def t_minus(self):
        if self.theta0 is None:
            return None
        t, _ = self.integrals_at(np.array([self.theta0]))
        return float(t[0])


@functools.lru_cache(maxsize=64)
def _flow(params, exps, tol):
    return HFlow(params, exps, tol)


def flow(params, exps=None, tol=DEFAULT_TOL):
    """Cached :class:`HFlow` of ``params`` (node tables are reused across calls)."""
    if exps is None:
        exps = derive(params)
    if not 0.0 < tol < 1.0:
        raise ParameterError("requires 0 < tol < 1")
    return _flow(params, exps, float(tol))


def _scalar_or_array(values, like):
    return float(values[0]) if np.ndim(like) == 0 else values.reshape(np.shape(like))


def time_of_h(h, params, exps=None, tol=DEFAULT_TOL):
    """Time ``t`` with ``H(t) = h`` (normalization ``H(0) = delta``)."""
    fl = flow(params, exps, tol)
    t, _ = fl.integrals_at(np.ravel(fl.theta_of_h(h)))
    return _scalar_or_array(t, h)


def y_of_h(h, params, exps=None, tol=DEFAULT_TOL):
    """``y`` at the time where ``H = h``; equals ``M`` at ``h = delta``."""
    fl = flow(params, exps, tol)
    _, logy = fl.integrals_at(np.ravel(fl.theta_of_h(h)))
    return _scalar_or_array(np.exp(fl.logM + logy), h)


def h_profile(params, exps=None, t_span=20.0, n_points=401, tol=DEFAULT_TOL):
    """``H`` on a uniform grid of ``[-t_span, t_span]`` (exact inversion of ``t(H)``)."""
    if not t_span > 0.0:
        raise ParameterError("requires t_span > 0")
    if n_points < 2:
        raise ParameterError("requires n_points >= 2")
    fl = flow(params, exps, tol)
    t = np.linspace(-t_span, t_span, int(n_points))
    return _h_table(fl, t, fl.invert(t)[0])


def _h_table(fl, t, theta):
    _, sigma, off, _ = fl.chart(theta)
    left = theta < 0.0
    above = np.where(left, off, fl.g2 - fl.g1 - off)
    below = np.where(left, fl.g2 - fl.g1 - off, off)
    return HTable(t=t, h=sigma, above_gamma1=above, below_gamma2=below)


def asymptotic_constants(params, exps=None, tol=DEFAULT_TOL):
    """``(C1, C2)`` with ``u ~ C1 r^-gamma1`` at 0 and ``u ~ C2 r^-gamma2`` at infinity."""
    l1, l2 = flow(params, exps, tol).log_constants()
    return math.exp(l1), math.exp(l2)


def _states(fl, t):
    """``(theta, y, z, v)`` along the ground state at times ``t``."""
    theta, logy = fl.invert(t)
    v = fl.chart(theta)[0]
    logy = fl.logM + logy
    y = np.exp(logy)
    z = -v * np.exp((fl.p - 1.0) * logy)
    return theta, y, z, v


def _ode_residual(fl, t, step=2.5e-3):
    """Largest relative residual of both first-order equations at times ``t``.

    Derivatives are five-point central differences of the reconstructed
    trajectory.  For p > 2 the right side of the y-equation has an unbounded
    derivative where z = 0, so stencils touching ``t_minus`` are skipped.
    """
    t_minus = fl.t_minus()
    if t_minus is not None:
        t = t[np.abs(t - t_minus) > 2.5 * step]
    if t.size == 0:
        return 0.0
    p, mu, d, ps = fl.p, fl.mu, fl.delta, fl.exps.p_star_s
    offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * step
    _, ys, zs, _ = _states(fl, (t[:, None] + offsets[None, :]).ravel())
    ys, zs = ys.reshape(t.size, 4), zs.reshape(t.size, 4)
    weights = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * step)
    dy, dz = ys @ weights, zs @ weights
    _, y, z, _ = _states(fl, t)
    zr = spow(z, 1.0 / (p - 1.0))
    ry = np.abs(dy - d * y - zr) / (np.abs(d * y) + np.abs(zr))
    src = y ** (ps - 1.0) + mu * y ** (p - 1.0)
    rz = np.abs(dz + d * z + src) / (np.abs(d * z) + y ** (ps - 1.0) + abs(mu) * y ** (p - 1.0))
    return float(max(ry.max(), rz.max()))


def _identity_residual(fl, theta):
    """``max |y - (p*(-G)/p)^{1/(p*-p)}| / M`` over chart points ``theta``."""
    p, ps = fl.p, fl.exps.p_star_s
    _, logy = fl.integrals_at(theta)
    _, sigma, _, rate = fl.chart(theta)
    eta = np.where(theta < 0.0, fl.aL * np.exp(theta), fl.aR * np.exp(-theta))
    minus_g = eta / (fl.kappa * rate)
    y_alg = (ps * minus_g / p) ** (1.0 / (ps - p))
    return float(np.max(np.abs(np.exp(fl.logM + logy) - y_alg)) / fl.exps.M)


def default_grid(r_min=1e-6, r_max=1e6, n_points=2001):
    if not 0.0 < r_min < r_max:
        raise ParameterError("requires 0 < r_min < r_max")
    if n_points < 2:
        raise ParameterError("requires samples >= 2")
    return np.geomspace(r_min, r_max, int(n_points))


def solve(params, exps=None, r=None, tol=DEFAULT_TOL):
    """Ground state normalized by ``y(0) = M``, sampled at radii ``r``.

    ``r`` defaults to :func:`default_grid`.  Raises :class:`ParameterError`
    when ``params.lam`` is nonzero.
    """
    from . import verify

    if params.lam != 0.0:
        raise ParameterError("ground states exist only for lambda = 0")
    if exps is None:
        exps = derive(params)
    r = default_grid() if r is None else np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2 or r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
        raise ParameterError("r must be a strictly increasing grid of positive radii")
    if not 0.0 < tol < 1.0:
        raise ParameterError("requires 0 < tol < 1")
    # a fresh flow: a cached node table grown by earlier calls would move the last digits
    fl = HFlow(params, exps, float(tol))
    p, N, d = params.p, params.N, exps.delta
    t = np.log(r)
    theta, y, z, v = _states(fl, t)
    logy = np.log(y)
    logu = logy - d * t
    u = np.exp(logu)
    h = fl.chart(theta)[1]
    du = -h * u / r
    flux = -v * np.exp((p - 1.0) * logu + (N - p) * t)
    profile = RadialProfile(r, u, du, flux)

    log_c1, log_c2 = fl.log_constants()
    t_minus = fl.t_minus()

    V = first_integral(y, z, params, exps)
    allowed_V = 1e-9 * (1.0 + exps.M ** exps.p_star_s)
    interior = t[(t > t[0] + 0.05) & (t < t[-1] - 0.05)]
    if interior.size > 101:
        interior = interior[np.linspace(0, interior.size - 1, 101).astype(int)]
    ode_res = _ode_residual(fl, interior) if interior.size else 0.0
    ident = _identity_residual(fl, fl.theta)
    left = t < 0.0
    monotone = bool(np.all(np.diff(y[left]) > 0.0) and np.all(np.diff(y[~left]) < 0.0))
    if t_minus is None:
        z_ok = bool(np.all(z < 0.0))
    else:
        z_ok = bool(np.all(z[t < t_minus] > 0.0) and np.all(z[t > t_minus] < 0.0))

    slopes = []
    for end in ("zero", "infinity"):
        try:
            slopes.append(verify.fit_power_slope(profile, end, 2)[0])
        except DomainError:
            slopes.append(None)
    level_err = None
    if t_minus is not None:
        _, ly = fl.integrals_at(np.array([fl.theta0]))
        level_err = abs(math.exp(fl.logM + ly[0]) - t_minus_level(params)) / exps.M

    report = GroundStateReport(
        max_first_integral=float(np.max(np.abs(V))),
        first_integral_allowed=allowed_V,
        max_y_over_M=float(np.max(y) / exps.M),
        max_ode_residual=ode_res,
        identity_residual=ident,
        monotone=monotone,
        z_sign_ok=z_ok,
        slope_fit_0=slopes[0],
        slope_fit_inf=slopes[1],
        t_minus_level_error=level_err,
    )
    return GroundStateSolution(
        params=params, exps=exps, h_table=_h_table(fl, t, theta), profile=profile,
        C1=math.exp(log_c1), C2=math.exp(log_c2), t_minus=t_minus, report=report,
        t=t, y=y, z=z)
