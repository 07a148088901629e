"""Problem parameters, the indicial function and derived exponents.

The radial equation

    -(r^{N-1} |u'|^{p-2} u')' = (mu r^{-p} + u^{p*(s)-p} r^{-s} + lam) u^{p-1} r^{N-1}

is governed near ``r = 0`` and ``r = infinity`` by the two roots of

    Gamma_mu(g) = (p-1)|g|^p - (N-p)|g|^{p-2} g + mu.

Everything here is a pure function of a frozen :class:`Params`.
"""

import math
from dataclasses import dataclass

from ._numerics import bisect, spow
from .exceptions import ConvergenceError, DomainError, ParameterError

#: Relative bracket width at which root bisection stops.
ROOT_RTOL = 1e-14
#: Iteration cap of the root bisection.
ROOT_MAX_ITER = 200
#: Bracket growth stops with an error once the bracket exceeds this.
BRACKET_CAP = 2.0 ** 60


@dataclass(frozen=True)
class Params:
    """Problem tuple ``(N, p, mu, s, lam)``.

    ``lam`` is the lower-order coefficient (``lambda`` in the equation).
    Construction validates the admissibility inequalities and raises
    :class:`ParameterError` with the violated inequality in the message.
    """

    N: int
    p: float
    mu: float = 0.0
    s: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        N, p, mu, s, lam = self.N, self.p, self.mu, self.s, self.lam
        if int(N) != N or N < 2:
            raise ParameterError("requires integer N >= 2")
        object.__setattr__(self, "N", int(N))
        for name in ("p", "mu", "s", "lam"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"requires finite {name}")
            object.__setattr__(self, name, value)
        if not 1.0 < self.p < self.N:
            raise ParameterError("requires 1 < p < N")
        if not self.mu < self.mu_bar:
            raise ParameterError("requires mu < ((N-p)/p)^p")
        if not 0.0 <= self.s < self.p:
            raise ParameterError("requires 0 <= s < p")

    @property
    def delta(self):
        return (self.N - self.p) / self.p

    @property
    def mu_bar(self):
        return ((self.N - self.p) / self.p) ** self.p

    @property
    def p_star(self):
        """Critical Hardy-Sobolev exponent ``(N-s)p/(N-p)``."""
        return (self.N - self.s) * self.p / (self.N - self.p)

    def replace(self, **changes):
        fields = dict(N=self.N, p=self.p, mu=self.mu, s=self.s, lam=self.lam)
        fields.update(changes)
        return Params(**fields)


@dataclass(frozen=True)
class Exponents:
    """Constants derived from :class:`Params` by :func:`derive`."""

    gamma1: float
    gamma2: float
    delta: float
    mu_bar: float
    p_star_s: float
    M: float
    sphere_measure: float
    p: float


def gamma_mu(gamma, params):
    """Indicial function ``(p-1)|g|^p - (N-p)|g|^{p-2} g + mu``."""
    N, p = params.N, params.p
    return (p - 1.0) * abs(gamma) ** p - (N - p) * spow(gamma, p - 1.0) + params.mu


def gamma_mu_derivative(gamma, params):
    """Derivative ``(p-1)|g|^{p-2}(p g - (N-p))`` of :func:`gamma_mu`.

    Unbounded at ``g = 0`` when ``p < 2``, which raises :class:`DomainError`.
    """
    N, p = params.N, params.p
    if gamma == 0.0 and p < 2.0:
        raise DomainError("gamma_mu_derivative is unbounded at 0 for 1 < p < 2")
    return (p - 1.0) * abs(gamma) ** (p - 2.0) * (p * gamma - (N - p))


def _grow_bracket(f, start, direction):
    """Double ``G`` until ``f(start + direction*G)`` is positive."""
    g = 1.0
    while f(start + direction * g) <= 0.0:
        g *= 2.0
        if g > BRACKET_CAP:
            raise ConvergenceError("root bracket exceeded 2^60 without a sign change")
    return start + direction * g


def _shrink_to_zero(f, end):
    """Bracket ``[a, b]`` of a root between 0 and ``end`` not containing 0.

    ``f(0)`` and ``f(end)`` must differ in sign.  Halving towards 0 keeps the
    bracket a fixed ratio wide, so bisection then converges in relative
    terms even for roots many orders of magnitude smaller than ``end``.
    """
    far = end
    near = 0.5 * end
    while near != 0.0 and (f(near) > 0.0) == (f(far) > 0.0):
        far, near = near, 0.5 * near
    return (near, far) if end > 0 else (far, near)


def derive(params, rtol=ROOT_RTOL, max_iter=ROOT_MAX_ITER):
    """Roots of ``Gamma_mu`` and the derived constants of ``params``."""
    if not isinstance(params, Params):
        raise ParameterError("derive expects a Params instance")
    N, p, mu, s = params.N, params.p, params.mu, params.s
    delta = params.delta
    mu_bar = params.mu_bar
    p_star = params.p_star
    top = (N - p) / (p - 1.0)

    def gam(g):
        return gamma_mu(g, params)

    if mu == 0.0:
        g1, g2 = 0.0, top
    elif p == 2.0:
        root = math.sqrt(mu_bar - mu)
        # sqrt(mu_bar) -/+ sqrt(mu_bar - mu), g1 written without cancellation
        g1 = mu / (math.sqrt(mu_bar) + root)
        g2 = math.sqrt(mu_bar) + root
    elif mu > 0.0:
        g1 = bisect(gam, *_shrink_to_zero(gam, delta), rtol, max_iter)
        # for tiny |mu| the root sits within rounding of top
        g2 = top if gam(top) <= 0.0 else bisect(gam, delta, top, rtol, max_iter)
    else:
        g1 = bisect(gam, *_shrink_to_zero(gam, _grow_bracket(gam, 0.0, -1.0)), rtol, max_iter)
        g2 = top if gam(top) >= 0.0 else bisect(gam, top, _grow_bracket(gam, top, 1.0),
                                                 rtol, max_iter)

    M = (p_star * (mu_bar - mu) / p) ** (1.0 / (p_star - p))
    omega = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    return Exponents(gamma1=g1, gamma2=g2, delta=delta, mu_bar=mu_bar,
                     p_star_s=p_star, M=M, sphere_measure=omega, p=p)


def t_minus_level(params):
    """Level ``y`` at which the transformed flux ``z`` changes sign (``mu < 0``)."""
    if params.mu >= 0.0:
        raise DomainError("t_minus_level requires mu < 0 (z never vanishes otherwise)")
    p, p_star = params.p, params.p_star
    return (-p_star * params.mu / p) ** (1.0 / (p_star - p))
