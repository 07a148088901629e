"""Explicit ground states in the two solvable regimes.

``P2``    p = 2, any mu < mu_bar, 0 <= s < 2:
          c (r^a + r^b)^(-k),  a, b = (2-s)(1 -/+ nu)/2,  k = (N-2)/(2-s)
``MU0``   mu = 0, any 1 < p < N, 0 <= s < p:
          c (1 + r^m)^(-k),  m = (p-s)/(p-1),  k = (N-p)/(p-s)
``AUBIN_TALENTI``  p = 2, mu = s = 0, in the scaled form
          (l sqrt(N(N-2)) / (l^2 + r^2))^((N-2)/2)

Values are evaluated in log space so that ``r`` may span many decades.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import DomainError


class Kind(enum.Enum):
    P2 = "P2"
    MU0 = "MU0"
    AUBIN_TALENTI = "AUBIN_TALENTI"


@dataclass(frozen=True)
class ClosedFormFamily:
    kind: Kind
    constant_c: float
    nu: float = float("nan")
    #: the ``l`` of the Aubin-Talenti form; unused by the other kinds
    scale: float = 1.0


def p2_constant(params):
    N, s, mu, mu_bar = params.N, params.s, params.mu, params.mu_bar
    return (4.0 * (N - s) * (mu_bar - mu) / (N - 2.0)) ** ((N - 2.0) / (2.0 * (2.0 - s)))


def mu0_constant(params):
    N, p, s = params.N, params.p, params.s
    return ((N - s) * ((N - p) / (p - 1.0)) ** (p - 1.0)) ** ((N - p) / (p * (p - s)))


def select(params):
    """Family with a known explicit solution for ``params`` (``lam`` ignored), or None."""
    if params.p == 2.0:
        nu = math.sqrt(1.0 - params.mu / params.mu_bar)
        return ClosedFormFamily(Kind.P2, p2_constant(params), nu)
    if params.mu == 0.0:
        return ClosedFormFamily(Kind.MU0, mu0_constant(params))
    return None


def aubin_talenti(params, scale=1.0):
    if not (params.p == 2.0 and params.mu == 0.0 and params.s == 0.0):
        raise DomainError("the Aubin-Talenti form needs p = 2, mu = 0, s = 0")
    if scale <= 0.0:
        raise DomainError("scale must be positive")
    N = params.N
    return ClosedFormFamily(Kind.AUBIN_TALENTI, (N * (N - 2.0)) ** ((N - 2.0) / 4.0),
                            scale=float(scale))


def eval(family, params, r):
    """Value and radial derivative of ``family`` at radius ``r`` (scalar or array)."""
    scalar = np.isscalar(r)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or (family.kind is not Kind.MU0 and np.any(r == 0.0)):
        raise DomainError("closed forms are evaluated at r > 0 (MU0 also at r = 0)")
    N, p, s = params.N, params.p, params.s
    with np.errstate(divide="ignore"):
        x = np.log(r)
    if family.kind is Kind.P2:
        a = (2.0 - s) * (1.0 - family.nu) / 2.0
        b = (2.0 - s) * (1.0 + family.nu) / 2.0
        k = (N - 2.0) / (2.0 - s)
        u = family.constant_c * np.exp(-k * np.logaddexp(a * x, b * x))
        w = expit((b - a) * x)
        du = -(u / r) * k * (a * (1.0 - w) + b * w)
    elif family.kind is Kind.MU0:
        m = (p - s) / (p - 1.0)
        k = (N - p) / (p - s)
        u = family.constant_c * np.exp(-k * np.logaddexp(0.0, m * x))
        with np.errstate(invalid="ignore", divide="ignore"):
            # r^(m-1) expit(m log r) / ... written to stay finite at r = 0
            du = -u * k * m * np.exp((m - 1.0) * x - np.logaddexp(0.0, m * x))
        du = np.where(r == 0.0, 0.0, du)
    else:
        lam = family.scale
        k = (N - 2.0) / 2.0
        base = lam * math.sqrt(N * (N - 2.0)) / (lam ** 2 + r ** 2)
        u = base ** k
        du = -u * k * 2.0 * r / (lam ** 2 + r ** 2)
    if scalar:
        return float(u), float(du)
    return u, du


def evaluator(family, params):
    """Callable ``r -> (u, du_dr)`` for ``family``."""
    def evaluate(r):
        return eval(family, params, r)
    return evaluate


def dilate(profile, tau, params):
    """Evaluator of ``tau^delta u(tau r)`` for an evaluator ``profile``.

    ``dilate(dilate(f, a), b) == dilate(f, a*b)``.
    """
    if not tau > 0.0:
        raise DomainError("dilation factor tau must be positive")
    delta = params.delta

    def evaluate(r):
        u, du = profile(tau * r if np.isscalar(r) else tau * np.asarray(r, dtype=float))
        return tau ** delta * u, tau ** (delta + 1.0) * du
    return evaluate


def log_argmax_y(family, params):
    """``log r`` at which ``r^delta u(r)`` is maximal (there ``-r u'/u = delta``)."""
    N, p, s = params.N, params.p, params.s
    delta = params.delta
    if family.kind is Kind.P2:
        a = (2.0 - s) * (1.0 - family.nu) / 2.0
        b = (2.0 - s) * (1.0 + family.nu) / 2.0
        k = (N - 2.0) / (2.0 - s)
        w = (delta / k - a) / (b - a)
        return math.log(w / (1.0 - w)) / (b - a)
    if family.kind is Kind.MU0:
        m = (p - s) / (p - 1.0)
        k = (N - p) / (p - s)
        return math.log(delta / (k * m - delta)) / m
    return math.log(family.scale)
