"""Emden-Fowler variables for the radial equation without the ``lam`` term.

With ``t = log r``, ``y = r^delta u`` and ``z = r^{(p-1)(delta+1)} |u'|^{p-2} u'``
the equation becomes the autonomous planar system

    y' = delta y + spow(z, 1/(p-1))
    z' = -delta z - spow(y, p*-1) - mu spow(y, p-1)

whose first integral ``V`` vanishes on finite-energy trajectories.  The
observable ``H = -spow(z, 1/(p-1)) / y`` equals ``-r u'/u``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import spow
from .exceptions import DomainError
from .exponents import gamma_mu


@dataclass(frozen=True)
class EFState:
    t: float
    y: float
    z: float


def to_ef(r, u, du_dr, exps):
    if not (r > 0.0 and u > 0.0):
        raise DomainError("to_ef needs r > 0 and u > 0")
    delta = exps.delta
    p = exps.p
    return EFState(t=math.log(r), y=r ** delta * u,
                   z=r ** ((p - 1.0) * (delta + 1.0)) * spow(du_dr, p - 1.0))


def from_ef(state, exps):
    """Inverse of :func:`to_ef`: returns ``(r, u, du_dr)``."""
    if not state.y > 0.0:
        raise DomainError("from_ef needs y > 0")
    p = exps.p
    r = math.exp(state.t)
    return r, r ** -exps.delta * state.y, spow(state.z, 1.0 / (p - 1.0)) * r ** -(exps.delta + 1.0)


def rhs(state, params, exps):
    """``(dy/dt, dz/dt)`` at ``state``."""
    p, mu, delta = params.p, params.mu, exps.delta
    y, z = state.y, state.z
    dy = delta * y + spow(z, 1.0 / (p - 1.0))
    dz = -delta * z - spow(y, exps.p_star_s - 1.0) - mu * spow(y, p - 1.0)
    return dy, dz


def vector_field(params, exps):
    """``f(t, [y, z])`` for :func:`scipy.integrate.solve_ivp`."""
    p, mu, delta, ps = params.p, params.mu, exps.delta, exps.p_star_s

    def field(t, state):
        y, z = state
        return [delta * y + spow(z, 1.0 / (p - 1.0)),
                -delta * z - spow(y, ps - 1.0) - mu * spow(y, p - 1.0)]
    return field


def first_integral(y, z, params, exps):
    """``V(y, z) = |y|^p*/p* + mu|y|^p/p + delta y z + |z|^p'/p'`` (arrays allowed)."""
    p, ps = params.p, exps.p_star_s
    pp = p / (p - 1.0)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    v = (np.abs(y) ** ps / ps + params.mu * np.abs(y) ** p / p
         + exps.delta * y * z + np.abs(z) ** pp / pp)
    return float(v) if v.ndim == 0 else v


def h_of(state, params):
    """``H = -spow(z, 1/(p-1)) / y``."""
    if not state.y > 0.0:
        raise DomainError("h_of needs y > 0")
    return -spow(state.z, 1.0 / (params.p - 1.0)) / state.y


def h_rhs(h, params, exps):
    """Right side ``f(h) = -((p*-p)/(p(p-1))) |h|^{2-p} Gamma_mu(h)`` of the H-flow."""
    p, ps = params.p, exps.p_star_s
    if h == 0.0 and p > 2.0:
        raise DomainError("h_rhs is singular at h = 0 for p > 2")
    return -(ps - p) / (p * (p - 1.0)) * abs(h) ** (2.0 - p) * gamma_mu(h, params)
