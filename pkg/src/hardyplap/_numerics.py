"""Small numerical kernels shared by the solver modules.

Contains the signed power used by every p-Laplacian formula, a bracketed
bisection root finder and a vectorised adaptive Gauss-Kronrod (7, 15)
quadrature that refines many panels at once.
"""

import math

import numpy as np

from .exceptions import ConvergenceError


def spow(x, a):
    """Signed power ``sign(x) * |x|**a`` with ``spow(0, a) == 0`` for ``a > 0``.

    Works on scalars and arrays; scalars come back as Python floats.
    """
    if np.isscalar(x):
        if x == 0.0:
            return 0.0
        return math.copysign(abs(x) ** a, x)
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** a


def bisect(f, a, b, rtol=1e-14, max_iter=200):
    """Root of ``f`` on ``[a, b]`` by bisection.

    ``f(a)`` and ``f(b)`` must have opposite signs (a zero at either end is
    returned immediately).  Stops when the bracket is narrower than
    ``rtol * max(|a|, |b|)`` or when the midpoint is no longer representable
    between the ends.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise ConvergenceError(f"bisect: no sign change on [{a!r}, {b!r}]")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if m <= min(a, b) or m >= max(a, b):
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if abs(b - a) <= rtol * max(abs(a), abs(b)):
            return 0.5 * (a + b)
    raise ConvergenceError(f"bisect: no convergence after {max_iter} iterations")


# Kronrod 15-point abscissae (non-negative half, descending) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss 7-point weights, attached to _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G_WEIGHTS[[9, 11, 13]] = _WG[2::-1]
_G_WEIGHTS[7] = _WG[3]


def gk15(f, a, b):
    """Gauss-Kronrod (7, 15) rule on each panel ``[a[i], b[i]]``.

    ``f`` maps an array of abscissae of shape ``(m, 15)`` to values of shape
    ``(ncomp, m, 15)``.  Returns ``(kronrod, error)`` with shapes
    ``(ncomp, m)``; the error is the raw Kronrod-Gauss difference.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * GK_NODES[None, :]
    vals = np.asarray(f(x))
    k = h * (vals @ GK_WEIGHTS)
    g = h * (vals @ _G_WEIGHTS)
    return k, np.abs(k - g)


def integrate_intervals(f, lo, hi, rtol=1e-13, atol=0.0, max_panels=200000):
    """Integrate ``f`` over each independent interval ``[lo[i], hi[i]]``.

    Panels are bisected until the Kronrod-Gauss difference is below
    ``rtol * |I_panel| + atol * panel_width / interval_width``.  All
    unresolved panels of all intervals are evaluated in one call to ``f``
    per sweep.  Returns an array of shape ``(ncomp, len(lo))``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
    hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
    n = lo.size
    span = np.abs(hi - lo)
    span[span == 0.0] = 1.0
    owner = np.arange(n)
    result = None
    evaluated = 0
    while lo.size:
        k, err = gk15(f, lo, hi)
        if result is None:
            result = np.zeros((k.shape[0], n))
        evaluated += lo.size
        allowed = rtol * np.abs(k) + atol * np.abs(hi - lo) / span[owner]
        done = np.all(err <= allowed, axis=0)
        mid = 0.5 * (lo + hi)
        # panels too narrow to split are accepted as they are
        done |= (mid == lo) | (mid == hi)
        for comp in range(k.shape[0]):
            np.add.at(result[comp], owner[done], k[comp, done])
        keep = ~done
        if not keep.any():
            break
        if evaluated > max_panels:
            raise ConvergenceError("adaptive quadrature exhausted its panel budget")
        lo, hi, mid, owner = lo[keep], hi[keep], mid[keep], owner[keep]
        lo, hi, owner = (np.concatenate([lo, mid]), np.concatenate([mid, hi]),
                         np.concatenate([owner, owner]))
    return result


def integrate_panels(f, edges, rtol=1e-13, atol=0.0):
    """Integrals over consecutive intervals ``[edges[j], edges[j+1]]``."""
    edges = np.asarray(edges, dtype=float)
    return integrate_intervals(f, edges[:-1], edges[1:], rtol=rtol, atol=atol)


def integrate(f, a, b, rtol=1e-13, atol=0.0, breakpoints=()):
    """Adaptive integral of ``f`` over ``[a, b]`` with optional breakpoints.

    ``f`` follows the :func:`gk15` calling convention; returns a vector of
    length ``ncomp``.
    """
    inner = sorted(x for x in breakpoints if min(a, b) < x < max(a, b))
    if b < a:
        inner = inner[::-1]
    edges = np.array([a, *inner, b], dtype=float)
    return integrate_panels(f, edges, rtol=rtol, atol=atol).sum(axis=1)
