"""Sampled radial profiles."""

from dataclasses import dataclass

import numpy as np

from ._numerics import spow


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples ``(r, u, u', flux)`` of one radial solution.

    ``flux`` is ``r^{N-1} |u'|^{p-2} u'``, the quantity under the outer
    derivative of the equation.
    """

    r: np.ndarray
    u: np.ndarray
    du_dr: np.ndarray
    flux: np.ndarray

    def __post_init__(self):
        for name in ("r", "u", "du_dr", "flux"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.r.size
        if any(getattr(self, k).shape != (n,) for k in ("u", "du_dr", "flux")):
            raise ValueError("profile arrays must be one-dimensional and of equal length")
        if n > 1 and np.any(np.diff(self.r) <= 0.0):
            raise ValueError("profile radii must be strictly increasing")
        if n and self.r[0] <= 0.0:
            raise ValueError("profile radii must be positive")

    @classmethod
    def from_values(cls, r, u, du_dr, N, p):
        r = np.asarray(r, dtype=float)
        du_dr = np.asarray(du_dr, dtype=float)
        return cls(r, u, du_dr, r ** (N - 1) * spow(du_dr, p - 1.0))

    def __len__(self):
        return self.r.size

    def restrict(self, r_min, r_max):
        keep = (self.r >= r_min) & (self.r <= r_max)
        return RadialProfile(self.r[keep], self.u[keep], self.du_dr[keep], self.flux[keep])
