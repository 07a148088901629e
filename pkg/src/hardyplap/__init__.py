"""Radial solutions of critical p-Laplacian equations with a Hardy potential.

Modules: :mod:`~hardyplap.exponents` (parameters and indicial roots),
:mod:`~hardyplap.closed_forms` (explicit solutions), :mod:`~hardyplap.ef_system`
(Emden-Fowler variables), :mod:`~hardyplap.ground_state` (whole-space ground
state), :mod:`~hardyplap.ball_shooting` (unit-ball problem and first
eigenvalue) and :mod:`~hardyplap.verify` (oracle checks).
"""

from .ball_shooting import BallSolution, first_eigenvalue, shoot, solve_ball
from .exceptions import (ConvergenceError, DomainError, MultipleRootsError,
                         NoSolutionError, ParameterError)
from .exponents import Exponents, Params, derive, gamma_mu
from .ground_state import GroundStateSolution
from .ground_state import solve as solve_ground_state
from .profile import RadialProfile

__version__ = "0.1.0"

__all__ = [
    "BallSolution", "ConvergenceError", "DomainError", "Exponents", "GroundStateSolution",
    "MultipleRootsError", "NoSolutionError", "ParameterError", "Params", "RadialProfile",
    "derive", "first_eigenvalue", "gamma_mu", "shoot", "solve_ball", "solve_ground_state",
]
