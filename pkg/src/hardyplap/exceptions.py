"""Exception types raised by the solvers."""


class ParameterError(ValueError):
    """A problem parameter violates one of the admissibility inequalities."""


class DomainError(ValueError):
    """An operation was called outside the domain where it is defined."""


class ConvergenceError(RuntimeError):
    """A root finder, quadrature or integrator failed to reach its tolerance."""


class NoSolutionError(RuntimeError):
    """The shooting functional has no sign change on the scanned bracket."""


class MultipleRootsError(RuntimeError):
    """More than one shooting root was found (a uniqueness violation)."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = list(roots)
