"""Exception types shared across the solvers."""


class NumericError(ArithmeticError):
    """A user callback produced a non-finite value.

    Carries the evaluation point (when known) so failing runs can be replayed.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DescentDirectionError(ValueError):
    """The supplied direction is not a descent direction (slope at 0 is >= 0)."""


class LineSearchError(RuntimeError):
    """No step in the backtracking sequence satisfied the sufficient-decrease test."""


class DegenerateConstraintError(RuntimeError):
    """Equality-constraint Jacobian is rank deficient; the KKT system is singular."""


class QPError(RuntimeError):
    """Quadratic subproblem is infeasible, unbounded, or the active-set loop stalled."""
