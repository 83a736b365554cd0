"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, AccuracyError -> 3,
tolerance breaches detected by checks -> 1.
"""


class WeylrodsError(Exception):
    """Base class for all package errors."""


class InputError(WeylrodsError):
    """Invalid argument, domain violation, or malformed configuration."""


class SingularPointError(InputError):
    """Evaluation requested at a point where the quantity is singular."""


class CornerEvaluationError(InputError):
    """Evaluation requested at (or too close to) a rod corner on the axis."""


class UnsupportedStructureError(InputError):
    """Rod structure outside the diagonal ansatz (non standard-basis vector)."""


class UnbalanceableError(InputError):
    """Diagram lacks the symmetry needed to cancel all conical defects."""


class AccuracyError(WeylrodsError):
    """A numerical procedure failed to converge to its requested tolerance."""
