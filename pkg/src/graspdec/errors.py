"""Exception hierarchy shared across the toolkit."""


class GraspDecError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(GraspDecError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRangeError(GraspDecError, IndexError):
    """A requested window or index falls outside the available data."""


class DegenerateInputError(GraspDecError, ValueError):
    """Input is numerically degenerate (zero variance, singular covariance)."""


class NumericError(GraspDecError, ArithmeticError):
    """Non-finite values appeared where finite numbers are required."""


class NoCandidateError(GraspDecError, LookupError):
    """A nearest-neighbour query has no admissible candidates."""


class IncompleteLabelError(GraspDecError, ValueError):
    """A segment is missing its activation label."""


class IncompleteTemplateError(GraspDecError, ValueError):
    """A (class, segment) cell has no labels to average."""


class MissingTemplateError(GraspDecError, LookupError):
    """No label template exists for the requested class."""


class InvalidTrainingSetError(GraspDecError, ValueError):
    """Training data cannot support the requested classifier."""


class IsolationViolationError(GraspDecError, RuntimeError):
    """Augmentation material leaked from the test split.

    This is the critical scientific-integrity failure; the CLI maps it to
    its own exit code so it can never be mistaken for a config problem.
    """


class ConfigError(GraspDecError, ValueError):
    """A config document failed to parse or validate."""
