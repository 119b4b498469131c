"""Exception hierarchy.

Every error raised by the library derives from :class:`LorgeeError` so
callers (and the CLI) can map failures to exit codes by family:

* :class:`UsageError` -- bad arguments or incompatible options,
* :class:`DataError` -- unusable input data,
* :class:`AssociationError` -- the association layer could not produce
  local-odds-ratio tables,
* :class:`EstimationError` -- the scoring loop failed,
* :class:`NumericError` -- low-level numeric breakdown (IPF, degenerate
  probabilities, singular matrices).
"""


class LorgeeError(Exception):
    """Base class for all library errors."""


class UsageError(LorgeeError):
    """Invalid combination of user-facing options."""


class DataError(LorgeeError):
    """Input data cannot be turned into a valid dataset."""


class InvalidResponseScaleError(DataError):
    """Fewer than three distinct response categories."""


class DuplicateObservationError(DataError):
    """Two rows share the same (subject, time) cell."""


class EmptyDataError(DataError):
    """No rows left after removing incomplete ones."""


class SingleOccasionError(DataError):
    """Association structure requested on data with fewer than two occasions."""


class AssociationError(LorgeeError):
    """Association-structure estimation failed."""


class SparseTableError(AssociationError):
    """A pair table has an empty row or column margin.

    Raised with the offending pair; a small positive ``add`` constant
    usually repairs it.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class AssociationFitError(AssociationError):
    """The log-linear fit for a pair table did not converge."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class EstimationError(LorgeeError):
    """Failures of the scoring loop for the regression parameters."""


class NonconvergenceError(EstimationError):
    """Fisher scoring exceeded the iteration budget.

    Carries the last iterate so callers can inspect or restart from it.
    """

    def __init__(self, message, last_params=None, iterations=None):
        super().__init__(message)
        self.last_params = last_params
        self.iterations = iterations


class NumericError(LorgeeError):
    """Low-level numeric failure."""


class InvalidParameterError(NumericError):
    """Parameter vector violates a model constraint (e.g. cutpoint order)."""


class DegenerateProbabilityError(NumericError):
    """Fitted category probabilities collapsed onto the simplex boundary."""


class IpfNonconvergenceError(NumericError):
    """Iterative proportional fitting did not reach its tolerance.

    ``deviation`` is the final maximum margin error.
    """

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class SingularInformationError(NumericError):
    """The accumulated information matrix is singular."""
