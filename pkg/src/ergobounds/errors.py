"""Error taxonomy shared by every module.

Each exception carries a stable ``code`` string so the CLI and reports can
name failures without parsing messages.
"""


class ErgoBoundsError(Exception):
    """Base class for all package errors."""

    code = "ERROR"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class ValidationError(ErgoBoundsError):
    """An input object violates a documented precondition."""

    code = "VALIDATION_ERROR"


class ParseError(ErgoBoundsError):
    """A problem description file could not be parsed."""

    code = "PARSE_ERROR"


class NonUniqueStationaryError(ErgoBoundsError):
    """The eigenvalue-1 left eigenspace has dimension greater than one."""

    code = "NON_UNIQUE"


class DivergentExpectationError(ErgoBoundsError):
    """A rate-weighted expectation diverges (spectral radius at or above 1)."""

    code = "DIVERGENT"


class RateRangeError(ErgoBoundsError):
    """A rate parameter falls outside its admissible open interval."""

    code = "RATE_RANGE"


class EtaRangeError(ErgoBoundsError):
    """The drift level eta falls outside (1/r, 1)."""

    code = "ETA_RANGE"


class R2TooLargeError(ErgoBoundsError):
    """A requested output rate exceeds the certified contraction rate."""

    code = "R2_TOO_LARGE"


class NoContractionError(ErgoBoundsError):
    """No output rate above 1 is certifiable from the given constants."""

    code = "NO_CONTRACTION"


class DriftViolationError(ErgoBoundsError):
    """A claimed drift inequality fails pointwise on the chain."""

    code = "DRIFT_VIOLATION"


class NegativeRowError(ErgoBoundsError):
    """A split kernel row came out negative beyond rounding tolerance."""

    code = "NEGATIVE_ROW"


class HypothesisFailError(ErgoBoundsError):
    """A certificate hypothesis fails exact verification on the chain."""

    code = "HYPOTHESIS_FAIL"


class BoundViolationError(ErgoBoundsError):
    """A computed bound is exceeded by an exactly computed quantity."""

    code = "BOUND_VIOLATION"


class ExcessCensoringError(ErgoBoundsError):
    """More than the allowed fraction of simulated paths hit the step cap."""

    code = "EXCESS_CENSORING"
