"""Exception hierarchy shared by all nctk modules."""


class NctkError(Exception):
    """Base class for all errors raised by this package."""


class OddDimensionError(NctkError):
    """Pfaffian requested for an odd-dimensional matrix without the zero convention."""


class OracleLimitError(NctkError):
    """Brute-force oracle invoked beyond its factorial-cost dimension cap."""


class BadIndexError(NctkError):
    """Minor index tuple out of range or malformed."""


class DimMismatchError(NctkError):
    """Operands have incompatible dimensions."""


class SingularBlockError(NctkError):
    """Leading 2x2 block is singular, so the Schur reduction is undefined."""


class SingularLeadingMinorError(NctkError):
    """A leading pfaffian minor vanishes; the closed-form iterate is undefined."""

    def __init__(self, s: int):
        self.s = s
        super().__init__(f"leading pfaffian minor on (1,..,{2 * s}) vanishes")


class UndefinedActionError(NctkError):
    """C*theta + D is singular; the group element does not act at this point."""


class SeqTooShortError(NctkError):
    """Super-increasing sequence has too few terms for the requested dimension."""


class PrecisionExhaustedError(NctkError):
    """Interval certification undecided at the precision cap."""

    def __init__(self, message: str, interval=None):
        self.interval = interval
        super().__init__(message)


class BadThetaError(NctkError):
    """theta12 outside the admissible interval (1/2, 1)."""


class QuadFailError(NctkError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class BadIsoMatrixError(NctkError):
    """Candidate isomorphism matrix does not fix the class of the unit."""


class ScheduleIncompleteError(NctkError):
    """Translate schedule and its fallback rounds failed to certify positivity."""
