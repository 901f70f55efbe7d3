"""Exception hierarchy for the novikov package.

Every error raised on purpose by this package derives from NovikovError so
callers can catch the whole family at once.  The CLI maps NovikovError to
exit code 2 and anything else to 1.
"""


class NovikovError(Exception):
    """Base class for all deliberate errors raised by this package."""


class RingMismatch(NovikovError):
    """Two objects built over different scalar rings were combined."""


class AlphabetMismatch(NovikovError):
    """Two polynomials over different generator alphabets were combined."""


class DegreeMismatch(NovikovError):
    """An operation received an inhomogeneous or wrongly graded element."""


class CapTooSmall(NovikovError):
    """A truncation cap is too small for the requested computation."""


class CapMismatch(NovikovError):
    """Two truncated objects with different degree caps were combined."""


class CompositionNotZero(NovikovError):
    """Alleged differentials do not compose to zero."""


class AxiomViolation(NovikovError):
    """A Hopf algebroid / comodule structure axiom failed to hold."""


class ParseError(NovikovError):
    """Text input could not be parsed."""


class ComoduleSyntaxError(ParseError):
    """A comodule presentation in text form could not be parsed."""


class OutOfTabulatedRange(NovikovError):
    """A layer index beyond the tabulated range was requested."""


class NotOddPrimePower(NovikovError):
    """A finite-field preset needs q to be an odd prime power."""


class IncompatibleTridegree(NovikovError):
    """Source and target of an asserted differential do not line up."""


class OutOfRange(NovikovError):
    """A requested bidegree exceeds the computed caps."""


class UnsupportedPresentation(NovikovError):
    """A coefficient presentation outside the supported regimes."""


class NotInSpan(NovikovError):
    """A vector was expected to lie in a given span but does not."""


class RangeUnstable(NovikovError):
    """No bidegree in range has settled enough to compare."""


class DeadClass(NovikovError):
    """An operation referenced a class that no longer survives."""


class ContradictionDetected(NovikovError):
    """An asserted event contradicts the current chart state.

    Carries a structured ``detail`` dict describing the clash; the HTTP
    layer forwards it with status 409 and the session leaves its state
    untouched.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}


class SessionReplayError(NovikovError):
    """A stored event log failed to replay cleanly."""


class UnsupportedFormat(NovikovError):
    """An export format outside json/tsv/svg was requested."""


class BundleIntegrityError(NovikovError):
    """A chart bundle failed its manifest checksum verification."""
