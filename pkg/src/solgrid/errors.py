"""Exception types shared across the package."""


class SolgridError(Exception):
    """Base class for all package errors."""


class Overflow(SolgridError):
    """Integer does not fit in a word of the requested depth."""


class DegreeMismatch(SolgridError):
    """Operands built over different degrees d."""


class IndexOutOfRange(SolgridError):
    """A referenced index is outside the finite table/partition."""


class NonPositive(SolgridError):
    """The free-data recursion produced a non-positive entry.

    Signals that the free data does not generate a valid positive
    ratio sequence. ``index`` is the offending sequence index.
    """

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"NonPositive({index})")


class WindowTooNarrow(SolgridError):
    """Tiling window too short for the requested coarse index range."""


class Inconsistent(SolgridError):
    """Cross-level consistency of a realized grid exceeds tolerance."""


class DepthExceeded(SolgridError):
    """Word deeper than the realized partition."""


class NoConvergence(SolgridError):
    """A root solve failed to bracket or converge."""


class CapExceeded(SolgridError):
    """Requested partition is larger than the configured cap."""


class NotAdjacent(SolgridError):
    """Intervals do not share exactly one endpoint."""


class DomainViolation(SolgridError):
    """Interval outside the homeomorphism's domain."""


class GridAxiomViolation(SolgridError):
    """A grid axiom failed at construction. ``axiom`` names which one."""

    def __init__(self, axiom: str, message: str = ""):
        self.axiom = axiom
        super().__init__(f"grid axiom ({axiom}) violated" + (f": {message}" if message else ""))


class Degenerate(SolgridError):
    """All sampled differences vanish; no modulus can be fitted."""


class TooFewLevels(SolgridError):
    """Not enough grid levels for an asymptotic fit."""
