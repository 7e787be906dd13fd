"""Exception types shared across the package.

The CLI maps these onto exit codes: invariant violations exit 2,
numerical-range failures exit 3, malformed input exits 4.
"""

from __future__ import annotations


class ZerolineError(Exception):
    """Base class for package-specific failures."""


class InvariantViolation(ZerolineError):
    """A structural guarantee (monotonicity, positivity, continuity) failed.

    Raised instead of silently repairing data: a violation signals a solver
    or data problem upstream, not something to patch over.
    """


class ZeroBeyondRange(ZerolineError):
    """The requested zero was not found below the search ceiling.

    Carries the largest radius searched; hitting this typically means the
    energy sits at or below the asymptote of the requested zero line.
    """

    def __init__(self, message: str, r_searched: float):
        super().__init__(message)
        self.r_searched = r_searched


class RangeTruncation(ZerolineError):
    """Integration had to stop early (overflow guard); range was truncated."""

    def __init__(self, message: str, r_stop: float):
        super().__init__(message)
        self.r_stop = r_stop


class SeamMismatch(ZerolineError):
    """Low-q and high-q sine-profile branches disagree at the seam.

    Diagnostic of non-Born input data or of Legendre-sum truncation.
    """

    def __init__(self, message: str, g_low: float, g_high: float):
        super().__init__(message)
        self.g_low = g_low
        self.g_high = g_high


class SupportNotCovered(ZerolineError):
    """The zero line stops before the outermost detected discontinuity."""


class InputFormatError(ZerolineError):
    """A text input (potential file, line CSV, dataset CSV) failed to parse."""
