"""Exception hierarchy.

Every error carries a ``code`` naming the failure condition; the CLI maps the
codes onto exit statuses.
"""

from __future__ import annotations


class CompositionsError(Exception):
    code = "ERROR"


class InvalidSpec(CompositionsError, ValueError):
    code = "INVALID_SPEC"


class SpecParseError(InvalidSpec):
    code = "PARSE_ERROR"

    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


class NonIncreasingWindow(CompositionsError, ValueError):
    code = "NON_INCREASING_WINDOW"


class InadmissibleIndex(CompositionsError, ValueError):
    code = "INADMISSIBLE_INDEX"


class XOutOfRange(CompositionsError, ValueError):
    code = "X_OUT_OF_RANGE"


class TailNotConverged(CompositionsError, ArithmeticError):
    code = "TAIL_NOT_CONVERGED"


class PrecisionExhausted(CompositionsError, ArithmeticError):
    code = "PRECISION_EXHAUSTED"


class Indeterminate(CompositionsError, ArithmeticError):
    code = "INDETERMINATE"


class LimitTooLarge(CompositionsError, ValueError):
    code = "LIMIT_TOO_LARGE"


class NTooLarge(CompositionsError, ValueError):
    code = "N_TOO_LARGE"


class NoCompositions(CompositionsError, ValueError):
    code = "NO_COMPOSITIONS"


class MismatchedSeries(CompositionsError, ValueError):
    code = "MISMATCHED_SERIES"


class VerdictMismatch(CompositionsError, AssertionError):
    """A structural verdict disagreed with its numerical cross-check."""

    code = "VERDICT_MISMATCH"
