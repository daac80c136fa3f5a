"""Exception taxonomy shared by every splitdyn module.

Every error raised on a documented failure path derives from SplitdynError,
so callers (and the CLI) can catch one base class.
"""


class SplitdynError(Exception):
    """Base class for all library errors."""


class FieldMismatchError(SplitdynError):
    """Arithmetic attempted between elements of different fields."""


class RootNotInFieldError(SplitdynError):
    """A required radical (n-th root) does not exist in the ambient field."""


class NotNormalFormError(SplitdynError):
    """Operation requires polynomials in normal form (monic, zero subleading)."""


class PreconditionViolatedError(SplitdynError):
    """A documented precondition of an operation does not hold."""


class NoSolutionError(SplitdynError):
    """A decomposition equation admits no solution over the ambient field."""


class NotASolutionError(SplitdynError):
    """The pair handed to a classifier does not satisfy its functional equation."""


class UnexpectedShapeError(SplitdynError):
    """A classification succeeded partially but no admissible normal shape
    reproduces the input; signals bad input slipping past the hypotheses or
    an internal fault, never ignored silently."""


class EliminationCollapseError(SplitdynError):
    """A resultant used for curve-image elimination vanished identically."""


class NonRepellingError(SplitdynError):
    """Series linearization requested at a fixed point with |multiplier| <= 1."""


class ResourceBudgetError(SplitdynError):
    """An exact computation exceeded its configured size budget."""


class ParseError(SplitdynError):
    """Expression-text parse failure; carries 1-based line/column."""

    def __init__(self, message, line=1, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column
