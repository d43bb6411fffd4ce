"""Error types shared across the package.

Plain ``ValueError`` is used for domain violations (parameters outside their
stated ranges).  The classes below cover the second failure family: a
computation that cannot meet a caller-supplied numerical budget.  The CLI
maps them to exit code 3.
"""


class NumericBudgetError(RuntimeError):
    """A numerical accuracy or truncation budget could not be met."""


class TruncationBudgetError(NumericBudgetError):
    """A truncated distribution carries more tail mass than allowed."""


class CutoffTooSmallError(NumericBudgetError):
    """A Fock-space cutoff is too small for the requested accuracy."""


class TailTooLargeError(NumericBudgetError):
    """A spectrum's unresolved tail prevents bounding the requested quantity."""
