"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: usage errors exit 2, numerical failures
exit 3, storage/I-O failures exit 4.
"""


class OocdetError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class StorageError(OocdetError):
    """Matrix/scratchpad file problems: bad header, short read, I/O failure."""

    exit_code = 4


class ScratchCapacityError(OocdetError):
    """Scratchpad ran out of slots.

    The capacity formulas are exact, so hitting this signals a scheduler bug
    rather than an undersized configuration.
    """

    exit_code = 4


class NumericalError(OocdetError):
    """Base class for numerical failures (CLI exit code 3)."""

    exit_code = 3


class NotSpdError(NumericalError):
    """A matrix required to be symmetric positive-definite is not."""


class IndefiniteBlockError(NumericalError):
    """LDL pivot fell below tolerance; 1x1 diagonal pivoting cannot proceed."""


class ConditioningError(NumericalError):
    """Regression design matrix is rank-deficient or unusably scaled."""


class CostDomainError(ValueError, OocdetError):
    """Cost model queried outside its domain (block count must divide m)."""

    exit_code = 2
