"""Exception types raised across the package.

Everything derives from :class:`QCombsError` so callers can catch broadly;
the CLI maps these onto exit codes.
"""


class QCombsError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateLabelError(QCombsError):
    """A wire label occurs more than once where labels must be unique."""


class UnknownLabelError(QCombsError):
    """A referenced wire label does not exist on the operator."""


class NotAPermutationError(QCombsError):
    """A wire reordering does not name every wire exactly once."""


class DimMismatchError(QCombsError):
    """Two wires with the same label disagree on dimension."""


class LabelMismatchError(QCombsError):
    """An operator's wire set does not match the expected structure."""


class NotHermitianError(QCombsError):
    """An operand required to be Hermitian is not, beyond tolerance."""


class NotPSDError(QCombsError):
    """An operand required to be positive semidefinite has a negative
    eigenvalue beyond tolerance."""


class TripleLabelError(QCombsError):
    """A label occurs in more than two parts of a network."""


class SlotArityMismatchError(QCombsError):
    """The number or placement of inserted circuits does not match the
    board's open slots."""


class DimOverflowError(QCombsError):
    """Total dimension exceeds the supported dense-storage cap."""


class IndexOutOfRangeError(QCombsError):
    """A tooth index lies outside the comb's range."""


class InvalidBranchSumError(QCombsError):
    """Branches of a probabilistic comb do not sum to a deterministic comb."""


class UnsupportedError(QCombsError):
    """The requested closed-form reference value is not available."""


class DesignInsufficientError(QCombsError):
    """The requested averaging scheme cannot reproduce the Haar average
    exactly at the required polynomial degree."""


class BoundUnavailableError(QCombsError):
    """No valid dual bound could be constructed."""


class NoConvergenceError(QCombsError):
    """An iterative routine hit its iteration budget before reaching
    tolerance.  Carries the best iterate found and diagnostics."""

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class OperatorFileError(QCombsError):
    """An operator file is malformed or fails validation on re-read."""
