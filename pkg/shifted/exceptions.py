"""
Domain errors raised by the shifted loop group library.

Each error carries a short ``kind`` used as the ``error`` field of the
command-line diagnostics.
"""


class QloopError(Exception):
    kind = 'domain'


class ExpansionError(QloopError):
    """Denominator cannot be expanded as a geometric series in u."""
    kind = 'expansion'


class PoleOrderError(QloopError):
    kind = 'pole-order'


class TruncationError(QloopError):
    """A coefficient outside the exactly known window was requested."""
    kind = 'truncation'


class NonInvertibleError(QloopError):
    kind = 'non-invertible'


class QuiverError(QloopError):
    kind = 'quiver'


class PreconditionError(QloopError):
    kind = 'precondition'


class GrassmannianError(QloopError):
    """Enumeration refused: feasibility bound exceeded or a positive-dimensional family."""
    kind = 'grassmannian'


class UsageError(QloopError):
    kind = 'usage'
