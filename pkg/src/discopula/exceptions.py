"""Exception types raised by discopula."""


class DiscopulaError(Exception):
    """Base class for all library errors."""


class GridSizeError(DiscopulaError, ValueError):
    """Dense storage would exceed the configured entry limit."""


class StructureError(DiscopulaError, ValueError):
    """Malformed input: wrong length, bad shape, out-of-range index."""


class AxiomError(DiscopulaError, ValueError):
    """An object failed the axioms a precondition requires.

    The failing :class:`~discopula.grid.AxiomReport` is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class TieError(DiscopulaError, ValueError):
    """Tied values under the ``"reject"`` tie policy."""

    def __init__(self, column, value):
        super().__init__(f"tied values in column {column}: {value!r} occurs more than once")
        self.column = column
        self.value = value


class ExtensionError(DiscopulaError, ValueError):
    """A subcopula cannot be extended to an irreducible copula."""


class NotRepresentableError(DiscopulaError, ValueError):
    """A probability mass is not an integer multiple of 1/M."""


class ResolutionMismatchError(DiscopulaError, ValueError):
    """Objects built on different grid resolutions were combined."""
