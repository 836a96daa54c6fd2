"""Exception hierarchy for the peridyn library.

Precondition violations raise :class:`ValidationError` (a ``ValueError``),
runtime numerical failures raise dedicated subclasses of
:class:`PeridynError` so callers can distinguish "bad input" from
"the computation broke".
"""


class PeridynError(Exception):
    """Base class for all peridyn errors."""


class ValidationError(PeridynError, ValueError):
    """A precondition on user input was violated."""


class GridMismatchError(PeridynError):
    """Two fields living on different grids were combined."""


class GridTooLargeError(ValidationError):
    """The O(N^4) direct operator was requested on a grid above its hard cap."""


class HorizonTooLargeError(ValidationError):
    """Kernel horizon exceeds half the periodic cell."""


class ImaginaryResidueError(PeridynError):
    """An inverse transform produced a non-negligible imaginary part.

    Signals a non-conjugate-symmetric spectrum, i.e. a bug upstream.
    """


class NonFiniteFieldError(PeridynError):
    """A field operation produced NaN or Inf values."""


class NewtonDivergenceError(PeridynError):
    """Newton iteration failed to reduce the residual below tolerance."""


class KrylovStallError(PeridynError):
    """The inner Krylov solve did not converge within its iteration cap."""


class SnapshotFormatError(PeridynError):
    """A snapshot file does not conform to the PDFLD1 binary layout."""


class ConfigError(PeridynError):
    """A run configuration file failed to parse or validate."""
