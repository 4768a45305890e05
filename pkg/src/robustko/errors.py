"""Exception types raised by the public API.

Everything derives from :class:`RobustKoError` so callers can catch the
package's failures with a single ``except`` clause.  Validation problems
subclass ``ValueError`` (or ``IndexError`` where that is the natural
builtin) so that generic numpy-style error handling keeps working.
"""


class RobustKoError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteInput(RobustKoError, ValueError):
    """An input array contains NaN or infinite entries."""


class DimensionMismatch(RobustKoError, ValueError):
    """Array shapes are inconsistent with each other."""


class TooFewRows(RobustKoError, ValueError):
    """Not enough observations to carry out the requested estimate."""


class ZeroVarianceColumn(RobustKoError, ValueError):
    """A column is constant, so it cannot be placed on the correlation scale."""

    def __init__(self, column: int):
        self.column = int(column)
        super().__init__(f"column {column} has zero variance")


class NotUnitDiagonal(RobustKoError, ValueError):
    """A matrix expected on the correlation scale has diagonal entries != 1."""


class NotPsd(RobustKoError, ValueError):
    """A matrix required to be positive semi-definite is not."""


class BlockSolveDiverged(RobustKoError, RuntimeError):
    """The per-block coordinate ascent failed to make progress."""


class Diverged(RobustKoError, RuntimeError):
    """An iterative fit failed to converge within its iteration budget."""


class SingularDesign(RobustKoError, ValueError):
    """The normal equations are singular; OLS coefficients are not unique."""


class LeverageOne(RobustKoError, ValueError):
    """A leverage value equals one, so the HC3 weight 1/(1-h)^2 blows up."""

    def __init__(self, row: int):
        self.row = int(row)
        super().__init__(f"row {row} has leverage 1; HC3 weights are undefined")


class EmptyStats(RobustKoError, ValueError):
    """A feature-statistic vector is empty."""


class SubsampleTooSmall(RobustKoError, ValueError):
    """The requested subsample is too small to fit anything on."""


class EmptyGroup(RobustKoError, ValueError):
    """A group in a grouping has no member variables."""


class UnmappedComponent(RobustKoError, ValueError):
    """A component score has no group assigned in the component->group map."""

    def __init__(self, component: int):
        self.component = int(component)
        super().__init__(f"component {component} is not mapped to any group")


class SchemaMismatch(RobustKoError, ValueError):
    """New data does not match the schema the model was fitted on."""


class IndexOutOfRange(RobustKoError, IndexError):
    """A variable index is outside ``0..p-1``."""


class EmptyTrainWindow(RobustKoError, ValueError):
    """A requested split has no training rows."""


class EmptyTestWindow(RobustKoError, ValueError):
    """A requested split has no test rows."""


class SeriesTooShort(RobustKoError, ValueError):
    """A time series is too short for the requested operation."""


class ParseError(RobustKoError, ValueError):
    """A CSV cell failed to parse; carries 1-based row/column positions."""

    def __init__(self, row: int, column: int, message: str = ""):
        self.row = int(row)
        self.column = int(column)
        detail = f": {message}" if message else ""
        super().__init__(f"parse error at row {row}, column {column}{detail}")


class MissingColumn(RobustKoError, ValueError):
    """A required column is absent from an input file."""


class InvalidDesign(RobustKoError, ValueError):
    """A simulation design has inconsistent parameters."""


class ConfigError(RobustKoError, ValueError):
    """A run configuration failed validation."""
