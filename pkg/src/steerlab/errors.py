"""Exception hierarchy shared across the package.

CLI exit-code mapping: DataError and subclasses -> 3, NumericError and
subclasses -> 4 (argparse usage errors exit 2 on their own).
"""


class SteerlabError(Exception):
    """Base class for all package errors."""


class DataError(SteerlabError):
    """Invalid input data: malformed CSV, bad split, bad configuration."""


class ParseError(DataError):
    """CSV row failed validation; message carries the file line number."""


class EmptySplitError(DataError):
    """A dataset split selected zero records."""


class ResampleError(DataError):
    """Record timestamps are not uniformly spaced at the expected period."""


class LayoutError(DataError):
    """Parameter vector length or segment layout does not match the model."""


class DomainError(DataError):
    """An input is outside the model's valid domain (e.g. v_x below v_x_min)."""


class NumericError(SteerlabError):
    """A computation produced a non-finite or otherwise invalid value."""


class InstabilityError(NumericError):
    """Vehicle simulation left the stable envelope (tire slip beyond limit)."""


class SaturationError(NumericError):
    """Requested lateral acceleration exceeds what the vehicle can reach.

    Carries ``max_ay`` [m/s^2], the largest steady-state value achieved.
    """

    def __init__(self, message: str, max_ay: float):
        super().__init__(message)
        self.max_ay = max_ay


class DegenerateFitError(NumericError):
    """Least-squares design matrix is rank deficient."""


class MetricError(NumericError):
    """A metric is undefined for the given inputs (e.g. FVU of a constant target)."""
