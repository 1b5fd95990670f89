"""Exception types raised across the package."""


class PcvError(Exception):
    """Base class for all errors raised by pcvaug."""


class ZeroVarianceColumn(PcvError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance, cannot standardize")


class DidNotConverge(PcvError, RuntimeError):
    pass


class ZeroSingularValue(PcvError, ValueError):
    def __init__(self, component):
        self.component = component
        super().__init__(f"singular value of component {component} is zero")


class BadSegmentCount(PcvError, ValueError):
    def __init__(self, K, n):
        self.K, self.n = K, n
        super().__init__(f"number of segments K={K} must be in [2, {n}]")


class SegmentRankDeficient(PcvError, ValueError):
    def __init__(self, segment, ncomp):
        self.segment, self.ncomp = segment, ncomp
        super().__init__(
            f"local model for segment {segment} cannot supply {ncomp} components")


class DegenerateResidual(PcvError, ArithmeticError):
    def __init__(self, segment, row):
        self.segment, self.row = segment, row
        super().__init__(
            f"residual of row {row} (segment {segment}) vanishes in the global "
            "residual space and cannot be restored")


class RankDeficient(PcvError, ValueError):
    def __init__(self, component):
        self.component = component
        super().__init__(f"covariance collapsed before component {component}")


class ZeroYLoading(PcvError, ArithmeticError):
    def __init__(self, component):
        self.component = component
        super().__init__(f"y-loading of component {component} is zero")


class ClassTooSmall(PcvError, ValueError):
    def __init__(self, label, K):
        self.label, self.K = label, K
        super().__init__(f"class {label!r} has fewer than K={K} members")


class ShapeMismatch(PcvError, ValueError):
    pass


class UnknownLevel(PcvError, ValueError):
    def __init__(self, column, value):
        self.column, self.value = column, value
        super().__init__(f"value {value!r} is not a declared level of {column!r}")


class NonNumericCell(PcvError, ValueError):
    def __init__(self, column, row):
        self.column, self.row = column, row
        super().__init__(f"cell in column {column!r}, row {row} is not a finite number")


class ParseError(PcvError, ValueError):
    def __init__(self, message, row=None, col=None):
        self.row, self.col = row, col
        super().__init__(message)


class SchemaMismatch(PcvError, ValueError):
    pass


class DivergedLoss(PcvError, FloatingPointError):
    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"loss became non-finite at epoch {epoch}")


class CRatioExceeded(UserWarning):
    """Some |c_k/c| ratio of a PLS PV-set falls outside the recommended range."""
