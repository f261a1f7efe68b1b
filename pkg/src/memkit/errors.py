"""Exception types raised across memkit."""


class MemError(Exception):
    """Base class for all memkit errors."""


# data validation / ingestion
class EmptyIntersection(MemError, ValueError):
    pass


class NegativeValue(MemError, ValueError):
    pass


class MismatchedReturns(MemError, ValueError):
    pass


class ParseError(MemError, ValueError):
    def __init__(self, row: int, column: str, message: str = ""):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {message or 'cannot parse'}")


class DuplicateDate(MemError, ValueError):
    pass


class StationarityError(MemError, ValueError):
    """Parameters outside the mean-stationary region."""


# smoothing
class DegenerateWeights(MemError, FloatingPointError):
    pass


class ZeroVariance(MemError, ValueError):
    pass


# estimation
class NonPositiveXi(MemError, FloatingPointError):
    def __init__(self, row: int, series: int = 0):
        self.row = row
        self.series = series
        super().__init__(f"non-positive xi at row {row}, series {series}")


class NoConvergence(MemError, RuntimeError):
    def __init__(self, max_iter: int, final_gradient_norm: float):
        self.max_iter = max_iter
        self.final_gradient_norm = final_gradient_norm
        super().__init__(
            f"no convergence after {max_iter} iterations "
            f"(gradient max-norm {final_gradient_norm:.3e})"
        )


class SingularA(MemError, ArithmeticError):
    pass


class SingularSigma(MemError, ArithmeticError):
    pass


class SingularSubmatrix(MemError, ArithmeticError):
    pass


class NoOuterConvergence(UserWarning):
    """Warning: the alternating estimator hit its iteration cap."""


# distributions / tests
class UnattainableVariance(MemError, ValueError):
    pass


class TooFewObservations(MemError, ValueError):
    pass


class NonPositiveDf(MemError, ValueError):
    pass


class SingularC0(MemError, ArithmeticError):
    pass


class ConstantSeries(MemError, ValueError):
    pass


class InvalidSpec(MemError, ValueError):
    pass
