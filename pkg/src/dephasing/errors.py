"""Exception types raised across the package."""


class DephasingError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DephasingError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DimensionMismatchError(DephasingError, ValueError):
    """Shapes, mode counts or dimensions do not agree."""


class CapExceededError(DephasingError, ValueError):
    """A requested dense matrix is larger than the configured cap."""


class SeriesNonConvergence(DephasingError, ArithmeticError):
    """An infinite series did not reach its tolerance within max_terms."""


class NonFiniteIntegrandError(DephasingError, FloatingPointError):
    """A quadrature integrand produced NaN or infinity at a node."""


class DivergentIntegralError(DephasingError, ArithmeticError):
    """A quadrature value failed to stabilise under node doubling."""


class DivergentEntropyError(DephasingError, ArithmeticError):
    """A differential entropy is (numerically) minus infinity."""


class JacobiNonConvergence(DephasingError, ArithmeticError):
    """The Jacobi eigensolver exhausted its sweep limit."""


class NegativeEigenvalueError(DephasingError, ArithmeticError):
    """A matrix expected to be PSD has a clearly negative eigenvalue."""


class InvariantViolation(DephasingError, AssertionError):
    """An output failed a structural invariant; this indicates a bug."""
