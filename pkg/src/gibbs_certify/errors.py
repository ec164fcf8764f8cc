"""Exception hierarchy shared by every module."""


class GibbsCertifyError(Exception):
    """Base class for all package errors."""


class DomainError(GibbsCertifyError, ValueError):
    """A point or parameter lies outside the represented domain."""


class ModelError(GibbsCertifyError, ValueError):
    """A model definition violates its invariants (negative mass, zero marginal, ...)."""


class NumericError(GibbsCertifyError, ArithmeticError):
    """A quadrature, summation or linear-algebra step missed its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class TruncationError(NumericError):
    """Truncated countable space loses more mass than the requested tolerance."""


class UnsupportedError(GibbsCertifyError, NotImplementedError):
    """The operation is not available for this kind of model or space."""


class CertificateError(GibbsCertifyError, ValueError):
    """A drift or minorization certificate cannot be issued or is invalid."""


class InfeasibleError(GibbsCertifyError):
    """No candidate in a parameter search gives a contracting bound.

    ``report`` is a dict naming the binding constraint and a few statistics
    of the search, suitable for printing.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
