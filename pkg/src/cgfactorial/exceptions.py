"""Exception and warning types raised by cgfactorial."""


class CGFactorialError(Exception):
    """Base class for all package errors."""


class DataValidationError(CGFactorialError, ValueError):
    """Malformed survival data: empty groups, bad status codes, bad times."""


class CopulaDomainError(CGFactorialError, ValueError):
    """A copula parameter or generator argument lies outside its domain."""


class NonArchimedeanError(CGFactorialError, ValueError):
    """The copula has no generator (FGM), so it cannot drive a CG estimate."""


class TauValidityError(CGFactorialError, ValueError):
    """The follow-up end lies beyond the range where a survival curve is defined."""


class InsufficientSampleError(CGFactorialError, ValueError):
    """A group is too small for the requested computation."""


class ContrastError(CGFactorialError, ValueError):
    """A matrix is not a valid contrast for the design."""


class DegenerateTestError(CGFactorialError, ArithmeticError):
    """The covariance gives the hypothesis no variance to test against."""


class TiesWarning(UserWarning):
    """Tied observation times were found; the CG theory assumes none."""
