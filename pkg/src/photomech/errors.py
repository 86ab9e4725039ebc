"""Exception hierarchy.

The CLI maps :class:`ParameterError` to exit code 2 and the numeric /
stability errors to exit code 3.
"""


class PhotomechError(Exception):
    """Base class for all package errors."""


class ParameterError(PhotomechError, ValueError):
    """Invalid or out-of-domain input parameters."""


class NumericError(PhotomechError, ArithmeticError):
    """A numerical routine failed to converge or produced an unphysical value."""


class StabilityError(NumericError):
    """The requested quantity is undefined because the linearized system is unstable."""
