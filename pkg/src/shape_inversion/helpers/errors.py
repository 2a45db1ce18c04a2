"""Exceptions raised by the inversion library.

Commands catch :class:`InversionError` and report it; library code never prints.
"""


class InversionError(Exception):
    """Base class for every error raised by shape_inversion."""


class DomainError(InversionError, ValueError):
    """An argument lies outside the domain where a function is defined."""


class KernelDomainError(DomainError):
    """A kernel was evaluated below threshold or at a singular point."""


class AnsatzError(InversionError, ValueError):
    """A ShapeAnsatz is invalid or one of its constraints cannot be enforced."""


class QuadratureError(InversionError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes:
        estimate: The best estimate of the integral obtained before giving up.
        error_bound: The error estimate reported for that value.
    """

    def __init__(self, message, estimate=float("nan"), error_bound=float("inf")):
        """Store the partial result alongside the message."""
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class FitError(InversionError):
    """The least-squares fit could not produce any valid candidate."""


class GalerkinError(InversionError):
    """The truncated Galerkin solution could not be built."""


class MetricError(InversionError, ValueError):
    """A relative-deviation metric hit a zero denominator."""


class InputFileError(InversionError):
    """A sampled input file or its sidecar is inconsistent."""
