"""Apply the integrated kernel to the ansatz derivative on a grid of evaluation points."""
# Standard Library
from dataclasses import dataclass

# Third Party
import numpy as np

# Application Specific
from .ansatz import eval_fprime, sum_rule_value
from .errors import InputFileError
from .kernels import KernelFamily, kernel_Ktilde, sigma_grid
from .quadrature import (DEFAULT_MAX_PANELS, DEFAULT_ORDER, DEFAULT_START_PANELS, integrate_semi_infinite,
                         mapped_rule, resolve_rule)
from .sample_io import read_columns, write_columns

__all__ = ["TransformCurve", "TransformOperator", "apply_ktilde", "integrate_semi_infinite", "transform_scale",
           "resolve_operator"]

DEFAULT_TOLERANCE = 1e-11


@dataclass
class TransformCurve:
    """A sampled transform.

    Attributes:
        sigma: Strictly increasing evaluation points.
        values: Transform values at ``sigma``.
        family: The kernel family the values belong to.
        rule: The quadrature rule the values were computed with, if any.
    """
    sigma: np.ndarray
    values: np.ndarray
    family: KernelFamily
    rule: object = None

    def __post_init__(self):
        """Check the invariants."""
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.family = KernelFamily(self.family)
        if len(self.sigma) != len(self.values):
            raise InputFileError("sigma and values must have equal lengths")
        if np.any(np.diff(self.sigma) <= 0):
            raise InputFileError("sigma must be strictly increasing")

    def to_csv(self, path):
        """Write the curve as a two-column CSV."""
        write_columns(path, ["sigma", "value"], [self.sigma, self.values])

    @classmethod
    def from_csv(cls, path, family):
        """Read a curve written by :meth:`to_csv`."""
        _, columns = read_columns(path)
        return cls(columns[0], columns[1], family)


class TransformOperator:
    """The integrated kernel discretized on a fixed quadrature rule.

    The matrix holds ``(Ktilde(sigma_i, E_j) - Ktilde(sigma_i, E_thr)) * w_j``. Subtracting the threshold value
    changes nothing for an ansatz whose derivative integrates to zero, and removes the large constant part of the
    Stieltjes logarithm. For Laplace the z = 0 row is identically zero.
    """

    def __init__(self, spec, sigma, rule):
        """Tabulate the kernel on ``rule``."""
        self.spec = spec
        self.sigma = np.asarray(sigma, dtype=float)
        self.rule = rule
        nodes = rule.nodes
        at_threshold = np.asarray(kernel_Ktilde(spec, self.sigma, np.full_like(self.sigma, spec.e_thr)))
        kernel = np.asarray(kernel_Ktilde(spec, self.sigma[:, None], nodes[None, :]))
        self.matrix = (kernel - at_threshold[:, None]) * rule.weights[None, :]

    def apply_values(self, fprime_values):
        """Apply the operator to f' sampled at the rule nodes."""
        return self.matrix @ fprime_values

    def apply(self, a):
        """Apply the operator to an ansatz."""
        return self.apply_values(eval_fprime(a, self.rule.nodes))


def transform_scale(a):
    """Magnitude that tolerances on transform values are measured against.

    This is the sum rule when the first moment exists, and the L1 norm of f' otherwise.
    """
    if a.supports_sum_rule:
        value = abs(sum_rule_value(a))
        if value > 0:
            return value
    probe = mapped_rule(a.e_thr, a.ebar, DEFAULT_START_PANELS)
    return float(probe.integrate(np.abs(eval_fprime(a, probe.nodes)))) or 1.0


def _rule_scale(a):
    """Map length: the energy where the envelope turns over."""
    return a.ebar * (1.0 + a.e_thr / a.ebar)


def resolve_operator(a, spec, sigma=None, tol=DEFAULT_TOLERANCE, start_panels=DEFAULT_START_PANELS,
                     max_panels=DEFAULT_MAX_PANELS, order=DEFAULT_ORDER):
    """Find a rule on which the transform of ``a`` is converged and build the operator on it.

    Args:
        a: The reference ansatz.
        spec: The kernel.
        sigma: Evaluation points. Defaults to ``sigma_grid(spec)``.
        tol: Relative tolerance, measured against :func:`transform_scale`.
        start_panels: Panels of the first rule tried.
        max_panels: Largest rule tried before raising QuadratureError.
        order: Gauss-Legendre order per panel.
    """
    sigma = sigma_grid(spec) if sigma is None else np.asarray(sigma, dtype=float)
    start = mapped_rule(a.e_thr, _rule_scale(a), start_panels, order)
    rule, _ = resolve_rule(lambda r: TransformOperator(spec, sigma, r).apply(a), start, tol * transform_scale(a),
                           max_panels=max_panels)
    return TransformOperator(spec, sigma, rule)


def apply_ktilde(a, spec, sigma=None, tol=DEFAULT_TOLERANCE, rule=None):
    """Integrate Ktilde(sigma_i, E) f'(E) over E for every sigma_i.

    For the Laplace family the result is the integral of exp(-z E) f'(E), to be compared against z * Phi(z).

    Args:
        a: A constrained ansatz.
        spec: The kernel.
        sigma: Evaluation points. Defaults to ``sigma_grid(spec)``.
        tol: Relative tolerance per point, measured against :func:`transform_scale`.
        rule: Use this quadrature rule as is instead of resolving one.
    """
    sigma = sigma_grid(spec) if sigma is None else np.asarray(sigma, dtype=float)
    if rule is None:
        operator = resolve_operator(a, spec, sigma, tol)
    else:
        operator = TransformOperator(spec, sigma, rule)
    return TransformCurve(sigma, operator.apply(a), spec.family, operator.rule)

