"""Root-mean-square relative deviations used to judge inputs, fits and solutions."""
# Standard Library
from dataclasses import asdict, dataclass

# Third Party
import numpy as np
from scipy.integrate import quad

# Application Specific
from .errors import MetricError

DEFAULT_E_RANGE = (0.0, 42.0)
DEFAULT_N1 = 200


def _rms_relative(numerator, denominator, what, points=None):
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    if numerator.shape != denominator.shape:
        raise MetricError(f"{what}: arguments have different shapes {numerator.shape} and {denominator.shape}")
    zeros = np.flatnonzero(denominator == 0)
    if zeros.size:
        where = points[zeros[0]] if points is not None else zeros[0]
        raise MetricError(f"{what}: zero denominator at sample {where}")
    return float(np.sqrt(np.mean((numerator / denominator) ** 2)))


def solution_energies(e_range=DEFAULT_E_RANGE, n1=DEFAULT_N1):
    """The n1 uniform sample energies in e_range, left endpoint excluded."""
    lo, hi = e_range
    return np.linspace(lo, hi, n1 + 1)[1:]


def chi_solution(f_true, f_appr, e_range=DEFAULT_E_RANGE, n1=DEFAULT_N1):
    """RMS of (f_true - f_appr) / f_true over n1 uniform points in e_range, left endpoint excluded.

    Args:
        f_true: Callable giving the exact solution.
        f_appr: Callable giving the reconstructed solution.
        e_range: The energy interval.
        n1: Number of samples.
    """
    energies = solution_energies(e_range, n1)
    true_values = np.asarray(f_true(energies), dtype=float)
    return _rms_relative(true_values - np.asarray(f_appr(energies)), true_values, "chi_solution", energies)


def chi_input(phi_true, phi_appr):
    """RMS of (phi_true - phi_appr) / phi_appr."""
    phi_appr = np.asarray(phi_appr, dtype=float)
    return _rms_relative(np.asarray(phi_true) - phi_appr, phi_appr, "chi_input")


def chi_fit(phi_appr, model):
    """RMS of (phi_appr - model) / phi_appr."""
    phi_appr = np.asarray(phi_appr, dtype=float)
    return _rms_relative(phi_appr - np.asarray(model), phi_appr, "chi_fit")


def deviation_profile(f_true, f_appr, delta, e_range=DEFAULT_E_RANGE):
    """Integrate f_true - f_appr over consecutive windows of width ``delta``.

    Small residual transforms only bound such window integrals, so errors should look like narrow peaks rather
    than broad offsets.

    Returns:
        A list of ((lo, hi), |integral over the window|).
    """
    if not delta > 0:
        raise MetricError(f"The window width must be positive, got {delta}")
    lo, hi = e_range
    edges = np.arange(lo, hi, delta)
    profile = []
    for left in edges:
        right = min(left + delta, hi)
        value, _ = quad(lambda e: float(f_true(e) - f_appr(e)), left, right, limit=200)
        profile.append(((float(left), float(right)), abs(value)))
    return profile


@dataclass
class ChiReport:
    """The three quality measures of an inversion.

    ``chi_input`` and ``chi_solution`` are None when the exact transform or solution is unknown.
    """
    chi_fit: float
    chi_input: float = None
    chi_solution: float = None
    n1: int = DEFAULT_N1
    n2: int = 0
    e_range: tuple = DEFAULT_E_RANGE

    def to_json(self):
        """Return a JSON-ready dictionary."""
        data = asdict(self)
        data["e_range"] = list(self.e_range)
        return data
