"""The free-particle s-wave test problem and the inputs derived from it.

The exact solution is ``f(E) = 4 / (pi E0 eta**3) * sqrt(x) / (1 + x)**4`` with ``x = E / E0`` and
``E0 = hbar**2 eta**2 / 2M``. Approximate Lorentz and Stieltjes inputs come from solving the driven equation
``-(hbar**2 / 2M) psi'' - s psi = r exp(-eta r)`` in a truncated Laguerre basis.
"""
# Standard Library
from dataclasses import dataclass
import math

# Third Party
import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, roots_laguerre

# Application Specific
from .ansatz import ShapeAnsatz
from .errors import DomainError, GalerkinError
from .kernels import KernelFamily, kernel_K, sigma_grid
from .quadrature import integrate_semi_infinite
from .sample_io import Provenance, SampledInput

HBAR2_OVER_2M = 20.7212603615
DEFAULT_B = 0.3


@dataclass(frozen=True)
class ModelProblem:
    """Constants of the model problem.

    Attributes:
        eta: Inverse range of the source (1/fm).
        hbar2_over_2m: hbar**2 / 2M in MeV fm**2.
    """
    eta: float = 1.0
    hbar2_over_2m: float = HBAR2_OVER_2M

    @property
    def e0(self):
        """The energy scale E0 in MeV."""
        return self.hbar2_over_2m * self.eta ** 2

    @property
    def sum_rule(self):
        """Integral of the exact solution, 1 / (4 eta**3)."""
        return 1.0 / (4.0 * self.eta ** 3)

    @property
    def e_thr(self):
        """The threshold is at zero energy."""
        return 0.0

    def to_json(self):
        """Return the sidecar block describing the problem."""
        return {"eta": self.eta, "hbar2_over_2M": self.hbar2_over_2m, "E0": self.e0, "S": self.sum_rule}

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`."""
        return cls(data["eta"], data["hbar2_over_2M"])


def exact_f(p, energy):
    """Evaluate the exact solution."""
    x = np.asarray(energy, dtype=float) / p.e0
    values = 4.0 / (math.pi * p.e0 * p.eta ** 3) * np.sqrt(x) / (1.0 + x) ** 4
    return float(values) if values.ndim == 0 else values


def exact_fprime(p, energy):
    """Derivative of :func:`exact_f`, defined for E > 0."""
    energy = np.asarray(energy, dtype=float)
    x = energy / p.e0
    values = 2.0 / (math.pi * p.e0 ** 1.5 * p.eta ** 3) / np.sqrt(energy) * (1.0 - 7.0 * x) / (1.0 + x) ** 5
    return float(values) if values.ndim == 0 else values


def exact_ansatz(p):
    """The ansatz parameters that reproduce the exact solution: one root at E0/7, Ebar=E0, beta=5."""
    amplitude = -14.0 / (math.pi * p.e0 ** 2.5 * p.eta ** 3)
    return ShapeAnsatz(amplitude, (p.e0 / 7.0,), p.e0, 5.0)


def _split_points(spec, sigma, extra=()):
    points = list(extra)
    if spec.family is KernelFamily.LORENTZ:
        for k in (-5, -1, 0, 1, 5):
            points.append(sigma + k * spec.sigma_i)
    elif spec.family is KernelFamily.LAPLACE and sigma > 0:
        points.append(1.0 / sigma)
    return points


def transform_by_quadrature(spec, func, sigma, extra_splits=(), epsrel=1e-12):
    """Integrate K(sigma_i, E) func(E) over (E_thr, infinity) for each sigma_i."""
    values = []
    for s in np.atleast_1d(sigma):
        s = float(s)
        values.append(integrate_semi_infinite(lambda e, s=s: kernel_K(spec, s, e) * func(e), spec.e_thr,
                                              _split_points(spec, s, extra_splits), epsabs=1e-15, epsrel=epsrel))
    return np.array(values)


def exact_input(p, spec):
    """Sample the exact transform on ``sigma_grid(spec)`` by quadrature to 1e-12 relative.

    Returns:
        A relatively weighted SampledInput with Exact provenance.
    """
    sigma = sigma_grid(spec)
    phi = transform_by_quadrature(spec, lambda e: exact_f(p, e), sigma, extra_splits=(p.e0 / 7.0, p.e0))
    return SampledInput.relative(sigma, phi, spec, Provenance.exact(), p.to_json())


@dataclass(frozen=True)
class GalerkinSolution:
    """Truncated solution of the driven equation in the orthonormal Laguerre basis.

    Attributes:
        n0: Number of basis functions.
        b: Basis length scale (fm).
        kinetic: The kinetic-energy matrix T (MeV).
        source: Projections g_n of the source r exp(-eta r).
        sigma: The evaluation points the coefficients were solved for.
        coeffs: One row of expansion coefficients per evaluation point; complex for Lorentz.
    """
    n0: int
    b: float
    kinetic: np.ndarray
    source: np.ndarray
    sigma: np.ndarray
    coeffs: np.ndarray


def basis_values(n0, b, r):
    """Evaluate the orthonormal basis functions phi_1..phi_n0 at radii ``r``. Returns shape (n0, len(r))."""
    x = np.asarray(r, dtype=float) / b
    rows = []
    for n in range(1, n0 + 1):
        norm = 1.0 / math.sqrt(n * (n + 1))
        rows.append(norm * b ** -0.5 * x * eval_genlaguerre(n - 1, 2, x) * np.exp(-x / 2.0))
    return np.array(rows)


def _laguerre_nodes(n0):
    return roots_laguerre(4 * n0 + 8)


def overlap_matrix(n0):
    """Overlap matrix of the basis by Gauss-Laguerre quadrature in x = r / b; the identity in exact arithmetic."""
    x, w = _laguerre_nodes(n0)
    poly = np.array([x * eval_genlaguerre(n - 1, 2, x) / math.sqrt(n * (n + 1)) for n in range(1, n0 + 1)])
    return (poly * w) @ poly.T


def kinetic_matrix(p, n0, b=DEFAULT_B):
    """T_mn = (hbar**2 / 2M) integral phi_m' phi_n' dr, by Gauss-Laguerre quadrature in x = r / b."""
    x, w = _laguerre_nodes(n0)
    rows = []
    for n in range(1, n0 + 1):
        lag = eval_genlaguerre(n - 1, 2, x)
        dlag = -eval_genlaguerre(n - 2, 3, x) if n > 1 else np.zeros_like(x)
        rows.append((lag + x * dlag - 0.5 * x * lag) / math.sqrt(n * (n + 1)))
    deriv = np.array(rows)
    return p.hbar2_over_2m / b ** 2 * ((deriv * w) @ deriv.T)


def source_vector(p, n0, b=DEFAULT_B):
    """g_n = sqrt(n (n + 1)) b**1.5 (q - 1)**(n - 1) / q**(n + 2) with q = 1/2 + eta b."""
    q = 0.5 + p.eta * b
    n = np.arange(1, n0 + 1)
    return np.sqrt(n * (n + 1.0)) * b ** 1.5 * (q - 1.0) ** (n - 1) / q ** (n + 2)


def galerkin_solution(p, spec, n0, b=DEFAULT_B):
    """Solve (T - s I) c = g at every evaluation point of ``spec``.

    Raises:
        GalerkinError: Unsupported family, bad basis size, or a singular system.
    """
    if n0 < 1:
        raise GalerkinError(f"The basis needs at least one function, got N0={n0}")
    if spec.family is KernelFamily.LAPLACE:
        raise GalerkinError("Galerkin inputs are only built for the Lorentz and Stieltjes transforms")
    kinetic = kinetic_matrix(p, n0, b)
    source = source_vector(p, n0, b)
    sigma = sigma_grid(spec)
    identity = np.eye(n0)
    coeffs = []
    try:
        for s in sigma:
            if spec.family is KernelFamily.LORENTZ:
                shifted = kinetic - complex(s, spec.sigma_i) * identity
                coeffs.append(scipy.linalg.solve(shifted, source.astype(complex)))
            else:
                coeffs.append(scipy.linalg.solve(kinetic - s * identity, source, assume_a="pos"))
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise GalerkinError(f"Galerkin system could not be solved: {e}") from e
    return GalerkinSolution(n0, b, kinetic, source, sigma, np.array(coeffs))


def galerkin_input(p, spec, n0, b=DEFAULT_B):
    """Approximate transform from the truncated Galerkin solution.

    Lorentz inputs are ``sigma_I / pi * sum |c_n|**2``, Stieltjes inputs ``sum c_n g_n``.
    """
    solution = galerkin_solution(p, spec, n0, b)
    if spec.family is KernelFamily.LORENTZ:
        phi = spec.sigma_i / math.pi * np.sum(np.abs(solution.coeffs) ** 2, axis=1)
    else:
        phi = solution.coeffs @ solution.source
    return SampledInput.relative(solution.sigma, phi, spec, Provenance.galerkin(n0, b), p.to_json())


def noisy_input(base, tau, seed):
    """Multiply every sample by (1 + tau * rho) with rho standard normal from a seeded generator.

    Raises:
        DomainError: ``tau`` is negative.
    """
    if tau < 0:
        raise DomainError(f"The noise level must be non-negative, got {tau}")
    if tau == 0:
        return base
    rng = np.random.default_rng(seed)
    phi = base.phi * (1.0 + tau * rng.standard_normal(len(base.phi)))
    return SampledInput.relative(base.sigma, phi, base.spec, Provenance.noisy(tau, seed, base.provenance),
                                  base.model_problem)
