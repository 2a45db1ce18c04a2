"""The standard inversion used as a baseline: a truncated basis expansion fitted linearly.

The solution is expanded as ``f_N(E) = sum_n c_n E**(n - 1/2) exp(-alpha E)``. The coefficients come from weighted
linear least squares against the sampled transform, and the basis size N is the only regularization.
"""
# Standard Library
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import threading

# Third Party
import numpy as np
from scipy.integrate import quad_vec
import scipy.linalg
from scipy.optimize import minimize_scalar
from scipy.special import gamma as gamma_fn

# Application Specific
from .errors import DomainError, QuadratureError
from .kernels import KernelFamily, kernel_K
from .metrics import chi_fit as chi_fit_metric

ALPHA_XATOL = 1e-5
CACHE_LIMIT = 4096

_transform_cache = {}
_cache_lock = threading.Lock()


def basis_fn(n, alpha, energy):
    """Evaluate E**(n - 1/2) exp(-alpha E), with E measured from threshold."""
    if n < 1:
        raise DomainError(f"Basis index starts at 1, got {n}")
    energy = np.asarray(energy, dtype=float)
    if np.any(energy < 0):
        raise DomainError("The basis is defined for E >= 0")
    values = energy ** (n - 0.5) * np.exp(-alpha * energy)
    return float(values) if values.ndim == 0 else values


def alpha_grid(alpha_min=0.01, alpha_max=2.0, points=40):
    """Log-spaced scale parameters in 1/MeV."""
    return np.geomspace(alpha_min, alpha_max, points)


@dataclass
class BasisExpansion:
    """A fitted expansion f_N.

    Attributes:
        n_basis: Number of basis functions N.
        alpha: Scale parameter in 1/MeV.
        coeffs: Coefficients c_1..c_N.
        e_thr: Threshold the basis is measured from.
    """
    n_basis: int
    alpha: float
    coeffs: np.ndarray
    e_thr: float = 0.0

    def __post_init__(self):
        """Check the invariants."""
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.n_basis < 1 or len(self.coeffs) != self.n_basis:
            raise DomainError(f"Expected {self.n_basis} coefficients, got {len(self.coeffs)}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    def evaluate(self, energy):
        """Evaluate f_N at energies at or above threshold."""
        delta = np.asarray(energy, dtype=float) - self.e_thr
        total = sum(c * basis_fn(n, self.alpha, delta) for n, c in enumerate(self.coeffs, start=1))
        return float(total) if np.ndim(total) == 0 else total

    def to_json(self):
        """Return a JSON-ready dictionary."""
        return {"N": self.n_basis, "alpha": self.alpha, "coeffs": [float(c) for c in self.coeffs],
                "E_thr": self.e_thr}


def _cache_key(spec, sigma, n, alpha):
    return (spec.family.value, spec.sigma_i, spec.e_thr, tuple(np.round(sigma, 12)), float(alpha), int(n))


def basis_transform(spec, sigma, n, alpha):
    """Transform of the n-th basis function at every point of ``sigma``.

    Laplace transforms are closed form; the others use vector-valued adaptive quadrature in t with E = t**2.
    Results are cached per (kernel, sigma, n, alpha); the cache is safe for concurrent use and holds at most
    ``CACHE_LIMIT`` entries, dropping the oldest first.
    """
    sigma = np.asarray(sigma, dtype=float)
    key = _cache_key(spec, sigma, n, alpha)
    with _cache_lock:
        if key in _transform_cache:
            return _transform_cache[key]

    if spec.family is KernelFamily.LAPLACE:
        values = gamma_fn(n + 0.5) * np.exp(-sigma * spec.e_thr) / (sigma + alpha) ** (n + 0.5)
    else:
        def integrand(t):
            if t <= 0.0:
                return np.zeros_like(sigma)
            weight = 2.0 * math.exp(2 * n * math.log(t) - alpha * t * t)
            return kernel_K(spec, sigma, spec.e_thr + t * t) * weight

        width = spec.sigma_i or 0.0
        t_cut = math.sqrt(max(spec.sigma_range[1] - spec.e_thr, 0.0) + 5.0 * width + (n + 10.0) / alpha)
        values = np.zeros_like(sigma)
        for lo, hi in ((0.0, t_cut), (t_cut, math.inf)):
            part, error = quad_vec(integrand, lo, hi, epsabs=0.0, epsrel=1e-11, norm="max", limit=2000)
            if not np.all(np.isfinite(part)):
                raise QuadratureError(f"Basis transform n={n}, alpha={alpha} is not finite", estimate=part,
                                      error_bound=error)
            values = values + part

    values.setflags(write=False)
    with _cache_lock:
        while len(_transform_cache) >= CACHE_LIMIT:
            del _transform_cache[next(iter(_transform_cache))]
        _transform_cache[key] = values
    return values


def clear_transform_cache():
    """Forget every cached basis transform."""
    with _cache_lock:
        _transform_cache.clear()


@dataclass
class StandardFit:
    """Outcome of the standard inversion at one basis size.

    Attributes:
        expansion: The fitted expansion at the best alpha.
        chi_fit: RMS relative deviation between input and model.
        objective: Weighted sum of squared residuals.
        model: Model transform on the input grid.
        rank: Numerical rank of the weighted design matrix.
        condition: 2-norm condition number of the weighted design matrix.
    """
    expansion: BasisExpansion
    chi_fit: float
    objective: float
    model: np.ndarray
    rank: int
    condition: float

    @property
    def rank_deficient(self):
        """True when the design matrix lost rank."""
        return self.rank < self.expansion.n_basis


def _solve_at_alpha(sampled, n_basis, alpha):
    design = np.column_stack([basis_transform(sampled.spec, sampled.sigma, n, alpha)
                              for n in range(1, n_basis + 1)])
    sqrt_w = np.sqrt(sampled.weights)
    weighted = sqrt_w[:, None] * design
    target = sqrt_w * sampled.phi
    # Unit column norms before the SVD cutoff
    norms = np.linalg.norm(weighted, axis=0)
    norms[norms == 0.0] = 1.0
    scaled, _, rank, singular = scipy.linalg.lstsq(weighted / norms, target, lapack_driver="gelsd")
    coeffs = scaled / norms
    objective = float(np.sum((target - weighted @ coeffs) ** 2))
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else math.inf
    return alpha, coeffs, design @ coeffs, objective, int(rank), condition


def _refine_alpha(sampled, n_basis, alphas, best):
    """Minimize the objective over log alpha between the grid neighbours of ``best``."""
    grid = sorted(set(alphas))
    index = grid.index(best[0])
    lo, hi = grid[max(index - 1, 0)], grid[min(index + 1, len(grid) - 1)]
    if lo == hi:
        return best
    result = minimize_scalar(lambda x: _solve_at_alpha(sampled, n_basis, math.exp(x))[3],
                             bounds=(math.log(lo), math.log(hi)), method="bounded",
                             options={"xatol": ALPHA_XATOL})
    candidate = _solve_at_alpha(sampled, n_basis, math.exp(result.x))
    return candidate if candidate[3] < best[3] else best


def fit_standard(sampled, n_basis, alphas, threads=1, refine_alpha=True):
    """Fit the N-term expansion at every alpha and keep the alpha with the smallest objective.

    The linear problems are solved by SVD-based least squares on the weighted design matrix with unit column norms,
    never through the normal equations. Rank loss is reported through :attr:`StandardFit.rank` and the least-norm
    solution is kept. With ``refine_alpha`` the best grid alpha is polished by a bounded scalar minimization in
    log alpha between its grid neighbours.

    Args:
        sampled: The input.
        n_basis: Number of basis functions N.
        alphas: Candidate scale parameters.
        threads: Worker threads for the alpha sweep.
        refine_alpha: Minimize over alpha between the grid points around the best one.
    """
    alphas = [float(a) for a in alphas]

    def solve(alpha):
        return _solve_at_alpha(sampled, n_basis, alpha)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solutions = list(pool.map(solve, alphas))
    else:
        solutions = [solve(alpha) for alpha in alphas]
    best = min(solutions, key=lambda s: (s[3], s[0]))
    if refine_alpha:
        best = _refine_alpha(sampled, n_basis, alphas, best)
    alpha, coeffs, model, objective, rank, condition = best
    expansion = BasisExpansion(n_basis, alpha, coeffs, sampled.spec.e_thr)
    return StandardFit(expansion, chi_fit_metric(sampled.phi, model), objective, model, rank, condition)


def sweep_standard(sampled, n_list, alphas, threads=1, progress=None, refine_alpha=True):
    """Run :func:`fit_standard` for every basis size in ``n_list``.

    Each size also tries the alpha chosen for the previous one, so the objective cannot grow with N when the sizes
    are listed in increasing order. The basis-transform cache is cleared afterwards.
    """
    fits = []
    alphas = [float(a) for a in alphas]
    try:
        for n_basis in n_list:
            if progress:
                progress(f"Standard inversion with N={n_basis}")
            candidates = alphas if not fits else sorted(set(alphas) | {fits[-1].expansion.alpha})
            fits.append(fit_standard(sampled, n_basis, candidates, threads, refine_alpha))
    finally:
        clear_transform_cache()
    return fits
