"""The shape-constrained ansatz for the derivative of the solution.

The derivative is written as::

    f'(E) = C (E - E_thr)**(nu - 1) * prod_i (E - E_i) * exp(gamma(E)) / (E / Ebar + 1)**beta

with ``gamma(E) = x / (x + 1) * sum_k c_k / (x + 1)**k`` and ``x = (E - E_thr) / Ebar``. The number of interior
roots fixes the number of extrema of f. One root is eliminated so that f vanishes at infinity, and C is either
fixed by a sum rule or solved for by linear least squares.
"""
# Standard Library
from dataclasses import dataclass, replace
import math

# Third Party
import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import beta as beta_fn, betainc

# Application Specific
from .errors import AnsatzError, DomainError
from .quadrature import integrate_semi_infinite

MAX_GAMMA_TERMS = 4


@dataclass(frozen=True)
class ShapeAnsatz:
    """Parameters of the derivative ansatz.

    Attributes:
        amplitude: The overall factor C.
        roots: The N roots E_i of f'. Their count is the number of extrema of f.
        ebar: The energy scale Ebar (MeV).
        beta: Asymptotic exponent of the envelope.
        gamma_coeffs: Coefficients c_k of the next-to-leading correction gamma(E).
        nu: Threshold exponent; f' behaves like (E - E_thr)**(nu - 1) near threshold.
        e_thr: Threshold energy.
    """
    amplitude: float
    roots: tuple
    ebar: float
    beta: float
    gamma_coeffs: tuple = ()
    nu: float = 0.5
    e_thr: float = 0.0

    def __post_init__(self):
        """Coerce field types and reject parameter sets with divergent normalization integrals."""
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "roots", tuple(float(r) for r in np.atleast_1d(self.roots)))
        object.__setattr__(self, "gamma_coeffs", tuple(float(c) for c in self.gamma_coeffs))
        for name in ("ebar", "beta", "nu", "e_thr"):
            object.__setattr__(self, name, float(getattr(self, name)))

        if self.n_extrema < 1:
            raise AnsatzError("The ansatz needs at least one root")
        if not all(math.isfinite(r) for r in self.roots):
            raise AnsatzError(f"Roots must be finite, got {self.roots}")
        if not (math.isfinite(self.ebar) and self.ebar > 0):
            raise AnsatzError(f"Ebar must be positive, got {self.ebar}")
        if not self.nu > 0:
            raise AnsatzError(f"The threshold exponent must be positive, got {self.nu}")
        if len(self.gamma_coeffs) > MAX_GAMMA_TERMS:
            raise AnsatzError(f"At most {MAX_GAMMA_TERMS} gamma coefficients are supported")
        if not self.beta > self.n_extrema + self.nu:
            raise AnsatzError(f"beta={self.beta} must exceed N + nu = {self.n_extrema + self.nu} "
                              "for f' to be integrable")

    @property
    def n_extrema(self):
        """The number of roots N."""
        return len(self.roots)

    @property
    def has_gamma(self):
        """True when any gamma coefficient is nonzero."""
        return any(c != 0.0 for c in self.gamma_coeffs)

    @property
    def supports_sum_rule(self):
        """True when the first moment of f' converges."""
        return self.beta > self.n_extrema + self.nu + 1

    def to_json(self):
        """Return the flat JSON form."""
        return {
            "C": self.amplitude,
            "roots": list(self.roots),
            "Ebar": self.ebar,
            "beta": self.beta,
            "gamma_coeffs": list(self.gamma_coeffs),
            "threshold_exponent": self.nu,
            "E_thr": self.e_thr,
            "N": self.n_extrema,
        }

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`."""
        roots = data["roots"]
        if "N" in data and data["N"] != len(roots):
            raise AnsatzError(f"N={data['N']} does not match the {len(roots)} roots given")
        return cls(data["C"], tuple(roots), data["Ebar"], data["beta"], tuple(data.get("gamma_coeffs", ())),
                   data.get("threshold_exponent", 0.5), data.get("E_thr", 0.0))


def _gamma(a, delta):
    x = delta / a.ebar
    total = np.zeros_like(x)
    for k, c in enumerate(a.gamma_coeffs):
        total = total + c / (x + 1.0) ** k
    return x / (x + 1.0) * total


def _envelope(a, energy):
    """Everything but C and the root factors, evaluated in log space."""
    delta = energy - a.e_thr
    log_env = (a.nu - 1.0) * np.log(delta) - a.beta * np.log1p(energy / a.ebar)
    if a.gamma_coeffs:
        log_env = log_env + _gamma(a, delta)
    return np.exp(log_env)


def eval_fprime(a, energy):
    """Evaluate f'(E) for scalars or arrays.

    Raises:
        DomainError: Any E is at or below threshold.
    """
    energy = np.asarray(energy, dtype=float)
    if np.any(energy <= a.e_thr):
        raise DomainError(f"f' is evaluated strictly above threshold E_thr={a.e_thr}")
    values = a.amplitude * _envelope(a, energy)
    for root in a.roots:
        values = values * (energy - root)
    if values.ndim == 0:
        return float(values)
    return values


def _delta_polynomial(a, power=0, drop_root=None):
    """The root product times E**power as a polynomial in (E - E_thr)."""
    shifted = [r - a.e_thr for i, r in enumerate(a.roots) if i != drop_root]
    poly = Polynomial.fromroots(shifted) if shifted else Polynomial([1.0])
    return poly * Polynomial([a.e_thr, 1.0]) ** power


def _closed_form_parts(a):
    """Return (prefactor, L) such that (E/Ebar + 1)**-beta = prefactor * (1 + dE/L)**-beta."""
    shift = 1.0 + a.e_thr / a.ebar
    return shift ** -a.beta, a.ebar * shift


def semi_infinite_moment(a, power=0, drop_root=None):
    """Integrate E**power times f'/C over (E_thr, infinity), optionally with one root factor removed.

    Without gamma the integral reduces to complete Beta functions; otherwise it is done by adaptive quadrature with
    an absolute tolerance of 1e-12 times the L1 norm of the integrand.
    """
    poly = _delta_polynomial(a, power, drop_root)
    if poly.degree() + a.nu >= a.beta:
        raise AnsatzError(f"Moment of order {power} diverges for beta={a.beta}")

    if not a.has_gamma:
        prefactor, length = _closed_form_parts(a)
        total = 0.0
        for k, coef in enumerate(poly.coef):
            p = a.nu + k
            total += coef * length ** p * beta_fn(p, a.beta - p)
        return prefactor * total

    def integrand(energy):
        delta = energy - a.e_thr
        return float(poly(delta) * _envelope(a, energy))

    splits = [r for i, r in enumerate(a.roots) if i != drop_root] + [a.ebar + a.e_thr]
    l1_norm = integrate_semi_infinite(lambda e: abs(integrand(e)), a.e_thr, splits, epsabs=0.0, epsrel=1e-8)
    return integrate_semi_infinite(integrand, a.e_thr, splits, epsabs=1e-12 * l1_norm, epsrel=1e-12)


def eliminate_root(a, which=0):
    """Replace ``roots[which]`` so that f' integrates to zero over (E_thr, infinity).

    The integral is linear in any single root, so the new root is the ratio M1 / M0 of the first two moments of the
    integrand with that root factor deleted.

    Raises:
        AnsatzError: The zeroth moment vanishes.
    """
    m0 = semi_infinite_moment(a, power=0, drop_root=which)
    if m0 == 0.0 or not math.isfinite(m0):
        raise AnsatzError("Cannot eliminate a root: the reduced integrand has zero or undefined norm")
    m1 = semi_infinite_moment(a, power=1, drop_root=which)
    roots = list(a.roots)
    roots[which] = m1 / m0
    return replace(a, roots=tuple(roots))


def normalize_C(a, sum_rule):  # noqa: N802
    """Set C so that -integral E f'(E) dE, which equals integral f dE, matches ``sum_rule``.

    Raises:
        AnsatzError: The first moment diverges (beta <= N + nu + 1) or vanishes.
    """
    if not a.supports_sum_rule:
        raise AnsatzError(f"The sum rule needs beta > N + nu + 1 = {a.n_extrema + a.nu + 1}, got {a.beta}")
    moment = semi_infinite_moment(a, power=1)
    if moment == 0.0 or not math.isfinite(moment):
        raise AnsatzError("Cannot normalize: the first moment of f' vanishes")
    return replace(a, amplitude=-sum_rule / moment + 0.0)


def zeroth_moment(a):
    """Return integral f'(E) dE, i.e. f(infinity)."""
    return a.amplitude * semi_infinite_moment(a, power=0)


def sum_rule_value(a):
    """Return -integral E f'(E) dE."""
    return -a.amplitude * semi_infinite_moment(a, power=1)


def eval_f(a, energy):
    """Reconstruct f(E) as the integral of f' from threshold.

    Without gamma this uses regularized incomplete Beta functions; otherwise adaptive quadrature per point.
    ``f(E_thr)`` is exactly zero.

    Raises:
        DomainError: Any E is below threshold.
    """
    energy = np.asarray(energy, dtype=float)
    if np.any(energy < a.e_thr):
        raise DomainError(f"f is defined from threshold E_thr={a.e_thr} upward")
    delta = energy - a.e_thr

    if not a.has_gamma:
        prefactor, length = _closed_form_parts(a)
        ratio = delta / length
        with np.errstate(invalid="ignore"):
            y = np.where(np.isinf(ratio), 1.0, ratio / (1.0 + ratio))
        total = np.zeros_like(delta)
        for k, coef in enumerate(_delta_polynomial(a).coef):
            p = a.nu + k
            total = total + coef * length ** p * beta_fn(p, a.beta - p) * betainc(p, a.beta - p, y)
        values = a.amplitude * prefactor * total
    else:
        flat = np.array([_f_by_quadrature(a, e) for e in delta.ravel()])
        values = flat.reshape(delta.shape)
    if values.ndim == 0:
        return float(values)
    return values


def _f_by_quadrature(a, delta):
    if delta == 0.0:
        return 0.0
    upper = a.e_thr + delta
    scale = integrate_semi_infinite(lambda e: abs(eval_fprime(a, e)), a.e_thr, a.roots, upper=upper,
                                    epsabs=0.0, epsrel=1e-8)
    return integrate_semi_infinite(lambda e: eval_fprime(a, e), a.e_thr, a.roots, upper=upper,
                                   epsabs=1e-13 * max(scale, 1e-300), epsrel=1e-12)


def count_sign_changes(a, domain=None):
    """Count the roots strictly inside ``domain``; f' changes sign exactly there.

    Args:
        a: The ansatz.
        domain: Open interval (lo, hi). Defaults to (E_thr, infinity).
    """
    lo, hi = domain if domain is not None else (a.e_thr, math.inf)
    return sum(1 for r in a.roots if lo < r < hi)
