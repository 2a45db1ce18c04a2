"""Transform kernels K(sigma, E) and their integrated forms.

The integrated kernel is defined as minus the antiderivative of K with respect to E. It is what the derivative-form
equation ``integral Ktilde(sigma, E) f'(E) dE = Phi(sigma)`` uses. For the Laplace family the right-hand side of that
equation is ``z * Phi(z)``, so its integrated kernel is the plain exponential.
"""
# Standard Library
from dataclasses import dataclass
from enum import Enum
import math

# Third Party
import numpy as np

# Application Specific
from .errors import KernelDomainError

DEFAULT_N_SAMPLES = 100
LORENTZ_RANGE = (-2.0, 41.4)
STIELTJES_WIDTH = 41.4
LAPLACE_Z_MAX = 1.9304


class KernelFamily(str, Enum):
    """The transforms we know how to invert."""

    LORENTZ = "lorentz"
    STIELTJES = "stieltjes"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class KernelSpec:
    """A transform family together with the range of its evaluation variable.

    Attributes:
        family: Which transform.
        sigma_range: Closed interval (lo, hi) of sigma_R (Lorentz, MeV), s (Stieltjes, MeV) or z (Laplace, 1/MeV).
        sigma_i: Width of the Lorentz kernel in MeV. Unused by the other families.
        n_samples: Number of evaluation points on ``sigma_range``.
        e_thr: Threshold energy below which the solution vanishes.
    """
    family: KernelFamily
    sigma_range: tuple
    sigma_i: float = None
    n_samples: int = DEFAULT_N_SAMPLES
    e_thr: float = 0.0

    def __post_init__(self):
        """Normalize the field types and check the per-family invariants."""
        object.__setattr__(self, "family", KernelFamily(self.family))
        lo, hi = (float(v) for v in self.sigma_range)
        object.__setattr__(self, "sigma_range", (lo, hi))
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "e_thr", float(self.e_thr))
        if self.sigma_i is not None:
            object.__setattr__(self, "sigma_i", float(self.sigma_i))

        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise KernelDomainError(f"sigma_range must be a finite interval, got ({lo}, {hi})")
        if self.n_samples < 2:
            raise KernelDomainError(f"n_samples must be at least 2, got {self.n_samples}")
        if self.family is KernelFamily.LORENTZ:
            if self.sigma_i is None or not self.sigma_i > 0:
                raise KernelDomainError(f"The Lorentz kernel needs sigma_i > 0, got {self.sigma_i}")
        elif self.family is KernelFamily.STIELTJES:
            if not hi < self.e_thr:
                raise KernelDomainError(f"The Stieltjes transform exists only for s < {self.e_thr}, got s_max={hi}")
        elif lo < 0:
            raise KernelDomainError(f"Laplace z values must be non-negative, got z_min={lo}")

    @classmethod
    def lorentz(cls, sigma_i, sigma_range=LORENTZ_RANGE, n_samples=DEFAULT_N_SAMPLES, e_thr=0.0):
        """Build a normalized Lorentz kernel of width ``sigma_i``."""
        return cls(KernelFamily.LORENTZ, sigma_range, sigma_i=sigma_i, n_samples=n_samples, e_thr=e_thr)

    @classmethod
    def stieltjes(cls, s_max=-2.0, width=STIELTJES_WIDTH, n_samples=DEFAULT_N_SAMPLES, e_thr=0.0):
        """Build a Stieltjes kernel sampled on [s_max - width, s_max]."""
        return cls(KernelFamily.STIELTJES, (s_max - width, s_max), n_samples=n_samples, e_thr=e_thr)

    @classmethod
    def laplace(cls, z_max=LAPLACE_Z_MAX, n_samples=DEFAULT_N_SAMPLES, e_thr=0.0):
        """Build a Laplace kernel sampled on [0, z_max]."""
        return cls(KernelFamily.LAPLACE, (0.0, z_max), n_samples=n_samples, e_thr=e_thr)

    def to_json(self):
        """Return a JSON-ready dictionary."""
        return {
            "family": self.family.value,
            "sigma_range": list(self.sigma_range),
            "sigma_I": self.sigma_i,
            "n_samples": self.n_samples,
            "E_thr": self.e_thr,
        }

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`."""
        return cls(data["family"], tuple(data["sigma_range"]), sigma_i=data.get("sigma_I"),
                   n_samples=data.get("n_samples", DEFAULT_N_SAMPLES), e_thr=data.get("E_thr", 0.0))


def _as_output(values):
    """Return a float for 0-d results, the array otherwise."""
    if np.ndim(values) == 0:
        return float(values)
    return values


def _check_domain(spec, sigma, energy):
    sigma = np.asarray(sigma, dtype=float)
    energy = np.asarray(energy, dtype=float)
    if np.any(energy < spec.e_thr):
        raise KernelDomainError(f"Kernel evaluated below threshold E_thr={spec.e_thr}: min E={np.min(energy)}")
    if spec.family is KernelFamily.STIELTJES and np.any(energy - sigma <= 0):
        raise KernelDomainError("Stieltjes kernel evaluated at E - s <= 0")
    return sigma, energy


def kernel_K(spec, sigma, energy):
    """Evaluate the transform kernel K(sigma, E).

    Scalars and numpy arrays are both accepted; arrays broadcast against each other.

    Args:
        spec: The KernelSpec naming the family and its width.
        sigma: sigma_R for Lorentz, s for Stieltjes, z for Laplace.
        energy: Energy E >= E_thr.
    """
    sigma, energy = _check_domain(spec, sigma, energy)
    if spec.family is KernelFamily.LORENTZ:
        values = (spec.sigma_i / np.pi) / ((sigma - energy) ** 2 + spec.sigma_i ** 2)
    elif spec.family is KernelFamily.STIELTJES:
        values = 1.0 / (energy - sigma)
    else:
        values = np.exp(-sigma * energy)
    return _as_output(values)


def kernel_Ktilde(spec, sigma, energy):  # noqa: N802
    """Evaluate the integrated kernel used by the derivative-form equation.

    Lorentz gives ``-arctan((E - sigma_R) / sigma_I) / pi``, Stieltjes ``-ln(E - s)`` and Laplace ``exp(-z E)``.
    """
    sigma, energy = _check_domain(spec, sigma, energy)
    if spec.family is KernelFamily.LORENTZ:
        values = -np.arctan((energy - sigma) / spec.sigma_i) / np.pi
    elif spec.family is KernelFamily.STIELTJES:
        values = -np.log(energy - sigma)
    else:
        values = np.exp(-sigma * energy)
    return _as_output(values)


def sigma_grid(spec):
    """Return ``spec.n_samples`` uniformly spaced points covering ``spec.sigma_range`` inclusively."""
    lo, hi = spec.sigma_range
    return np.linspace(lo, hi, spec.n_samples)
