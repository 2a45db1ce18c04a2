"""Tests for the transform kernels."""
# Standard Library
import math

# Third Party
import numpy as np
import pytest
from scipy.integrate import quad

# Application Specific
from shape_inversion.helpers.errors import KernelDomainError
from shape_inversion.helpers.kernels import kernel_K, kernel_Ktilde, KernelFamily, KernelSpec, sigma_grid


def test_lorentz_kernel_is_normalized():
    """The Lorentz kernel integrates to one over the whole real line."""
    spec = KernelSpec.lorentz(10.0, e_thr=-math.inf)
    total, _ = quad(lambda e: kernel_K(spec, 5.0, e), -math.inf, math.inf, epsabs=1e-13, epsrel=1e-12)
    assert total == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("spec, sigma", [
    (KernelSpec.lorentz(10.0), 12.0),
    (KernelSpec.lorentz(2.0), -1.0),
    (KernelSpec.stieltjes(-2.0), -10.0),
])
def test_integrated_kernel_derivative(spec, sigma):
    """dKtilde/dE equals -K for Lorentz and Stieltjes."""
    h = 1e-5
    for energy in (0.5, 3.0, 20.0, 80.0):
        slope = (kernel_Ktilde(spec, sigma, energy + h) - kernel_Ktilde(spec, sigma, energy - h)) / (2 * h)
        assert slope == pytest.approx(-kernel_K(spec, sigma, energy), rel=1e-7)


def test_laplace_integrated_kernel_derivative():
    """For Laplace the integrated kernel is the kernel itself, with slope -z K."""
    spec = KernelSpec.laplace()
    z, energy, h = 0.7, 4.0, 1e-6
    slope = (kernel_Ktilde(spec, z, energy + h) - kernel_Ktilde(spec, z, energy - h)) / (2 * h)
    assert slope == pytest.approx(-z * kernel_K(spec, z, energy), rel=1e-7)
    assert kernel_Ktilde(spec, z, energy) == kernel_K(spec, z, energy)


def test_kernel_values():
    """Spot values of each family."""
    assert kernel_K(KernelSpec.lorentz(10.0), 0.0, 0.0) == pytest.approx(1.0 / (10.0 * math.pi))
    assert kernel_K(KernelSpec.stieltjes(-2.0), -2.0, 2.0) == pytest.approx(0.25)
    assert kernel_K(KernelSpec.laplace(), 0.0, 50.0) == 1.0
    assert kernel_Ktilde(KernelSpec.lorentz(10.0), 5.0, 5.0) == 0.0


def test_scalar_and_array_output():
    """Scalars give floats and arrays broadcast."""
    spec = KernelSpec.lorentz(10.0)
    assert isinstance(kernel_K(spec, 1.0, 2.0), float)
    values = kernel_K(spec, np.array([0.0, 1.0, 2.0])[:, None], np.array([1.0, 5.0])[None, :])
    assert values.shape == (3, 2)


def test_below_threshold():
    """Energies below threshold are rejected."""
    with pytest.raises(KernelDomainError):
        kernel_K(KernelSpec.lorentz(10.0), 0.0, -1.0)
    with pytest.raises(ValueError):
        kernel_Ktilde(KernelSpec.laplace(), 0.5, np.array([1.0, -0.1]))


def test_stieltjes_singularity():
    """The Stieltjes kernel needs E > s."""
    spec = KernelSpec(KernelFamily.STIELTJES, (-10.0, -2.0))
    with pytest.raises(KernelDomainError):
        kernel_Ktilde(spec, 1.0, 1.0)


@pytest.mark.parametrize("builder", [
    lambda: KernelSpec.lorentz(0.0),
    lambda: KernelSpec.lorentz(-1.0),
    lambda: KernelSpec.stieltjes(0.5),
    lambda: KernelSpec(KernelFamily.LAPLACE, (-0.1, 1.0)),
    lambda: KernelSpec(KernelFamily.LORENTZ, (5.0, 1.0), sigma_i=1.0),
    lambda: KernelSpec.lorentz(10.0, n_samples=1),
])
def test_invalid_specs(builder):
    """Invalid parameter sets are refused at construction."""
    with pytest.raises(KernelDomainError):
        builder()


def test_default_grids():
    """The default ranges match the model-problem experiments."""
    lorentz = sigma_grid(KernelSpec.lorentz(10.0))
    assert len(lorentz) == 100
    assert lorentz[0] == -2.0
    assert lorentz[-1] == pytest.approx(41.4)
    stieltjes = sigma_grid(KernelSpec.stieltjes(-20.0))
    assert stieltjes[0] == pytest.approx(-61.4)
    assert stieltjes[-1] == -20.0
    laplace = sigma_grid(KernelSpec.laplace())
    assert laplace[0] == 0.0
    assert laplace[-1] == pytest.approx(1.9304)


def test_spec_json():
    """A spec survives its JSON form."""
    spec = KernelSpec.lorentz(2.0, n_samples=40)
    data = spec.to_json()
    assert data["family"] == "lorentz"
    assert data["sigma_I"] == 2.0
    assert KernelSpec.from_json(data) == spec
