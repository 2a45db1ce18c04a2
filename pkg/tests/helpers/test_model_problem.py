"""Tests for the model problem and its approximate inputs."""
# Standard Library
import math

# Third Party
import numpy as np
import pytest
from scipy.integrate import quad

# Application Specific
from shape_inversion.helpers.errors import DomainError, GalerkinError
from shape_inversion.helpers.kernels import KernelSpec
from shape_inversion.helpers.metrics import chi_input
from shape_inversion.helpers.model_problem import (basis_values, exact_f, exact_fprime, exact_input, galerkin_input,
                                                   galerkin_solution, kinetic_matrix, ModelProblem, noisy_input,
                                                   overlap_matrix, source_vector)
from shape_inversion.helpers.quadrature import integrate_semi_infinite
from shape_inversion.helpers.sample_io import SampledInput


def test_constants(problem):
    """E0 is hbar^2 / 2M for eta = 1 and the sum rule is 1/4."""
    assert problem.e0 == pytest.approx(20.7212603615)
    assert problem.sum_rule == 0.25
    assert ModelProblem(eta=2.0).sum_rule == pytest.approx(1.0 / 32.0)


def test_exact_solution_sum_rule(problem):
    """The exact solution integrates to the sum rule."""
    total = integrate_semi_infinite(lambda e: exact_f(problem, e), 0.0, (problem.e0 / 7.0, problem.e0))
    assert total == pytest.approx(0.25, abs=1e-10)


def test_exact_solution_shape(problem):
    """One maximum, at E0 / 7, and the derivative matches the solution."""
    energies = np.linspace(0.1, 40.0, 400)
    values = exact_f(problem, energies)
    assert energies[np.argmax(values)] == pytest.approx(problem.e0 / 7.0, abs=0.1)
    h = 1e-6
    for energy in (0.5, 5.0, 30.0):
        slope = (exact_f(problem, energy + h) - exact_f(problem, energy - h)) / (2 * h)
        assert slope == pytest.approx(exact_fprime(problem, energy), rel=1e-6)


@pytest.mark.parametrize("n0", [1, 10, 60])
def test_basis_is_orthonormal(n0):
    """The Laguerre basis is orthonormal to quadrature precision."""
    np.testing.assert_allclose(overlap_matrix(n0), np.eye(n0), atol=1e-10)


def test_kinetic_matrix(problem):
    """T is symmetric positive definite with the analytic first element."""
    kinetic = kinetic_matrix(problem, 8, 0.3)
    np.testing.assert_allclose(kinetic, kinetic.T, rtol=1e-12, atol=1e-9)
    assert np.all(np.linalg.eigvalsh(kinetic) > 0)
    assert kinetic[0, 0] == pytest.approx(problem.hbar2_over_2m / 0.3 ** 2 / 4.0, rel=1e-12)


def test_source_vector_closed_form(problem):
    """The closed form of g_n matches direct integration."""
    source = source_vector(problem, 5, 0.3)
    for n in range(1, 6):
        numeric, _ = quad(lambda r: basis_values(5, 0.3, [r])[n - 1, 0] * r * math.exp(-r), 0.0, math.inf,
                          epsabs=1e-14, epsrel=1e-12, limit=200)
        assert source[n - 1] == pytest.approx(numeric, rel=1e-9, abs=1e-13)


def test_exact_input(problem, lorentz_spec):
    """Exact inputs are sampled on the default grid with relative weights."""
    sampled = exact_input(problem, lorentz_spec)
    assert len(sampled) == 100
    assert sampled.provenance.kind == "exact"
    assert sampled.model_problem["S"] == 0.25
    np.testing.assert_allclose(sampled.weights * sampled.phi ** 2, 1.0)
    assert np.all(sampled.phi > 0)


def test_stieltjes_galerkin_is_a_lower_bound(problem):
    """Nested bases give Stieltjes values that grow with N0 toward the exact transform."""
    spec = KernelSpec.stieltjes(-2.0, n_samples=20)
    exact = exact_input(problem, spec).phi
    small = galerkin_input(problem, spec, 5).phi
    large = galerkin_input(problem, spec, 10).phi
    assert np.all(small <= large * (1 + 1e-12))
    assert np.all(large <= exact * (1 + 1e-10))


def test_lorentz_galerkin_converges(problem):
    """The Lorentz input error falls as the basis grows."""
    spec = KernelSpec.lorentz(100.0, n_samples=30)
    exact = exact_input(problem, spec).phi
    coarse = chi_input(exact, galerkin_input(problem, spec, 3).phi)
    fine = chi_input(exact, galerkin_input(problem, spec, 10).phi)
    assert fine < coarse
    assert galerkin_input(problem, spec, 3).provenance.n0 == 3


def test_galerkin_solution_shapes(problem, small_lorentz_spec):
    """Lorentz coefficients are complex with one row per evaluation point."""
    solution = galerkin_solution(problem, small_lorentz_spec, 4)
    assert solution.coeffs.shape == (25, 4)
    assert np.iscomplexobj(solution.coeffs)


def test_galerkin_errors(problem):
    """Unsupported families and empty bases are refused."""
    with pytest.raises(GalerkinError):
        galerkin_input(problem, KernelSpec.laplace(), 5)
    with pytest.raises(GalerkinError):
        galerkin_input(problem, KernelSpec.lorentz(10.0), 0)


def test_noise_is_seeded(problem):
    """The same seed gives the same noisy input; a different seed does not."""
    base = exact_input(problem, KernelSpec.laplace(n_samples=30))
    first = noisy_input(base, 0.05, 7)
    second = noisy_input(base, 0.05, 7)
    other = noisy_input(base, 0.05, 8)
    np.testing.assert_array_equal(first.phi, second.phi)
    assert not np.array_equal(first.phi, other.phi)
    assert first.provenance.tau == 0.05
    assert first.provenance.base.kind == "exact"
    assert chi_input(base.phi, first.phi) == pytest.approx(0.05, rel=0.5)


def test_noise_edge_cases(problem, small_exact_input):
    """No noise returns the input and negative noise is refused."""
    assert noisy_input(small_exact_input, 0.0, 1) is small_exact_input
    with pytest.raises(DomainError):
        noisy_input(small_exact_input, -0.1, 1)


def test_noise_level():
    """Relative deviations have the requested standard deviation and no bias."""
    spec = KernelSpec.laplace(n_samples=10000)
    base = SampledInput.relative(np.linspace(*spec.sigma_range, 10000), np.ones(10000), spec)
    deviations = noisy_input(base, 0.05, 11).phi - 1.0
    assert np.std(deviations) == pytest.approx(0.05, abs=0.002)
    assert abs(np.mean(deviations)) < 0.002


def test_laplace_input_at_zero(problem):
    """The Laplace transform at z = 0 is the sum rule."""
    sampled = exact_input(problem, KernelSpec.laplace(n_samples=5))
    assert sampled.sigma[0] == 0.0
    assert sampled.phi[0] == pytest.approx(0.25, rel=1e-10)


def test_stieltjes_input_far_below_threshold(problem):
    """Far below threshold the Stieltjes transform falls off as S / |s|."""
    sampled = exact_input(problem, KernelSpec.stieltjes(-1e5, width=1e3, n_samples=2))
    np.testing.assert_allclose(np.abs(sampled.sigma) * sampled.phi, 0.25, rtol=1e-3)


@pytest.mark.parametrize("spec, n0, expected", [
    (KernelSpec.lorentz(10.0), 10, 3.0e-2),
    (KernelSpec.lorentz(100.0), 3, 1.55e-3),
    (KernelSpec.stieltjes(-2.0), 7, 2.2e-3),
])
def test_galerkin_input_accuracy(problem, spec, n0, expected):
    """Truncated Galerkin inputs carry the known relative error."""
    exact = exact_input(problem, spec)
    assert chi_input(exact.phi, galerkin_input(problem, spec, n0).phi) == pytest.approx(expected, rel=0.3)
