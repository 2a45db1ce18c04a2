"""Tests for the shape ansatz and its constraints."""
# Standard Library
from dataclasses import replace
import math

# Third Party
import numpy as np
import pytest
from scipy.integrate import quad

# Application Specific
from shape_inversion.helpers.ansatz import (count_sign_changes, eliminate_root, eval_f, eval_fprime, normalize_C,
                                            semi_infinite_moment, ShapeAnsatz, sum_rule_value, zeroth_moment)
from shape_inversion.helpers.errors import AnsatzError, DomainError
from shape_inversion.helpers.model_problem import exact_ansatz, exact_f, exact_fprime


@pytest.mark.parametrize("beta", [2.0, 3.0, 5.0, 7.5, 12.0])
def test_eliminated_root_matches_beta_identity(beta):
    """With one root the eliminated root is Ebar nu / (beta - nu - 1)."""
    a = eliminate_root(ShapeAnsatz(1.0, (0.0,), 20.0, beta))
    assert a.roots[0] == pytest.approx(20.0 * 0.5 / (beta - 1.5), rel=1e-9)


def test_exact_ansatz_parameters(problem):
    """The model solution is reproduced by one root at E0/7, Ebar = E0 and beta = 5."""
    a = exact_ansatz(problem)
    assert a.n_extrema == 1
    assert a.roots[0] == pytest.approx(problem.e0 / 7.0)
    assert eliminate_root(a).roots[0] == pytest.approx(problem.e0 / 7.0, rel=1e-12)
    normalized = normalize_C(replace(a, amplitude=1.0), problem.sum_rule)
    assert normalized.amplitude == pytest.approx(a.amplitude, rel=1e-10)


def test_derivative_matches_model(problem):
    """eval_fprime of the exact ansatz is the derivative of the exact solution."""
    energies = np.array([0.01, 1.0, 2.0, 10.0, 41.0, 300.0])
    np.testing.assert_allclose(eval_fprime(exact_ansatz(problem), energies), exact_fprime(problem, energies),
                               rtol=1e-12, atol=1e-300)


def test_reconstruction_matches_model(problem):
    """eval_f of the exact ansatz is the exact solution."""
    energies = np.array([0.0, 0.5, 3.0, 10.0, problem.e0, 40.0, 100.0])
    np.testing.assert_allclose(eval_f(exact_ansatz(problem), energies), exact_f(problem, energies),
                               rtol=1e-9, atol=1e-14)


def test_constraints_hold_after_enforcement():
    """f' integrates to zero and the sum rule is met after both constraints are enforced."""
    for shape in (ShapeAnsatz(1.0, (0.0,), 15.0, 6.0),
                  ShapeAnsatz(1.0, (0.0, 8.0), 10.0, 7.0),
                  ShapeAnsatz(1.0, (0.0, 4.0, 30.0), 25.0, 9.0, nu=1.5)):
        a = normalize_C(eliminate_root(shape), 0.25)
        assert abs(zeroth_moment(a)) < 1e-8
        assert sum_rule_value(a) == pytest.approx(0.25, abs=1e-8)
        assert count_sign_changes(a) == shape.n_extrema


def test_reconstruction_vanishes_at_both_ends():
    """f is zero at threshold and decays once the first constraint holds."""
    a = normalize_C(eliminate_root(ShapeAnsatz(1.0, (0.0, 8.0), 10.0, 7.0)), 0.25)
    assert eval_f(a, 0.0) == 0.0
    assert abs(eval_f(a, 1e8)) < 1e-10


def test_gamma_moment_uses_quadrature():
    """A negligible gamma term routes through quadrature and agrees with the closed form."""
    base = ShapeAnsatz(1.0, (3.0,), 20.0, 5.0)
    perturbed = replace(base, gamma_coeffs=(1e-30,))
    assert perturbed.has_gamma and not base.has_gamma
    for power in (0, 1):
        closed = semi_infinite_moment(base, power=power, drop_root=0)
        assert semi_infinite_moment(perturbed, power=power, drop_root=0) == pytest.approx(closed, rel=1e-9)


def test_gamma_reconstruction_matches_derivative():
    """With gamma active, f still integrates f'."""
    a = normalize_C(eliminate_root(ShapeAnsatz(1.0, (0.0,), 20.0, 6.0, gamma_coeffs=(0.3, -0.1))), 0.25)
    expected, _ = quad(lambda e: eval_fprime(a, e), 5.0, 30.0, epsabs=1e-14, epsrel=1e-12)
    assert eval_f(a, 30.0) - eval_f(a, 5.0) == pytest.approx(expected, rel=1e-7)


def test_shifted_threshold():
    """The constraints work when the threshold is not at zero."""
    a = normalize_C(eliminate_root(ShapeAnsatz(1.0, (2.0,), 10.0, 5.0, e_thr=2.0)), 1.0)
    assert a.roots[0] > 2.0
    assert abs(zeroth_moment(a)) < 1e-8
    assert eval_f(a, 2.0) == 0.0
    with pytest.raises(DomainError):
        eval_f(a, 1.0)


def test_fprime_domain():
    """f' is only defined strictly above threshold."""
    with pytest.raises(DomainError):
        eval_fprime(ShapeAnsatz(1.0, (1.0,), 10.0, 5.0), 0.0)


@pytest.mark.parametrize("kwargs", [
    {"roots": ()},
    {"roots": (math.nan,)},
    {"ebar": 0.0},
    {"beta": 1.5},
    {"nu": 0.0},
    {"gamma_coeffs": (1.0, 1.0, 1.0, 1.0, 1.0)},
])
def test_invalid_ansatz(kwargs):
    """Parameter sets with divergent integrals or bad shapes are refused."""
    values = {"amplitude": 1.0, "roots": (1.0,), "ebar": 10.0, "beta": 5.0}
    values.update(kwargs)
    with pytest.raises(AnsatzError):
        ShapeAnsatz(**values)


def test_sum_rule_needs_first_moment():
    """normalize_C refuses beta <= N + nu + 1."""
    with pytest.raises(AnsatzError):
        normalize_C(ShapeAnsatz(1.0, (1.0,), 10.0, 2.2), 0.25)


def test_moment_divergence():
    """Moments that do not converge raise."""
    with pytest.raises(AnsatzError):
        semi_infinite_moment(ShapeAnsatz(1.0, (1.0,), 10.0, 2.2), power=1)


def test_count_sign_changes():
    """Only roots inside the domain count."""
    a = ShapeAnsatz(1.0, (-1.0, 0.0, 5.0, 50.0), 10.0, 9.0)
    assert count_sign_changes(a) == 2
    assert count_sign_changes(a, domain=(0.0, 10.0)) == 1


def test_ansatz_json(problem):
    """The flat JSON form round-trips and reports N."""
    a = exact_ansatz(problem)
    data = a.to_json()
    assert data["N"] == 1
    assert data["threshold_exponent"] == 0.5
    assert ShapeAnsatz.from_json(data) == a
    data["N"] = 2
    with pytest.raises(AnsatzError):
        ShapeAnsatz.from_json(data)


@pytest.mark.parametrize("a", [
    ShapeAnsatz(-2.0, (3.0, 12.0), 15.0, 7.5),
    ShapeAnsatz(1.0, (4.0,), 10.0, 6.0, nu=1.5),
    ShapeAnsatz(-1.0, (2.0,), 20.0, 5.0, gamma_coeffs=(0.1, -0.05)),
])
def test_large_energy_tail(a):
    """f' falls off as E**-(beta - N - nu + 1) times a nonzero constant."""
    exponent = a.beta - a.n_extrema - a.nu + 1.0
    energies = np.array([1e4, 1e5]) * a.ebar
    scaled = eval_fprime(a, energies) * energies ** exponent
    assert scaled[0] != 0.0
    assert scaled[1] / scaled[0] == pytest.approx(1.0, abs=1e-3)
