"""Tests for the semi-infinite quadrature helpers."""
# Standard Library
import math

# Third Party
import numpy as np
import pytest

# Application Specific
from shape_inversion.helpers.errors import QuadratureError
from shape_inversion.helpers.quadrature import integrate_semi_infinite, mapped_rule, QuadratureRule, resolve_rule


def test_inverse_square_root_singularity():
    """The threshold singularity is integrated to full precision."""
    value = integrate_semi_infinite(lambda e: math.exp(-e) / math.sqrt(e), 0.0)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_finite_upper_limit_and_splits():
    """Split points inside the range are honored and the rest ignored."""
    value = integrate_semi_infinite(lambda e: 1.0 / math.sqrt(e - 1.0), 1.0, split_points=(2.0, 3.0, 10.0, -4.0),
                                    upper=5.0)
    assert value == pytest.approx(4.0, rel=1e-12)


def test_mapped_rule_beta_integral():
    """The mapped rule integrates E**-1/2 (1 + E)**-2 to B(1/2, 3/2) = pi / 2."""
    rule = mapped_rule(0.0, 1.0, panels=64)
    values = rule.nodes ** -0.5 / (1.0 + rule.nodes) ** 2
    assert rule.integrate(values) == pytest.approx(math.pi / 2, rel=1e-11)


def test_mapped_rule_shifted_threshold():
    """Nodes lie strictly above threshold."""
    rule = mapped_rule(-3.0, 2.0, panels=4, order=8)
    assert len(rule.nodes) == 32
    assert np.all(rule.nodes > -3.0)
    assert np.all(rule.weights > 0)


def test_refined_and_json():
    """Refinement doubles the panels and the JSON form is complete."""
    rule = mapped_rule(0.0, 20.0, panels=32)
    finer = rule.refined()
    assert finer.panels == 64
    assert finer.scale == rule.scale
    assert QuadratureRule.from_json(finer.to_json()) == finer


def test_bad_scale():
    """The map needs a positive length."""
    with pytest.raises(QuadratureError):
        mapped_rule(0.0, 0.0)


def test_resolve_rule_returns_coarser_rule():
    """The rule returned is the coarser of the first pair that agrees."""
    def evaluate(rule):
        return np.array([rule.integrate(np.exp(-rule.nodes))])

    rule, values = resolve_rule(evaluate, mapped_rule(0.0, 1.0, panels=2, order=16), tol=1e-13)
    assert values[0] == pytest.approx(1.0, rel=1e-12)
    assert rule.panels >= 2


def test_resolve_rule_gives_up():
    """A sequence that never settles raises with the last estimate attached."""
    with pytest.raises(QuadratureError) as e:
        resolve_rule(lambda rule: np.array([1.0 / rule.panels]), mapped_rule(0.0, 1.0, panels=2), tol=0.0,
                     max_panels=16)
    assert e.value.estimate[0] == pytest.approx(1.0 / 16)
