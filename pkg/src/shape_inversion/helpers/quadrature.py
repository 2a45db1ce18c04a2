"""Quadrature over [E_thr, infinity) for integrands with an inverse square root threshold singularity."""
# Standard Library
from dataclasses import dataclass
from functools import lru_cache
import math

# Third Party
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

# Application Specific
from .errors import QuadratureError

DEFAULT_ORDER = 16
DEFAULT_START_PANELS = 32
DEFAULT_MAX_PANELS = 4096

# quad flags a segment whenever it cannot prove the requested tolerance. That happens routinely at the roundoff
# floor, so a flagged segment only counts as a failure when its error bound is this far above the request.
_FAILURE_SLACK = 1e3


def integrate_semi_infinite(g, singular_at, split_points=(), upper=math.inf, epsabs=1e-13, epsrel=1e-12, limit=500):
    """Integrate ``g`` from ``singular_at`` to ``upper``.

    The substitution ``E = singular_at + t**2`` removes an endpoint singularity up to ``(E - singular_at)**-1/2``.
    The t-axis is cut at the images of ``split_points`` and each piece is handed to ``scipy.integrate.quad``.

    Args:
        g: Scalar integrand of E.
        singular_at: Lower limit of integration, where g may diverge.
        split_points: Energies where g has structure (roots, peaks). Points outside the range are ignored.
        upper: Upper limit; infinite by default.
        epsabs: Absolute tolerance per piece.
        epsrel: Relative tolerance per piece.
        limit: Subdivision limit per piece.

    Raises:
        QuadratureError: A piece hit the subdivision limit with an error bound far above the tolerance.
    """
    t_upper = math.sqrt(upper - singular_at) if math.isfinite(upper) else math.inf
    cuts = sorted({math.sqrt(p - singular_at) for p in split_points if singular_at < p < upper})
    edges = [0.0] + cuts + [t_upper]

    def integrand(t):
        return 2.0 * t * g(singular_at + t * t)

    total = 0.0
    total_error = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        result = quad(integrand, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        value, error = result[0], result[1]
        total += value
        total_error += error
        if len(result) > 3 and error > _FAILURE_SLACK * max(epsabs, epsrel * abs(value)):
            raise QuadratureError(f"Quadrature failed on [{singular_at + lo * lo}, {singular_at + hi * hi}]: "
                                  f"{result[3]}", estimate=total, error_bound=total_error)
    return total


@dataclass(frozen=True)
class QuadratureRule:
    """A fixed composite Gauss-Legendre rule for integrals over (E_thr, infinity).

    The rule lives on u in [0, 1) with ``E = e_thr + scale * (u / (1 - u))**2``. The square removes the inverse
    square root at threshold and the rational map carries the tail.
    """
    e_thr: float
    scale: float
    panels: int
    order: int = DEFAULT_ORDER

    @property
    def nodes(self):
        """Energies at which integrands are sampled."""
        return _rule_arrays(self.e_thr, self.scale, self.panels, self.order)[0]

    @property
    def weights(self):
        """Weights including the Jacobian of the map."""
        return _rule_arrays(self.e_thr, self.scale, self.panels, self.order)[1]

    def refined(self):
        """Return the same rule with twice the panels."""
        return QuadratureRule(self.e_thr, self.scale, 2 * self.panels, self.order)

    def integrate(self, values):
        """Integrate samples taken at :attr:`nodes` along their last axis."""
        return np.asarray(values) @ self.weights

    def to_json(self):
        """Return a JSON-ready dictionary."""
        return {"E_thr": self.e_thr, "scale": self.scale, "panels": self.panels, "order": self.order}

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`."""
        return cls(data["E_thr"], data["scale"], data["panels"], data["order"])


@lru_cache(maxsize=8)
def _unit_panels(panels, order):
    x, w = leggauss(order)
    left = np.arange(panels) / panels
    u = (left[:, None] + (x[None, :] + 1.0) / (2.0 * panels)).ravel()
    wu = np.tile(w / (2.0 * panels), panels)
    return u, wu


@lru_cache(maxsize=32)
def _rule_arrays(e_thr, scale, panels, order):
    u, wu = _unit_panels(panels, order)
    ratio = u / (1.0 - u)
    nodes = e_thr + scale * ratio ** 2
    weights = wu * 2.0 * scale * ratio / (1.0 - u) ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def mapped_rule(e_thr, scale, panels=DEFAULT_START_PANELS, order=DEFAULT_ORDER):
    """Build a :class:`QuadratureRule`."""
    if not scale > 0:
        raise QuadratureError(f"The rule scale must be positive, got {scale}")
    return QuadratureRule(float(e_thr), float(scale), int(panels), int(order))


def resolve_rule(evaluate, rule, tol, max_panels=DEFAULT_MAX_PANELS):
    """Double the panels of ``rule`` until ``evaluate`` stops moving.

    Args:
        evaluate: Callable taking a rule and returning an array of integrals.
        rule: The starting rule.
        tol: Absolute tolerance on the largest change between successive rules.
        max_panels: Give up beyond this many panels.

    Returns:
        The coarser of the two rules that agreed, and its values.
    """
    values = np.asarray(evaluate(rule))
    change = math.inf
    while rule.panels < max_panels:
        finer = rule.refined()
        finer_values = np.asarray(evaluate(finer))
        change = float(np.max(np.abs(finer_values - values)))
        if change <= tol:
            return rule, values
        rule, values = finer, finer_values
    raise QuadratureError(f"Composite rule did not converge with {rule.panels} panels", estimate=values,
                          error_bound=change)
