"""Weighted least-squares fit of the shape ansatz to a sampled transform.

The fit runs in two stages. A nested grid over (Ebar, beta) without the gamma factor finds seeds, and a local
minimization then refines all free parameters. One root and the amplitude C are never free: the root comes from
the normalization constraint and C from the sum rule, or from linear least squares when no sum rule is used.
"""
# Standard Library
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import math

# Third Party
import numpy as np
from scipy.optimize import least_squares, minimize

# Application Specific
from .ansatz import count_sign_changes, eliminate_root, eval_f, normalize_C, ShapeAnsatz
from .errors import FitError, InversionError
from .forward_map import resolve_operator, TransformOperator
from .kernels import KernelFamily
from .metrics import chi_fit as chi_fit_metric
from .model_problem import ModelProblem

BETA_CEILING = 14.0
BETA_MARGIN = 1.25
EBAR_SPREAD = 16.0
MAX_SHIFTS = 40
SATURATION_K_GAMMA = (0, 1, 2, 4)


@dataclass
class FitResult:
    """Outcome of a fit.

    Attributes:
        ansatz: The fitted, fully constrained ansatz.
        chi_fit: RMS relative deviation between input and model.
        objective: The weighted sum of squared residuals.
        residuals: Weighted residuals per sample.
        model: Model transform values on the input grid, comparable to phi.
        scan_trace: (level, Ebar, beta, objective) for every grid cell visited.
        converged: False when the local minimizer ran out of budget.
        mode: ``grid`` for scan-only results, ``refined`` after local minimization.
        rule: The quadrature rule the model was evaluated on.
        message: Status text from the minimizer.
    """
    ansatz: ShapeAnsatz
    chi_fit: float
    objective: float
    residuals: np.ndarray
    model: np.ndarray
    scan_trace: list = field(default_factory=list)
    converged: bool = True
    mode: str = "grid"
    rule: object = None
    message: str = ""

    def to_json(self):
        """Return a JSON-ready dictionary."""
        return {
            "ansatz": self.ansatz.to_json(),
            "chi_fit": self.chi_fit,
            "objective": self.objective,
            "converged": self.converged,
            "mode": self.mode,
            "message": self.message,
            "quadrature": self.rule.to_json() if self.rule is not None else None,
            "residuals": [float(r) for r in self.residuals],
            "scan_trace": [list(entry) for entry in self.scan_trace],
        }


class ModelEvaluator:
    """Evaluates model transforms and residuals of ansatz candidates against one input.

    For the Laplace family the operator yields the integral of exp(-z E) f'(E), which is divided by z so the
    comparison happens against phi itself. At z = 0 that equation holds identically, so the model is set to phi
    there and the residual is exactly zero.
    """

    def __init__(self, sampled, operator, sum_rule=None):
        """Bind an input to a discretized operator.

        Args:
            sampled: The SampledInput to fit.
            operator: A TransformOperator on the input grid.
            sum_rule: Value of the integral of f, or None to solve for C by linear least squares.
        """
        self.input = sampled
        self.operator = operator
        self.sum_rule = sum_rule
        self._sqrt_weights = np.sqrt(sampled.weights)
        if sampled.family is KernelFamily.LAPLACE:
            self._active = sampled.sigma > 0
        else:
            self._active = np.ones(len(sampled), dtype=bool)

    def model(self, a):
        """Model transform on the input grid."""
        raw = self.operator.apply(a)
        if self.input.family is not KernelFamily.LAPLACE:
            return raw
        model = np.array(self.input.phi, dtype=float)
        model[self._active] = raw[self._active] / self.input.sigma[self._active]
        return model

    def residuals(self, a):
        """Weighted residuals sqrt(w) * (phi - model)."""
        return self._sqrt_weights * (self.input.phi - self.model(a))

    def objective(self, a):
        """Sum of weighted squared residuals."""
        return float(np.sum(self.residuals(a) ** 2))

    def penalty_residuals(self):
        """Residuals reported for invalid candidates: ten times the objective of a zero model."""
        return math.sqrt(10.0) * self._sqrt_weights * np.abs(self.input.phi) + 1.0

    def complete(self, shape):
        """Eliminate root 0 and fix C for a shape with unit amplitude."""
        a = eliminate_root(shape, 0)
        if self.sum_rule is not None:
            return normalize_C(a, self.sum_rule)
        unit = self.model(a)[self._active]
        target = self.input.phi[self._active]
        weights = self.input.weights[self._active]
        denominator = float(np.sum(weights * unit ** 2))
        if denominator == 0.0:
            raise FitError("The model vanishes on the input grid; C is undetermined")
        amplitude = float(np.sum(weights * target * unit)) / denominator
        return ShapeAnsatz(amplitude, a.roots, a.ebar, a.beta, a.gamma_coeffs, a.nu, a.e_thr)

    def result(self, a, trace=None, mode="grid", converged=True, message=""):
        """Package an ansatz as a FitResult."""
        model = self.model(a)
        residuals = self._sqrt_weights * (self.input.phi - model)
        return FitResult(a, chi_fit_metric(self.input.phi, model), float(np.sum(residuals ** 2)), residuals, model,
                         list(trace or []), converged, mode, self.operator.rule, message)


def default_ebar_range(sampled):
    """Ebar grid bounds derived from the input: a center value times 1/16 and 16.

    The center is half the sigma span for Lorentz and Stieltjes, and 1 / sqrt(z_min z_max) over the positive z
    samples for Laplace.
    """
    lo, hi = sampled.spec.sigma_range
    if sampled.family is KernelFamily.LAPLACE:
        positive = sampled.sigma[sampled.sigma > 0]
        if len(positive) == 0:
            raise FitError("A Laplace input needs at least one positive z")
        center = 1.0 / math.sqrt(positive[0] * positive[-1])
    else:
        center = (hi - lo) / 2.0
    return center / EBAR_SPREAD, center * EBAR_SPREAD


def default_beta_range(scan):
    """Beta grid bounds: (N + nu + 1.25, 14)."""
    return scan.n_extrema + scan.nu + BETA_MARGIN, BETA_CEILING


def resolve_sum_rule(sampled, scan):
    """Return the sum rule to impose, or None when C is solved for.

    Raises:
        FitError: The sum rule is active but neither the config nor the input provides its value.
    """
    if not scan.sum_rule_active:
        return None
    if scan.sum_rule_value is not None:
        return float(scan.sum_rule_value)
    if sampled.model_problem is not None:
        return ModelProblem.from_json(sampled.model_problem).sum_rule
    raise FitError("The sum rule is active but no value was configured and the input has no model problem")


def _free_roots(scan, ebar_range, e_thr=0.0):
    if scan.initial_roots is not None:
        roots = tuple(float(r) for r in scan.initial_roots)
        if len(roots) != scan.n_extrema - 1:
            raise FitError(f"initial_roots must list N - 1 = {scan.n_extrema - 1} values, got {len(roots)}")
        return roots
    center = math.sqrt(ebar_range[0] * ebar_range[1])
    return tuple(e_thr + center * k / scan.n_extrema for k in range(1, scan.n_extrema))


def _shape(scan, e_thr, ebar, beta, free_roots, gamma=()):
    return ShapeAnsatz(1.0, (e_thr,) + tuple(free_roots), ebar, beta, tuple(gamma), scan.nu, e_thr)


def build_evaluator(sampled, scan, tol=1e-11):
    """Build the evaluator for ``sampled``, resolving the quadrature rule on the grid-center ansatz.

    The resolved rule is doubled once more so that cells away from the center stay converged.
    """
    sum_rule = resolve_sum_rule(sampled, scan)
    ebar_range = scan.ebar_range or default_ebar_range(sampled)
    beta_range = scan.beta_range or default_beta_range(scan)
    e_thr = sampled.spec.e_thr
    center = _shape(scan, e_thr, math.sqrt(ebar_range[0] * ebar_range[1]), math.sqrt(beta_range[0] * beta_range[1]),
                    _free_roots(scan, ebar_range, e_thr))
    reference = eliminate_root(center, 0)
    operator = resolve_operator(reference, sampled.spec, sampled.sigma, tol)
    operator = TransformOperator(sampled.spec, sampled.sigma, operator.rule.refined())
    return ModelEvaluator(sampled, operator, sum_rule)


def _valid(a, scan):
    if count_sign_changes(a) != scan.n_extrema:
        return False
    if scan.f_cap is not None:
        probe = a.e_thr + np.linspace(0.0, 10.0 * a.ebar, 201)
        if np.max(np.abs(eval_f(a, probe))) > scan.f_cap:
            return False
    return True


def _evaluate_cell(evaluator, scan, e_thr, free_roots, cell):
    level, ebar, beta = cell
    try:
        a = evaluator.complete(_shape(scan, e_thr, ebar, beta, free_roots))
        if not _valid(a, scan):
            return (level, ebar, beta, math.inf), None
        objective = evaluator.objective(a)
    except (InversionError, FloatingPointError, ValueError, ZeroDivisionError):
        return (level, ebar, beta, math.inf), None
    if not math.isfinite(objective):
        return (level, ebar, beta, math.inf), None
    return (level, ebar, beta, objective), a


def _map(func, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _sort_key(entry):
    (_, ebar, beta, objective), _ = entry
    return objective, ebar, beta


def _window(center, half_width, lo, hi, points):
    """Log-spaced values spanning ``center`` times exp(+-half_width), slid inside [lo, hi] without shrinking."""
    log_lo, log_hi = math.log(lo), math.log(hi)
    width = min(2.0 * half_width, log_hi - log_lo)
    start = min(max(log_lo, math.log(center) - half_width), log_hi - width)
    return np.exp(np.linspace(start, start + width, points))


def _on_open_edge(index, values, lo, hi):
    """True when ``index`` is a window edge that is not also a bound of the whole grid."""
    if index == 0:
        return values[0] > lo * (1.0 + 1e-12)
    if index == len(values) - 1:
        return values[-1] < hi * (1.0 - 1e-12)
    return False


def grid_scan(sampled, scan, evaluator=None, threads=1, progress=None):
    """Scan the (Ebar, beta) plane with gamma switched off and return the best ``scan.k_seeds`` cells.

    The first level is a log-spaced grid over the whole range. Each further level re-grids the best cell plus or
    minus one step of the previous level with ``scan.level_points`` points per axis, which is ten times finer for
    the default 21 points. A level whose best cell lands on an inner window edge is repeated on a window of the same
    size centred on that cell, at most ``MAX_SHIFTS`` times, so the scan can follow a diagonal valley.
    Cells that fail or violate a shape constraint get an infinite objective and stay in the trace.

    Args:
        sampled: The input.
        scan: ScanConfig.
        evaluator: A ModelEvaluator; built from ``sampled`` when None.
        threads: Worker threads for cell evaluation.
        progress: Optional callable receiving status text.

    Raises:
        FitError: No cell produced a finite objective.
    """
    evaluator = evaluator or build_evaluator(sampled, scan)
    ebar_lo, ebar_hi = scan.ebar_range or default_ebar_range(sampled)
    beta_lo, beta_hi = scan.beta_range or default_beta_range(scan)
    e_thr = sampled.spec.e_thr
    free_roots = _free_roots(scan, (ebar_lo, ebar_hi), e_thr)

    ebars = np.geomspace(ebar_lo, ebar_hi, scan.points_ebar)
    betas = np.geomspace(beta_lo, beta_hi, scan.points_beta)
    visited = []
    for level in range(scan.levels + 1):
        if level > 0:
            # Zoom: one step of the previous level on either side of the best cell
            ebar_half = math.log(ebars[1] / ebars[0])
            beta_half = math.log(betas[1] / betas[0])
            ebars = _window(best_ebar, ebar_half, ebar_lo, ebar_hi, scan.level_points)
            betas = _window(best_beta, beta_half, beta_lo, beta_hi, scan.level_points)
        for shift in range(MAX_SHIFTS + 1):
            if progress:
                progress(f"Grid level {level + 1} of {scan.levels + 1}" + (f", shift {shift}" if shift else ""))
            cells = [(level, float(e), float(b)) for e in ebars for b in betas]
            entries = _map(lambda c: _evaluate_cell(evaluator, scan, e_thr, free_roots, c), cells, threads)
            visited.extend(entries)
            index = min(range(len(entries)), key=lambda k: _sort_key(entries[k]))
            (_, window_ebar, window_beta, window_objective), _ = entries[index]
            i, j = divmod(index, len(betas))
            if level == 0 or not math.isfinite(window_objective):
                break
            if not (_on_open_edge(i, ebars, ebar_lo, ebar_hi) or _on_open_edge(j, betas, beta_lo, beta_hi)):
                break
            ebars = _window(window_ebar, ebar_half, ebar_lo, ebar_hi, scan.level_points)
            betas = _window(window_beta, beta_half, beta_lo, beta_hi, scan.level_points)
        (_, best_ebar, best_beta, best_objective), _ = min(visited, key=_sort_key)
        if not math.isfinite(best_objective):
            raise FitError("Every grid cell failed; widen the grid or check the input")

    ranked = sorted(visited, key=_sort_key)
    trace = [cell for cell, _ in visited]
    seeds = [evaluator.result(a, trace, mode="grid") for (_, _, _, obj), a in ranked[:scan.k_seeds]
             if math.isfinite(obj)]
    return seeds


def _beta_floor(scan, evaluator):
    floor = scan.n_extrema + scan.nu
    return floor + 1.0 if evaluator.sum_rule is not None else floor


def refine(seed, sampled, scan, opts, evaluator=None):
    """Minimize locally over Ebar, beta, the free roots and the gamma coefficients.

    Ebar and beta enter through logarithms so they stay in their valid ranges. Candidates that break a constraint
    get a large penalty instead of an exception. The returned objective never exceeds the seed's.

    Args:
        seed: Starting FitResult.
        sampled: The input.
        scan: ScanConfig; ``k_gamma`` sets the number of gamma coefficients.
        opts: RefineOptions.
        evaluator: A ModelEvaluator; built from ``sampled`` when None.
    """
    evaluator = evaluator or build_evaluator(sampled, scan)
    if scan.skip_refine:
        return seed
    a0 = seed.ansatz
    floor = _beta_floor(scan, evaluator)
    n_roots = a0.n_extrema - 1
    gamma0 = list(a0.gamma_coeffs[:scan.k_gamma]) + [0.0] * max(0, scan.k_gamma - len(a0.gamma_coeffs))
    x0 = np.array([math.log(a0.ebar), math.log(max(a0.beta - floor, 1e-12))] + list(a0.roots[1:]) + gamma0)

    def candidate(x):
        shape = ShapeAnsatz(1.0, (a0.e_thr,) + tuple(x[2:2 + n_roots]), math.exp(x[0]), floor + math.exp(x[1]),
                            tuple(x[2 + n_roots:]), a0.nu, a0.e_thr)
        try:
            a = evaluator.complete(shape)
        except (InversionError, FloatingPointError, ValueError, ZeroDivisionError, OverflowError):
            return None
        return a if _valid(a, scan) else None

    def residuals(x):
        a = candidate(x)
        if a is None:
            return evaluator.penalty_residuals()
        values = evaluator.residuals(a)
        return values if np.all(np.isfinite(values)) else evaluator.penalty_residuals()

    if opts.method == "cg":
        result = minimize(lambda x: float(np.sum(residuals(x) ** 2)), x0, method="CG", jac="3-point",
                          options={"gtol": 1e-14, "maxiter": max(1, opts.max_evaluations // (2 * len(x0) + 1)),
                                   "finite_diff_rel_step": opts.diff_step})
        converged = bool(result.success)
    else:
        result = least_squares(residuals, x0, method="trf", jac="3-point", diff_step=opts.diff_step, ftol=opts.ftol,
                               xtol=opts.xtol, gtol=1e-14, x_scale="jac", max_nfev=opts.max_evaluations)
        converged = result.status > 0
    best = candidate(result.x)
    if best is None or evaluator.objective(best) >= seed.objective:
        best = a0
    return evaluator.result(best, seed.scan_trace, mode="refined", converged=converged, message=str(result.message))


def fit(sampled, config, progress=None):
    """Grid scan followed by refinement of every seed; returns the best result.

    Args:
        sampled: The input.
        config: RunConfig.
        progress: Optional callable receiving status text.
    """
    scan = config.scan
    if progress:
        progress("Resolving quadrature rule")
    evaluator = build_evaluator(sampled, scan)
    seeds = grid_scan(sampled, scan, evaluator, config.threads, progress)
    if not seeds:
        raise FitError("The grid scan produced no seeds")
    if scan.skip_refine:
        return seeds[0]
    if progress:
        progress(f"Refining {len(seeds)} seed(s) with {config.refine.method}")
    refined = _map(lambda s: refine(s, sampled, scan, config.refine, evaluator), seeds, config.threads)
    return min(refined, key=lambda r: r.objective)


@dataclass
class SaturationRow:
    """One step of the saturation study."""
    k_gamma: int
    n_parameters: int
    result: FitResult


def fit_saturation(sampled, config, k_values=SATURATION_K_GAMMA, progress=None):
    """Refit with growing numbers of gamma coefficients, each run seeded by the previous one.

    The number of free parameters is 2 + (N - 1) + K_gamma. Judging saturation is left to the caller.
    """
    scan = config.scan
    evaluator = build_evaluator(sampled, scan)
    rows = []
    previous = None
    for k_gamma in k_values:
        if progress:
            progress(f"Saturation step K_gamma={k_gamma}")
        step_scan = replace(scan, k_gamma=k_gamma, skip_refine=False)
        if previous is None:
            seeds = grid_scan(sampled, step_scan, evaluator, config.threads)
            previous = min((refine(s, sampled, step_scan, config.refine, evaluator) for s in seeds),
                           key=lambda r: r.objective)
        else:
            previous = refine(previous, sampled, step_scan, config.refine, evaluator)
        rows.append(SaturationRow(k_gamma, 2 + scan.n_extrema - 1 + k_gamma, previous))
    return rows