"""The experiment matrix behind ``reproduce``: runs the model-problem inversions and grades them against targets.

Target values and acceptance checks live in ``data/reproduction_targets.json``. Each experiment computes a dictionary
keyed by (case, quantity); every target row looks its value up there and applies its check.
"""
# Standard Library
import csv
from dataclasses import dataclass, field, replace
import json
import math

# Third Party
from jsonschema import validate
import numpy as np

# Application Specific
from .. import data_dir
from .ansatz import eval_f
from .fitter import fit
from .kernels import KernelSpec
from .metrics import chi_input, chi_solution
from .model_problem import exact_f, exact_input, galerkin_input, ModelProblem, noisy_input
from .sample_io import load_schema, write_columns, write_json
from .standard_inversion import alpha_grid, sweep_standard

EXPERIMENTS = ("table1", "table2", "table3", "fig1", "stieltjes", "laplace")
LAPLACE_SEEDS = 11
LAPLACE_TAU = 0.05
LAPLACE_LEVELS = 5


def load_targets():
    """Load the embedded target table and validate it against its schema."""
    with open(data_dir / "reproduction_targets.json", "r") as f:
        targets = json.load(f)
    validate(targets, load_schema("reproduction_targets_schema.json"))
    return targets


@dataclass
class ComparisonRow:
    """One graded quantity."""
    experiment: str
    case: str
    quantity: str
    reference: float
    computed: float
    tolerance: str
    passed: bool = None

    def to_json(self):
        """Return a JSON-ready dictionary."""
        return {"experiment": self.experiment, "case": self.case, "quantity": self.quantity,
                "reference": self.reference, "computed": self.computed, "tolerance": self.tolerance,
                "passed": self.passed}


@dataclass
class ExperimentOutcome:
    """Everything one experiment produced."""
    name: str
    values: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    converged: bool = True
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        """True when every graded row passed and every fit converged."""
        return self.converged and all(row.passed is not False for row in self.rows)


def describe_check(check):
    """Human-readable form of a check."""
    if not check:
        return "informational"
    if "equals" in check:
        return f"== {check['equals']}"
    if "relative" in check:
        return f"within {check['relative']:.0%} of reference"
    parts = []
    if "min" in check:
        parts.append(f">= {check['min']:.3g}")
    if "max" in check:
        parts.append(f"<= {check['max']:.3g}")
    return " and ".join(parts)


def apply_check(check, reference, computed):
    """Return True/False for a graded row, None for an informational one."""
    if not check:
        return None
    if computed is None or (isinstance(computed, float) and math.isnan(computed)):
        return False
    if "equals" in check:
        return computed == check["equals"]
    if "relative" in check:
        return abs(computed / reference - 1.0) <= check["relative"]
    return computed >= check.get("min", -math.inf) and computed <= check.get("max", math.inf)


def grade(outcome, targets):
    """Fill ``outcome.rows`` from the target rows of its experiment."""
    outcome.rows = []
    for target in targets[outcome.name]:
        computed = outcome.values.get((target["case"], target["quantity"]))
        check = target.get("check")
        outcome.rows.append(ComparisonRow(outcome.name, target["case"], target["quantity"], target.get("reference"),
                                          computed, describe_check(check),
                                          apply_check(check, target.get("reference"), computed)))
    return outcome


def _solution_metric(problem, ansatz_or_expansion, metrics):
    if hasattr(ansatz_or_expansion, "evaluate"):
        approx = ansatz_or_expansion.evaluate
    else:
        def approx(energy):
            return eval_f(ansatz_or_expansion, energy)
    return chi_solution(lambda e: exact_f(problem, e), approx, tuple(metrics.e_range), metrics.n1)


def _new_method(outcome, case, sampled, config, problem, exact=None, progress=None):
    result = fit(sampled, config, progress)
    outcome.converged = outcome.converged and result.converged
    outcome.values[(case, "chi_fit")] = result.chi_fit
    outcome.values[(case, "chi_solution")] = _solution_metric(problem, result.ansatz, config.metrics)
    if exact is not None:
        outcome.values[(case, "chi_input")] = chi_input(exact.phi, sampled.phi)
    return result


def _baseline(outcome, sampled, config, problem, n_list, progress=None):
    baseline = config.baseline
    fits = sweep_standard(sampled, n_list, alpha_grid(baseline.alpha_min, baseline.alpha_max, baseline.alpha_points),
                          config.threads, progress, baseline.refine_alpha)
    solutions = {}
    for n_basis, standard in zip(n_list, fits):
        outcome.values[(f"N={n_basis}", "chi_fit")] = standard.chi_fit
        solutions[n_basis] = _solution_metric(problem, standard.expansion, config.metrics)
        outcome.values[(f"N={n_basis}", "chi_solution")] = solutions[n_basis]
    return solutions


def run_table1(config, progress=None):
    """Standard inversion of the exact Lorentz input at sigma_I = 10 for N in 5, 8, 9, 10."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("table1")
    sampled = exact_input(problem, KernelSpec.lorentz(10.0))
    n_list = (5, 8, 9, 10)
    solutions = _baseline(outcome, sampled, config, problem, n_list, progress)
    best_n = min(solutions, key=solutions.get)
    outcome.values[("sweep", "min_chi_solution")] = solutions[best_n]
    outcome.values[("sweep", "argmin_below_max_n")] = int(best_n < max(n_list))
    outcome.values[("sweep", "rise_from_n9_to_n10")] = int(solutions[10] > solutions[9])
    return outcome


def run_table2(config, progress=None):
    """New method, exact Lorentz input, sigma_I in 2, 10, 100, with parameter recovery."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("table2")
    for sigma_i in (2.0, 10.0, 100.0):
        case = f"sigma_I={sigma_i:g}"
        if progress:
            progress(f"Table 2, {case}")
        result = _new_method(outcome, case, exact_input(problem, KernelSpec.lorentz(sigma_i)), config, problem)
        a = result.ansatz
        outcome.values[(case, "rel_error_Ebar")] = abs(a.ebar / problem.e0 - 1.0)
        outcome.values[(case, "rel_error_beta")] = abs(a.beta / 5.0 - 1.0)
        outcome.values[(case, "rel_error_E1")] = abs(a.roots[0] / (problem.e0 / 7.0) - 1.0)
    return outcome


def run_table3(config, progress=None):
    """Galerkin Lorentz inputs: standard inversion at N0 = 10 and the new method at four (sigma_I, N0) pairs."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("table3")
    spec = KernelSpec.lorentz(10.0)
    solutions = _baseline(outcome, galerkin_input(problem, spec, 10), config, problem, (2, 3, 4, 5), progress)
    outcome.values[("sweep", "best_chi_solution")] = min(solutions.values())
    for sigma_i, n0 in ((10.0, 10), (2.0, 60), (100.0, 3), (100.0, 10)):
        case = f"sigma_I={sigma_i:g},N0={n0}"
        if progress:
            progress(f"Galerkin input, {case}")
        spec = KernelSpec.lorentz(sigma_i)
        _new_method(outcome, case, galerkin_input(problem, spec, n0), config, problem, exact_input(problem, spec))
    return outcome


def run_fig1(config, progress=None):
    """The sigma_I = 100, N0 = 3 Galerkin case, with curves for plotting."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("fig1")
    spec = KernelSpec.lorentz(100.0)
    sampled = galerkin_input(problem, spec, 3)
    result = _new_method(outcome, "sigma_I=100,N0=3", sampled, config, problem, exact_input(problem, spec), progress)
    lo, hi = config.metrics.e_range
    energies = np.linspace(lo, hi, config.metrics.n1 + 1)
    outcome.curves["fig1_input"] = (["sigma", "phi"], [sampled.sigma, sampled.phi])
    outcome.curves["fig1_exact_solution"] = (["E", "f"], [energies, exact_f(problem, energies)])
    outcome.curves["fig1_approximate_solution"] = (["E", "f"], [energies, eval_f(result.ansatz, energies)])
    return outcome


def run_stieltjes(config, progress=None):
    """Stieltjes inversions with exact and Galerkin inputs at several s_max."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("stieltjes")
    for s_max, n0 in ((-2.0, None), (-2.0, 5), (-2.0, 7), (-2.0, 10), (-10.0, 10), (-20.0, 10)):
        spec = KernelSpec.stieltjes(s_max)
        exact = exact_input(problem, spec)
        case = f"s_max={s_max:g},exact" if n0 is None else f"s_max={s_max:g},N0={n0}"
        if progress:
            progress(f"Stieltjes, {case}")
        if n0 is None:
            _new_method(outcome, case, exact, config, problem)
        else:
            _new_method(outcome, case, galerkin_input(problem, spec, n0), config, problem, exact)
    return outcome


def run_laplace(config, progress=None):
    """Grid-only Laplace inversions of the exact input and of noisy inputs over several seeds."""
    problem = ModelProblem()
    outcome = ExperimentOutcome("laplace")
    grid_config = replace(config, scan=replace(config.scan, skip_refine=True, levels=LAPLACE_LEVELS))
    exact = exact_input(problem, KernelSpec.laplace())
    if progress:
        progress("Laplace, exact input")
    _new_method(outcome, "exact", exact, grid_config, problem)

    seeds, chi_inputs, chi_fits, chi_solutions = [], [], [], []
    for offset in range(LAPLACE_SEEDS):
        seed = config.seed + offset
        if progress:
            progress(f"Laplace, tau={LAPLACE_TAU}, seed {seed}")
        sampled = noisy_input(exact, LAPLACE_TAU, seed)
        result = fit(sampled, grid_config)
        outcome.converged = outcome.converged and result.converged
        seeds.append(seed)
        chi_inputs.append(chi_input(exact.phi, sampled.phi))
        chi_fits.append(result.chi_fit)
        chi_solutions.append(_solution_metric(problem, result.ansatz, config.metrics))
    outcome.values[("noisy", "median_chi_fit")] = float(np.median(chi_fits))
    outcome.values[("noisy", "median_chi_solution")] = float(np.median(chi_solutions))
    outcome.curves["laplace_noise_runs"] = (["seed", "chi_input", "chi_fit", "chi_solution"],
                                            [seeds, chi_inputs, chi_fits, chi_solutions])
    return outcome


RUNNERS = {
    "table1": run_table1,
    "table2": run_table2,
    "table3": run_table3,
    "fig1": run_fig1,
    "stieltjes": run_stieltjes,
    "laplace": run_laplace,
}


def run_experiment(name, config, progress=None, targets=None):
    """Run and grade one experiment."""
    outcome = RUNNERS[name](config, progress)
    return grade(outcome, targets or load_targets())


def write_outcome(outcome, output_dir):
    """Write ``<name>.csv`` and ``<name>.json`` with the graded rows, plus one CSV per curve."""
    rows = [row.to_json() for row in outcome.rows]
    header = ["experiment", "case", "quantity", "reference", "computed", "tolerance", "passed"]
    with open(output_dir / f"{outcome.name}.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row[key]) for key in header])
    write_json(output_dir / f"{outcome.name}.json",
               {"experiment": outcome.name, "converged": outcome.converged, "passed": outcome.passed, "rows": rows})
    for name, (columns_header, columns) in outcome.curves.items():
        write_columns(output_dir / f"{name}.csv", columns_header, columns)


def _format_cell(value):
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)
