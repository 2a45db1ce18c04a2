"""Invert a sampled transform with the shape-constrained ansatz."""
# Standard Library
import argparse
from dataclasses import replace
import json
from pathlib import Path
import sys

# Third Party
from jsonschema import ValidationError
import numpy as np
from rich import print
from rich.live import Live

# Application Specific
from ..helpers.ansatz import count_sign_changes, eval_f
from ..helpers.errors import InversionError
from ..helpers.fitter import fit, fit_saturation
from ..helpers.metrics import ChiReport, chi_input, chi_solution, deviation_profile
from ..helpers.model_problem import exact_f, exact_input, ModelProblem
from ..helpers.progress_group import setup_progress_group, stage_reporter
from ..helpers.run_config import add_global_args, config_from_args
from ..helpers.sample_io import read_input, write_columns, write_json


def _parse_args():
    parser = argparse.ArgumentParser(
        prog="shape_inversion invert",
        description="Fit the shape-constrained ansatz to an input file and write the reconstructed solution."
    )
    parser.add_argument('input', type=str,
                        help="The input CSV; its JSON sidecar must sit next to it.")
    output_dir_default = 'inversion'
    parser.add_argument('-o', '--out', type=str, default=output_dir_default,
                        help=f"Name of the directory in which to write the results. (Default: {output_dir_default})")
    parser.add_argument('--grid-only', action='store_true',
                        help="Stop after the grid scan, without local minimization.")
    parser.add_argument('--n-extrema', type=int, default=None,
                        help="Number of extrema N of the solution. (Default: 1, or the config value)")
    parser.add_argument('--nu', type=float, default=None,
                        help="Threshold exponent. (Default: 0.5, or the config value)")
    parser.add_argument('--k-gamma', type=int, default=None, choices=range(0, 5),
                        help="Number of gamma coefficients. (Default: 0, or the config value)")
    parser.add_argument('--no-sum-rule', action='store_true',
                        help="Solve for C by linear least squares instead of imposing the sum rule.")
    parser.add_argument('--sum-rule', type=float, default=None,
                        help="Value of the sum rule. (Default: the model problem's, when the input has one)")
    parser.add_argument('--method', type=str, default=None, choices=["trf", "cg"],
                        help="Local minimizer. (Default: trf, or the config value)")
    parser.add_argument('--saturation', action='store_true',
                        help="Also refit with 0, 1, 2 and 4 gamma coefficients and write saturation.json.")
    add_global_args(parser)
    args = parser.parse_args(sys.argv[2:])
    return args


def _load(args):
    """Return (config, sampled), or None after reporting the problem."""
    try:
        config = config_from_args(
            args,
            n_extrema=args.n_extrema,
            nu=args.nu,
            k_gamma=args.k_gamma,
            skip_refine=True if args.grid_only else None,
            sum_rule_active=False if args.no_sum_rule else None,
            sum_rule_value=args.sum_rule,
        )
    except (FileNotFoundError, json.JSONDecodeError) as e:
        print(f"[red]Error:[/] Unable to load config {args.config}: {str(e)}")
        return None
    except ValidationError as e:
        print(f"[red]Error:[/] {args.config} does not match the schema: {e.message}")
        return None
    if args.method is not None:
        config = replace(config, refine=replace(config.refine, method=args.method))

    print(f"[green]Reading {args.input}...[/]")
    try:
        sampled = read_input(args.input)
    except FileNotFoundError as e:
        print(f"[red]Error:[/] {str(e)}")
        return None
    except ValidationError as e:
        print(f"[red]Error:[/] The sidecar of {args.input} does not match the schema: {e.message}")
        return None
    except (InversionError, json.JSONDecodeError) as e:
        print(f"[red]Error:[/] Unable to read {args.input}: {str(e)}")
        return None
    return config, sampled


def solution_table(result, sampled, metrics):
    """Columns (E, f_appr[, f_true]) of the reconstructed solution."""
    lo, hi = metrics.e_range
    energies = np.linspace(max(lo, sampled.spec.e_thr), hi, metrics.n1 + 1)
    header, columns = ["E", "f_appr"], [energies, eval_f(result.ansatz, energies)]
    if sampled.model_problem is not None:
        header.append("f_true")
        columns.append(exact_f(ModelProblem.from_json(sampled.model_problem), energies))
    return header, columns


def chi_report(result, sampled, metrics):
    """Collect the metrics that can be computed for this input."""
    report = ChiReport(result.chi_fit, n1=metrics.n1, n2=len(sampled), e_range=tuple(metrics.e_range))
    if sampled.model_problem is None:
        return report
    problem = ModelProblem.from_json(sampled.model_problem)
    if sampled.provenance.kind == "exact":
        report.chi_input = 0.0
    else:
        report.chi_input = chi_input(exact_input(problem, sampled.spec).phi, sampled.phi)
    report.chi_solution = chi_solution(lambda e: exact_f(problem, e), lambda e: eval_f(result.ansatz, e),
                                       tuple(metrics.e_range), metrics.n1)
    return report


def _saturation_rows(rows, sampled, metrics):
    table = []
    for row in rows:
        entry = {"k_gamma": row.k_gamma, "n_parameters": row.n_parameters, "chi_fit": row.result.chi_fit,
                 "objective": row.result.objective, "converged": row.result.converged,
                 "ansatz": row.result.ansatz.to_json()}
        if sampled.model_problem is not None:
            entry["chi_solution"] = chi_report(row.result, sampled, metrics).chi_solution
        table.append(entry)
    return table


def run():
    """Fit the ansatz to an input file and write fit.json, solution.csv, chi.json and deviation.csv."""
    args = _parse_args()
    # Load the config and the input file
    loaded = _load(args)
    if loaded is None:
        return 1
    config, sampled = loaded
    print(f"[green]Inverting {len(sampled)} {sampled.family.value} samples ({sampled.provenance}) "
          f"with N={config.scan.n_extrema}...[/]")

    # Run the fit and, if asked, the saturation series
    progress_group, overall_progress, step_progress = setup_progress_group()
    saturation = None
    try:
        with Live(progress_group):
            overall_task = overall_progress.add_task("Fitting", total=2 if args.saturation else 1)
            report = stage_reporter(step_progress)
            result = fit(sampled, config, report)
            overall_progress.advance(overall_task)
            if args.saturation:
                saturation = fit_saturation(sampled, config, progress=report)
                overall_progress.advance(overall_task)
            step_progress.update(report.task, visible=False)
    except InversionError as e:
        print(f"[red]Error:[/] The fit failed: {str(e)}")
        return 1

    # The fitted derivative must change sign once per extremum
    if count_sign_changes(result.ansatz) != config.scan.n_extrema:
        print(f"[red]Error:[/] The fitted derivative has {count_sign_changes(result.ansatz)} sign changes, "
              f"expected {config.scan.n_extrema}")
        return 1

    # Ensure the output directory exists
    output_dir = Path(args.out)
    output_dir.mkdir(parents=True, exist_ok=True)
    metrics = config.metrics
    write_json(output_dir / "fit.json", result.to_json())
    write_columns(output_dir / "solution.csv", *solution_table(result, sampled, metrics))
    chi = chi_report(result, sampled, metrics)
    write_json(output_dir / "chi.json", chi.to_json())
    # Window integrals of the error need the exact solution
    if sampled.model_problem is not None:
        problem = ModelProblem.from_json(sampled.model_problem)
        profile = deviation_profile(lambda e: exact_f(problem, e), lambda e: eval_f(result.ansatz, e),
                                    metrics.delta, tuple(metrics.e_range))
        write_columns(output_dir / "deviation.csv", ["E_lo", "E_hi", "abs_integral"],
                      [[lo for (lo, _), _ in profile], [hi for (_, hi), _ in profile], [v for _, v in profile]])
    if saturation is not None:
        write_json(output_dir / "saturation.json", _saturation_rows(saturation, sampled, metrics))
        for row in saturation:
            print(f"  K_gamma={row.k_gamma} ({row.n_parameters} parameters): chi_fit={row.result.chi_fit:.3e}")

    print(f"[green]chi_fit = {chi.chi_fit:.3e}[/]")
    if chi.chi_solution is not None:
        print(f"[green]chi_input = {chi.chi_input:.3e}, chi_solution = {chi.chi_solution:.3e}[/]")
    print(f"[green]Results written to {output_dir}[/]")

    if not result.converged:
        print(f"[yellow]Warning:[/] The local minimization did not converge: {result.message}")
        return 1
    return 0
