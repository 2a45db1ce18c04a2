"""Run the standard inversion on an input file for a list of basis sizes."""
# Standard Library
import argparse
from dataclasses import replace
import json
import math
from pathlib import Path
import sys

# Third Party
from jsonschema import ValidationError
from rich import print
from rich.live import Live

# Application Specific
from ..helpers.errors import InversionError
from ..helpers.metrics import chi_solution
from ..helpers.model_problem import exact_f, ModelProblem
from ..helpers.progress_group import setup_progress_group, stage_reporter
from ..helpers.run_config import add_global_args, config_from_args
from ..helpers.sample_io import read_input, write_columns
from ..helpers.standard_inversion import alpha_grid, sweep_standard


def _parse_args():
    parser = argparse.ArgumentParser(
        prog="shape_inversion baseline",
        description="Fit truncated basis expansions to an input file, one fit per basis size."
    )
    parser.add_argument('input', type=str,
                        help="The input CSV; its JSON sidecar must sit next to it.")
    output_dir_default = 'baseline'
    parser.add_argument('-o', '--out', type=str, default=output_dir_default,
                        help=f"Name of the directory in which to write baseline.csv. (Default: {output_dir_default})")
    parser.add_argument('--n-list', type=int, nargs='+', default=None,
                        help="Basis sizes to fit. (Default: 5 8 9 10, or the config value)")
    parser.add_argument('--alpha-min', type=float, default=None,
                        help="Smallest scale parameter in 1/MeV. (Default: 0.01, or the config value)")
    parser.add_argument('--alpha-max', type=float, default=None,
                        help="Largest scale parameter in 1/MeV. (Default: 2, or the config value)")
    parser.add_argument('--alpha-points', type=int, default=None,
                        help="Number of log-spaced scale parameters. (Default: 40, or the config value)")
    parser.add_argument('--grid-alpha', action='store_true',
                        help="Keep the best grid scale parameter instead of minimizing between grid points.")
    add_global_args(parser)
    args = parser.parse_args(sys.argv[2:])
    return args


def _baseline_config(args, config):
    changes = {
        "n_list": tuple(args.n_list) if args.n_list else None,
        "alpha_min": args.alpha_min,
        "alpha_max": args.alpha_max,
        "alpha_points": args.alpha_points,
        "refine_alpha": False if args.grid_alpha else None,
    }
    return replace(config.baseline, **{k: v for k, v in changes.items() if v is not None})


def run():
    """Write baseline.csv with chi_fit, chi_solution, rank and condition per basis size."""
    args = _parse_args()
    # Load the run configuration
    try:
        config = config_from_args(args)
    except (FileNotFoundError, json.JSONDecodeError) as e:
        print(f"[red]Error:[/] Unable to load config {args.config}: {str(e)}")
        return 1
    except ValidationError as e:
        print(f"[red]Error:[/] {args.config} does not match the schema: {e.message}")
        return 1
    baseline = _baseline_config(args, config)
    if any(n < 1 for n in baseline.n_list) or not 0 < baseline.alpha_min <= baseline.alpha_max:
        print("[red]Error:[/] Basis sizes must be positive and 0 < alpha-min <= alpha-max")
        return 1

    # Read the input and its sidecar
    print(f"[green]Reading {args.input}...[/]")
    try:
        sampled = read_input(args.input)
    except FileNotFoundError as e:
        print(f"[red]Error:[/] {str(e)}")
        return 1
    except ValidationError as e:
        print(f"[red]Error:[/] The sidecar of {args.input} does not match the schema: {e.message}")
        return 1
    except (InversionError, json.JSONDecodeError) as e:
        print(f"[red]Error:[/] Unable to read {args.input}: {str(e)}")
        return 1

    # Fit every basis size
    alphas = alpha_grid(baseline.alpha_min, baseline.alpha_max, baseline.alpha_points)
    progress_group, overall_progress, step_progress = setup_progress_group()
    try:
        with Live(progress_group):
            overall_progress.add_task("Standard inversion", total=None)
            report = stage_reporter(step_progress)
            fits = sweep_standard(sampled, baseline.n_list, alphas, config.threads, report, baseline.refine_alpha)
            step_progress.update(report.task, visible=False)
    except InversionError as e:
        print(f"[red]Error:[/] The standard inversion failed: {str(e)}")
        return 1

    # Compare against the exact solution when the input knows it
    problem = ModelProblem.from_json(sampled.model_problem) if sampled.model_problem is not None else None
    solutions = []
    for standard in fits:
        if standard.rank_deficient:
            print(f"[yellow]Warning:[/] N={standard.expansion.n_basis} is rank deficient "
                  f"(rank {standard.rank}, condition {standard.condition:.2e})")
        if problem is None:
            solutions.append(math.nan)
            continue
        solutions.append(chi_solution(lambda e: exact_f(problem, e), standard.expansion.evaluate,
                                      tuple(config.metrics.e_range), config.metrics.n1))

    # Ensure the output directory exists
    output_dir = Path(args.out)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_columns(output_dir / "baseline.csv", ["N", "alpha", "chi_fit", "chi_solution", "rank", "condition"],
                  [[f.expansion.n_basis for f in fits], [f.expansion.alpha for f in fits], [f.chi_fit for f in fits],
                   solutions, [f.rank for f in fits], [f.condition for f in fits]])
    for standard, chi in zip(fits, solutions):
        print(f"  N={standard.expansion.n_basis}: alpha={standard.expansion.alpha:.3g}, "
              f"chi_fit={standard.chi_fit:.3e}, chi_solution={chi:.3e}")
    print(f"[green]Results written to {output_dir / 'baseline.csv'}[/]")
    return 0
