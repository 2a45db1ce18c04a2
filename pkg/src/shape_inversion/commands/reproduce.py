"""Run the model-problem experiment matrix and grade it against the embedded targets."""
# Standard Library
import argparse
import json
from pathlib import Path
import sys

# Third Party
from jsonschema import ValidationError
from rich import print
from rich.live import Live

# Application Specific
from ..helpers.errors import InversionError
from ..helpers.experiments import EXPERIMENTS, load_targets, run_experiment, write_outcome
from ..helpers.progress_group import setup_progress_group, stage_reporter
from ..helpers.run_config import add_global_args, config_from_args


def _parse_args():
    parser = argparse.ArgumentParser(
        prog="shape_inversion reproduce",
        description="Run the model-problem experiments and compare them with the reference values."
    )
    parser.add_argument('experiments', type=str, nargs='+', choices=EXPERIMENTS + ("all",),
                        help="Experiments to run, or 'all'.")
    output_dir_default = 'reproduction'
    parser.add_argument('-o', '--out', type=str, default=output_dir_default,
                        help=f"Name of the directory in which to write the tables. (Default: {output_dir_default})")
    add_global_args(parser)
    args = parser.parse_args(sys.argv[2:])
    return args


def _print_rows(outcome):
    for row in outcome.rows:
        if row.passed is None:
            verdict = "[dim]info[/]"
        elif row.passed:
            verdict = "[green]pass[/]"
        else:
            verdict = "[red]FAIL[/]"
        computed = "n/a" if row.computed is None else f"{row.computed:.3e}"
        print(f"  {verdict} {row.case:20} {row.quantity:22} reference={row.reference:.3e} computed={computed} "
              f"({row.tolerance})")


def run():
    """Run the requested experiments; succeed only when every check passes and every fit converges."""
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
    # Expand "all" and drop duplicates, keeping the order given
    names = EXPERIMENTS if "all" in args.experiments else tuple(dict.fromkeys(args.experiments))
    targets = load_targets()

    # Ensure the output directory exists
    output_dir = Path(args.out)
    output_dir.mkdir(parents=True, exist_ok=True)
    progress_group, overall_progress, step_progress = setup_progress_group()
    outcomes = []
    try:
        with Live(progress_group):
            overall_task = overall_progress.add_task("Reproducing", total=len(names))
            report = stage_reporter(step_progress)
            for name in names:
                overall_progress.update(overall_task, description=f"Reproducing {name}")
                outcome = run_experiment(name, config, report, targets)
                write_outcome(outcome, output_dir)
                outcomes.append(outcome)
                overall_progress.advance(overall_task)
            step_progress.update(report.task, visible=False)
    except InversionError as e:
        print(f"[red]Error:[/] Experiment failed: {str(e)}")
        return 1

    # Summarize every graded check
    for outcome in outcomes:
        status = "[green]passed[/]" if outcome.passed else "[red]failed[/]"
        print(f"[bold]{outcome.name}[/]: {status}")
        _print_rows(outcome)
        if not outcome.converged:
            print(f"[yellow]Warning:[/] At least one fit in {outcome.name} did not converge")
    print(f"[green]Tables written to {output_dir}[/]")
    return 0 if all(outcome.passed for outcome in outcomes) else 1
