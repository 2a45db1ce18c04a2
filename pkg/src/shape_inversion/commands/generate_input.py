"""Sample model-problem transforms and write them as input files."""
# Standard Library
import argparse
import json
from pathlib import Path
import sys

# Third Party
from jsonschema import ValidationError
from rich import print

# Application Specific
from ..helpers.errors import InversionError
from ..helpers.kernels import DEFAULT_N_SAMPLES, KernelFamily, KernelSpec, LAPLACE_Z_MAX
from ..helpers.model_problem import DEFAULT_B, exact_input, galerkin_input, ModelProblem, noisy_input
from ..helpers.run_config import add_global_args, config_from_args
from ..helpers.sample_io import sidecar_path, write_input


def _parse_args():
    parser = argparse.ArgumentParser(
        prog="shape_inversion generate-input",
        description="Sample the model-problem transform, exactly or from a truncated Galerkin solution, "
                    "optionally with multiplicative noise."
    )
    family_default = KernelFamily.LORENTZ.value
    parser.add_argument('--family', type=str, default=family_default, choices=[f.value for f in KernelFamily],
                        help=f"The transform to sample. (Default: {family_default})")
    sigma_i_default = 10.0
    parser.add_argument('--sigma-i', type=float, default=sigma_i_default,
                        help=f"Width of the Lorentz kernel in MeV. (Default: {sigma_i_default})")
    s_max_default = -2.0
    parser.add_argument('--s-max', type=float, default=s_max_default,
                        help=f"Upper end of the Stieltjes range in MeV. (Default: {s_max_default})")
    parser.add_argument('--z-max', type=float, default=LAPLACE_Z_MAX,
                        help=f"Upper end of the Laplace range in 1/MeV. (Default: {LAPLACE_Z_MAX})")
    parser.add_argument('--n-samples', type=int, default=DEFAULT_N_SAMPLES,
                        help=f"Number of evaluation points. (Default: {DEFAULT_N_SAMPLES})")
    source = parser.add_mutually_exclusive_group()
    source.add_argument('--exact', action='store_true',
                        help="Sample the exact transform. (Default)")
    source.add_argument('--galerkin', type=int, default=None, metavar="N0",
                        help="Use the Galerkin solution with N0 basis functions instead of the exact transform.")
    parser.add_argument('--b', type=float, default=DEFAULT_B,
                        help=f"Length scale of the Galerkin basis in fm. (Default: {DEFAULT_B})")
    noise_default = 0.0
    parser.add_argument('--noise', type=float, default=noise_default,
                        help=f"Relative noise level tau. (Default: {noise_default})")
    output_dir_default = 'inputs'
    parser.add_argument('-o', '--out', type=str, default=output_dir_default,
                        help=f"Name of the directory in which to write the input. (Default: {output_dir_default})")
    parser.add_argument('--name', type=str, default=None,
                        help="File stem of the input. (Default: derived from the settings)")
    add_global_args(parser)
    args = parser.parse_args(sys.argv[2:])
    return args


def default_name(args, seed):
    """Derive a file stem from the sampling settings."""
    if args.family == KernelFamily.LORENTZ.value:
        name = f"lorentz_sigma{args.sigma_i:g}"
    elif args.family == KernelFamily.STIELTJES.value:
        name = f"stieltjes_smax{args.s_max:g}"
    else:
        name = f"laplace_zmax{args.z_max:g}"
    name += f"_galerkin{args.galerkin}" if args.galerkin is not None else "_exact"
    if args.noise > 0:
        name += f"_noise{args.noise:g}_seed{seed}"
    return name


def build_spec(args):
    """Build the KernelSpec the arguments describe."""
    if args.family == KernelFamily.LORENTZ.value:
        return KernelSpec.lorentz(args.sigma_i, n_samples=args.n_samples)
    if args.family == KernelFamily.STIELTJES.value:
        return KernelSpec.stieltjes(args.s_max, n_samples=args.n_samples)
    return KernelSpec.laplace(args.z_max, n_samples=args.n_samples)


def run():
    """Sample the model-problem transform and write ``<name>.csv`` plus its sidecar."""
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

    # Build the samples
    problem = ModelProblem()
    try:
        spec = build_spec(args)
        if args.galerkin is not None:
            print(f"[green]Solving the Galerkin system with N0={args.galerkin}...[/]")
            sampled = galerkin_input(problem, spec, args.galerkin, args.b)
        else:
            print("[green]Sampling the exact transform...[/]")
            sampled = exact_input(problem, spec)
        if args.noise > 0:
            print(f"[green]Adding noise tau={args.noise} with seed {config.seed}...[/]")
        sampled = noisy_input(sampled, args.noise, config.seed)
    except InversionError as e:
        print(f"[red]Error:[/] {str(e)}")
        return 1

    # Ensure the output directory exists
    output_dir = Path(args.out)
    output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = output_dir / f"{args.name or default_name(args, config.seed)}.csv"
    write_input(sampled, csv_path)
    print(f"[green]Wrote {len(sampled)} samples to {csv_path} and {sidecar_path(csv_path)}[/]")
    return 0
