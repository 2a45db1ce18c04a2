"""Run configuration: JSON file, schema validation and command-line overrides."""
# Standard Library
from dataclasses import dataclass, field, fields, replace
import json

# Third Party
from jsonschema import validate

# Application Specific
from .sample_io import load_schema


@dataclass(frozen=True)
class ScanConfig:
    """Settings of the nested (Ebar, beta) grid scan.

    Attributes:
        n_extrema: Number of roots N of f'.
        nu: Threshold exponent.
        k_gamma: Number of gamma coefficients refined after the scan.
        ebar_range: (lo, hi) of the Ebar grid; derived from the input when None.
        beta_range: (lo, hi) of the beta grid; (N + nu + 1.25, 14) when None.
        points_ebar: Grid points along Ebar on the first level.
        points_beta: Grid points along beta on the first level.
        levels: Number of 10x finer refinement levels after the first grid.
        level_points: Points per axis on every refinement level.
        k_seeds: Number of best cells returned as seeds.
        skip_refine: Stop after the grid scan.
        sum_rule_active: Fix C from the sum rule instead of linear least squares.
        sum_rule_value: The sum rule; taken from the input's model problem when None.
        f_cap: Reject cells whose max |f| exceeds this value. Off when None.
        initial_roots: Starting values of the roots that are not eliminated.
    """
    n_extrema: int = 1
    nu: float = 0.5
    k_gamma: int = 0
    ebar_range: tuple = None
    beta_range: tuple = None
    points_ebar: int = 20
    points_beta: int = 20
    levels: int = 3
    level_points: int = 21
    k_seeds: int = 1
    skip_refine: bool = False
    sum_rule_active: bool = True
    sum_rule_value: float = None
    f_cap: float = None
    initial_roots: tuple = None


@dataclass(frozen=True)
class RefineOptions:
    """Settings of the local minimization after the scan.

    Attributes:
        method: ``trf`` for trust-region least squares or ``cg`` for Polak-Ribiere conjugate gradients.
        diff_step: Relative finite-difference step.
        ftol: Stop when the relative objective decrease falls below this.
        xtol: Stop when the relative parameter step falls below this.
        max_evaluations: Budget of objective evaluations.
    """
    method: str = "trf"
    diff_step: float = 1e-6
    ftol: float = 1e-12
    xtol: float = 1e-10
    max_evaluations: int = 4000


@dataclass(frozen=True)
class BaselineConfig:
    """Settings of the standard inversion.

    Attributes:
        n_list: Basis sizes to fit, in increasing order.
        alpha_min: Smallest scale parameter on the grid.
        alpha_max: Largest scale parameter on the grid.
        alpha_points: Number of log-spaced grid points.
        refine_alpha: Polish the best grid alpha by a bounded scalar minimization.
    """
    n_list: tuple = (5, 8, 9, 10)
    alpha_min: float = 0.01
    alpha_max: float = 2.0
    alpha_points: int = 40
    refine_alpha: bool = True


@dataclass(frozen=True)
class MetricsConfig:
    """Sampling of the solution metrics."""
    e_range: tuple = (0.0, 42.0)
    n1: int = 200
    delta: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs beyond its positional arguments."""
    scan: ScanConfig = field(default_factory=ScanConfig)
    refine: RefineOptions = field(default_factory=RefineOptions)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    threads: int = 1
    seed: int = 0


def _section(cls, data):
    known = {f.name for f in fields(cls)}
    values = {}
    for key, value in data.items():
        if key in known:
            values[key] = tuple(value) if isinstance(value, list) else value
    return cls(**values)


def config_from_dict(data):
    """Validate ``data`` against the schema and build a RunConfig.

    Raises:
        jsonschema.ValidationError: The document does not match the schema.
    """
    validate(data, load_schema("run_config_schema.json"))
    return RunConfig(
        scan=_section(ScanConfig, data.get("scan", {})),
        refine=_section(RefineOptions, data.get("refine", {})),
        baseline=_section(BaselineConfig, data.get("baseline", {})),
        metrics=_section(MetricsConfig, data.get("metrics", {})),
        threads=data.get("threads", 1),
        seed=data.get("seed", 0),
    )


def load_run_config(path=None):
    """Read a configuration file, or return the defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    with open(path, "r") as f:
        return config_from_dict(json.load(f))


def with_overrides(config, threads=None, seed=None, **scan_overrides):
    """Return ``config`` with the command-line values that were actually given."""
    changes = {}
    if threads is not None:
        changes["threads"] = threads
    if seed is not None:
        changes["seed"] = seed
    scan_changes = {k: v for k, v in scan_overrides.items() if v is not None}
    if scan_changes:
        changes["scan"] = replace(config.scan, **scan_changes)
    return replace(config, **changes)


def add_global_args(parser):
    """Add the flags every numeric command shares."""
    parser.add_argument('--config', type=str, default=None,
                        help="JSON file with scan, refine, baseline and metrics settings. (Default: built-in values)")
    parser.add_argument('--threads', type=int, default=None,
                        help="Maximum number of worker threads. (Default: 1, or the config value)")
    parser.add_argument('--seed', type=int, default=None,
                        help="Seed for every random draw. (Default: 0, or the config value)")


def config_from_args(args, **scan_overrides):
    """Load ``args.config`` and apply ``--threads``, ``--seed`` and the given scan overrides.

    Raises:
        FileNotFoundError: The config file does not exist.
        json.JSONDecodeError: The config file is not JSON.
        jsonschema.ValidationError: The config file does not match the schema.
    """
    config = load_run_config(args.config)
    return with_overrides(config, args.threads, args.seed, **scan_overrides)
