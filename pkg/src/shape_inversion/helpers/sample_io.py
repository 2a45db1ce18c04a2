"""Sampled transform inputs and their on-disk form.

An input is a two-column CSV (sigma, phi) next to a JSON sidecar with the same stem. The sidecar records the kernel,
where the values came from and, for model-problem inputs, the constants needed to compare against the exact solution.
"""
# Standard Library
import csv
from dataclasses import dataclass, field
import json
from pathlib import Path

# Third Party
from jsonschema import validate
import numpy as np

# Application Specific
from .. import data_dir
from .errors import InputFileError
from .kernels import KernelSpec


def write_columns(path, header, columns):
    """Write equal-length columns to a CSV file with full-precision scientific notation."""
    columns = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([f"{v:.16e}" for v in row])


def read_columns(path):
    """Read a CSV written by :func:`write_columns`. Returns (header, list of numpy columns)."""
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise InputFileError(f"{path} is empty") from None
        try:
            rows = [[float(v) for v in row] for row in reader if row]
        except ValueError as e:
            raise InputFileError(f"{path} contains a non-numeric value: {e}") from None
    if any(len(row) != len(header) for row in rows):
        raise InputFileError(f"{path} has rows that do not match its header")
    columns = [np.array(c) for c in zip(*rows)] if rows else [np.array([]) for _ in header]
    return header, columns


def write_json(path, data):
    """Write a JSON document the way every output of this package is written."""
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def load_schema(name):
    """Load one of the packaged JSON schemas."""
    with open(data_dir / name, "r") as f:
        return json.load(f)


@dataclass(frozen=True)
class Provenance:
    """Where a sampled input came from.

    Attributes:
        kind: ``exact``, ``galerkin`` or ``noisy``.
        n0: Galerkin basis size.
        b: Galerkin basis length scale (fm).
        tau: Relative noise level.
        seed: Seed of the noise generator.
        base: Provenance of the input the noise was added to.
    """
    kind: str
    n0: int = None
    b: float = None
    tau: float = None
    seed: int = None
    base: "Provenance" = None

    @classmethod
    def exact(cls):
        """Exact quadrature of the model solution."""
        return cls("exact")

    @classmethod
    def galerkin(cls, n0, b):
        """Truncated Laguerre-basis solution with ``n0`` functions."""
        return cls("galerkin", n0=n0, b=b)

    @classmethod
    def noisy(cls, tau, seed, base=None):
        """Multiplicative Gaussian noise of relative size ``tau``."""
        return cls("noisy", tau=tau, seed=seed, base=base)

    def to_json(self):
        """Return a JSON-ready dictionary, omitting unset fields."""
        data = {"kind": self.kind}
        for name in ("n0", "b", "tau", "seed"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if self.base is not None:
            data["base"] = self.base.to_json()
        return data

    @classmethod
    def from_json(cls, data):
        """Inverse of :meth:`to_json`."""
        base = cls.from_json(data["base"]) if "base" in data else None
        return cls(data["kind"], n0=data.get("n0"), b=data.get("b"), tau=data.get("tau"), seed=data.get("seed"),
                   base=base)

    def __str__(self):
        """Return a short human-readable label."""
        if self.kind == "galerkin":
            return f"Galerkin(N0={self.n0})"
        if self.kind == "noisy":
            return f"Noisy(tau={self.tau}, seed={self.seed})"
        return "Exact"


@dataclass(frozen=True)
class SampledInput:
    """Approximate transform values on a grid, with least-squares weights.

    Attributes:
        sigma: Evaluation points, strictly increasing.
        phi: Transform values at ``sigma``.
        weights: Positive weights of the least-squares norm.
        spec: The kernel the values belong to.
        provenance: How the values were obtained.
        model_problem: Constants of the model problem as a dictionary, when the exact solution is known.
    """
    sigma: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    spec: KernelSpec
    provenance: Provenance = field(default_factory=Provenance.exact)
    model_problem: dict = None

    def __post_init__(self):
        """Check the array invariants."""
        for name in ("sigma", "phi", "weights"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (len(self.sigma) == len(self.phi) == len(self.weights)):
            raise InputFileError("sigma, phi and weights must have equal lengths")
        if len(self.sigma) > 1 and np.any(np.diff(self.sigma) <= 0):
            raise InputFileError("sigma must be strictly increasing")
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise InputFileError("weights must be positive and finite")

    @classmethod
    def relative(cls, sigma, phi, spec, provenance=None, model_problem=None):
        """Build an input weighted by 1 / phi**2, so the norm measures relative deviations."""
        phi = np.asarray(phi, dtype=float)
        if np.any(phi == 0):
            raise InputFileError("Relative weighting needs phi without zeros")
        return cls(sigma, phi, 1.0 / phi ** 2, spec, provenance or Provenance.exact(), model_problem)

    @property
    def family(self):
        """The kernel family."""
        return self.spec.family

    def __len__(self):
        """Return the number of samples."""
        return len(self.sigma)


def sidecar_path(csv_path):
    """Return the JSON sidecar belonging to an input CSV."""
    return Path(csv_path).with_suffix(".json")


def write_input(sampled, csv_path):
    """Write an input CSV and its sidecar."""
    csv_path = Path(csv_path)
    write_columns(csv_path, ["sigma", "phi"], [sampled.sigma, sampled.phi])
    sidecar = {
        "kernel": sampled.spec.to_json(),
        "provenance": sampled.provenance.to_json(),
        "weights": "relative",
    }
    if not np.allclose(sampled.weights * sampled.phi ** 2, 1.0, rtol=1e-12, atol=0.0):
        sidecar["weights"] = [float(w) for w in sampled.weights]
    if sampled.model_problem is not None:
        sidecar["model_problem"] = sampled.model_problem
    write_json(sidecar_path(csv_path), sidecar)


def read_input(csv_path):
    """Read an input CSV and its sidecar.

    Raises:
        FileNotFoundError: Either file is missing.
        jsonschema.ValidationError: The sidecar does not match the schema.
        InputFileError: The files disagree with each other.
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise FileNotFoundError(f"Input file {csv_path} does not exist")
    side = sidecar_path(csv_path)
    if not side.is_file():
        raise FileNotFoundError(f"Sidecar {side} does not exist")
    with open(side, "r") as f:
        sidecar = json.load(f)
    validate(sidecar, load_schema("input_sidecar_schema.json"))

    header, columns = read_columns(csv_path)
    if header[:2] != ["sigma", "phi"]:
        raise InputFileError(f"{csv_path} must start with the columns sigma,phi")
    sigma, phi = columns[0], columns[1]
    spec = KernelSpec.from_json(sidecar["kernel"])
    provenance = Provenance.from_json(sidecar["provenance"])
    model_problem = sidecar.get("model_problem")
    if sidecar["weights"] == "relative":
        return SampledInput.relative(sigma, phi, spec, provenance, model_problem)
    if len(sidecar["weights"]) != len(sigma):
        raise InputFileError(f"{side} lists {len(sidecar['weights'])} weights for {len(sigma)} samples")
    return SampledInput(sigma, phi, sidecar["weights"], spec, provenance, model_problem)
