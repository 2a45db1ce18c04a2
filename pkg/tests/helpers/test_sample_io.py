"""Tests for input files and their sidecars."""
# Standard Library
import json

# Third Party
from jsonschema import ValidationError
import numpy as np
import pytest

# Application Specific
from shape_inversion.helpers.errors import InputFileError
from shape_inversion.helpers.kernels import KernelSpec
from shape_inversion.helpers.sample_io import (Provenance, read_columns, read_input, SampledInput, sidecar_path,
                                               write_columns, write_input)


def test_input_round_trip(tmp_path, small_exact_input):
    """An input and its provenance survive the round trip."""
    path = tmp_path / "input.csv"
    write_input(small_exact_input, path)
    assert sidecar_path(path) == tmp_path / "input.json"
    sidecar = json.loads(sidecar_path(path).read_text())
    assert sidecar["weights"] == "relative"
    assert sidecar["kernel"]["sigma_I"] == 10.0

    loaded = read_input(path)
    np.testing.assert_array_equal(loaded.phi, small_exact_input.phi)
    np.testing.assert_array_equal(loaded.sigma, small_exact_input.sigma)
    assert loaded.spec == small_exact_input.spec
    assert loaded.provenance == small_exact_input.provenance
    assert loaded.model_problem == small_exact_input.model_problem


def test_explicit_weights(tmp_path):
    """Non-relative weights are written out in full."""
    spec = KernelSpec.laplace(n_samples=3)
    sampled = SampledInput([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], [1.0, 2.0, 3.0], spec,
                           Provenance.noisy(0.1, 3, Provenance.galerkin(5, 0.3)))
    path = tmp_path / "noisy.csv"
    write_input(sampled, path)
    loaded = read_input(path)
    np.testing.assert_array_equal(loaded.weights, [1.0, 2.0, 3.0])
    assert loaded.provenance.base.n0 == 5
    assert str(loaded.provenance) == "Noisy(tau=0.1, seed=3)"
    assert loaded.model_problem is None


def test_missing_files(tmp_path, small_exact_input):
    """Missing inputs and sidecars name the path."""
    with pytest.raises(FileNotFoundError, match="nothing.csv"):
        read_input(tmp_path / "nothing.csv")
    path = tmp_path / "input.csv"
    write_input(small_exact_input, path)
    sidecar_path(path).unlink()
    with pytest.raises(FileNotFoundError, match="input.json"):
        read_input(path)


def test_sidecar_schema(tmp_path, small_exact_input):
    """A sidecar with an unknown kernel family is refused."""
    path = tmp_path / "input.csv"
    write_input(small_exact_input, path)
    sidecar = json.loads(sidecar_path(path).read_text())
    sidecar["kernel"]["family"] = "gaussian"
    sidecar_path(path).write_text(json.dumps(sidecar))
    with pytest.raises(ValidationError):
        read_input(path)


def test_bad_header(tmp_path, small_exact_input):
    """The CSV must start with sigma and phi."""
    path = tmp_path / "input.csv"
    write_input(small_exact_input, path)
    write_columns(path, ["z", "phi"], [small_exact_input.sigma, small_exact_input.phi])
    with pytest.raises(InputFileError):
        read_input(path)


def test_read_columns_errors(tmp_path):
    """Empty and non-numeric files are reported."""
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(InputFileError):
        read_columns(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1.0,x\n")
    with pytest.raises(InputFileError):
        read_columns(bad)


def test_sampled_input_invariants():
    """Lengths, ordering, weights and zeros are checked."""
    spec = KernelSpec.laplace(n_samples=2)
    with pytest.raises(InputFileError):
        SampledInput([0.0, 1.0], [1.0], [1.0, 1.0], spec)
    with pytest.raises(InputFileError):
        SampledInput([1.0, 0.0], [1.0, 1.0], [1.0, 1.0], spec)
    with pytest.raises(InputFileError):
        SampledInput([0.0, 1.0], [1.0, 1.0], [1.0, 0.0], spec)
    with pytest.raises(InputFileError):
        SampledInput.relative([0.0, 1.0], [1.0, 0.0], spec)
    assert len(SampledInput.relative([0.0, 1.0], [2.0, 1.0], spec)) == 2
