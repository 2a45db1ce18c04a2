"""General configuration for tests."""
# Third Party
import pytest

# Application Specific
from shape_inversion.helpers.kernels import KernelSpec
from shape_inversion.helpers.model_problem import exact_input, ModelProblem

# Let pytest know we would like them to handle asserts in our helper code
pytest.register_assert_rewrite("testhelpers")


@pytest.fixture(scope="session")
def problem():
    """The model problem with eta = 1."""
    return ModelProblem()


@pytest.fixture(scope="session")
def lorentz_spec():
    """Lorentz kernel of width 10 MeV on the default range."""
    return KernelSpec.lorentz(10.0)


@pytest.fixture(scope="session")
def small_lorentz_spec():
    """A coarse Lorentz grid that keeps fits fast."""
    return KernelSpec.lorentz(10.0, n_samples=25)


@pytest.fixture(scope="session")
def small_exact_input(problem, small_lorentz_spec):
    """Exact Lorentz input on the coarse grid."""
    return exact_input(problem, small_lorentz_spec)
