import pytest

from cm_lab.kernels import build_kernel_suite
from cm_lab.spectra import ManifoldKind


@pytest.fixture(scope="session")
def suite():
    """The reference kernel suite: d = 2, lambda_X = 20, epsilon = 0.5."""
    return build_kernel_suite(2, 20.0, 0.5)


@pytest.fixture
def circle():
    return ManifoldKind.torus(1)


@pytest.fixture
def sphere():
    return ManifoldKind.sphere2()
