import pytest

from gasket_solenoid import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jitted kernels once so timed checks measure the algorithms
    kernels.warmup()
