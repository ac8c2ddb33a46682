import numpy as np
import pytest

from veloq import _kernels_py
from veloq._core import BACKEND, kernels


def _backends():
    out = [pytest.param(_kernels_py, id="python")]
    if BACKEND == "cython":
        out.append(pytest.param(kernels, id="cython"))
    return out


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from tests_support import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
