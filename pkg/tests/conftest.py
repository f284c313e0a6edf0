import numpy as np
import pytest

from rankcpd.kernels import _numpy

try:
    from rankcpd.kernels import _numba
except ImportError:  # pragma: no cover
    _numba = None

BACKENDS = [pytest.param(_numpy, id="numpy")]
if _numba is not None:
    BACKENDS.append(pytest.param(_numba, id="numba"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240519)


# acceptance verdicts, printed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
