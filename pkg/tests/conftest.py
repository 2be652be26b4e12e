import pytest

from tmqi import _kernel_py, montecarlo

try:
    from tmqi import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None

KERNELS = [_kernel_py] + ([_kernel_c] if _kernel_c is not None else [])

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=KERNELS, ids=lambda k: k.BACKEND)
def kernel(request, monkeypatch):
    """Run the test once per available simulation backend."""
    monkeypatch.setattr(montecarlo, "_kernel", request.param)
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
