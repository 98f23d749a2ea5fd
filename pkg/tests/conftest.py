import pytest

from dualfraisse import kernels


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    before = kernels.backend_name()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(before)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
