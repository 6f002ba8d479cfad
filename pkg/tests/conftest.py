import numpy as np
import pytest

from flexauc import kernels

KERNEL_FUNCS = (
    "top_bids", "allocate", "vcg_payments", "uniform_price", "uniform_payments",
    "max_loser_bids", "partial_uniform_payments", "brute_force_welfare",
)

BACKENDS = {m.BACKEND: m for m in kernels.available_backends()}


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per kernel backend (pure Python and, if built, Cython)."""
    mod = BACKENDS[request.param]
    for name in KERNEL_FUNCS:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def pair():
    return np.array([[5.0, 3.0], [4.0, 1.0]])


@pytest.fixture
def triple():
    return np.array([[5.0, 3.0], [4.0, 1.0], [2.0, 1.0]])


ACCEPTANCE_LINES: list[str] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and report.when == "call":
        label = (item.function.__doc__ or item.name).strip().splitlines()[0]
        suffix = f" [{item.callspec.id}]" if hasattr(item, "callspec") else ""
        ACCEPTANCE_LINES.append(f"{'PASS' if report.passed else 'FAIL'}  {label}{suffix}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
