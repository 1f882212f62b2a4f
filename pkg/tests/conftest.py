import numpy as np
import pytest

from stirap6.hamiltonian import builtin_config_path, load_config


def _cfg(name):
    return load_config(builtin_config_path(name))[0]


@pytest.fixture(scope="session")
def fig2_cfg():
    return _cfg("fig2")


@pytest.fixture(scope="session")
def fig3_cfg():
    return _cfg("fig3")


@pytest.fixture(scope="session")
def sweep_cfg():
    return _cfg("sweep")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record a one-line verdict that is echoed in the terminal summary."""

    def _report(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
