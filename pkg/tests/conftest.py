import numpy as np
import pytest

from layermixed import build_mesh_1d, build_tensor_mesh

ACCEPTANCE_LINES = []


def graded_mesh(N=8, eps=1e-3, sigma=2.5, family="bakhvalov-s", layout="two-sided"):
    m = build_mesh_1d(N, eps, sigma, family, layout)
    return build_tensor_mesh(m, m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
