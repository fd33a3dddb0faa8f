import numpy as np
import pytest

from cuspflow.cusp_model import RadialGrid, SymTensorField, WeightSpec, HolderOrders


@pytest.fixture(scope="session")
def grid():
    return RadialGrid(s=0.0, R=20.0, n=400)


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid(s=0.0, R=8.0, n=161)


def smooth_bump(r, center, width):
    u = (r - center) / width
    out = np.zeros_like(r)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def frame_field(grid, coef, center=8.0, width=4.0, wiggle=0.3):
    r = grid.r
    prof = smooth_bump(r, center, width) * (1 + wiggle * np.sin(r))
    return SymTensorField.from_frame(grid, prof[:, None] * np.asarray(coef)[None, :])


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
