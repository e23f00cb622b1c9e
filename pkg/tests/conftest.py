import numpy as np
import pytest

from roict.geometry import FanBeamGeometry, paper_geometry
from roict.phantom import generate_phantom
from roict.projector import assemble


@pytest.fixture(scope="session")
def geometry():
    return paper_geometry()


@pytest.fixture(scope="session")
def W128(geometry):
    return assemble(geometry, 128)


@pytest.fixture(scope="session")
def phantom128():
    return generate_phantom(128).values


@pytest.fixture(scope="session")
def small_geometry():
    return FanBeamGeometry(num_views=10, num_cells=12, cell_pitch=0.8, sdd=291.2, sad=115.84, detector_offset=0.25)


@pytest.fixture(scope="session")
def W8(small_geometry):
    return assemble(small_geometry, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from scoreboard import lines

    summary = lines()
    if summary:
        terminalreporter.section("acceptance criteria")
        for line in summary:
            terminalreporter.write_line(line)
