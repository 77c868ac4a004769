import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from phtkan.geometry import angle_direction, generate_net  # noqa: E402
from phtkan.kan import sample_pht  # noqa: E402
from phtkan.shapes import disk_mesh  # noqa: E402
from phtkan.spacetime import SampleGrid  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PI = math.pi
W = angle_direction(PI / 2)


@pytest.fixture(scope="session")
def disk():
    return disk_mesh(64)


@pytest.fixture(scope="session")
def hex_grid():
    """Six directions and the parameters -pi, -5pi/6, ..., 0."""
    return SampleGrid(generate_net(6), np.linspace(-PI, 0, 7))


@pytest.fixture(scope="session")
def hex_diagram(disk, hex_grid):
    return sample_pht(disk, hex_grid, 0)


@pytest.fixture(scope="session")
def fine_diagram(disk):
    g = SampleGrid(generate_net(6), np.linspace(-PI, 0, 97))
    return sample_pht(disk, g, 0)
