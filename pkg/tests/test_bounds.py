import csv
import io
import json
import math

import numpy as np
import pytest

from conftest import PI, W
from phtkan.bounds import (BoundReport, check_directionwise, check_discrete, check_global, check_lipschitz,
                           check_reparam, reports_to_csv, reports_to_json)
from phtkan.geometry import Coords, DirectionSet, SphereMetric, angle_direction, generate_net
from phtkan.kan import sample_pht
from phtkan.shapes import point_shape, random_convex_polygon, random_star_polygon
from phtkan.spacetime import SampleGrid

MESH = 2 * PI / 64
OFFSET = math.sqrt(2) / 10


def test_directionwise_disk(disk, fine_diagram):
    r = check_directionwise(disk, fine_diagram.grid, W, 0, diagram=fine_diagram, mesh=MESH)
    assert r.bound == pytest.approx(PI / 3)
    assert r.measured == pytest.approx(PI / 6, abs=PI / 32)
    assert r.passed


def test_directionwise_sampled_direction(disk, fine_diagram):
    r = check_directionwise(disk, fine_diagram.grid, angle_direction(0), 0, diagram=fine_diagram)
    assert r.bound == 0 and r.measured == 0 and r.passed


def test_point_tight():
    g = SampleGrid(DirectionSet([[1, 0]]), np.linspace(-PI, 0, 9))
    r = check_directionwise(point_shape(), g, angle_direction(-PI / 2), 0)
    assert r.measured == pytest.approx(PI, abs=1e-12)
    assert r.bound == pytest.approx(PI, abs=1e-12)
    assert abs(r.slack) < 1e-9 and r.passed


def test_reparam_disk(disk, fine_diagram):
    r = check_reparam(disk, fine_diagram.grid, W, 0, diagram=fine_diagram, mesh=MESH)
    assert r.bound == pytest.approx(1.0)
    assert r.context["chordal_bound"] == pytest.approx(2 * math.sqrt(2 - math.sqrt(3)))
    assert r.bound < r.context["chordal_bound"] and r.context["tighter"]
    assert r.passed


def test_reparam_trivial_cases(disk):
    g = SampleGrid(DirectionSet([[1, 0]]), np.linspace(-PI, 0, 25))
    assert check_reparam(disk, g, [1, 0], 0).measured == 0
    assert check_reparam(disk, g, [0, 1], 0).bound == pytest.approx(2)
    with pytest.raises(ValueError):
        check_reparam(disk, SampleGrid(DirectionSet([[1, 0]], SphereMetric.EUCLIDEAN), [-1, 1],
                                       Coords.EUCLIDEAN), [0, 1], 0)


def test_lipschitz(hex_diagram):
    r = check_lipschitz(hex_diagram, MESH)
    assert r.context["pairs"] == 15 and r.passed


def test_lipschitz_point():
    g = SampleGrid(DirectionSet([[1, 0], [0, 1]]), np.linspace(-PI, 0, 9))
    r = check_lipschitz(sample_pht(point_shape(), g, 0))
    assert r.measured == pytest.approx(PI / 2) and r.bound == pytest.approx(PI / 2)


def test_lipschitz_duplicate_modules(disk):
    # antipodal-free pair on a symmetric shape: identical modules
    g = SampleGrid(DirectionSet([[1, 0], [-1, 0]]), np.linspace(-PI, 0, 9))
    assert check_lipschitz(sample_pht(disk, g, 0)).measured == 0


def test_global_disk(disk, hex_grid):
    g = SampleGrid(hex_grid.directions, np.linspace(-PI, 0, 25))
    r = check_global(disk, g, 0, generate_net(72, offset=OFFSET), mesh=MESH)
    assert r.bound == pytest.approx(PI / 3) and r.context["hausdorff_exact"]
    assert r.passed


def test_global_parallel_matches_serial(disk, hex_diagram):
    tests = generate_net(24, offset=OFFSET)
    a = check_global(disk, hex_diagram.grid, 0, tests, diagram=hex_diagram)
    b = check_global(disk, hex_diagram.grid, 0, tests, diagram=hex_diagram, workers=2)
    assert a.measured == b.measured and a.context == b.context


def test_discrete_disk(disk):
    r = check_discrete(disk, generate_net(6), np.linspace(-PI, 0, 13), 0,
                       generate_net(72, offset=OFFSET), mesh=MESH)
    assert r.bound == pytest.approx(2 * PI / 6 + PI / 12)
    assert r.passed


def test_discrete_dense_net_coarse_grid(disk):
    r = check_discrete(disk, generate_net(48), np.linspace(-PI, 0, 7), 0,
                       generate_net(36, offset=OFFSET), mesh=MESH)
    assert r.context["eps_params"] == pytest.approx(PI / 6)
    assert r.measured <= r.context["eps_params"] + 2 * r.context["eps_directions"] + r.tolerance


def test_refinement_monotone(disk):
    tests = generate_net(72, offset=OFFSET)
    t = np.linspace(-PI, 0, 25)
    measured = [check_global(disk, SampleGrid(generate_net(n), t), 0, tests).measured for n in (6, 12, 24)]
    assert measured[0] >= measured[1] >= measured[2]


@pytest.mark.parametrize("coords", [Coords.THETA, Coords.EUCLIDEAN])
def test_random_polygons(coords):
    rng = np.random.default_rng(11 if coords is Coords.THETA else 12)
    metric = SphereMetric.GEODESIC if coords is Coords.THETA else SphereMetric.EUCLIDEAN
    for trial in range(8):
        make = random_convex_polygon if trial % 2 else random_star_polygon
        n = trial // 2 % 2
        k = make(rng, filled=n == 0)
        t = np.linspace(coords.inf, coords.sup, int(rng.choice([7, 13, 25])))
        g = SampleGrid(generate_net(int(rng.integers(3, 13)), metric=metric), t, coords)
        d = sample_pht(k, g, n)
        tests = generate_net(36, metric=metric, offset=rng.uniform(0, 1))
        for r in (check_global(k, g, n, tests, diagram=d), check_lipschitz(d),
                  check_directionwise(k, g, tests[0], n, diagram=d)):
            assert r.passed, str(r)


def test_report_output():
    reps = [BoundReport("a", 0.5, 1.0, 0.1, {"k": 1}), BoundReport("b", math.inf, 1.0, 0.1)]
    assert str(reps[0]).startswith("PASS a") and str(reps[1]).startswith("FAIL b")
    data = json.loads(reports_to_json(reps))
    assert data[0]["slack"] == 0.5 and data[0]["passed"] and data[1]["measured"] is None
    rows = list(csv.reader(io.StringIO(reports_to_csv(reps))))
    assert rows[0] == ["name", "measured", "bound", "slack", "pass"]
    assert rows[1][-1] == "1" and rows[2][-1] == "0"


def test_global_euclidean(disk):
    g = SampleGrid(generate_net(6, metric=SphereMetric.EUCLIDEAN), np.linspace(-1, 1, 49), Coords.EUCLIDEAN)
    r = check_global(disk, g, 0, generate_net(72, metric=SphereMetric.EUCLIDEAN, offset=OFFSET), mesh=MESH)
    assert r.bound == pytest.approx(2 * math.sqrt(2 - math.sqrt(3)))
    assert r.passed


def test_global_dense_net(disk):
    g = SampleGrid(generate_net(128), np.linspace(-PI, 0, 49))
    r = check_global(disk, g, 0, generate_net(8, offset=OFFSET), mesh=MESH)
    assert r.bound == pytest.approx(2 * PI / 128)
    assert r.passed
