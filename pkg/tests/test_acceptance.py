"""The ten acceptance criteria, one test each. Every test prints a single
PASS/FAIL line (visible in the terminal even under capture)."""
import math

import numpy as np
import pytest

from conftest import PI, W
from oracles import oracle_interleaving, random_module
from phtkan import linalg
from phtkan.barcodes import decompose, interleaving_distance
from phtkan.bounds import check_directionwise, check_discrete, check_global, check_lipschitz, check_reparam
from phtkan.geometry import angle_direction, DirectionSet, generate_net, hausdorff_to_sphere
from phtkan.kan import CENTER, LEFT, RIGHT, colimit, extend_module, kan_value, layer_map, limit, sample_pht
from phtkan.shapes import point_shape, random_convex_polygon, random_star_polygon
from phtkan.spacetime import (SampleGrid, SpaceTimePoint, cofinal_reduction, future_light_cone, is_connected,
                              past_light_cone)

from test_barcodes import test_rank_condition_hundred_modules as rank_condition
from test_geometry import test_arccos_lipschitz_ten_thousand as arccos_inequality
from test_homology import test_disk_converse_256 as disk_converse
from test_homology import test_functoriality_thousand_triples as functoriality

MESH = 2 * PI / 64


@pytest.fixture
def verdict(capsys):
    def say(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return say


def test_c1_example_single_class(hex_grid, hex_diagram, verdict):
    dim = colimit(past_light_cone(SpaceTimePoint(W, -PI / 6), hex_grid), hex_diagram).dim
    w = layer_map(hex_diagram, [(1, 2), (2, 2)], [(1, 4), (2, 4)])
    ok = dim == 1 and w.tolist() == [[1, 1], [1, 1]] and linalg.rank(w) == 1
    verdict(1, ok, f"left dim at -pi/6 = {dim}, difference map {w.tolist()} of rank {linalg.rank(w)}")


def test_c2_disconnected_cone(hex_grid, hex_diagram, verdict):
    cone = past_light_cone(SpaceTimePoint(W, -2 * PI / 3), hex_grid)
    dim = colimit(cone, hex_diagram).dim
    verdict(2, dim == 2 and not is_connected(cone), f"left dim at -2pi/3 = {dim}, connected = {is_connected(cone)}")


EXPECTED = {
    LEFT: [(-5 * PI / 6, -PI / 2, False), (-5 * PI / 6, 0.0, True)],
    RIGHT: [(-PI, -PI / 6, False), (-PI / 2, -PI / 6, False)],
    CENTER: [(-5 * PI / 6, -PI / 6, False)],
}


def test_c3_extended_barcodes(fine_diagram, verdict):
    query = np.linspace(-PI, 0, 97)
    worst, shapes_ok = 0.0, True
    for fl, want in EXPECTED.items():
        got = sorted((b.birth, b.death, b.cap) for b in decompose(extend_module(W, query, fine_diagram, fl)))
        want = sorted(want)
        if len(got) != len(want) or [g[2] for g in got] != [x[2] for x in want]:
            shapes_ok = False
            continue
        worst = max([worst] + [max(abs(g[0] - x[0]), abs(g[1] - x[1])) for g, x in zip(got, want)])
    verdict(3, shapes_ok and worst <= PI / 32, f"all three barcodes match, worst endpoint error {worst:.4f}"
            f" <= pi/32 = {PI / 32:.4f}")


def test_c4_tight_bound(verdict):
    g = SampleGrid(DirectionSet([[1, 0]]), [-PI, -PI / 2, 0.0])
    r = check_directionwise(point_shape(0, 1), g, angle_direction(-PI / 2), 0)
    ok = abs(r.measured - PI) < 1e-9 and abs(r.bound - PI) < 1e-9 and abs(r.slack) < 1e-9
    verdict(4, ok, f"measured {r.measured:.9f}, bound {r.bound:.9f}, slack {r.slack:.1e}")


def test_c5_global_disk(disk, verdict):
    g = SampleGrid(generate_net(6), np.linspace(-PI, 0, 49))
    tests = generate_net(360, offset=math.sqrt(2) * PI / 360)
    r = check_global(disk, g, 0, tests, mesh=MESH, workers=2)
    haus = hausdorff_to_sphere(g.directions)
    ok = (r.measured <= 2 * PI / 6 + r.tolerance and abs(r.measured - PI / 6) <= PI / 32
          and haus.exact and abs(haus.value - PI / 6) < 1e-12)
    verdict(5, ok, f"max over 360 directions {r.measured:.4f} (pi/6 = {PI / 6:.4f}), "
            f"bound {r.bound:.4f}, Hausdorff {haus.value:.6f} exact={haus.exact}")


def test_c6_discrete_random(verdict):
    rng = np.random.default_rng(2024)
    worst, violations = math.inf, []
    for trial in range(100):
        make = random_convex_polygon if trial % 2 else random_star_polygon
        n = int(rng.integers(0, 2))
        k = make(rng, filled=bool(rng.integers(0, 2)))
        step = PI / float(rng.choice([6, 12, 24]))
        t = np.linspace(-PI, 0, int(round(PI / step)) + 1)
        a = generate_net(int(rng.integers(3, 13)), offset=rng.uniform(0, 2 * PI))
        r = check_discrete(k, a, t, n, generate_net(36, offset=rng.uniform(0, 2 * PI)))
        worst = min(worst, r.slack + r.tolerance)
        if not r.passed:
            violations.append((trial, str(r)))
    verdict(6, not violations, f"100 trials, {len(violations)} violations, least slack+tol {worst:.4f}")


def test_c7_reparameterized(disk, fine_diagram, verdict):
    r = check_reparam(disk, fine_diagram.grid, W, 0, diagram=fine_diagram, mesh=MESH)
    chordal = 2 * math.sqrt(2 - math.sqrt(3))
    ok = (r.passed and abs(r.bound - 1) < 1e-12 and r.bound < chordal
          and abs(r.context["chordal_bound"] - chordal) < 1e-12)
    verdict(7, ok, f"measured {r.measured:.4f} <= 2 sin(pi/6) = {r.bound:.6f} < {chordal:.4f}")


def _dims(q, d, mode):
    return kan_value(q, d, LEFT, mode).dim, kan_value(q, d, RIGHT, mode).dim


def test_c8_oracle_equivalence(hex_diagram, fine_diagram, disk, verdict):
    rng = np.random.default_rng(8)
    cases = [(SpaceTimePoint(W, b), d) for d in (hex_diagram, fine_diagram)
             for b in (-PI, -2 * PI / 3, -PI / 2, -PI / 3, -PI / 6, 0.0)]
    random_diagrams = [sample_pht(disk, SampleGrid(generate_net(int(rng.integers(3, 9))),
                                                   np.linspace(-PI, 0, int(rng.integers(4, 12)))), 0)
                       for _ in range(5)]
    for _ in range(100):
        q = SpaceTimePoint(angle_direction(rng.uniform(0, 2 * PI)), rng.uniform(-PI, 0))
        cases.append((q, random_diagrams[int(rng.integers(0, 5))]))
    mismatches, fired = 0, 0
    for q, d in cases:
        full = _dims(q, d, "full")
        if full != _dims(q, d, "brute") or full != _dims(q, d, "reduced"):
            mismatches += 1
        for cone, value in ((past_light_cone(q, d.grid), colimit), (future_light_cone(q, d.grid), limit)):
            small = cofinal_reduction(cone, d.grid)
            if small is not cone:
                fired += 1
                mismatches += value(small, d).dim != value(cone, d).dim
    verdict(8, mismatches == 0, f"{len(cases)} queries, {mismatches} mismatches, cofinal reduction fired {fired} times")


def test_c9_isometry(verdict):
    rng = np.random.default_rng(9)
    bad = 0
    for _ in range(50):
        grid = np.linspace(-PI, 0, int(rng.integers(2, 9)))
        m, n = random_module(rng, grid, 3), random_module(rng, grid, 3)
        a, b = interleaving_distance(m, n), oracle_interleaving(m, n)
        bad += not (a == b or abs(a - b) < 1e-9)
    verdict(9, bad == 0, f"50 module pairs, {bad} disagreements with the interleaving search")


def test_c10_property_suites(hex_diagram, verdict):
    arccos_inequality()
    functoriality()
    lip = check_lipschitz(hex_diagram, MESH)
    rank_condition()
    disk_converse()
    verdict(10, lip.passed and lip.context["pairs"] == 15,
            "arccos inequality (1e4), functoriality (1e3), Lipschitz on all 15 HEX pairs, "
            "rank condition (1e2), disk converse on the 256-gon")
