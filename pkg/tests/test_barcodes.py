import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import barcode_indices, oracle_interleaving, rank_barcode, random_barcode, random_module
from phtkan.barcodes import (Bar, Barcode, GridModule, bottleneck, decompose, interleaving_distance,
                             module_from_barcode, pht_distance, plot_rows, refine, reparameterize)
from phtkan.geometry import Coords

PI = math.pi
GRID = np.linspace(-PI, 0, 7)

TRUE_DISK = Barcode([Bar(-PI, 0, True)])
LEFT_DISK = Barcode([Bar(-5 * PI / 6, 0, True), Bar(-5 * PI / 6, -PI / 2)])
CENTER_DISK = Barcode([Bar(-5 * PI / 6, -PI / 6)])


def test_constant_and_zero_modules():
    m = GridModule(Coords.THETA, GRID, [1] * 7, [np.eye(1, dtype=int)] * 6)
    assert decompose(m).bars == (Bar(-PI, 0, True),)
    z = GridModule(Coords.THETA, GRID, [0] * 7, [np.zeros((0, 0), dtype=int)] * 6)
    assert len(decompose(z)) == 0


def test_inconsistent_shapes():
    with pytest.raises(ValueError, match="shape"):
        GridModule(Coords.THETA, [-1, 0], [1, 2], [np.eye(1, dtype=int)])


def test_bottleneck_examples():
    assert bottleneck(LEFT_DISK, LEFT_DISK) == 0
    assert bottleneck(TRUE_DISK, LEFT_DISK) == pytest.approx(PI / 6)
    assert bottleneck(TRUE_DISK, Barcode([Bar(0, 0, True)])) == pytest.approx(PI)
    assert bottleneck(TRUE_DISK, CENTER_DISK) == math.inf
    assert bottleneck(TRUE_DISK, CENTER_DISK, capped=False) == pytest.approx(PI / 6)
    with pytest.raises(ValueError):
        bottleneck(TRUE_DISK, reparameterize(TRUE_DISK))


def test_interleaving_examples():
    m = module_from_barcode(LEFT_DISK, GRID)
    assert interleaving_distance(m, m) == 0
    t = module_from_barcode(TRUE_DISK, GRID)
    assert interleaving_distance(t, m) == pytest.approx(PI / 6)
    assert interleaving_distance(t, module_from_barcode(CENTER_DISK, GRID)) == math.inf


def test_reparameterize_examples():
    assert reparameterize(TRUE_DISK).bars == (Bar(-1, 1, True),)
    r = reparameterize(CENTER_DISK).bars[0]
    assert (r.birth, r.death) == pytest.approx((-math.sqrt(3) / 2, math.sqrt(3) / 2))
    assert len(reparameterize(Barcode([]))) == 0


def test_pht_distance():
    p1 = {0.0: module_from_barcode(TRUE_DISK, GRID), 1.0: module_from_barcode(LEFT_DISK, GRID)}
    assert pht_distance(p1, p1) == 0
    p2 = {0.0: module_from_barcode(LEFT_DISK, GRID), 1.0: module_from_barcode(LEFT_DISK, GRID)}
    assert pht_distance(p1, p2) == pytest.approx(PI / 6)
    p3 = {0.0: module_from_barcode(CENTER_DISK, GRID), 1.0: module_from_barcode(LEFT_DISK, GRID)}
    assert pht_distance(p1, p3) == math.inf
    with pytest.raises(ValueError, match="mismatch"):
        pht_distance(p1, {0.0: p1[0.0]})


def test_rank_condition_hundred_modules():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        grid = np.linspace(-PI, 0, n)
        m = random_module(rng, grid, 4)
        bc = decompose(m)
        assert barcode_indices(bc, grid) == rank_barcode(m)
        for i in range(n):
            assert bc.count_alive(grid[i]) == m.dims[i]


def test_roundtrip_module_of_barcode():
    rng = np.random.default_rng(1)
    for _ in range(100):
        bc = random_barcode(rng, GRID, 5)
        assert decompose(module_from_barcode(bc, GRID)).bars == bc.bars


def test_isometry_small_instances():
    rng = np.random.default_rng(2)
    for _ in range(15):
        grid = np.linspace(-PI, 0, int(rng.integers(2, 7)))
        a, b = random_module(rng, grid, 3), random_module(rng, grid, 3)
        assert interleaving_distance(a, b) == pytest.approx(oracle_interleaving(a, b), abs=1e-12)


def test_refine_is_constant_between_points():
    m = module_from_barcode(LEFT_DISK, GRID)
    fine = refine(m, np.linspace(-PI, 0, 13))
    assert decompose(fine).bars == decompose(m).bars


bars = st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.booleans()), max_size=4)


def to_barcode(spec):
    out = []
    for a, b, cap in spec:
        a, b = min(a, b), max(a, b)
        out.append(Bar(GRID[a], 0.0, True) if cap else Bar(GRID[a], GRID[b]))
    return Barcode(out)


@given(bars, bars, bars)
def test_bottleneck_pseudometric(x, y, z):
    a, b, c = map(to_barcode, (x, y, z))
    assert bottleneck(a, b) == bottleneck(b, a)
    assert bottleneck(a, c) <= bottleneck(a, b) + bottleneck(b, c) + 1e-12


@given(bars, bars)
def test_reparameterized_interleaving(x, y):
    a, b = to_barcode(x), to_barcode(y)
    eps = bottleneck(a, b)
    if math.isfinite(eps):
        assert bottleneck(reparameterize(a), reparameterize(b)) <= 2 * math.sin(eps / 2) + 1e-12


def test_json_csv_roundtrip():
    obj = LEFT_DISK.to_json()
    assert obj["coords"] == "theta"
    assert Barcode.from_json(json.loads(json.dumps(obj))).bars == LEFT_DISK.bars
    lines = LEFT_DISK.to_csv().splitlines()
    assert lines[0] == "birth,death,cap" and len(lines) == 3
    rows = plot_rows({0.5: LEFT_DISK, 0.1: TRUE_DISK}).splitlines()
    assert rows[0] == "direction_angle,birth,death" and rows[1].startswith("0.1")


def test_cap_bar_must_end_at_sup():
    with pytest.raises(ValueError):
        Barcode([Bar(-1.0, -0.5, True)])
    with pytest.raises(ValueError):
        Bar(0.0, -1.0)
