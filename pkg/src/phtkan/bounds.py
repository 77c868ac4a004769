"""Executable checks of the interpolation error bounds."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .barcodes import GridModule, bottleneck, decompose, interleaving_distance, reparameterize
from .geometry import Coords, DirectionSet, EmbeddedComplex, SphereMetric, hausdorff_to_sphere, \
    one_sided_covering_radius, sphere_distance
from .homology import direction_barcode
from .kan import LEFT, VectDiagram, default_query_grid, extend_module, sample_pht
from .spacetime import SampleGrid


@dataclass
class BoundReport:
    name: str
    measured: float
    bound: float
    tolerance: float
    context: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.bound - self.measured

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(slack=self.slack, passed=self.passed)
        return {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in out.items()}

    def __str__(self):
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.name}: measured={self.measured:.6f} bound={self.bound:.6f} "
                f"slack={self.slack:.6f} tol={self.tolerance:.6f}")


def reports_to_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=1, default=float)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "measured", "bound", "slack", "pass"])
    for r in reports:
        w.writerow([r.name, repr(float(r.measured)), repr(float(r.bound)), repr(float(r.slack)), int(r.passed)])
    return buf.getvalue()


def _step(grid) -> float:
    grid = np.asarray(grid, float)
    return float(np.diff(grid).max()) if len(grid) > 1 else 0.0


def nearest_distance(g: SampleGrid, w) -> float:
    return float(g.distances_to(w).min())


def directionwise_distance(d: VectDiagram, w, query_grid, flavor: str = LEFT) -> float:
    """Distance between the true barcode at ``w`` and the extension's barcode,
    both read on ``query_grid``."""
    g = d.grid
    true = direction_barcode(d.complex, w, d.degree, query_grid, g.coords, d.p)
    ext = decompose(extend_module(w, query_grid, d, flavor))
    return bottleneck(true, ext)


def _many(args):
    d, dirs, query, flavor = args
    return [directionwise_distance(d, w, query, flavor) for w in dirs]


def _sweep(d: VectDiagram, dirs, query, flavor, workers: int = 1) -> np.ndarray:
    dirs = np.asarray(dirs, float)
    if workers <= 1 or len(dirs) < 2 * workers:
        return np.array(_many((d, dirs, query, flavor)))
    chunks = np.array_split(dirs, workers)
    with ProcessPoolExecutor(workers) as pool:
        parts = pool.map(_many, [(d, c, query, flavor) for c in chunks])
    return np.concatenate([np.asarray(p) for p in parts])


def check_directionwise(k: EmbeddedComplex, g: SampleGrid, w, n: int, flavor: str = LEFT,
                        query_grid=None, mesh: float = 0.0, diagram: VectDiagram | None = None,
                        p: int = linalg.DEFAULT_PRIME) -> BoundReport:
    """Distance at one direction against twice the distance to the nearest sample."""
    d = diagram or sample_pht(k, g, n, p)
    query = default_query_grid(g.params) if query_grid is None else np.asarray(query_grid, float)
    measured = directionwise_distance(d, w, query, flavor)
    return BoundReport("directionwise", measured, 2 * nearest_distance(g, w), g.eps_params() + mesh,
                       {"shape": k.label, "flavor": flavor, "degree": n, "direction": list(map(float, w)),
                        "coords": g.coords.value, "directions": len(g.directions)})


def check_global(k: EmbeddedComplex, g: SampleGrid, n: int, test_directions: DirectionSet,
                 flavor: str = LEFT, query_grid=None, mesh: float = 0.0, workers: int = 1,
                 diagram: VectDiagram | None = None, p: int = linalg.DEFAULT_PRIME) -> BoundReport:
    """Worst distance over test directions against twice the covering radius of A."""
    d = diagram or sample_pht(k, g, n, p)
    query = default_query_grid(g.params) if query_grid is None else np.asarray(query_grid, float)
    dists = _sweep(d, test_directions.vectors, query, flavor, workers)
    worst = int(np.argmax(dists))
    haus = hausdorff_to_sphere(g.directions)
    return BoundReport("global", float(dists[worst]), 2 * haus.value, g.eps_params() + mesh,
                       {"shape": k.label, "flavor": flavor, "degree": n, "coords": g.coords.value,
                        "directions": len(g.directions), "tests": len(test_directions),
                        "worst_direction": test_directions[worst].tolist(),
                        "hausdorff_exact": haus.exact})


def check_discrete(k: EmbeddedComplex, a: DirectionSet, t, n: int, test_directions: DirectionSet,
                   flavor: str = LEFT, query_grid=None, mesh: float = 0.0, workers: int = 1,
                   coords: Coords = Coords.THETA, p: int = linalg.DEFAULT_PRIME) -> BoundReport:
    """Worst distance against 2 eps_A + eps_T for a finite parameter grid T."""
    g = SampleGrid(a, t, coords)
    rep = check_global(k, g, n, test_directions, flavor, query_grid, mesh, workers, p=p)
    eps_a = hausdorff_to_sphere(a).value
    eps_t = one_sided_covering_radius(g.params, coords)
    rep.name = "discrete"
    rep.bound = 2 * eps_a + eps_t
    rep.tolerance = _step(default_query_grid(g.params) if query_grid is None else query_grid) + mesh
    rep.context.update(eps_directions=eps_a, eps_params=eps_t)
    return rep


def check_reparam(k: EmbeddedComplex, g: SampleGrid, w, n: int, flavor: str = LEFT,
                  query_grid=None, mesh: float = 0.0, diagram: VectDiagram | None = None,
                  p: int = linalg.DEFAULT_PRIME) -> BoundReport:
    """Height-coordinate error of a theta-coordinate extension against
    2 sin(d_g), recording the chordal bound 2 d_2 for comparison."""
    if g.coords is not Coords.THETA:
        raise ValueError("reparameterization check needs theta coordinates")
    d = diagram or sample_pht(k, g, n, p)
    query = default_query_grid(g.params) if query_grid is None else np.asarray(query_grid, float)
    true = direction_barcode(k, w, n, query, Coords.THETA, p)
    ext = decompose(extend_module(w, query, d, flavor))
    measured = bottleneck(reparameterize(true), reparameterize(ext))
    near = nearest_distance(g, w)
    bound = 2 * math.sin(near)
    chordal = 2 * float(sphere_distance(g.directions[int(np.argmin(g.distances_to(w)))], w,
                                        SphereMetric.EUCLIDEAN))
    tol = float(np.diff(np.cos(np.append(Coords.THETA.inf, g.params))).max()) + mesh
    return BoundReport("reparam", measured, bound, tol,
                       {"shape": k.label, "flavor": flavor, "degree": n, "direction": list(map(float, w)),
                        "chordal_bound": chordal, "tighter": bound <= chordal + 1e-12})


def direction_module(d: VectDiagram, i: int) -> GridModule:
    """The sampled module along direction ``A[i]``, read from the diagram's arrows."""
    nt = len(d.grid.params)
    return GridModule(d.grid.coords, d.grid.params, d.dims[i],
                      [d.chain_arrow(i, j) for j in range(nt - 1)], d.p)


def check_lipschitz(d: VectDiagram, mesh: float = 0.0) -> BoundReport:
    """Interleaving between sampled direction modules against their distance;
    reports the pair with the least slack."""
    g = d.grid
    mods = [direction_module(d, i) for i in range(len(g.directions))]
    pairs = [(interleaving_distance(mods[i], mods[j]), float(g.dist[i, j]), (i, j))
             for i in range(len(mods)) for j in range(i + 1, len(mods))]
    worst = max(pairs, key=lambda x: x[0] - x[1], default=(0.0, 0.0, (0, 0)))
    dist, gap, pair = worst
    return BoundReport("lipschitz", dist, gap, _step(g.params) + mesh,
                       {"pair": list(pair), "pairs": len(pairs),
                        "degree": d.degree})
