"""The sampled transform as a diagram of vector spaces, and its left, right and
center Kan extensions at query points."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .barcodes import GridModule
from .geometry import ETA, Coords, DirectionSet, EmbeddedComplex, SphereMetric
from .homology import homology, induced_map, sublevel_subcomplex
from .spacetime import (FUTURE, PAST, LightCone, SampleGrid, SpaceTimePoint, future_light_cone,
                        past_light_cone, relation)

LEFT, RIGHT, CENTER = "left", "right", "center"
FLAVORS = (LEFT, RIGHT, CENTER)


class CorruptDiagram(ValueError):
    pass


@dataclass(eq=False)
class VectDiagram:
    """Homology spaces at the sampled points together with arrows for the
    morphisms between them.

    Arrows are stored for two kinds of generating morphisms: *chain* arrows
    ``(i, j) -> (i, j + 1)`` and *cross* arrows ``(i, j) -> (u, c)`` where ``c``
    is the least index reachable in direction ``u`` (or the top, via the formal
    morphism).  Every other arrow is a composite of one cross arrow followed by
    chain arrows.
    """

    grid: SampleGrid
    degree: int
    p: int
    dims: np.ndarray
    complex: EmbeddedComplex | None = None
    chain: dict = field(default_factory=dict)
    cross: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    _arrows: dict = field(default_factory=dict, repr=False)
    _kan: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self):
        return self.dims.shape

    def dim(self, pt) -> int:
        return int(self.dims[pt])

    def group(self, pt):
        i, j = pt
        s = sublevel_subcomplex(self.complex, self.grid.directions[i], self.grid.params[j], self.grid.coords)
        return homology(s, self.degree, self.p)

    def cross_target(self, i: int, j: int, u: int) -> int:
        c = int(self.grid.ceil(self.grid.params[j] + self.grid.dist[i, u]))
        return min(c, self.grid.top)

    def chain_arrow(self, i: int, j: int) -> np.ndarray:
        key = (i, j)
        if key not in self.chain:
            if self.complex is None:
                raise CorruptDiagram(f"missing chain arrow at {key}")
            self.chain[key] = induced_map(self.group((i, j)), self.group((i, j + 1))).matrix
        return self.chain[key]

    def cross_arrow(self, i: int, j: int, u: int) -> np.ndarray:
        key = (i, j, u)
        if key not in self.cross:
            if self.complex is None:
                raise CorruptDiagram(f"missing cross arrow at {key}")
            c = self.cross_target(i, j, u)
            self.cross[key] = induced_map(self.group((i, j)), self.group((u, c))).matrix
        return self.cross[key]

    def _chain_span(self, i: int, a: int, b: int) -> np.ndarray:
        key = ("span", i, a, b)
        hit = self._arrows.get(key)
        if hit is None:
            if a == b:
                hit = np.eye(self.dims[i, a], dtype=np.int64)
            else:
                hit = linalg.matmul(self.chain_arrow(i, b - 1), self._chain_span(i, a, b - 1), self.p)
            self._arrows[key] = hit
        return hit

    def arrow(self, src, tgt) -> np.ndarray:
        """Matrix of the unique morphism src -> tgt (which must exist)."""
        (i, j), (u, l) = src, tgt
        if i == u:
            if l < j:
                raise ValueError(f"no morphism {src} -> {tgt}")
            return self._chain_span(i, j, l)
        key = (src, tgt)
        hit = self._arrows.get(key)
        if hit is None:
            c = self.cross_target(i, j, u)
            if c > l:
                raise ValueError(f"no morphism {src} -> {tgt}")
            hit = linalg.matmul(self._chain_span(u, c, l), self.cross_arrow(i, j, u), self.p)
            self._arrows[key] = hit
        return hit

    def fill(self) -> "VectDiagram":
        """Compute every stored generating arrow."""
        na, nt = self.dims.shape
        for i in range(na):
            for j in range(nt - 1):
                self.chain_arrow(i, j)
            for j in range(nt):
                for u in range(na):
                    if u != i:
                        self.cross_arrow(i, j, u)
        return self

    def corrupt(self, kind: str, key, matrix) -> None:
        """Test hook: overwrite a stored arrow and drop derived caches."""
        store = self.chain if kind == "chain" else self.cross
        store[tuple(key)] = np.asarray(matrix, dtype=np.int64) % self.p
        self._arrows.clear()
        self._kan.clear()

    # persistence

    def manifest(self) -> dict:
        self.fill()
        g = self.grid
        return {
            "format": "phtkan-diagram/1",
            "degree": self.degree,
            "field": self.p,
            "coords": g.coords.value,
            "metric": g.metric.value,
            "directions": g.directions.vectors.tolist(),
            "params": g.params.tolist(),
            "dims": self.dims.tolist(),
            "chain_ranks": {f"{i},{j}": linalg.rank(m, self.p) for (i, j), m in sorted(self.chain.items())},
            "cross_ranks": {f"{i},{j},{u}": linalg.rank(m, self.p)
                            for (i, j, u), m in sorted(self.cross.items())},
            **self.meta,
        }

    def save(self, directory, stem: str = "diagram") -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        man = self.manifest()
        arrays = {f"chain_{i}_{j}": m for (i, j), m in sorted(self.chain.items())}
        arrays.update({f"cross_{i}_{j}_{u}": m for (i, j, u), m in sorted(self.cross.items())})
        npz = directory / f"{stem}.npz"
        with atomic_path(npz) as tmp:
            with open(tmp, "wb") as fh:
                np.savez_compressed(fh, **arrays)
        js = directory / f"{stem}.json"
        atomic_write_text(js, json.dumps(man, indent=1, sort_keys=True))
        return js, npz

    @classmethod
    def load(cls, manifest_path) -> "VectDiagram":
        manifest_path = Path(manifest_path)
        try:
            man = json.loads(manifest_path.read_text())
            coords = Coords(man["coords"])
            dirs = DirectionSet(np.asarray(man["directions"], float), SphereMetric(man["metric"]))
            grid = SampleGrid(dirs, np.asarray(man["params"], float), coords)
            dims = np.asarray(man["dims"], dtype=int)
            p = int(man["field"])
            deg = int(man["degree"])
            if dims.shape != (len(dirs), len(grid.params)):
                raise CorruptDiagram("dimension table does not match the grid")
            with np.load(manifest_path.with_suffix(".npz")) as data:
                arrays = {k: np.asarray(data[k], dtype=np.int64) for k in data.files}
        except CorruptDiagram:
            raise
        except (OSError, KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise CorruptDiagram(f"cannot read diagram: {exc}") from exc
        d = cls(grid, deg, p, dims, meta={k: man[k] for k in ("label", "seed", "mesh") if k in man})
        na, nt = dims.shape
        for name, m in arrays.items():
            kind, *idx = name.split("_")
            idx = tuple(int(x) for x in idx)
            if kind == "chain":
                i, j = idx
                want = (dims[i, j + 1], dims[i, j])
                d.chain[idx] = m
            elif kind == "cross":
                i, j, u = idx
                want = (dims[u, d.cross_target(i, j, u)], dims[i, j])
                d.cross[idx] = m
            else:
                raise CorruptDiagram(f"unknown payload {name}")
            if m.shape != want:
                raise CorruptDiagram(f"arrow {name} has shape {m.shape}, expected {want}")
        if len(d.chain) != na * (nt - 1) or len(d.cross) != na * (na - 1) * nt:
            raise CorruptDiagram("arrow payload is incomplete")
        ranks = man.get("chain_ranks", {})
        for key, r in ranks.items():
            i, j = map(int, key.split(","))
            if linalg.rank(d.chain[(i, j)], p) != r:
                raise CorruptDiagram(f"chain arrow {key} does not match its recorded rank")
        return d


class atomic_path:
    """Context manager yielding a temporary path renamed onto ``target`` on success."""

    def __init__(self, target):
        self.target = Path(target)

    def __enter__(self):
        fd, name = tempfile.mkstemp(dir=self.target.parent, prefix=".tmp-", suffix=self.target.suffix)
        os.close(fd)
        self.tmp = Path(name)
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            os.replace(self.tmp, self.target)
        else:
            self.tmp.unlink(missing_ok=True)
        return False


def atomic_write_text(path, text: str) -> None:
    with atomic_path(path) as tmp:
        tmp.write_text(text)


def sample_pht(k: EmbeddedComplex, g: SampleGrid, n: int, p: int = linalg.DEFAULT_PRIME) -> VectDiagram:
    """Module-level sampled transform: H_n at every sampled point, arrows on demand."""
    if len(k.vertices) == 0:
        raise ValueError("empty shape")
    if k.max_norm() > 1 + 1e-12:
        raise ValueError("complex must lie in the unit disk")
    na, nt = len(g.directions), len(g.params)
    d = VectDiagram(g, n, p, np.zeros((na, nt), dtype=int), complex=k, meta={"label": k.label})
    for i in range(na):
        for j in range(nt):
            d.dims[i, j] = d.group((i, j)).dim
    return d


def check_coherence(d: VectDiagram) -> list:
    """Triangles p -> q -> r of stored generators whose composite disagrees with
    the canonical arrow p -> r.  Empty for a coherent diagram."""
    na, nt = d.dims.shape
    g = d.grid

    def succ(i, j):
        out = [(i, j + 1)] if j + 1 < nt else []
        out += [(u, d.cross_target(i, j, u)) for u in range(na) if u != i]
        return out

    bad = []
    for i in range(na):
        for j in range(nt):
            for q in succ(i, j):
                first = d.chain_arrow(i, j) if q == (i, j + 1) else d.cross_arrow(i, j, q[0])
                for r in succ(*q):
                    if r[0] == i and r[1] < j:
                        continue
                    second = d.chain_arrow(*q) if r == (q[0], q[1] + 1) else d.cross_arrow(q[0], q[1], r[0])
                    if r[0] != i and d.cross_target(i, j, r[0]) > r[1]:
                        continue
                    direct = d.arrow((i, j), r) if r != (i, j) else np.eye(d.dims[i, j], dtype=np.int64)
                    if not np.array_equal(linalg.matmul(second, first, d.p), direct):
                        bad.append(((i, j), q, r))
    return bad


@dataclass(eq=False)
class KanValue:
    query: SpaceTimePoint
    flavor: str
    dim: int
    cone: LightCone | None = None
    offsets: np.ndarray | None = None
    projection: np.ndarray | None = None  # left: colimit coordinates of each cone summand
    section: np.ndarray | None = None
    kernel: np.ndarray | None = None  # right: limit basis as tuples over the cone
    left: "KanValue | None" = None
    right: "KanValue | None" = None
    canonical: np.ndarray | None = None  # center: colim -> lim in chosen bases
    pivots: list | None = None
    difference: np.ndarray | None = None

    def block(self, a: int) -> slice:
        return slice(int(self.offsets[a]), int(self.offsets[a + 1]))

    def cocone_map(self, a: int) -> np.ndarray:
        return self.projection[:, self.block(a)]

    def cone_map(self, a: int) -> np.ndarray:
        return self.kernel[self.block(a)]

    @property
    def image_basis(self) -> np.ndarray:
        return self.canonical[:, self.pivots]


def _offsets(d: VectDiagram, members) -> np.ndarray:
    return np.concatenate([[0], np.cumsum([d.dim(m) for m in members])]).astype(int)


def difference_map(c: LightCone, d: VectDiagram) -> np.ndarray:
    """D: sum over generators e: s -> t of V_s  ->  sum over members of V_o,
    x -> arrow_e(x) - x."""
    off = _offsets(d, c.members)
    cols = [d.dim(c.members[s]) for s, _ in c.generators]
    mat = np.zeros((off[-1], sum(cols)), dtype=np.int64)
    col = 0
    for (s, t), w in zip(c.generators, cols):
        a = d.arrow(c.members[s], c.members[t])
        mat[off[t]:off[t + 1], col:col + w] += a
        mat[off[s]:off[s + 1], col:col + w] -= np.eye(w, dtype=np.int64)
        col += w
    return mat % d.p


def layer_map(d: VectDiagram, sources, targets) -> np.ndarray:
    """Block matrix of arrows from a sum of source spaces to a sum of target
    spaces (zero where no morphism exists)."""
    so, to = _offsets(d, sources), _offsets(d, targets)
    mat = np.zeros((to[-1], so[-1]), dtype=np.int64)
    for a, s in enumerate(sources):
        for b, t in enumerate(targets):
            if d.grid.leq(s, t):
                mat[to[b]:to[b + 1], so[a]:so[a + 1]] = d.arrow(s, t)
    return mat


def colimit(c: LightCone, d: VectDiagram) -> KanValue:
    if c.flavor != PAST:
        raise ValueError("colimits are taken over past cones")
    hit = d._kan.get(c.key + ("colim",))
    if hit is not None and hit.cone.generators == c.generators:
        return hit
    off = _offsets(d, c.members)
    diff = difference_map(c, d)
    ck = linalg.cokernel(diff, d.p)
    val = KanValue(c.query, LEFT, ck.dim, c, off, ck.projection, ck.section, difference=diff)
    d._kan[c.key + ("colim",)] = val
    return val


def limit(c: LightCone, d: VectDiagram) -> KanValue:
    if c.flavor != FUTURE:
        raise ValueError("limits are taken over future cones")
    hit = d._kan.get(c.key + ("lim",))
    if hit is not None and hit.cone.generators == c.generators:
        return hit
    off = _offsets(d, c.members)
    rows = [d.dim(c.members[t]) for _, t in c.generators]
    delta = np.zeros((sum(rows), off[-1]), dtype=np.int64)
    row = 0
    for (s, t), h in zip(c.generators, rows):
        delta[row:row + h, off[s]:off[s + 1]] += d.arrow(c.members[s], c.members[t])
        delta[row:row + h, off[t]:off[t + 1]] -= np.eye(h, dtype=np.int64)
        row += h
    ker = linalg.kernel_basis(delta % d.p, d.p) if off[-1] else np.zeros((0, 0), np.int64)
    val = KanValue(c.query, RIGHT, ker.shape[1], c, off, kernel=ker, difference=delta % d.p)
    d._kan[c.key + ("lim",)] = val
    return val


def _canonical(left: KanValue, right: KanValue, d: VectDiagram) -> np.ndarray:
    """Matrix of colim(past) -> lim(future) in the chosen bases."""
    pc, fc = left.cone, right.cone
    if left.dim == 0 or right.dim == 0:
        return np.zeros((right.dim, left.dim), dtype=np.int64)
    psi = np.zeros((right.offsets[-1], left.offsets[-1]), dtype=np.int64)
    for a, src in enumerate(pc.members):
        for b, tgt in enumerate(fc.members):
            psi[right.block(b), left.block(a)] = d.arrow(src, tgt)
    tuples = linalg.matmul(psi, left.section, d.p)
    coords = linalg.solve_in_image(right.kernel, tuples, d.p)
    if coords is None:
        raise AssertionError("canonical map does not land in the limit")
    return coords


def center(q: SpaceTimePoint, d: VectDiagram, mode: str = "reduced") -> KanValue:
    left = colimit(past_light_cone(q, d.grid, mode), d)
    right = limit(future_light_cone(q, d.grid, mode), d)
    key = (CENTER, left.cone.key, right.cone.key)
    hit = d._kan.get(key)
    if hit is not None:
        return hit
    can = _canonical(left, right, d)
    _, piv = linalg.rref(can, d.p) if can.size else (None, [])
    val = KanValue(q, CENTER, len(piv), left=left, right=right, canonical=can, pivots=list(piv))
    d._kan[key] = val
    return val


def kan_value(q: SpaceTimePoint, d: VectDiagram, flavor: str, mode: str = "reduced") -> KanValue:
    if flavor == LEFT:
        return colimit(past_light_cone(q, d.grid, mode), d)
    if flavor == RIGHT:
        return limit(future_light_cone(q, d.grid, mode), d)
    if flavor == CENTER:
        return center(q, d, mode)
    raise ValueError(f"unknown flavor {flavor!r}")


def _dominating(g: SampleGrid, src, members, upward: bool) -> int:
    """Index in ``members`` of a point above ``src`` (upward) or below it."""
    if upward:
        r = relation(g, [src] + list(members), formal=True)[0, 1:]
    else:
        r = relation(g, list(members) + [src], formal=False)[:-1, -1]
    hits = np.flatnonzero(r)
    if hits.size == 0:
        raise AssertionError(f"no comparable cone member for {src}")
    return int(hits[0])


def left_transition(a: KanValue, b: KanValue, d: VectDiagram) -> np.ndarray:
    """Universal map colim(a) -> colim(b) for nested past cones."""
    if a.dim == 0 or b.dim == 0:
        return np.zeros((b.dim, a.dim), dtype=np.int64)
    phi = np.zeros((b.dim, a.offsets[-1]), dtype=np.int64)
    for k, src in enumerate(a.cone.members):
        t = _dominating(d.grid, src, b.cone.members, upward=True)
        phi[:, a.block(k)] = linalg.matmul(b.cocone_map(t), d.arrow(src, b.cone.members[t]), d.p)
    return linalg.matmul(phi, a.section, d.p)


def right_transition(a: KanValue, b: KanValue, d: VectDiagram) -> np.ndarray:
    """Restriction lim(a) -> lim(b) for nested future cones."""
    if a.dim == 0 or b.dim == 0:
        return np.zeros((b.dim, a.dim), dtype=np.int64)
    y = np.zeros((b.offsets[-1], a.dim), dtype=np.int64)
    for k, tgt in enumerate(b.cone.members):
        s = _dominating(d.grid, tgt, a.cone.members, upward=False)
        y[b.block(k)] = linalg.matmul(d.arrow(a.cone.members[s], tgt), a.cone_map(s), d.p)
    out = linalg.solve_in_image(b.kernel, y, d.p)
    if out is None:
        raise AssertionError("restricted tuple is not compatible")
    return out


def center_transition(a: KanValue, b: KanValue, d: VectDiagram) -> np.ndarray:
    """Restriction of the left transition to the center images."""
    if a.dim == 0 or b.dim == 0:
        return np.zeros((b.dim, a.dim), dtype=np.int64)
    u = left_transition(a.left, b.left, d)
    moved = linalg.matmul(b.canonical, u[:, a.pivots], d.p)
    r = right_transition(a.right, b.right, d)
    if not np.array_equal(linalg.matmul(r, a.image_basis, d.p), moved):
        raise AssertionError("center transition is not natural")
    out = linalg.solve_in_image(b.image_basis, moved, d.p)
    if out is None:
        raise AssertionError("center image is not preserved")
    return out


_TRANSITIONS = {LEFT: left_transition, RIGHT: right_transition, CENTER: center_transition}


def default_query_grid(params) -> np.ndarray:
    """Sample parameters refined by the midpoints of consecutive values."""
    t = np.asarray(params, dtype=float)
    mids = (t[:-1] + t[1:]) / 2
    return np.sort(np.concatenate([t, mids]))


def extend_module(w, query_grid, d: VectDiagram, flavor: str, mode: str = "reduced") -> GridModule:
    """Extended persistence module at direction ``w`` sampled on ``query_grid``."""
    coords = d.grid.coords
    grid = np.asarray(query_grid, dtype=float)
    if abs(grid[-1] - coords.sup) > ETA:
        raise ValueError("query grid must contain sup X")
    vals = [kan_value(SpaceTimePoint(w, x), d, flavor, mode) for x in grid]
    step = _TRANSITIONS[flavor]
    maps = [step(a, b, d) for a, b in zip(vals, vals[1:])]
    return GridModule(coords, grid, np.array([v.dim for v in vals], dtype=int), maps, d.p,
                      meta={"flavor": flavor})
