"""Sublevel subcomplexes, their homology over GF(p) and inclusion-induced maps."""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import linalg
from .barcodes import Bar, Barcode, GridModule
from .geometry import ETA, Coords, EmbeddedComplex, vertex_params

_CACHE: "weakref.WeakKeyDictionary[EmbeddedComplex, dict]" = weakref.WeakKeyDictionary()


def _cache(k: EmbeddedComplex) -> dict:
    c = _CACHE.get(k)
    if c is None:
        c = _CACHE[k] = {}
    return c


def _boundary(k: EmbeddedComplex, n: int, p: int) -> np.ndarray:
    c = _cache(k)
    key = ("boundary", n, p)
    if key not in c:
        c[key] = linalg.as_field(k.boundary(n), p)
    return c[key]


@dataclass(frozen=True, eq=False)
class Subcomplex:
    """Full subcomplex of ``parent`` spanned by the vertices in ``vertex_mask``."""

    parent: EmbeddedComplex
    vertex_mask: np.ndarray

    @property
    def key(self) -> bytes:
        return np.packbits(self.vertex_mask).tobytes()

    def mask(self, n: int) -> np.ndarray:
        if n < 0 or n > self.parent.dim:
            return np.zeros(0, dtype=bool)
        if n == 0:
            return self.vertex_mask.copy()
        return self.vertex_mask[self.parent.simplex_array(n)].all(axis=1)

    def indices(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.mask(n))

    def __le__(self, other: "Subcomplex") -> bool:
        return self.parent is other.parent and not np.any(self.vertex_mask & ~other.vertex_mask)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * int(self.mask(n).sum()) for n in range(self.parent.dim + 1))

    def is_empty(self) -> bool:
        return not self.vertex_mask.any()


def full_subcomplex(k: EmbeddedComplex, vertex_mask) -> Subcomplex:
    return Subcomplex(k, np.asarray(vertex_mask, dtype=bool))


def sublevel_subcomplex(k: EmbeddedComplex, v, x: float, coords: Coords = Coords.THETA) -> Subcomplex:
    """Lower-star sublevel set: vertices with filtration value <= x, plus every
    simplex spanned by them."""
    if not coords.contains(x):
        raise ValueError(f"parameter {x} outside [{coords.inf}, {coords.sup}]")
    if abs(x - coords.sup) <= ETA:
        return Subcomplex(k, np.ones(len(k.vertices), dtype=bool))
    vals = vertex_params(k.vertices, np.asarray(v, dtype=float), coords)
    return Subcomplex(k, vals <= x + ETA)


@dataclass(frozen=True, eq=False)
class HomologyGroup:
    """H_n of a subcomplex with an explicit basis of cycle representatives.

    ``representatives`` has one column per basis class, written as a chain over
    *all* n-simplices of the parent complex (zero off the subcomplex).
    """

    subcomplex: Subcomplex
    degree: int
    p: int
    representatives: np.ndarray
    _support: np.ndarray
    _solver: linalg.Solver

    @property
    def dim(self) -> int:
        return self.representatives.shape[1]

    @property
    def key(self):
        return (self.degree, self.p, self.subcomplex.key)

    def coordinates(self, cycles: np.ndarray) -> np.ndarray:
        """Express n-cycles of the subcomplex (full-length chains) in this basis."""
        cycles = np.asarray(cycles)
        if np.any(np.delete(cycles, self._support, axis=0) % self.p):
            raise ValueError("chain is not supported on the subcomplex")
        x = self._solver.solve(cycles[self._support])
        if x is None:
            raise ValueError("chain is not a cycle of the subcomplex")
        return x[: self.dim]


def homology(s: Subcomplex, n: int, p: int = linalg.DEFAULT_PRIME) -> HomologyGroup:
    cache = _cache(s.parent)
    key = ("H", n, p, s.key)
    hit = cache.get(key)
    if hit is not None:
        return hit
    k = s.parent
    idx = s.indices(n)
    m = len(idx)
    if n > 0 and m:
        dn = _boundary(k, n, p)[np.ix_(s.indices(n - 1), idx)]
        z = linalg.kernel_basis(dn, p)
    else:
        z = np.eye(m, dtype=np.int64)
    up = s.indices(n + 1)
    if len(up) and m:
        bnd = linalg.image_basis(_boundary(k, n + 1, p)[np.ix_(idx, up)], p)
    else:
        bnd = np.zeros((m, 0), dtype=np.int64)
    nb = bnd.shape[1]
    if z.shape[1]:
        _, piv = linalg.rref(np.concatenate([bnd, z], axis=1), p)
        reps_local = z[:, [c - nb for c in piv if c >= nb]]
    else:
        reps_local = np.zeros((m, 0), dtype=np.int64)
    reps = np.zeros((k.n_simplices(n), reps_local.shape[1]), dtype=np.int64)
    reps[idx] = reps_local
    solver = linalg.Solver(np.concatenate([reps_local, bnd], axis=1), p)
    group = HomologyGroup(s, n, p, reps, idx, solver)
    cache[key] = group
    return group


def induced_map(src: HomologyGroup, tgt: HomologyGroup) -> linalg.LinearMap:
    if src.degree != tgt.degree or src.p != tgt.p or not (src.subcomplex <= tgt.subcomplex):
        raise ValueError("not a valid morphism: source subcomplex is not contained in target")
    if src is tgt:
        return linalg.LinearMap.identity(src.dim, src.key, src.p)
    mat = tgt.coordinates(src.representatives) if src.dim else np.zeros((tgt.dim, 0), np.int64)
    return linalg.LinearMap(mat, src.key, tgt.key, src.p)


def direction_diagram(k: EmbeddedComplex, v, n: int, grid, coords: Coords = Coords.THETA,
                      p: int = linalg.DEFAULT_PRIME) -> GridModule:
    """Persistence module of H_n along direction ``v`` restricted to ``grid``."""
    grid = np.asarray(grid, dtype=float)
    groups = [homology(sublevel_subcomplex(k, v, x, coords), n, p) for x in grid]
    maps = [induced_map(a, b).matrix for a, b in zip(groups, groups[1:])]
    return GridModule(coords, grid, np.array([g.dim for g in groups], dtype=int), maps, p)


def persistence_pairs(k: EmbeddedComplex, values: np.ndarray, p: int = linalg.DEFAULT_PRIME):
    """Standard column reduction of the lower-star filtration given per-vertex
    values. Returns (pairs, essential) as lists of (degree, birth, death) and
    (degree, birth) in filtration values."""
    order = []
    for n in range(k.dim + 1):
        simp = k.simplex_array(n)
        f = values[simp].max(axis=1) if len(simp) else np.zeros(0)
        order.extend((f[i], n, i) for i in range(len(simp)))
    order.sort()
    pos = {(n, i): j for j, (_, n, i) in enumerate(order)}
    columns = []
    for f, n, i in order:
        col = {}
        if n > 0:
            s = k.simplices[n][i]
            for r in range(len(s)):
                face = s[:r] + s[r + 1:]
                col[pos[(n - 1, k.index(face))]] = (-1) ** r % p
        columns.append(col)
    low_owner = {}
    paired = set()
    pairs = []
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            owner = low_owner.get(low)
            if owner is None:
                break
            other = columns[owner]
            c = col[low] * linalg.inverse(other[low], p) % p
            for r, val in other.items():
                nv = (col.get(r, 0) - c * val) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
        if col:
            low = max(col)
            low_owner[low] = j
            paired.update((low, j))
            pairs.append((order[low][1], order[low][0], order[j][0]))
    essential = [(order[j][1], order[j][0]) for j in range(len(order)) if j not in paired]
    return pairs, essential


def direction_barcode(k: EmbeddedComplex, v, n: int, grid, coords: Coords = Coords.THETA,
                      p: int = linalg.DEFAULT_PRIME) -> Barcode:
    """Barcode of the grid restriction of H_n along ``v``, computed directly by
    boundary-matrix reduction and snapped to ``grid``."""
    grid = np.asarray(grid, dtype=float)
    vals = vertex_params(k.vertices, np.asarray(v, dtype=float), coords)
    pairs, essential = persistence_pairs(k, vals, p)

    def snap(x):
        return int(np.searchsorted(grid + ETA, x, side="left"))

    bars = []
    for deg, b, d in pairs:
        if deg != n:
            continue
        bi, di = snap(b), snap(d)
        if bi < di:
            bars.append(Bar(grid[bi], grid[di], False) if di < len(grid)
                        else Bar(grid[bi], coords.sup, True))
    for deg, b in essential:
        if deg == n:
            bi = snap(b)
            if bi < len(grid):
                bars.append(Bar(grid[bi], coords.sup, True))
    return Barcode(bars, coords)
