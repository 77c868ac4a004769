"""Grid persistence modules, interval decomposition and distances between them.

Bars live in the coordinates of the grid they were read from.  A finite bar
``[b, d)`` is alive at grid points ``b <= x < d``; a *cap* bar reaches
``sup X`` and, under the capped shift ``T_eps(x) = min(x + eps, sup X)``,
can never be matched to the empty module.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import linalg
from .geometry import ETA, Coords

INF = math.inf


@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    cap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "birth", float(self.birth))
        object.__setattr__(self, "death", float(self.death))
        object.__setattr__(self, "cap", bool(self.cap))
        if self.birth > self.death + ETA:
            raise ValueError(f"bar born after it dies: {self}")

    @property
    def length(self) -> float:
        return self.death - self.birth

    def contains(self, s: float, t: float) -> bool:
        """Whether the bar is alive on the whole grid segment [s, t]."""
        if self.cap:
            return self.birth <= s + ETA
        return self.birth <= s + ETA and t < self.death - ETA


@dataclass(frozen=True)
class Barcode:
    bars: tuple
    coords: Coords = Coords.THETA

    def __init__(self, bars=(), coords: Coords = Coords.THETA):
        ordered = tuple(sorted(bars, key=lambda b: (b.birth, not b.cap, b.death)))
        for b in ordered:
            if b.cap and abs(b.death - coords.sup) > ETA:
                raise ValueError("cap bars must end at sup X")
        object.__setattr__(self, "bars", ordered)
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    @property
    def caps(self):
        return [b for b in self.bars if b.cap]

    @property
    def finite(self):
        return [b for b in self.bars if not b.cap]

    def count_alive(self, x: float) -> int:
        return sum(b.contains(x, x) for b in self.bars)

    def approx_equal(self, other: "Barcode", tol: float) -> bool:
        if len(self) != len(other) or len(self.caps) != len(other.caps):
            return False
        return bottleneck(self, other, capped=True, deletions=False) <= tol + ETA

    def to_json(self) -> dict:
        return {
            "coords": self.coords.value,
            "bars": [{"birth": b.birth, "death": b.death, "cap": b.cap} for b in self.bars],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Barcode":
        coords = Coords(obj["coords"])
        return cls([Bar(float(b["birth"]), float(b["death"]), bool(b["cap"])) for b in obj["bars"]], coords)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["birth", "death", "cap"])
        for b in self.bars:
            w.writerow([repr(float(b.birth)), repr(float(b.death)), int(b.cap)])
        return buf.getvalue()


def plot_rows(barcodes: Mapping[float, Barcode]) -> str:
    """CSV of (direction_angle, birth, death) triples for plotting a transform."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction_angle", "birth", "death"])
    for ang in sorted(barcodes):
        for b in barcodes[ang]:
            w.writerow([repr(float(ang)), repr(float(b.birth)), repr(float(b.death))])
    return buf.getvalue()


@dataclass(eq=False)
class GridModule:
    """Persistence module sampled on a sorted grid: ``maps[i]`` goes from the
    space at ``grid[i]`` to the space at ``grid[i + 1]``."""

    coords: Coords
    grid: np.ndarray
    dims: np.ndarray
    maps: list
    p: int = linalg.DEFAULT_PRIME
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.dims = np.asarray(self.dims, dtype=int)
        if len(self.grid) != len(self.dims) or len(self.maps) != max(len(self.grid) - 1, 0):
            raise ValueError("grid, dims and maps have inconsistent lengths")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        for i, m in enumerate(self.maps):
            if np.shape(m) != (self.dims[i + 1], self.dims[i]):
                raise ValueError(f"map {i} has shape {np.shape(m)}, expected "
                                 f"{(self.dims[i + 1], self.dims[i])}")

    def __len__(self):
        return len(self.grid)

    def composite(self, i: int, j: int) -> np.ndarray:
        """Transition matrix from grid index i to grid index j >= i."""
        out = np.eye(self.dims[i], dtype=np.int64)
        for k in range(i, j):
            out = linalg.matmul(self.maps[k], out, self.p)
        return out


def _low(col: np.ndarray) -> int:
    nz = np.flatnonzero(col)
    return int(nz[-1]) if nz.size else -1


def decompose(m: GridModule) -> Barcode:
    """Interval decomposition of a grid module by sequential basis changes.

    The basis of each space is carried forward tagged with birth indices; at
    every step the images are column-reduced oldest-first, so a dependency
    kills the youngest bar involved.
    """
    n, p = len(m.grid), m.p
    if n == 0:
        return Barcode([], m.coords)
    bars = []
    basis = np.eye(m.dims[0], dtype=np.int64)
    births = [0] * m.dims[0]
    for i in range(n - 1):
        img = linalg.matmul(m.maps[i], basis, p) if basis.size else np.zeros((m.dims[i + 1], 0), np.int64)
        owner: dict[int, np.ndarray] = {}
        survivors, surv_births = [], []
        for j in sorted(range(len(births)), key=lambda j: births[j]):
            c = img[:, j].copy()
            low = _low(c)
            while low >= 0 and low in owner:
                o = owner[low]
                c = (c - c[low] * linalg.inverse(o[low], p) * o) % p
                low = _low(c)
            if low < 0:
                bars.append(Bar(m.grid[births[j]], m.grid[i + 1], False))
            else:
                owner[low] = c
                survivors.append(c)
                surv_births.append(births[j])
        dim = m.dims[i + 1]
        cols = np.column_stack(survivors) if survivors else np.zeros((dim, 0), np.int64)
        _, piv = linalg.rref(np.concatenate([cols, np.eye(dim, dtype=np.int64)], axis=1), p)
        fresh = [c - cols.shape[1] for c in piv if c >= cols.shape[1]]
        new = np.zeros((dim, len(fresh)), dtype=np.int64)
        for k, c in enumerate(fresh):
            new[c, k] = 1
        basis = np.concatenate([cols, new], axis=1)
        births = surv_births + [i + 1] * len(fresh)
    last_cap = abs(m.grid[-1] - m.coords.sup) <= ETA
    for b in births:
        bars.append(Bar(m.grid[b], m.coords.sup if last_cap else m.grid[-1], last_cap))
    return Barcode(bars, m.coords)


def module_from_barcode(barcode: Barcode, grid, p: int = linalg.DEFAULT_PRIME) -> GridModule:
    """Direct sum of interval modules, one per bar, sampled on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    alive = np.array([[b.contains(x, x) for x in grid] for b in barcode.bars], dtype=bool).reshape(-1, len(grid))
    dims = alive.sum(axis=0)
    maps = []
    for i in range(len(grid) - 1):
        src = np.flatnonzero(alive[:, i])
        tgt = np.flatnonzero(alive[:, i + 1])
        mat = np.zeros((len(tgt), len(src)), dtype=np.int64)
        for a, bar in enumerate(src):
            hit = np.flatnonzero(tgt == bar)
            if hit.size:
                mat[hit[0], a] = 1
        maps.append(mat)
    return GridModule(barcode.coords, grid, dims, maps, p)


def refine(m: GridModule, grid) -> GridModule:
    """Extend ``m`` to a finer grid, constant between its own grid points."""
    grid = np.asarray(grid, dtype=float)
    src = np.searchsorted(m.grid, grid + ETA, side="right") - 1
    dims = np.array([m.dims[i] if i >= 0 else 0 for i in src], dtype=int)
    maps = []
    for a, b in zip(src, src[1:]):
        if a < 0:
            maps.append(np.zeros((m.dims[b] if b >= 0 else 0, 0), dtype=np.int64))
        else:
            maps.append(m.composite(a, b))
    return GridModule(m.coords, grid, dims, maps, m.p)


def common_grid(a, b) -> np.ndarray:
    g = np.union1d(np.asarray(a, float), np.asarray(b, float))
    keep = np.concatenate([[True], np.diff(g) > ETA])
    return g[keep]


def _deletion(bar: Bar) -> float:
    return bar.length / 2


def _finite_bottleneck(a: Sequence[Bar], b: Sequence[Bar], deletions: bool = True) -> float:
    n, m = len(a), len(b)
    if n == 0 and m == 0:
        return 0.0
    ab = np.array([[b.birth, b.death] for b in a]).reshape(-1, 2)
    bb = np.array([[x.birth, x.death] for x in b]).reshape(-1, 2)
    pair = np.max(np.abs(ab[:, None, :] - bb[None, :, :]), axis=2) if n and m else np.zeros((n, m))
    del_a = (ab[:, 1] - ab[:, 0]) / 2 if deletions else np.full(n, INF)
    del_b = (bb[:, 1] - bb[:, 0]) / 2 if deletions else np.full(m, INF)
    cands = np.unique(np.concatenate([[0.0], pair.ravel(), del_a, del_b]))
    cands = cands[np.isfinite(cands)]

    def feasible(eps: float) -> bool:
        size = n + m
        big = np.zeros((size, size), dtype=bool)
        big[:n, :m] = pair <= eps + 1e-12
        big[np.arange(n), m + np.arange(n)] = del_a <= eps + 1e-12
        big[n + np.arange(m), np.arange(m)] = del_b <= eps + 1e-12
        big[n:, m:] = True
        match = maximum_bipartite_matching(csr_matrix(big), perm_type="column")
        return bool(np.all(match >= 0))

    lo, hi = 0, len(cands) - 1
    if hi < 0 or not feasible(cands[hi]):
        return INF
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck(a: Barcode, b: Barcode, capped: bool = True, deletions: bool = True) -> float:
    """Bottleneck distance.

    With ``capped=True`` (the default) cap bars may only be matched to cap bars
    at cost ``|b - b'|`` and can never be deleted, so differing cap counts give
    infinity.  With ``capped=False`` cap bars are treated as finite bars ending
    at ``sup X``.
    """
    if a.coords is not b.coords:
        raise ValueError("barcodes use different coordinate systems")
    if not capped:
        fa = [Bar(x.birth, x.death) for x in a]
        fb = [Bar(x.birth, x.death) for x in b]
        return _finite_bottleneck(fa, fb, deletions)
    ca, cb = sorted(x.birth for x in a.caps), sorted(x.birth for x in b.caps)
    if len(ca) != len(cb):
        return INF
    cap_cost = max((abs(x - y) for x, y in zip(ca, cb)), default=0.0)
    return max(cap_cost, _finite_bottleneck(a.finite, b.finite, deletions))


def interleaving_distance(m1: GridModule, m2: GridModule, capped: bool = True) -> float:
    """Interleaving distance of two grid modules, read off their barcodes."""
    if m1.coords is not m2.coords:
        raise ValueError("modules use different coordinate systems")
    if len(m1.grid) != len(m2.grid) or np.any(np.abs(m1.grid - m2.grid) > ETA):
        g = common_grid(m1.grid, m2.grid)
        m1, m2 = refine(m1, g), refine(m2, g)
    return bottleneck(decompose(m1), decompose(m2), capped)


def reparameterize(barcode: Barcode) -> Barcode:
    """Move a theta barcode to height coordinates via t = cos(theta)."""
    if barcode.coords is not Coords.THETA:
        raise ValueError("reparameterize expects a theta barcode")
    bars = [Bar(math.cos(b.birth), 1.0 if b.cap else math.cos(b.death), b.cap) for b in barcode]
    return Barcode(bars, Coords.EUCLIDEAN)


def pht_distance(p1: Mapping, p2: Mapping, capped: bool = True) -> float:
    """Maximum over directions of the interleaving distance.

    Both mappings send a direction key (e.g. a tuple of coordinates or an angle)
    to a GridModule or a Barcode.
    """
    if set(p1) != set(p2):
        raise ValueError("direction mismatch between the two transforms")
    worst = 0.0
    for key in p1:
        a, b = p1[key], p2[key]
        if isinstance(a, GridModule):
            d = interleaving_distance(a, b, capped)
        else:
            d = bottleneck(a, b, capped)
        worst = max(worst, d)
    return worst


def dump_barcode(barcode: Barcode) -> str:
    return json.dumps(barcode.to_json(), indent=1)
