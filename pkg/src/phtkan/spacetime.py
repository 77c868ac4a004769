"""The sampled space-time pre-order and light cones of query points.

Sampled points are ``(i, j)`` index pairs: direction ``A[i]`` at parameter
``T[j]``.  There is a morphism ``(v, a) -> (w, b)`` when ``a + d(v, w) <= b``,
plus a formal morphism into every point of the top slice ``b = sup X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import ETA, Coords, DirectionSet, check_pairing, direction, distance_matrix, \
    hausdorff_to_sphere, one_sided_covering_radius

PAST, FUTURE = "past", "future"


@dataclass(frozen=True, eq=False)
class SpaceTimePoint:
    direction: np.ndarray
    param: float

    def __post_init__(self):
        object.__setattr__(self, "direction", direction(self.direction))
        object.__setattr__(self, "param", float(self.param))


@dataclass(eq=False)
class SampleGrid:
    directions: DirectionSet
    params: np.ndarray
    coords: Coords = Coords.THETA
    dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        check_pairing(self.coords, self.directions.metric)
        t = np.asarray(self.params, dtype=float)
        if t.ndim != 1 or len(t) == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("parameter grid must be nonempty and strictly increasing")
        if not self.coords.contains(t):
            raise ValueError("parameter grid leaves the parameter interval")
        if abs(t[-1] - self.coords.sup) > ETA:
            raise ValueError("parameter grid must contain sup X")
        t[-1] = self.coords.sup
        self.params = t
        self.dist = distance_matrix(self.directions.vectors, self.directions.vectors, self.metric)

    @property
    def metric(self):
        return self.directions.metric

    @property
    def top(self) -> int:
        return len(self.params) - 1

    def __len__(self):
        return len(self.directions) * len(self.params)

    def points(self):
        return [(i, j) for i in range(len(self.directions)) for j in range(len(self.params))]

    def distances_to(self, w) -> np.ndarray:
        return distance_matrix(self.directions.vectors, np.asarray(w, float)[None, :], self.metric)[:, 0]

    def point(self, p) -> SpaceTimePoint:
        return SpaceTimePoint(self.directions[p[0]], self.params[p[1]])

    def eps_directions(self) -> float:
        return hausdorff_to_sphere(self.directions).value

    def eps_params(self) -> float:
        return one_sided_covering_radius(self.params, self.coords)

    def floor(self, x) -> np.ndarray:
        """Index of the largest grid value <= x (within tolerance), -1 if none."""
        return np.searchsorted(self.params, np.asarray(x) + ETA, side="right") - 1

    def ceil(self, x) -> np.ndarray:
        """Index of the smallest grid value >= x (within tolerance), len(T) if none."""
        return np.searchsorted(self.params, np.asarray(x) - ETA, side="left")

    def is_top(self, x: float) -> bool:
        return abs(x - self.coords.sup) <= ETA

    def leq(self, p, q, formal: bool = True) -> bool:
        if formal and q[1] == self.top:
            return True
        return bool(self.params[p[1]] + self.dist[p[0], q[0]] <= self.params[q[1]] + ETA)


def leq(p: SpaceTimePoint, q: SpaceTimePoint, metric, coords: Coords = Coords.THETA,
        formal: bool = True) -> bool:
    """Morphism predicate of the space-time category."""
    from .geometry import sphere_distance
    if formal and abs(q.param - coords.sup) <= ETA:
        return True
    return bool(p.param + sphere_distance(p.direction, q.direction, metric) <= q.param + ETA)


@dataclass(eq=False)
class LightCone:
    query: SpaceTimePoint
    flavor: str
    members: list
    generators: list
    reduced: bool = False

    @property
    def empty(self) -> bool:
        return not self.members

    @property
    def key(self):
        return (self.flavor, tuple(self.members))

    def __len__(self):
        return len(self.members)


def relation(g: SampleGrid, members, formal: bool) -> np.ndarray:
    """Boolean matrix r[a, b] = members[a] <= members[b]."""
    if not members:
        return np.zeros((0, 0), dtype=bool)
    m = np.asarray(members)
    t = g.params[m[:, 1]]
    r = t[:, None] + g.dist[np.ix_(m[:, 0], m[:, 0])] <= t[None, :] + ETA
    if formal:
        r |= (m[:, 1] == g.top)[None, :]
    return r


def generators(g: SampleGrid, members, r: np.ndarray, formal: bool = True) -> list:
    """Generating morphisms: transitive reduction of the strict order, with the
    top-slice clique (present only with formal morphisms) replaced by a chain
    in both directions."""
    n = len(members)
    if n == 0:
        return []
    strict = r & ~r.T
    s = strict.astype(np.int32)
    red = strict & ~((s @ s) > 0)
    top = np.array([formal and p[1] == g.top for p in members])
    pos = {p: a for a, p in enumerate(members)}
    edges = []
    for a in range(n):
        hits = np.flatnonzero(red[a])
        if not top[a] and top[hits].any():
            own = pos.get((members[a][0], g.top))
            if own is not None:
                hits = np.append(hits[~top[hits]], own)
        edges.extend((a, int(b)) for b in hits)
    tops = np.flatnonzero(top)
    for a, b in zip(tops, tops[1:]):
        edges += [(int(a), int(b)), (int(b), int(a))]
    return sorted(set(edges))


def all_morphisms(r: np.ndarray) -> list:
    """Every non-identity morphism between cone members (brute-force oracle)."""
    a, b = np.nonzero(r)
    return [(int(x), int(y)) for x, y in zip(a, b) if x != y]


def _cone(q: SpaceTimePoint, g: SampleGrid, flavor: str, members, mode: str, reduced=False) -> LightCone:
    formal = flavor == PAST
    members = sorted(members)
    r = relation(g, members, formal)
    gens = all_morphisms(r) if mode == "brute" else generators(g, members, r, formal)
    return LightCone(q, flavor, members, gens, reduced)


def past_members(q: SpaceTimePoint, g: SampleGrid) -> list:
    if g.is_top(q.param):
        return g.points()
    d = g.distances_to(q.direction)
    hi = g.floor(q.param - d)
    return [(i, j) for i in range(len(d)) for j in range(hi[i] + 1)]


def future_members(q: SpaceTimePoint, g: SampleGrid) -> list:
    """Sampled points reachable from q by a genuine (non-formal) morphism."""
    d = g.distances_to(q.direction)
    lo = g.ceil(q.param + d)
    return [(i, j) for i in range(len(d)) for j in range(lo[i], len(g.params))]


def past_light_cone(q: SpaceTimePoint, g: SampleGrid, mode: str = "full") -> LightCone:
    """Past cone of ``q``; ``mode`` is "full", "brute" (all morphisms as
    generators) or "reduced" (a cofinal subcone computed directly)."""
    if mode == "reduced":
        return _cone(q, g, PAST, reduced_past_members(q, g), "full", reduced=True)
    return _cone(q, g, PAST, past_members(q, g), mode)


def future_light_cone(q: SpaceTimePoint, g: SampleGrid, mode: str = "full") -> LightCone:
    if mode == "reduced":
        return _cone(q, g, FUTURE, reduced_future_members(q, g), "full", reduced=True)
    return _cone(q, g, FUTURE, future_members(q, g), mode)


def is_connected(c: LightCone) -> bool:
    if c.empty:
        return True
    n = len(c.members)
    if not c.generators:
        return n == 1
    a, b = np.array(c.generators).T
    adj = csr_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    count, _ = connected_components(adj, directed=False)
    return count == 1


def _extremes(r: np.ndarray, upper: bool) -> list:
    """Maximal (upper) or minimal elements, one representative per
    isomorphism class."""
    rel = r if upper else r.T
    out = []
    for a in range(len(rel)):
        above = np.flatnonzero(rel[a])
        if np.all(rel[above, a]) and not any(rel[a, b] and rel[b, a] for b in out):
            out.append(a)
    return out


def _reduce(r: np.ndarray, upper: bool) -> list:
    ext = _extremes(r, upper)
    keep = set(ext)
    rel = r if upper else r.T
    for x, y in zip(*np.triu_indices(len(ext), 1)):
        common = np.flatnonzero(rel[:, ext[x]] & rel[:, ext[y]])
        if common.size:
            sub = rel[np.ix_(common, common)]
            keep.update(int(common[c]) for c in _extremes(sub, True))
    return sorted(keep)


def cofinal_reduction(c: LightCone, g: SampleGrid) -> LightCone:
    """Subcone on the extremal members together with the extremal common
    bounds of each pair of them (maxima and lower bounds for a past cone,
    minima and upper bounds for a future cone)."""
    if c.empty:
        return c
    r = relation(g, c.members, c.flavor == PAST)
    keep = _reduce(r, upper=c.flavor == PAST)
    if len(keep) == len(c.members):
        return c
    return _cone(c.query, g, c.flavor, [c.members[a] for a in keep], "full", reduced=True)


def _dominant(g: SampleGrid, cand: Iterable, upper: bool) -> list:
    cand = sorted(set(cand))
    r = relation(g, cand, formal=upper)
    return [cand[a] for a in _extremes(r, upper)]


def reduced_past_members(q: SpaceTimePoint, g: SampleGrid) -> list:
    if g.is_top(q.param):
        return [(0, g.top)]
    d = g.distances_to(q.direction)
    hi = g.floor(q.param - d)
    maxima = _dominant(g, [(i, int(hi[i])) for i in range(len(d)) if hi[i] >= 0], upper=True)
    keep = set(maxima)
    for x in range(len(maxima)):
        for y in range(x + 1, len(maxima)):
            (i, a), (k, b) = maxima[x], maxima[y]
            lo = np.minimum(g.floor(g.params[a] - g.dist[:, i]), g.floor(g.params[b] - g.dist[:, k]))
            lo = np.minimum(lo, hi)
            keep.update(_dominant(g, [(u, int(lo[u])) for u in range(len(d)) if lo[u] >= 0], upper=True))
    return sorted(keep)


def reduced_future_members(q: SpaceTimePoint, g: SampleGrid) -> list:
    d = g.distances_to(q.direction)
    n = len(g.params)
    lo = g.ceil(q.param + d)
    minima = _dominant(g, [(i, int(lo[i])) for i in range(len(d)) if lo[i] < n], upper=False)
    keep = set(minima)
    for x in range(len(minima)):
        for y in range(x + 1, len(minima)):
            (i, a), (k, b) = minima[x], minima[y]
            up = np.maximum(g.ceil(g.params[a] + g.dist[i]), g.ceil(g.params[b] + g.dist[k]))
            up = np.maximum(up, lo)
            keep.update(_dominant(g, [(u, int(up[u])) for u in range(len(d)) if up[u] < n], upper=False))
    return sorted(keep)
