"""Embedded complexes, sphere metrics, coordinate systems and direction nets."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

ETA = 1e-9  # comparison tolerance for every <= on parameters and heights


class SphereMetric(enum.Enum):
    EUCLIDEAN = "euclidean"
    GEODESIC = "geodesic"


class Coords(enum.Enum):
    """Parameter interval for persistence modules.

    ``THETA`` is the angular interval [-pi, 0] paired with the geodesic metric,
    ``EUCLIDEAN`` is the height interval [-1, 1] paired with the chordal metric.
    """

    THETA = "theta"
    EUCLIDEAN = "euclidean"

    @property
    def inf(self) -> float:
        return -math.pi if self is Coords.THETA else -1.0

    @property
    def sup(self) -> float:
        return 0.0 if self is Coords.THETA else 1.0

    @property
    def metric(self) -> SphereMetric:
        return SphereMetric.GEODESIC if self is Coords.THETA else SphereMetric.EUCLIDEAN

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.inf - ETA) & (x <= self.sup + ETA)))


def check_pairing(coords: Coords, metric: SphereMetric) -> None:
    if coords.metric is not metric:
        raise ValueError(
            f"coordinate system {coords.value!r} must be used with the {coords.metric.value} metric"
        )


def direction(*xs) -> np.ndarray:
    v = np.asarray(xs[0] if len(xs) == 1 else xs, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector is not a direction")
    return v / n


def angle_direction(theta: float) -> np.ndarray:
    """Unit vector e^{i theta} in the plane."""
    return np.array([math.cos(theta), math.sin(theta)])


def sphere_distance(v, w, metric: SphereMetric = SphereMetric.GEODESIC):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if metric is SphereMetric.EUCLIDEAN:
        return np.linalg.norm(v - w, axis=-1)
    return np.arccos(np.clip(np.sum(v * w, axis=-1), -1.0, 1.0))


def distance_matrix(a, b, metric: SphereMetric) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return sphere_distance(a[:, None, :], b[None, :, :], metric)


def param_to_height(x, coords: Coords):
    if not coords.contains(x):
        raise ValueError(f"parameter {x} outside [{coords.inf}, {coords.sup}]")
    if coords is Coords.EUCLIDEAN:
        return x
    return np.cos(x)


def height_to_param(t, coords: Coords):
    if coords is Coords.EUCLIDEAN:
        return t
    return -np.arccos(np.clip(t, -1.0, 1.0))


def vertex_params(points: np.ndarray, v: np.ndarray, coords: Coords) -> np.ndarray:
    """Filtration value of each point in direction ``v`` in the given coordinates.

    For theta coordinates, ``x.v <= cos(theta)`` iff ``-arccos(x.v) <= theta``.
    """
    h = points @ v
    if coords is Coords.EUCLIDEAN:
        return h
    return -np.arccos(np.clip(h, -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class DirectionSet:
    vectors: np.ndarray
    metric: SphereMetric = SphereMetric.GEODESIC

    def __post_init__(self):
        vecs = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if vecs.shape[0] == 0:
            raise ValueError("direction set must be nonempty")
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        d = distance_matrix(vecs, vecs, SphereMetric.EUCLIDEAN)
        np.fill_diagonal(d, np.inf)
        if np.any(d < 1e-12):
            raise ValueError("directions must be pairwise distinct")
        object.__setattr__(self, "vectors", vecs)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def generate_net(count: int, d: int = 2, metric: SphereMetric = SphereMetric.GEODESIC,
                 offset: float = 0.0) -> DirectionSet:
    """Equally spaced directions on the circle, or a Fibonacci lattice on S^2."""
    if count < 1:
        raise ValueError("count must be positive")
    if d == 2:
        angles = offset + 2 * np.pi * np.arange(count) / count
        return DirectionSet(np.column_stack([np.cos(angles), np.sin(angles)]), metric)
    if d == 3:
        return DirectionSet(fibonacci_sphere(count), metric)
    raise ValueError("only S^1 and S^2 are supported")


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - math.sqrt(5)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _geodesic_to(metric: SphereMetric, angle: float) -> float:
    return angle if metric is SphereMetric.GEODESIC else 2 * math.sin(angle / 2)


@dataclass(frozen=True)
class HausdorffEstimate:
    value: float
    exact: bool
    samples: int = 0


def hausdorff_to_sphere(a: DirectionSet, samples: int = 100_000) -> HausdorffEstimate:
    """Covering radius of ``a`` on its sphere, in ``a.metric``.

    On the circle this is exactly half the largest angular gap. On S^2 the
    supremum is taken over a Fibonacci lattice of ``samples`` points.
    """
    if a.dim == 2:
        ang = np.sort(np.mod(np.arctan2(a.vectors[:, 1], a.vectors[:, 0]), 2 * np.pi))
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        return HausdorffEstimate(_geodesic_to(a.metric, float(gaps.max()) / 2), True)
    pts = fibonacci_sphere(samples)
    chord, _ = cKDTree(a.vectors).query(pts)
    angle = 2 * np.arcsin(np.clip(chord.max() / 2, 0, 1))
    return HausdorffEstimate(_geodesic_to(a.metric, float(angle)), False, samples)


def one_sided_covering_radius(grid: Sequence[float], coords: Coords) -> float:
    """Smallest e with grid meeting [y, y + e] for every y in the interval."""
    g = np.sort(np.asarray(grid, dtype=float))
    if abs(g[-1] - coords.sup) > ETA:
        raise ValueError("grid must contain sup X")
    gaps = np.diff(np.concatenate([[coords.inf], g]))
    return float(gaps.max())


def _faces(simplex):
    k = len(simplex)
    for r in range(1, k + 1):
        yield from itertools.combinations(simplex, r)


@dataclass(frozen=True, eq=False)
class EmbeddedComplex:
    """Finite simplicial complex with vertex coordinates in R^2 or R^3.

    Simplices are stored per dimension as sorted index tuples in lexicographic
    order, so every derived matrix has a deterministic layout.
    """

    vertices: np.ndarray
    simplices: tuple
    label: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    @classmethod
    def from_simplices(cls, vertices, simplices, label: str = "", close: bool = True):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if verts.shape[0] == 0 or verts.size == 0:
            raise ValueError("empty shape")
        n = len(verts)
        given = set()
        for s in simplices:
            t = tuple(sorted(int(i) for i in s))
            if len(set(t)) != len(t):
                raise ValueError(f"degenerate simplex {s}")
            if t in given:
                raise ValueError(f"duplicate simplex {t}")
            given.add(t)
        seen = set((i,) for i in range(n)) if close else set(given)
        for t in list(given):
            if any(i < 0 or i >= n for i in t):
                raise ValueError(f"vertex index out of range in {t}")
            if close:
                seen.update(_faces(t))
            else:
                missing = [f for f in _faces(t) if f not in given]
                if missing:
                    raise ValueError(f"not closed under faces: {missing[0]} missing")
        top = max(len(s) for s in seen) if seen else 1
        by_dim = tuple(tuple(sorted(s for s in seen if len(s) == k + 1)) for k in range(top))
        return cls(verts, by_dim, label)

    def __post_init__(self):
        idx = {s: i for simps in self.simplices for i, s in enumerate(simps)}
        object.__setattr__(self, "_index", idx)

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def n_simplices(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k < len(self.simplices) else 0

    def simplex_array(self, k: int) -> np.ndarray:
        if not 0 <= k < len(self.simplices):
            return np.zeros((0, k + 1), dtype=np.int64)
        return np.asarray(self.simplices[k], dtype=np.int64).reshape(-1, k + 1)

    def index(self, simplex) -> int:
        return self._index[tuple(sorted(simplex))]

    def boundary(self, k: int) -> np.ndarray:
        """Signed integer boundary matrix from k-chains to (k-1)-chains."""
        rows, cols = self.n_simplices(k - 1), self.n_simplices(k)
        b = np.zeros((rows, cols), dtype=np.int64)
        if k <= 0 or cols == 0:
            return b
        for j, s in enumerate(self.simplices[k]):
            for i in range(len(s)):
                b[self._index[s[:i] + s[i + 1:]], j] = (-1) ** i
        return b

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(s) for k, s in enumerate(self.simplices))

    def max_norm(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())


def rescale_to_unit_disk(k: EmbeddedComplex) -> EmbeddedComplex:
    if len(k.vertices) == 0:
        raise ValueError("empty shape")
    r = k.max_norm()
    if r <= 1.0:
        return k
    return EmbeddedComplex(k.vertices / r, k.simplices, k.label)
