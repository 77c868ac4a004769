"""Small test shapes: polygon disks, circles, points and random polygons."""
from __future__ import annotations

import numpy as np

from .geometry import EmbeddedComplex, rescale_to_unit_disk


def disk_mesh(n: int = 64, radius: float = 1.0, phase: float = 0.0) -> EmbeddedComplex:
    """Regular n-gon inscribed in the circle of given radius, fan-triangulated
    from the centre (vertex 0)."""
    ang = phase + 2 * np.pi * np.arange(n) / n
    ring = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    verts = np.vstack([[0.0, 0.0], ring])
    tris = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
    return EmbeddedComplex.from_simplices(verts, tris, label=f"disk{n}")


def polygon_boundary(n: int = 64, radius: float = 1.0) -> EmbeddedComplex:
    ang = 2 * np.pi * np.arange(n) / n
    verts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    edges = [(i, (i + 1) % n) for i in range(n)]
    return EmbeddedComplex.from_simplices(verts, edges, label=f"circle{n}")


def point_shape(x: float = 0.0, y: float = 1.0) -> EmbeddedComplex:
    return EmbeddedComplex.from_simplices([[x, y]], [], label="point")


def star_polygon(radii, phases, filled: bool = True, label: str = "star") -> EmbeddedComplex:
    """Polygon star-shaped about the origin with vertex i at radius radii[i] and
    angle phases[i] (increasing)."""
    radii = np.asarray(radii, float)
    phases = np.asarray(phases, float)
    n = len(radii)
    ring = np.column_stack([radii * np.cos(phases), radii * np.sin(phases)])
    if filled:
        verts = np.vstack([[0.0, 0.0], ring])
        simplices = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
    else:
        verts = ring
        simplices = [(i, (i + 1) % n) for i in range(n)]
    return rescale_to_unit_disk(EmbeddedComplex.from_simplices(verts, simplices, label=label))


def random_star_polygon(rng: np.random.Generator, n: int | None = None, filled: bool = True):
    n = n or int(rng.integers(5, 13))
    phases = np.sort(rng.uniform(0, 2 * np.pi, n))
    radii = rng.uniform(0.3, 1.0, n)
    return star_polygon(radii, phases, filled, label=f"star{n}")


def random_convex_polygon(rng: np.random.Generator, n: int | None = None, filled: bool = True):
    """Convex hull of points on a random ellipse, centred near the origin."""
    n = n or int(rng.integers(5, 13))
    phases = np.sort(rng.uniform(0, 2 * np.pi, n))
    a, b = rng.uniform(0.4, 1.0, 2)
    tilt = rng.uniform(0, np.pi)
    pts = np.column_stack([a * np.cos(phases), b * np.sin(phases)])
    rot = np.array([[np.cos(tilt), -np.sin(tilt)], [np.sin(tilt), np.cos(tilt)]])
    pts = pts @ rot.T
    radii = np.linalg.norm(pts, axis=1)
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    order = np.argsort(angles)
    return star_polygon(radii[order], angles[order], filled, label=f"convex{n}")
