"""Dense exact linear algebra over the prime field GF(p).

Matrices are plain ``numpy`` integer arrays whose entries are kept in
``[0, p)``.  Everything here is pure: inputs are never modified.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Optional

import numpy as np

DEFAULT_PRIME = 2


@lru_cache(maxsize=None)
def _check_prime(p: int) -> None:
    if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise ValueError(f"field characteristic must be prime, got {p}")


def as_field(m, p: int = DEFAULT_PRIME) -> np.ndarray:
    _check_prime(p)
    return np.mod(np.asarray(m, dtype=np.int64), p)


def inverse(a: int, p: int) -> int:
    return pow(int(a), p - 2, p)


def matmul(a: np.ndarray, b: np.ndarray, p: int = DEFAULT_PRIME) -> np.ndarray:
    return np.mod(np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64), p)


def rref(m, p: int = DEFAULT_PRIME, transform: bool = False):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` or, with ``transform=True``, ``(R, pivots, E)``
    where ``E`` is invertible and ``E @ m == R`` (mod p).
    """
    a = as_field(m, p)
    rows, cols = a.shape
    if transform:
        a = np.concatenate([a, np.eye(rows, dtype=np.int64)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        if a[r, c] != 1:
            a[r] = (a[r] * inverse(a[r, c], p)) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    if transform:
        return a[:, :cols], pivots, a[:, cols:]
    return a, pivots


def rank(m, p: int = DEFAULT_PRIME) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def kernel_basis(m, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Columns form a basis of the right null space of ``m``."""
    m = np.asarray(m)
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    r, pivots = rref(m, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-r[i, f]) % p
    return basis


def image_basis(m, p: int = DEFAULT_PRIME) -> np.ndarray:
    """Independent columns of ``m`` spanning its column space."""
    m = as_field(m, p)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=np.int64)
    _, pivots = rref(m, p)
    return m[:, pivots]


@dataclass(frozen=True)
class Cokernel:
    """Quotient ``k^rows / im(m)`` with a projection and a chosen section."""

    dim: int
    projection: np.ndarray  # dim x rows, surjective, kills im(m)
    section: np.ndarray  # rows x dim, projection @ section == I


def cokernel(m, p: int = DEFAULT_PRIME) -> Cokernel:
    m = as_field(m, p)
    rows = m.shape[0]
    if m.shape[1] == 0:
        eye = np.eye(rows, dtype=np.int64)
        return Cokernel(rows, eye, eye.copy())
    # Rows of E beyond rank(m) annihilate the column space; they give the projection.
    r, pivots, e = rref(m, p, transform=True)
    k = len(pivots)
    proj = e[k:]
    # A section: complete im(m) to a basis with standard vectors, then invert.
    _, extra = rref(np.concatenate([m[:, pivots], np.eye(rows, dtype=np.int64)], axis=1), p)
    comp = [c - k for c in extra if c >= k]
    sec = np.zeros((rows, rows - k), dtype=np.int64)
    for j, c in enumerate(comp):
        sec[c, j] = 1
    # proj @ sec is invertible; fix it so that proj @ section == I.
    g = matmul(proj, sec, p)
    sec = matmul(sec, invert(g, p), p)
    return Cokernel(rows - k, proj, sec)


def invert(m, p: int = DEFAULT_PRIME) -> np.ndarray:
    m = as_field(m, p)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("only square matrices are invertible")
    r, pivots, e = rref(m, p, transform=True)
    if len(pivots) != n:
        raise np.linalg.LinAlgError("matrix is singular over GF(%d)" % p)
    return e


class Solver:
    """Precomputed elimination for repeated ``m @ x == b`` solves."""

    def __init__(self, m, p: int = DEFAULT_PRIME):
        self.p = p
        self.matrix = as_field(m, p)
        self.shape = self.matrix.shape
        if self.matrix.size:
            _, self.pivots, self._e = rref(self.matrix, p, transform=True)
        else:
            self.pivots, self._e = [], np.eye(self.shape[0], dtype=np.int64)
        self.rank = len(self.pivots)

    def solve(self, b) -> Optional[np.ndarray]:
        """Solve for one vector or for every column of a matrix.

        Returns ``None`` if some right-hand side is outside the column space.
        """
        b = as_field(b, self.p)
        single = b.ndim == 1
        if single:
            b = b[:, None]
        rows, cols = self.shape
        eb = matmul(self._e, b, self.p) if rows else np.zeros((0, b.shape[1]), np.int64)
        if np.any(eb[self.rank:]):
            return None
        x = np.zeros((cols, b.shape[1]), dtype=np.int64)
        x[self.pivots] = eb[: self.rank]
        return x[:, 0] if single else x


def solve_in_image(m, b, p: int = DEFAULT_PRIME) -> Optional[np.ndarray]:
    return Solver(m, p).solve(b)


@dataclass(frozen=True)
class LinearMap:
    """A matrix tagged with the identifiers of its domain and codomain."""

    matrix: np.ndarray
    domain: Hashable
    codomain: Hashable
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain != self.domain:
            raise ValueError(f"cannot compose: {other.codomain!r} != {self.domain!r}")
        if other.p != self.p:
            raise ValueError("field mismatch")
        return LinearMap(matmul(self.matrix, other.matrix, self.p), other.domain, self.codomain, self.p)

    @classmethod
    def identity(cls, dim: int, space: Hashable, p: int = DEFAULT_PRIME) -> "LinearMap":
        return cls(np.eye(dim, dtype=np.int64), space, space, p)
