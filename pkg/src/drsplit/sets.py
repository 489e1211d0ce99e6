"""Convex set descriptors with exact, closed-form projectors.

Every descriptor knows its ambient dimension and provides ``project``,
``reflect`` (2 P - Id) and ``distance``.  All projectors are nearest-point
maps computed in closed form; none runs an inner optimization loop.  All
operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import epigraph as _epigraph
from .functions import ConvexFunction1D

# Relative pivot threshold for declaring the Gram matrix of an affine
# descriptor numerically singular.
RANK_TOL = 1e-12


class DimensionMismatchError(ValueError):
    """Input vector dimension does not match a set's ambient dimension."""


class RankDeficientError(ValueError):
    """The constraint matrix of an affine set is not of full row rank."""


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally checking length."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector coordinates must be finite")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


class ConvexSet:
    """Base class: a closed convex subset of R^dim with a nearest-point map."""

    dim: int

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        return self._project(as_vector(x, self.dim))

    def reflect(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        return 2.0 * self._project(x) - x

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self._project(x)))

    def contains(self, x, tol: float = 1e-10) -> bool:
        return self.distance(x) <= tol


class Affine(ConvexSet):
    """{x : L x = a} for a full-row-rank matrix L.

    The projector applies the Moore-Penrose action x - L^+(Lx - a), with
    L^+(r) obtained by solving (L L^T) w = r through a Cholesky
    factorization of the Gram matrix.  Rank deficiency (any pivot below
    RANK_TOL times ||L||_F^2) is rejected at construction.
    """

    def __init__(self, L, a):
        L = np.atleast_2d(np.asarray(L, dtype=float))
        if L.ndim != 2:
            raise ValueError("L must be a matrix")
        a = as_vector(a, L.shape[0])
        if not np.all(np.isfinite(L)):
            raise ValueError("L must have finite entries")
        gram = L @ L.T
        scale = float(np.sum(L * L))
        try:
            chol = cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as e:
            raise RankDeficientError("L L^T is not positive definite") from e
        pivots = np.diag(chol[0]) ** 2
        if scale == 0.0 or np.min(pivots) < RANK_TOL * scale:
            raise RankDeficientError(
                f"Gram pivot {np.min(pivots):.3e} below {RANK_TOL:.0e} * ||L||^2"
            )
        self.L = L
        self.a = a
        self.dim = L.shape[1]
        # cache the affine form P x + q of the projector
        w = cho_solve(chol, L)
        self._P = np.eye(self.dim) - L.T @ w
        self._q = L.T @ cho_solve(chol, a)

    def _project(self, x: np.ndarray) -> np.ndarray:
        return self._P @ x + self._q

    def is_linear(self) -> bool:
        return bool(np.all(self.a == 0.0))


class Hyperplane(ConvexSet):
    """{x : <normal, x> = offset}."""

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        nn = float(self.normal @ self.normal)
        if nn == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        self._nn = nn
        self.dim = self.normal.shape[0]

    def _project(self, x: np.ndarray) -> np.ndarray:
        return x - ((self.normal @ x - self.offset) / self._nn) * self.normal

    def is_linear(self) -> bool:
        return self.offset == 0.0


class Halfspace(ConvexSet):
    """{x : <normal, x> <= offset}."""

    def __init__(self, normal, offset: float):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        nn = float(self.normal @ self.normal)
        if nn == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        self._nn = nn
        self.dim = self.normal.shape[0]

    def _project(self, x: np.ndarray) -> np.ndarray:
        excess = self.normal @ x - self.offset
        if excess <= 0.0:
            return x.copy()
        return x - (excess / self._nn) * self.normal


class Box(ConvexSet):
    """{x : lo <= x <= hi} componentwise, with finite bounds."""

    def __init__(self, lo, hi):
        self.lo = as_vector(lo)
        self.hi = as_vector(hi, self.lo.shape[0])
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.dim = self.lo.shape[0]

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)


class Orthant(ConvexSet):
    """The nonnegative orthant of R^dim."""

    def __init__(self, dim: int):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(x, 0.0)


class Ball(ConvexSet):
    """Closed Euclidean ball of positive radius."""

    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        self.dim = self.center.shape[0]

    def _project(self, x: np.ndarray) -> np.ndarray:
        d = x - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return x.copy()
        return self.center + (self.radius / nd) * d


class Polygon2D(ConvexSet):
    """Convex polygon in the plane, vertices in counterclockwise order.

    The projector is exact: interior points pass through; otherwise the
    nearest point is the closest of the clamped projections onto the edge
    segments (vertices included via clamping).
    """

    dim = 2

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("need at least three 2-D vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        edges = np.roll(v, -1, axis=0) - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        area2 = float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
        scale = float(np.max(np.abs(v))) or 1.0
        if area2 <= 0.0:
            raise ValueError("vertices must enclose positive area, counterclockwise")
        if np.any(cross < -1e-12 * scale * scale):
            raise ValueError("vertices do not describe a convex polygon")
        self.vertices = v
        self._edges = edges
        self._edge_sq = np.einsum("ij,ij->i", edges, edges)

    def _contains(self, x: np.ndarray) -> bool:
        rel = x - self.vertices
        cross = self._edges[:, 0] * rel[:, 1] - self._edges[:, 1] * rel[:, 0]
        return bool(np.all(cross >= 0.0))

    def _project(self, x: np.ndarray) -> np.ndarray:
        if self._contains(x):
            return x.copy()
        rel = x - self.vertices
        t = np.einsum("ij,ij->i", rel, self._edges)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.clip(np.where(self._edge_sq > 0, t / self._edge_sq, 0.0), 0.0, 1.0)
        candidates = self.vertices + t[:, None] * self._edges
        dists = np.einsum("ij,ij->i", candidates - x, candidates - x)
        return candidates[int(np.argmin(dists))]


class Epigraph1D(ConvexSet):
    """{(x, rho) : f(x) <= rho} for a scalar convex f."""

    dim = 2

    def __init__(self, f: ConvexFunction1D):
        self.f = f

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(_epigraph.project_epigraph(self.f, (x[0], x[1])))


class Diagonal(ConvexSet):
    """{(x, ..., x) : x in R^base_dim} inside R^(copies * base_dim).

    The projection replaces every block with the mean of the blocks.
    """

    def __init__(self, copies: int, base_dim: int):
        copies, base_dim = int(copies), int(base_dim)
        if copies < 1 or base_dim < 1:
            raise ValueError("copies and base_dim must be positive")
        self.copies = copies
        self.base_dim = base_dim
        self.dim = copies * base_dim

    def _project(self, x: np.ndarray) -> np.ndarray:
        mean = x.reshape(self.copies, self.base_dim).mean(axis=0)
        return np.tile(mean, self.copies)

    def is_linear(self) -> bool:
        return True


class Product(ConvexSet):
    """Cartesian product of descriptors; projects blockwise."""

    def __init__(self, components: Sequence[ConvexSet]):
        components = tuple(components)
        if not components:
            raise ValueError("product needs at least one component")
        self.components = components
        self._offsets = np.cumsum([0] + [c.dim for c in components])
        self.dim = int(self._offsets[-1])

    def blocks(self, x: np.ndarray) -> list:
        return [
            x[self._offsets[i] : self._offsets[i + 1]]
            for i in range(len(self.components))
        ]

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [c._project(b) for c, b in zip(self.components, self.blocks(x))]
        )


class Shifted(ConvexSet):
    """base - shift, i.e. {y : y + shift in base}.

    Used to reduce affine-subspace problems to linear-subspace ones; the
    projector is P(y) = P_base(y + shift) - shift.
    """

    def __init__(self, base: ConvexSet, shift):
        self.base = base
        self.shift = as_vector(shift, base.dim)
        self.dim = base.dim

    def _project(self, x: np.ndarray) -> np.ndarray:
        return self.base._project(x + self.shift) - self.shift


def is_linear_subspace(s: ConvexSet) -> bool:
    """True for descriptors of linear subspaces: affine sets and
    hyperplanes through the origin, and diagonals."""
    checker = getattr(s, "is_linear", None)
    return bool(checker()) if checker is not None else False


def project(s: ConvexSet, x) -> np.ndarray:
    """Nearest point of the set to x."""
    return s.project(x)


def reflect(s: ConvexSet, x) -> np.ndarray:
    """Reflection of x through its projection: 2 P(x) - x."""
    return s.reflect(x)


def distance(s: ConvexSet, x) -> float:
    """Euclidean distance of x to the set."""
    return s.distance(x)


def project_affine(L, a, x) -> np.ndarray:
    """Project x onto {y : L y = a}; L must have full row rank."""
    return Affine(L, a).project(x)


def project_orthant(x) -> np.ndarray:
    """Componentwise positive part."""
    return np.maximum(as_vector(x), 0.0)
