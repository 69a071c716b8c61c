"""Closed convex sets with closed-form exact projectors."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import ValidationError
from .numeric import AffineSubspace, as_vector


class ConvexSet(ABC):
    """A nonempty closed convex subset of R^dim with an exact projector."""

    dim: int

    def project(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        return self._project(x)

    @abstractmethod
    def _project(self, x: np.ndarray) -> np.ndarray:
        ...

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self._project(x)))

    def contains(self, x, tol: float = 1e-8) -> bool:
        return self.distance(x) <= tol


class Box(ConvexSet):
    """Axis-aligned box ``{lo <= x <= hi}`` (componentwise)."""

    def __init__(self, lo, hi):
        self.lo = as_vector(lo)
        self.hi = as_vector(hi, self.lo.size)
        if np.any(self.lo > self.hi):
            raise ValidationError("box requires lo <= hi componentwise")
        self.dim = self.lo.size

    def _project(self, x):
        return np.minimum(np.maximum(x, self.lo), self.hi)

    def __repr__(self):
        return f"Box(dim={self.dim})"


class Ball(ConvexSet):
    """Euclidean ball of given center and radius."""

    def __init__(self, center, radius):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ValidationError("ball radius must be positive and finite")
        self.dim = self.center.size

    def _project(self, x):
        d = x - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / n)

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"


class Halfspace(ConvexSet):
    """Halfspace ``{x : <normal, x> <= offset}`` with unnormalized normal."""

    def __init__(self, normal, offset):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        if not np.isfinite(self.offset):
            raise ValidationError("halfspace offset must be finite")
        self._nsq = float(self.normal @ self.normal)
        if self._nsq == 0.0:
            raise ValidationError("halfspace normal must be nonzero")
        self.dim = self.normal.size

    def _project(self, x):
        slack = float(self.normal @ x) - self.offset
        if slack <= 0.0:
            return x.copy()
        return x - (slack / self._nsq) * self.normal

    def __repr__(self):
        return f"Halfspace(dim={self.dim})"


class AffineSet(ConvexSet):
    """A closed affine subspace viewed as a convex set."""

    def __init__(self, subspace: AffineSubspace):
        if not isinstance(subspace, AffineSubspace):
            raise ValidationError("AffineSet wraps an AffineSubspace")
        self.subspace = subspace
        self.dim = subspace.dim

    def _project(self, x):
        return self.subspace.project(x)

    def __repr__(self):
        return f"AffineSet(dim={self.dim}, rank={self.subspace.rank})"


class Singleton(ConvexSet):
    """A single point."""

    def __init__(self, point):
        self.point = as_vector(point)
        self.dim = self.point.size

    def _project(self, x):
        return self.point.copy()

    def __repr__(self):
        return f"Singleton(dim={self.dim})"


def full_space(dim: int) -> AffineSet:
    """The whole ambient space (projection is the identity)."""
    if dim < 1:
        raise ValidationError("dimension must be positive")
    return AffineSet(AffineSubspace(np.zeros(dim), np.eye(dim)))
