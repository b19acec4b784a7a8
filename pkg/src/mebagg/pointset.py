"""Point sets with optional ground-truth honest/Byzantine labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError, MebaggError

HONEST = "honest"
BYZANTINE = "byz"

_VALID_LABELS = frozenset({HONEST, BYZANTINE})


@dataclass(frozen=True)
class PointSet:
    """An ordered collection of d-dimensional vectors.

    ``labels``, when present, is test-only ground truth: aggregation rules
    never look at it.
    """

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise EmptyInputError("a point set needs at least one point")
        if pts.shape[1] < 1:
            raise DimensionMismatchError("points must have dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise MebaggError("points must be finite (no NaN/inf)")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[0]:
                raise MebaggError(
                    f"got {len(labels)} labels for {pts.shape[0]} points"
                )
            bad = set(labels) - _VALID_LABELS
            if bad:
                raise MebaggError(f"unknown labels: {sorted(bad)}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def byzantine_count(self) -> int:
        if self.labels is None:
            return 0
        return sum(1 for l in self.labels if l == BYZANTINE)

    def honest_points(self) -> np.ndarray:
        """Ground-truth honest subset; requires labels."""
        if self.labels is None:
            raise MebaggError("point set carries no honest/byz labels")
        mask = np.array([l == HONEST for l in self.labels])
        return self.points[mask]

    def subset(self, indices) -> np.ndarray:
        return self.points[np.asarray(indices, dtype=int)]

    def __len__(self) -> int:
        return self.n


def as_points(data) -> np.ndarray:
    """Coerce a PointSet or array-like into a validated (n, d) float array."""
    if isinstance(data, PointSet):
        return data.points
    try:
        pts = np.asarray(data, dtype=float)
    except ValueError as exc:
        raise DimensionMismatchError(f"points do not form a uniform array: {exc}")
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise EmptyInputError("expected a nonempty sequence of points")
    if not np.all(np.isfinite(pts)):
        raise MebaggError("points must be finite (no NaN/inf)")
    return pts


def as_vector(data, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float vector, optionally checking its dimension."""
    v = np.asarray(data, dtype=float).reshape(-1)
    if v.size == 0:
        raise EmptyInputError("expected a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise MebaggError("vector must be finite (no NaN/inf)")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.size}")
    return v
