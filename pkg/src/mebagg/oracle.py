"""Brute-force reference implementations used to cross-check the solvers.

These deliberately avoid the production code paths: the enclosing ball is
found by exhaustive support enumeration and the min-max value by dense grid
search, so solver bugs cannot hide behind shared machinery.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .aggregate import CandidateBalls, candidate_balls
from .errors import InstanceTooLargeError, MebaggError
from .geometry import Ball, circumball
from .pointset import as_points, as_vector

BRUTEFORCE_MAX_N = 12
BRUTEFORCE_MAX_D = 4
GRID_MAX_D = 3
GRID_MAX_CELLS = 100_000_000


def meb_bruteforce(points) -> Ball:
    """Smallest enclosing ball by trying every support set of size <= d+1.

    The minimum-radius circumball that contains all points is the MEB, since
    the true MEB is the circumball of its own support set.
    """
    pts = as_points(points)
    n, d = pts.shape
    if n > BRUTEFORCE_MAX_N or d > BRUTEFORCE_MAX_D:
        raise InstanceTooLargeError(
            f"brute-force ball search capped at n<={BRUTEFORCE_MAX_N}, "
            f"d<={BRUTEFORCE_MAX_D}; got n={n}, d={d}"
        )
    scale = 1.0 + float(np.abs(pts).max())
    best: Ball | None = None
    for k in range(1, min(n, d + 1) + 1):
        for sub in itertools.combinations(range(n), k):
            sup = pts[list(sub)]
            if k >= 3:
                # skip affinely dependent supports; a smaller support covers them
                if np.linalg.matrix_rank(sup[1:] - sup[0], tol=1e-10 * scale) < k - 1:
                    continue
            ball = circumball(sup)
            dists = np.linalg.norm(pts - ball.center, axis=1)
            if np.all(dists <= ball.radius * (1 + 1e-10) + 1e-12 * scale):
                realized = float(dists.max())
                if best is None or realized < best.radius:
                    best = Ball(ball.center, realized)
    assert best is not None  # k=1..: singletons always exist; full cover found
    return best


def _ball_arrays(balls) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(balls, CandidateBalls):
        return balls.centers(), balls.radii()
    blist = list(balls)
    return (
        np.array([b.center for b in blist]),
        np.array([b.radius for b in blist]),
    )


def grid_minmax(
    balls,
    resolution: int = 200,
    *,
    zooms: int = 12,
    chunk: int = 200_000,
) -> tuple[np.ndarray, float]:
    """Dense grid minimization of max((||y-c||-r)/r) with local zoom passes.

    Searches the bounding box of the candidate centers inflated by the
    largest radius, then repeatedly re-grids around the incumbent. Returns
    (best point, unclamped value).
    """
    C, R = _ball_arrays(balls)
    B, d = C.shape
    if d > GRID_MAX_D:
        raise InstanceTooLargeError(f"grid search capped at d<={GRID_MAX_D}, got d={d}")
    if resolution < 2:
        raise MebaggError("resolution must be >= 2")
    if resolution**d > GRID_MAX_CELLS:
        raise InstanceTooLargeError(
            f"{resolution}^{d} grid cells exceed the cap of {GRID_MAX_CELLS}"
        )
    if np.any(R <= 0):
        raise MebaggError("grid oracle needs strictly positive radii")
    lo = C.min(axis=0) - R.max()
    hi = C.max(axis=0) + R.max()
    best_pt: np.ndarray | None = None
    best_val = math.inf
    for _ in range(zooms):
        axes = [np.linspace(lo[j], hi[j], resolution) for j in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        for i in range(0, grid.shape[0], chunk):
            block = grid[i : i + chunk]
            dist = np.linalg.norm(block[:, None, :] - C[None, :, :], axis=2)
            vals = ((dist - R) / R).max(axis=1)
            j = int(np.argmin(vals))
            if vals[j] < best_val:
                best_val = float(vals[j])
                best_pt = block[j].copy()
        span = (hi - lo) / (resolution - 1) * 3.0
        lo = best_pt - span
        hi = best_pt + span
    return best_pt, best_val


def exhaustive_factor(
    points,
    t: int,
    *,
    y=None,
    rule=None,
    balls: CandidateBalls | None = None,
    tol: float = 1e-9,
) -> float:
    """Worst relaxation factor of an output over every honest designation.

    Every size-(n-t) subset is treated as the possible honest set; the
    factor is max over designations of ||y - center||/radius of the
    designation's MEB. Zero-radius designations are skipped unless the
    output misses their center, which scores infinity.

    Provide either an output vector ``y`` or a ``rule`` callable taking
    (points, t); precomputed ``balls`` are reused when given.
    """
    pts = as_points(points)
    if y is None:
        if rule is None:
            raise MebaggError("exhaustive_factor needs either y or rule")
        y = rule(pts, t).output
    vec = as_vector(y, pts.shape[1])
    if balls is None:
        balls = candidate_balls(pts, t)
    C, R = balls.centers(), balls.radii()
    scale = 1.0 + float(np.abs(pts).max())
    dist = np.linalg.norm(C - vec, axis=1)
    zero = R <= 1e-12 * scale
    factor = 0.0
    if zero.any():
        if np.any(dist[zero] > tol * scale):
            return math.inf
    nz = ~zero
    if nz.any():
        factor = float(np.max(dist[nz] / R[nz]))
    return factor


def worst_designation(
    points, t: int, y, *, balls: CandidateBalls | None = None
) -> tuple[float, tuple[int, ...] | None]:
    """Like exhaustive_factor but also reports the worst subset."""
    pts = as_points(points)
    vec = as_vector(y, pts.shape[1])
    if balls is None:
        balls = candidate_balls(pts, t)
    C, R = balls.centers(), balls.radii()
    scale = 1.0 + float(np.abs(pts).max())
    dist = np.linalg.norm(C - vec, axis=1)
    ratios = np.where(
        R > 1e-12 * scale,
        dist / np.maximum(R, 1e-300),
        np.where(dist > 1e-9 * scale, math.inf, 0.0),
    )
    idx = int(np.argmax(ratios))
    subset = balls.subsets[idx] if balls.subsets is not None else None
    return float(ratios[idx]), subset
