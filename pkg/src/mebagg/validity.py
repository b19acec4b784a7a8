"""Certification of aggregation outputs against geometric validity regions.

Each check compares an achieved quantity against its bound and returns a
Certificate; a witness accompanies failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .aggregate import CandidateBalls, solve_minmax
from .errors import (
    InvalidParamsError,
    ResilienceViolationError,
    ZeroRadiusError,
)
from .geometry import Ball, diameter, dist_to_ball, dist_to_hull, meb, trusted_box
from .pointset import as_points, as_vector

ABS_TOL = 1e-9
HULL_PASS_TOL = 1e-7


@dataclass(frozen=True)
class Certificate:
    """Verdict for one validity condition: pass iff achieved <= bound + tol."""

    condition: str
    achieved: float
    bound: float
    passed: bool
    witness: Any = None

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, np.ndarray):
            w = [float(x) for x in w]
        return {
            "condition": self.condition,
            "achieved": self.achieved,
            "bound": self.bound,
            "pass": self.passed,
            "witness": w,
        }


def _certify(condition: str, achieved: float, bound: float, tol: float, witness) -> Certificate:
    passed = achieved <= bound + tol
    return Certificate(
        condition=condition,
        achieved=float(achieved),
        bound=float(bound),
        passed=bool(passed),
        witness=None if passed else witness,
    )


def phi(y, ball: Ball) -> float:
    """Relative gap to a candidate ball: max(0, ||y-c|| - r)/r."""
    if ball.radius <= 0:
        raise ZeroRadiusError("phi is undefined for a zero-radius ball")
    v = as_vector(y, ball.dim)
    return max(0.0, float(np.linalg.norm(v - ball.center)) - ball.radius) / ball.radius


def check_c_meb(y, honest, c: float, *, tol: float = ABS_TOL) -> Certificate:
    """Is y within c times the honest enclosing-ball radius of its center?

    A zero-radius honest ball degenerates to exact-point semantics: pass iff
    y coincides with the center within the absolute tolerance.
    """
    if c < 1:
        raise InvalidParamsError(f"relaxation factor c must be >= 1, got {c}")
    pts = as_points(honest)
    ball = meb(pts)
    v = as_vector(y, ball.dim)
    dist = float(np.linalg.norm(v - ball.center))
    if ball.radius <= 0:
        scale = 1.0 + float(np.abs(pts).max())
        achieved = 0.0 if dist <= tol * scale else math.inf
        return _certify(f"c-meb(c={c:g})", achieved, c, tol, ball.center)
    achieved = dist / ball.radius
    return _certify(f"c-meb(c={c:g})", achieved, c, tol, ball.center)


def safe_meb_value(y, balls: CandidateBalls, *, tol: float = ABS_TOL) -> float:
    """Worst relative gap of y over all candidate balls; 0 means y lies in
    the exact intersection. Zero-radius candidates demand exact-center
    membership and contribute infinity otherwise."""
    C, R = balls.centers(), balls.radii()
    v = as_vector(y, C.shape[1])
    dist = np.linalg.norm(C - v, axis=1)
    scale = 1.0 + float(np.abs(C).max())
    value = 0.0
    zero = R <= 1e-12 * scale
    if zero.any() and np.any(dist[zero] > tol * scale):
        return math.inf
    nz = ~zero
    if nz.any():
        value = float(np.max(np.maximum(0.0, dist[nz] - R[nz]) / R[nz]))
    return value


def safe_meb_empty(balls: CandidateBalls, *, tol: float = 1e-9) -> tuple[bool, float]:
    """Decide emptiness of the exact candidate-ball intersection.

    Returns (empty, min-max value): a strictly positive min-max value means
    no point lies in every candidate ball.
    """
    R = balls.radii()
    C = balls.centers()
    scale = 1.0 + float(np.abs(C).max())
    zero = R <= 1e-12 * scale
    if zero.any():
        anchor = C[zero][0]
        value = safe_meb_value(anchor, balls)
        return value > tol, value
    _, value = solve_minmax(balls)
    value = max(0.0, value)
    return value > tol, value


def check_convex(y, honest, *, tol_hull: float = HULL_PASS_TOL) -> Certificate:
    """Is y inside the convex hull of the honest points?"""
    pts = as_points(honest)
    v = as_vector(y, pts.shape[1])
    achieved, witness = dist_to_hull(v, pts, return_witness=True)
    return _certify("convex", achieved, 0.0, tol_hull, witness)


def check_box(y, honest, *, tol: float = ABS_TOL) -> Certificate:
    """Is y inside the coordinate-wise bounding box of the honest points?"""
    pts = as_points(honest)
    box = trusted_box(pts)
    v = as_vector(y, box.dim)
    excursions = np.maximum(box.lo - v, v - box.hi)
    worst = int(np.argmax(excursions))
    achieved = max(0.0, float(excursions[worst]))
    return _certify("box", achieved, 0.0, tol, worst)


def check_relaxed_convex(y, honest, delta: float, *, tol: float = ABS_TOL) -> Certificate:
    """Is y within distance delta of every point of the honest hull?

    The hull maximum of the distance is attained at a vertex, so it equals
    the maximum over the honest points themselves.
    """
    if delta < 0:
        raise InvalidParamsError(f"delta must be >= 0, got {delta}")
    pts = as_points(honest)
    v = as_vector(y, pts.shape[1])
    dists = np.linalg.norm(pts - v, axis=1)
    worst = int(np.argmax(dists))
    return _certify(
        f"relaxed-convex(delta={delta:g})", float(dists[worst]), delta, tol, pts[worst]
    )


def check_bias_bound(y, honest, c: float, *, tol: float = ABS_TOL) -> Certificate:
    """Deviation from the honest mean against the (c+1) * radius budget."""
    pts = as_points(honest)
    v = as_vector(y, pts.shape[1])
    ball = meb(pts)
    achieved = float(np.linalg.norm(v - pts.mean(axis=0)))
    bound = (c + 1.0) * ball.radius
    return _certify(f"bias(c={c:g})", achieved, bound, tol, pts.mean(axis=0))


_BOUND_RULES = ("mda", "medoid", "geomedian", "minmax-meb")


def theoretical_bound(rule: str, n: int, t: int, d: int | None = None) -> float:
    """Proven worst-case relaxation factor of a rule at (n, t, d).

    mda: 1 + 2t/(n-t); medoid: (3n-2t)/(n-2t); geomedian: 2(n-t)/(n-2t);
    minmax-meb: 1 + (k-1)/(k+1+sqrt(2(k+1)k)) with k = min(d, C(n, n-t)-1).
    """
    if rule not in _BOUND_RULES:
        raise InvalidParamsError(
            f"no proven bound for rule {rule!r}; choose from {_BOUND_RULES}"
        )
    if t < 0 or t >= n:
        raise InvalidParamsError(f"need 0 <= t < n, got n={n}, t={t}")
    if rule == "mda":
        return 1.0 + 2.0 * t / (n - t)
    if n <= 2 * t:
        raise ResilienceViolationError(
            f"{rule} guarantee needs an honest majority (n > 2t); got n={n}, t={t}"
        )
    if rule == "medoid":
        return (3.0 * n - 2.0 * t) / (n - 2.0 * t)
    if rule == "geomedian":
        return 2.0 * (n - t) / (n - 2.0 * t)
    if d is None:
        raise InvalidParamsError("minmax-meb bound needs the dimension d")
    k = min(d, math.comb(n, n - t) - 1)
    if k < 1:
        return 1.0
    return 1.0 + (k - 1.0) / (k + 1.0 + math.sqrt(2.0 * (k + 1.0) * k))


@dataclass(frozen=True)
class RelationReport:
    """Outcome of a sampled implication between two validity regions."""

    relation: str
    point: np.ndarray
    achieved: float
    bound: float
    passed: bool
    detail: dict = field(default_factory=dict)


RELATIONS = (
    "convex-implies-meb",
    "box-implies-sqrtd-meb",
    "cmeb-implies-relaxed-convex",
    "relaxed-convex-implies-meb",
)


def _sample_hull_point(rng: np.random.Generator, pts: np.ndarray) -> np.ndarray:
    w = rng.dirichlet(np.ones(pts.shape[0]))
    return w @ pts


def _sample_in_ball(rng: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    d = center.size
    direction = rng.normal(size=d)
    norm = np.linalg.norm(direction)
    if norm == 0:
        return center.copy()
    direction /= norm
    return center + direction * radius * rng.random() ** (1.0 / d)


def relation_check(
    relation: str,
    honest,
    y=None,
    *,
    c: float = 2.0,
    delta: float | None = None,
    rng: np.random.Generator | None = None,
    tol: float = 1e-6,
) -> RelationReport:
    """Sample (or accept) a point satisfying one validity region and certify
    the region it implies, at the proven factor.

    convex-implies-meb: hull points lie in the enclosing ball.
    box-implies-sqrtd-meb: box points lie within sqrt(d) radii of the center.
    cmeb-implies-relaxed-convex: points within c radii of the center are
        within (c+1) radii of every honest point.
    relaxed-convex-implies-meb: points within delta of the hull lie within
        the (1 + 2*delta/diam) inflated ball; skipped if the honest set is a
        single location.
    """
    if relation not in RELATIONS:
        raise InvalidParamsError(f"unknown relation {relation!r}; choose from {RELATIONS}")
    pts = as_points(honest)
    if rng is None:
        rng = np.random.default_rng(0)
    ball = meb(pts)
    d = pts.shape[1]

    if relation == "convex-implies-meb":
        v = _sample_hull_point(rng, pts) if y is None else as_vector(y, d)
        achieved = dist_to_ball(v, ball)
        return RelationReport(relation, v, achieved, 0.0, achieved <= tol)

    if relation == "box-implies-sqrtd-meb":
        box = trusted_box(pts)
        if y is None:
            v = box.lo + rng.random(d) * (box.hi - box.lo)
        else:
            v = as_vector(y, d)
        dist = float(np.linalg.norm(v - ball.center))
        bound = math.sqrt(d) * ball.radius
        return RelationReport(relation, v, dist, bound, dist <= bound + tol)

    if relation == "cmeb-implies-relaxed-convex":
        v = _sample_in_ball(rng, ball.center, c * ball.radius) if y is None else as_vector(y, d)
        achieved = float(np.max(np.linalg.norm(pts - v, axis=1)))
        bound = (c + 1.0) * ball.radius
        return RelationReport(
            relation, v, achieved, bound, achieved <= bound + tol, {"c": c}
        )

    # relaxed-convex-implies-meb
    diam = diameter(pts)
    if delta is None:
        delta = 0.5 * max(diam, 1.0)
    if diam <= 0:
        return RelationReport(relation, ball.center, 0.0, 0.0, True, {"skipped": "diam=0"})
    if y is None:
        base = _sample_hull_point(rng, pts)
        v = _sample_in_ball(rng, base, delta)
    else:
        v = as_vector(y, d)
    dist = float(np.linalg.norm(v - ball.center))
    bound = (1.0 + 2.0 * delta / diam) * ball.radius
    return RelationReport(
        relation, v, dist, bound, dist <= bound + tol, {"delta": delta, "diam": diam}
    )
