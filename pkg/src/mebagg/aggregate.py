"""Aggregation rules over a full point set (honest + Byzantine, labels unseen).

Every rule maps (points, fault budget t) to an output vector. Rules are
permutation-invariant and equivariant under isometries and positive scaling,
up to solver tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConflictingZeroRadiusError,
    EmptyInputError,
    InvalidFaultBudgetError,
    InvalidParamsError,
    NonConvergenceError,
    ResilienceViolationError,
    TooManySubsetsError,
)
from .geometry import Ball, circumball, meb
from .pointset import as_points

MAX_SUBSETS = 2_000_000

# Instances small enough for the vectorized all-subset MEB path.
_FAST_ENUM_N = 16
_FAST_ENUM_D = 6


@dataclass(frozen=True)
class AggregateResult:
    """Output of one aggregation rule.

    ``achieved_value`` is the min-max rule's worst relative gap (clamped at
    0); other rules leave it unset. Subset/point selections are recorded
    where the rule makes one.
    """

    output: np.ndarray
    rule: str
    achieved_value: float | None = None
    chosen_subset: tuple[int, ...] | None = None
    chosen_index: int | None = None

    def __post_init__(self):
        out = np.asarray(self.output, dtype=float).reshape(-1)
        out.setflags(write=False)
        object.__setattr__(self, "output", out)


@dataclass(frozen=True)
class CandidateBalls:
    """MEBs of all size-(n-t) subsets, in lexicographic subset order.

    ``subsets`` is None when the balls were supplied directly rather than
    derived from a point set.
    """

    balls: tuple[Ball, ...]
    subsets: tuple[tuple[int, ...], ...] | None = None
    n: int | None = None
    t: int | None = None

    @classmethod
    def from_balls(cls, balls) -> "CandidateBalls":
        return cls(balls=tuple(balls))

    def __len__(self) -> int:
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.balls])

    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls])


def _check_budget(n: int, t: int, max_subsets: int) -> int:
    if t < 0 or t >= n:
        raise InvalidFaultBudgetError(f"need 0 <= t < n, got t={t}, n={n}")
    count = math.comb(n, n - t)
    if count > max_subsets:
        raise TooManySubsetsError(
            f"C({n},{n - t}) = {count} subsets exceeds the cap of {max_subsets}"
        )
    return count


def _candidate_balls_enumerated(pts: np.ndarray, t: int) -> list[Ball]:
    n = pts.shape[0]
    return [meb(pts[list(sub)]) for sub in itertools.combinations(range(n), n - t)]


def _candidate_balls_fast(pts: np.ndarray, t: int) -> list[Ball]:
    """All subset MEBs at once via support-set enumeration.

    Any subset's MEB is the smallest circumball whose support points belong
    to the subset and which covers the subset; enumerating every support
    candidate of the full set once lets all C(n, n-t) answers be read off
    with bitmask filtering.
    """
    n, d = pts.shape
    cand_centers, cand_radii, cand_support = [], [], []
    for k in range(1, d + 2):
        for sub in itertools.combinations(range(n), k):
            ball = circumball(pts[list(sub)])
            cand_centers.append(ball.center)
            cand_radii.append(ball.radius)
            cand_support.append(sum(1 << i for i in sub))
    C = np.array(cand_centers)
    R = np.array(cand_radii)
    sup = np.array(cand_support, dtype=np.int64)
    order = np.argsort(R, kind="stable")
    C, R, sup = C[order], R[order], sup[order]

    scale = 1.0 + float(np.abs(pts).max())
    dists = np.linalg.norm(pts[None, :, :] - C[:, None, :], axis=2)
    inside = dists <= (R[:, None] * (1 + 1e-12) + 1e-12 * scale)
    contains = (inside.astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)

    balls = []
    for sub in itertools.combinations(range(n), n - t):
        mask = sum(1 << i for i in sub)
        valid = ((sup & ~mask) == 0) & ((~contains & mask) == 0)
        idx = int(np.argmax(valid))
        if not valid[idx]:  # numerically possible only in pathological cases
            balls.append(meb(pts[list(sub)]))
            continue
        sub_pts = pts[list(sub)]
        radius = float(np.max(np.linalg.norm(sub_pts - C[idx], axis=1)))
        balls.append(Ball(C[idx], radius))
    return balls


def candidate_balls(points, t: int, *, max_subsets: int = MAX_SUBSETS) -> CandidateBalls:
    """MEB of every size-(n-t) subset, keyed by lexicographic subset order."""
    pts = as_points(points)
    n = pts.shape[0]
    _check_budget(n, t, max_subsets)
    if n <= _FAST_ENUM_N and pts.shape[1] <= _FAST_ENUM_D:
        balls = _candidate_balls_fast(pts, t)
    else:
        balls = _candidate_balls_enumerated(pts, t)
    subsets = tuple(itertools.combinations(range(n), n - t))
    return CandidateBalls(balls=tuple(balls), subsets=subsets, n=n, t=t)


# ---------------------------------------------------------------------------
# classical rules


def mean_aggregate(points, t: int = 0) -> AggregateResult:
    """Arithmetic mean of all points (no robustness, baseline)."""
    pts = as_points(points)
    return AggregateResult(output=pts.mean(axis=0), rule="mean")


def coordwise_median(points, t: int = 0) -> AggregateResult:
    """Per-coordinate median; even counts take the midpoint of the two
    central order statistics (unanalyzed baseline)."""
    pts = as_points(points)
    return AggregateResult(output=np.median(pts, axis=0), rule="coordmedian")


def mda(points, t: int, *, max_subsets: int = MAX_SUBSETS) -> AggregateResult:
    """Minimum-diameter averaging: mean of a size-(n-t) subset of smallest
    diameter; ties go to the lexicographically smallest index set."""
    pts = as_points(points)
    n = pts.shape[0]
    _check_budget(n, t, max_subsets)
    m = n - t
    dmat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    best_sub = None
    best_diam = math.inf
    if m == 1:
        best_sub, best_diam = (0,), 0.0
    else:
        pair_rows, pair_cols = np.triu_indices(m, k=1)
        subs = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n), m)),
            dtype=np.int64,
        ).reshape(-1, m)
        diams = dmat[subs[:, pair_rows], subs[:, pair_cols]].max(axis=1)
        idx = int(np.argmin(diams))  # argmin keeps the first (lex-smallest)
        best_sub = tuple(int(i) for i in subs[idx])
        best_diam = float(diams[idx])
    out = pts[list(best_sub)].mean(axis=0)
    return AggregateResult(output=out, rule="mda", chosen_subset=best_sub)


def medoid(points, t: int = 0) -> AggregateResult:
    """Input point minimizing the total distance to all inputs; ties go to
    the lowest index."""
    pts = as_points(points)
    dmat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    sums = dmat.sum(axis=1)
    idx = int(np.argmin(sums))
    return AggregateResult(output=pts[idx], rule="medoid", chosen_index=idx)


def geometric_median(
    points, t: int = 0, *, tol: float = 1e-9, max_iter: int = 100_000
) -> AggregateResult:
    """Point minimizing the sum of Euclidean distances to the inputs.

    Weiszfeld iteration with data-point collision handling: when the iterate
    lands on an input point, a subgradient optimality test either certifies
    it or steps off along the descent direction. Rank-deficient (collinear)
    inputs reduce to the 1-D median with the midpoint convention for even
    counts, matching ``coordwise_median``.
    """
    pts = as_points(points)
    n, d = pts.shape
    if n == 1:
        return AggregateResult(output=pts[0], rule="geomedian")
    scale = 1.0 + float(np.abs(pts).max())

    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[0] <= 1e-14 * scale:
        return AggregateResult(output=pts[0], rule="geomedian")
    if d == 1 or svals[1] <= 1e-12 * svals[0]:
        # collinear: 1-D median, midpoint of the two central order statistics
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        axis = vt[0]
        proj = np.sort(centered @ axis)
        mid = 0.5 * (proj[(n - 1) // 2] + proj[n // 2])
        return AggregateResult(output=pts.mean(axis=0) + mid * axis, rule="geomedian")

    def vertex_step(vertex: np.ndarray):
        """Subgradient test at a data point; None when the point is optimal,
        otherwise one descent step off it (Vardi-Zhang)."""
        dist = np.linalg.norm(pts - vertex, axis=1)
        here = dist <= 1e-12 * scale
        mult = int(here.sum())
        rest = ~here
        resid = ((vertex - pts[rest]) / dist[rest, None]).sum(axis=0)
        rnorm = float(np.linalg.norm(resid))
        if rnorm <= mult + 1e-12:
            return None
        w = 1.0 / dist[rest]
        target = (pts[rest] * w[:, None]).sum(axis=0) / w.sum()
        lam = min(1.0, mult / rnorm)
        return (1.0 - lam) * target + lam * vertex

    y = pts.mean(axis=0)
    for _ in range(max_iter):
        dist = np.linalg.norm(pts - y, axis=1)
        nearest = int(np.argmin(dist))
        if dist[nearest] <= 1e-12 * scale:
            stepped = vertex_step(pts[nearest])
            if stepped is None:
                return AggregateResult(output=pts[nearest], rule="geomedian")
            y_new = stepped
        else:
            w = 1.0 / dist
            y_new = (pts * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(y_new - y) <= tol * scale:
            # settled; if hugging a data point, resolve the vertex exactly
            if dist[nearest] <= 1e-5 * scale:
                stepped = vertex_step(pts[nearest])
                if stepped is None:
                    return AggregateResult(output=pts[nearest], rule="geomedian")
                y = stepped
                continue
            return AggregateResult(output=y_new, rule="geomedian")
        y = y_new
    raise NonConvergenceError(
        f"Weiszfeld iteration did not settle within {max_iter} iterations"
    )


# ---------------------------------------------------------------------------
# min-max relative-distance rule


def _gval(y: np.ndarray, C: np.ndarray, R: np.ndarray) -> float:
    dist = np.linalg.norm(C - y, axis=1)
    return float(np.max((dist - R) / R))


def _kkt_newton(y0, v0, C, R, active, iters: int = 25):
    """Newton on the equalization + stationarity system of an active set."""
    m = len(active)
    dim = y0.size
    Ca, Ra = C[active], R[active]
    eye = np.eye(dim)
    y = y0.copy()
    v = v0
    lam = np.full(m, 1.0 / m)
    for _ in range(iters):
        diff = y - Ca
        dist = np.maximum(np.linalg.norm(diff, axis=1), 1e-300)
        u = diff / dist[:, None]
        grads = u / Ra[:, None]
        F = np.concatenate(
            [(dist - Ra) / Ra - v, lam @ grads, [lam.sum() - 1.0]]
        )
        w = lam / (Ra * dist)
        H = w.sum() * eye - (u * w[:, None]).T @ u
        J = np.zeros((m + dim + 1, dim + 1 + m))
        J[:m, :dim] = grads
        J[:m, dim] = -1.0
        J[m : m + dim, :dim] = H
        J[m : m + dim, dim + 1 :] = grads.T
        J[m + dim, dim + 1 :] = 1.0
        try:
            step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        except np.linalg.LinAlgError:
            break
        y = y + step[:dim]
        v = v + step[dim]
        lam = lam + step[dim + 1 :]
        if not np.all(np.isfinite(y)):
            break
        if np.abs(F).max() < 1e-14 * (1.0 + abs(v)):
            break
    return y, v


def solve_minmax(
    balls,
    *,
    subgradient_iters: int = 200,
    bisection_iters: int = 50,
    projection_sweeps: int = 250,
) -> tuple[np.ndarray, float]:
    """Minimize g(y) = max over balls of (||y - c|| - r)/r.

    Returns (argmin, unclamped value); the value is negative when some point
    lies strictly inside every ball. Three stages: Polyak subgradient
    descent seeded at the centroid of centers (the pairwise-distance bound
    max ||c_i-c_j||/(r_i+r_j) - 1 supplies the step target), bisection on
    the level value with a greedy ball-projection feasibility subsolve, and
    a Newton polish on candidate active sets.

    All radii must be positive; zero-radius candidates are resolved by the
    caller before the solve.
    """
    if isinstance(balls, CandidateBalls):
        C, R = balls.centers(), balls.radii()
    else:
        blist = list(balls)
        C = np.array([b.center for b in blist])
        R = np.array([b.radius for b in blist])
    if C.size == 0:
        raise EmptyInputError("no candidate balls to solve over")
    if np.any(R <= 0):
        raise ConflictingZeroRadiusError(
            "solve_minmax needs strictly positive radii; handle r=0 candidates first"
        )
    # overlapping subsets often share one MEB; duplicates only blur the
    # active-set ranking, so collapse them
    keyed = np.round(np.column_stack([C, R]), 12)
    _, uniq_idx = np.unique(keyed, axis=0, return_index=True)
    if uniq_idx.size < C.shape[0]:
        C = C[np.sort(uniq_idx)]
        R = R[np.sort(uniq_idx)]
    B, dim = C.shape
    if B == 1:
        return C[0].copy(), -1.0

    pair = np.linalg.norm(C[:, None, :] - C[None, :, :], axis=2)
    pair = pair / (R[:, None] + R[None, :]) - 1.0
    np.fill_diagonal(pair, -1.0)
    lower = max(float(pair.max()), -1.0)

    y = C.mean(axis=0)
    y_best = y.copy()
    f_best = _gval(y, C, R)
    for _ in range(subgradient_iters):
        dist = np.linalg.norm(C - y, axis=1)
        ratios = (dist - R) / R
        a = int(np.argmax(ratios))
        f = float(ratios[a])
        if f < f_best:
            f_best, y_best = f, y.copy()
        if f - lower < 1e-15:
            break
        g = (y - C[a]) / (R[a] * max(dist[a], 1e-300))
        y = y - 0.7 * ((f - lower) / float(g @ g)) * g

    lo, hi = lower, f_best
    z_feas = y_best.copy()
    for _ in range(bisection_iters):
        if hi - lo <= max(1e-13, 1e-12 * abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        z = z_feas.copy()
        feasible = False
        prev = math.inf
        stall = 0
        for _ in range(projection_sweeps):
            dist = np.linalg.norm(C - z, axis=1)
            ratios = (dist - R) / R
            w = int(np.argmax(ratios))
            viol = float(ratios[w]) - mid
            if viol <= 1e-12 * (1.0 + abs(mid)):
                feasible = True
                break
            if prev - viol < 1e-16 * (1.0 + abs(mid)):
                stall += 1
                if stall > 40:
                    break
            else:
                stall = 0
            prev = viol
            z = C[w] + (z - C[w]) * (R[w] * (1.0 + mid) / dist[w])
        if feasible:
            hi = mid
            z_feas = z
            fz = _gval(z, C, R)
            if fz < f_best:
                f_best, y_best = fz, z.copy()
        else:
            lo = mid

    # polish regardless of how tight the bisection bracket looks: a miscalled
    # feasibility subsolve can close the bracket around a slightly-high value
    for _ in range(3):
        improved = False
        dist = np.linalg.norm(C - y_best, axis=1)
        order = np.argsort((dist - R) / R)[::-1]
        top = order[: min(dim + 3, B)]
        for m in range(min(dim + 1, len(top)), 1, -1):
            for sub in itertools.combinations(top, m):
                yn, _ = _kkt_newton(y_best, f_best, C, R, np.array(sub))
                if not np.all(np.isfinite(yn)):
                    continue
                fn = _gval(yn, C, R)
                if fn < f_best - 1e-15 * (1.0 + abs(f_best)):
                    f_best, y_best = fn, yn
                    improved = True
        # a polished value meeting the bisection's lower bracket is optimal
        # to working precision
        if not improved or f_best <= lo + 1e-12 * (1.0 + abs(f_best)):
            break
    return y_best, f_best


def minmax_meb(
    points,
    t: int,
    *,
    max_subsets: int = MAX_SUBSETS,
    allow_low_resilience: bool = False,
    balls: CandidateBalls | None = None,
    tol: float = 1e-9,
) -> AggregateResult:
    """Candidate-ball min-max rule.

    If some size-(n-t) subset collapses to a point (zero-radius candidate),
    that center is returned outright. Otherwise the output minimizes the
    worst relative distance over all candidate balls; ``achieved_value`` is
    that worst value clamped at 0, and 1 + achieved_value is the certified
    relaxation factor.

    Requires an honest majority (n > 2t) unless ``allow_low_resilience`` is
    set, in which case the output carries no guarantee.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n <= 2 * t and not allow_low_resilience:
        raise ResilienceViolationError(
            f"minmax rule needs n > 2t for its guarantee (n={n}, t={t}); "
            "pass allow_low_resilience=True to compute anyway"
        )
    if balls is None:
        balls = candidate_balls(pts, t, max_subsets=max_subsets)
    scale = 1.0 + float(np.abs(pts).max())
    radii = balls.radii()
    zero = radii <= 1e-12 * scale
    if zero.any():
        centers = balls.centers()[zero]
        spread = float(np.max(np.linalg.norm(centers - centers[0], axis=1)))
        if spread > tol * scale:
            raise ConflictingZeroRadiusError(
                "multiple zero-radius candidates with distinct centers "
                f"(spread {spread:.3g}); instance violates n > 2t assumptions"
            )
        return AggregateResult(
            output=centers[0], rule="minmax-meb", achieved_value=0.0
        )
    y, value = solve_minmax(balls)
    return AggregateResult(
        output=y, rule="minmax-meb", achieved_value=max(0.0, value)
    )


RULES = {
    "mean": mean_aggregate,
    "coordmedian": coordwise_median,
    "mda": mda,
    "medoid": medoid,
    "geomedian": geometric_median,
    "minmax-meb": minmax_meb,
}


def run_rule(name: str, points, t: int, **kwargs) -> AggregateResult:
    """Dispatch a rule by CLI name."""
    if name not in RULES:
        raise InvalidParamsError(f"unknown rule {name!r}; choose from {sorted(RULES)}")
    return RULES[name](points, t, **kwargs)
