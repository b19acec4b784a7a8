"""Instance generators: adversarial constructions and random test beds.

Each generator returns a ScenarioInstance carrying the point set, any
candidate honest designations with their reference balls, and the values a
verifier should reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .aggregate import AggregateResult, CandidateBalls, RULES
from .errors import InvalidParamsError, MebaggError
from .geometry import Ball, meb
from .pointset import BYZANTINE, HONEST, PointSet

ATTACK_STARTS = 200
ATTACK_DESCENT_ROUNDS = 8


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameterized description of a generated instance."""

    kind: str
    params: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, payload: dict) -> "ScenarioSpec":
        if "kind" not in payload:
            raise InvalidParamsError('scenario config needs a "kind" field')
        return cls(kind=payload["kind"], params=dict(payload.get("params", {})))


@dataclass(frozen=True)
class ScenarioInstance:
    spec: ScenarioSpec
    points: PointSet
    designations: dict[str, tuple[int, ...]] | None = None
    balls: dict[str, Ball] | None = None
    reference: dict = field(default_factory=dict)

    def designation_points(self, name: str) -> np.ndarray:
        if not self.designations or name not in self.designations:
            raise InvalidParamsError(f"no designation named {name!r}")
        return self.points.subset(self.designations[name])


# ---------------------------------------------------------------------------
# emptiness construction


def lower_bound_geometry(dim: int) -> dict:
    """Ball layout for the intersection-emptiness construction in ``dim``
    dimensions: dim unit balls meeting in a single point plus one large ball
    pinned to the pairwise meeting points, chosen to exclude the common
    point."""
    D = dim
    if D < 2:
        raise InvalidParamsError("construction needs dimension >= 2")
    q = np.full(D, 1.0 / math.sqrt(D * (D - 1)))
    unit_centers = [math.sqrt(D / (D - 1)) * np.eye(D)[i] for i in range(D)]
    meet = [
        ((math.sqrt(D) + 1) / (D - 1) ** 1.5) * (np.ones(D) - np.eye(D)[i])
        for i in range(D)
    ]
    antipodes = [2.0 * unit_centers[i] - q for i in range(D)]

    axis = np.ones(D) / math.sqrt(D)
    beta_meet = float(meet[0] @ axis)
    rho_sq = float(meet[0] @ meet[0]) - beta_meet**2

    def gap(yval: float) -> float:
        beta_c = yval * math.sqrt(D)
        radius = math.sqrt((beta_c - beta_meet) ** 2 + rho_sq)
        return beta_meet - (beta_c - radius)

    # shrink the big ball's bulge past the meeting hyperplane below 1/(4D),
    # comfortably inside the 1/(2D) margin that keeps q outside
    target = 1.0 / (4 * D)
    y_lo = beta_meet / math.sqrt(D) + 0.1
    y_hi = y_lo
    while gap(y_hi) > target:
        y_hi *= 2.0
    for _ in range(200):
        y_mid = 0.5 * (y_lo + y_hi)
        if gap(y_mid) > target:
            y_lo = y_mid
        else:
            y_hi = y_mid
    y_val = y_hi
    beta_c = y_val * math.sqrt(D)
    big_radius = math.sqrt((beta_c - beta_meet) ** 2 + rho_sq)
    far = (y_val + big_radius / math.sqrt(D)) * np.ones(D)
    big_center = y_val * np.ones(D)
    assert np.linalg.norm(big_center - q) > big_radius  # q stays excluded
    return {
        "q": q,
        "unit_centers": unit_centers,
        "meet_points": meet,
        "antipodes": antipodes,
        "big_center": big_center,
        "big_radius": big_radius,
        "far_point": far,
        "gap": gap(y_val),
    }


def lower_bound_construction(d: int, t: int) -> ScenarioInstance:
    """Point set whose candidate enclosing balls have an empty intersection.

    dim unit balls share exactly one point q; a large ball through the
    pairwise meeting points excludes q, so the dim+1 balls cannot intersect.
    Each ball is pinned as the enclosing ball of a size-(n-t) subset by a
    diameter pair (q with its antipode, or the meeting ring with the far
    point). The construction realizes every ball as a candidate when
    t >= dim+1; for smaller t it drops to dim_eff = t-1 dimensions, embedded
    in R^d, which certifies emptiness down to t = 3. Below that the layout
    is still emitted but no emptiness claim attaches.
    """
    if d < 2:
        raise InvalidParamsError(f"need d >= 2, got {d}")
    if t < d - 1:
        raise InvalidParamsError(f"need t >= d - 1, got d={d}, t={t}")
    dim_eff = d if t >= d + 1 else min(d, max(2, t - 1))
    mult = max(1, t - dim_eff)
    geo = lower_bound_geometry(dim_eff)

    rows: list[np.ndarray] = []
    rows.extend([geo["q"]] * mult)
    for i in range(dim_eff):
        rows.extend([geo["meet_points"][i]] * mult)
    rows.extend(geo["antipodes"])
    rows.append(geo["far_point"])
    pts = np.array(rows)
    if dim_eff < d:
        pts = np.hstack([pts, np.zeros((pts.shape[0], d - dim_eff))])

    def embed(v: np.ndarray) -> np.ndarray:
        return np.concatenate([v, np.zeros(d - dim_eff)]) if dim_eff < d else v

    balls = {
        f"unit_{i}": Ball(embed(geo["unit_centers"][i]), 1.0) for i in range(dim_eff)
    }
    balls["big"] = Ball(embed(geo["big_center"]), geo["big_radius"])
    n = pts.shape[0]
    certified = t >= dim_eff + 1
    spec = ScenarioSpec("lower-bound", {"d": d, "t": t})
    return ScenarioInstance(
        spec=spec,
        points=PointSet(pts),
        balls=balls,
        reference={
            "dim_eff": dim_eff,
            "multiplicity": mult,
            "n": n,
            "q": embed(geo["q"]),
            "gap": geo["gap"],
            "emptiness_certified": certified,
        },
    )


# ---------------------------------------------------------------------------
# impossibility instances for specific rules


def _cluster_rows(spec: list[tuple[tuple[float, float], int]]) -> np.ndarray:
    rows = []
    for loc, count in spec:
        rows.extend([loc] * count)
    return np.array(rows, dtype=float)


def _three_ball_designations(sizes: dict[str, int]) -> dict[str, tuple[int, ...]]:
    order = ["A", "D", "B", "C", "E", "F"]
    offsets = {}
    start = 0
    for name in order:
        offsets[name] = range(start, start + sizes[name])
        start += sizes[name]

    def span(*names: str) -> tuple[int, ...]:
        idx: list[int] = []
        for nm in names:
            idx.extend(offsets[nm])
        return tuple(idx)

    return {
        "ABE": span("A", "B", "E"),
        "ECD": span("E", "C", "D"),
        "BCF": span("B", "C", "F"),
    }


def medoid_counterexample(t: int, x: float) -> ScenarioInstance:
    """Two-cluster street scene defeating 2-relaxed ball validity of the
    medoid: n = 2t+1 points in six clusters, with three equally plausible
    honest designations whose enclosing balls disagree.

    The medoid lands in one of the top clusters (1,1)/(3,1) once the
    cluster weights dominate the middle pair; for small t the middle point
    (2,0) still wins the distance-sum race (see the regression tests for
    the crossover).
    """
    if t < 4 or t % 2 != 0:
        raise InvalidParamsError(f"t must be an even integer >= 4, got {t}")
    sizes = {"A": t // 2 - 1, "D": t // 2 - 1, "B": t // 2, "C": t // 2, "E": 2, "F": 1}
    pts = _cluster_rows(
        [
            ((0.0, 0.0), sizes["A"]),
            ((4.0, 0.0), sizes["D"]),
            ((1.0, 1.0), sizes["B"]),
            ((3.0, 1.0), sizes["C"]),
            ((2.0, 0.0), sizes["E"]),
            ((2.0, x), sizes["F"]),
        ]
    )
    designations = _three_ball_designations(sizes)
    balls = {name: meb(pts[list(idx)]) for name, idx in designations.items()}
    spec = ScenarioSpec("medoid-ce", {"t": t, "x": x})
    return ScenarioInstance(
        spec=spec,
        points=PointSet(pts),
        designations=designations,
        balls=balls,
        reference={"n": pts.shape[0], "expected_outputs": [(1.0, 1.0), (3.0, 1.0)]},
    )


def gm_impossibility_instance(t: int, x: float = 10.0) -> ScenarioInstance:
    """n = 3t-3 instance whose geometric median approaches the equal-weights
    balance point of the three big clusters, at distance ~1.0857 from the
    nearest designation ball center."""
    if t < 5:
        raise InvalidParamsError(f"t must be >= 5, got {t}")
    sizes = {"A": 1, "D": 1, "B": t - 2, "C": t - 2, "E": t - 2, "F": 1}
    pts = _cluster_rows(
        [
            ((0.0, 0.0), sizes["A"]),
            ((4.0, 0.0), sizes["D"]),
            ((1.0, 1.0), sizes["B"]),
            ((3.0, 1.0), sizes["C"]),
            ((2.0, 0.0), sizes["E"]),
            ((2.0, x), sizes["F"]),
        ]
    )
    designations = _three_ball_designations(sizes)
    balls = {name: meb(pts[list(idx)]) for name, idx in designations.items()}
    balance = np.array([2.0, 1.0 - 1.0 / math.sqrt(3.0)])
    spec = ScenarioSpec("gm-impossibility", {"t": t, "x": x})
    return ScenarioInstance(
        spec=spec,
        points=PointSet(pts),
        designations=designations,
        balls=balls,
        reference={
            "n": pts.shape[0],
            "balance_point": balance,
            "distance_to_unit_center": math.sqrt(7.0 / 3.0 - 2.0 / math.sqrt(3.0)),
        },
    )


def gm_convex_violation_instance(t: int) -> ScenarioInstance:
    """n = 3t+1 instance whose geometric median leaves the honest hull: the
    hull of any origin-plus-one-side designation is a segment, but the
    median sits strictly inside the triangle."""
    if t < 2:
        raise InvalidParamsError(f"t must be >= 2, got {t}")
    pts = _cluster_rows([((0.0, 0.0), t + 1), ((1.0, 0.0), t), ((0.0, 1.0), t)])
    origin = tuple(range(t + 1))
    right = tuple(range(t + 1, 2 * t + 1))
    top = tuple(range(2 * t + 1, 3 * t + 1))
    designations = {
        "origin-right": origin + right,
        "origin-top": origin + top,
    }
    spec = ScenarioSpec("gm-convex", {"t": t})
    return ScenarioInstance(
        spec=spec,
        points=PointSet(pts),
        designations=designations,
        reference={"n": pts.shape[0]},
    )


def tangent_unit_balls(k: int) -> CandidateBalls:
    """k+1 mutually tangent unit balls in k dimensions: centers are the
    vertices of a regular simplex with edge 2, centered at the origin."""
    if k < 2:
        raise InvalidParamsError(f"k must be >= 2, got {k}")
    lifted = np.eye(k + 1) * math.sqrt(2.0)
    lifted -= lifted.mean(axis=0)
    _, _, vt = np.linalg.svd(np.ones((1, k + 1)))
    centers = lifted @ vt[1:].T
    return CandidateBalls.from_balls(Ball(c, 1.0) for c in centers)


# ---------------------------------------------------------------------------
# random instances and attacks


def _sample_in_ball(rng: np.random.Generator, d: int, radius: float) -> np.ndarray:
    direction = rng.normal(size=d)
    norm = np.linalg.norm(direction)
    if norm == 0:
        return np.zeros(d)
    return direction / norm * radius * rng.random() ** (1.0 / d)


def _byz_uniform_far(rng, t, d, spread):
    return np.array(
        [_sample_in_ball(rng, d, 1.0) * rng.uniform(2.0, 6.0) * spread for _ in range(t)]
    )


def _byz_cluster(rng, t, d, spread):
    direction = rng.normal(size=d)
    direction /= max(np.linalg.norm(direction), 1e-12)
    anchor = direction * rng.uniform(2.0, 5.0) * spread
    return anchor + rng.normal(size=(t, d)) * 1e-2 * spread


STRATEGIES = ("uniform-far", "cluster", "worst-case")


def random_instance(
    n: int,
    t: int,
    d: int,
    spread: float = 1.0,
    seed: int = 0,
    *,
    strategy: str = "uniform-far",
    rule: str = "medoid",
    attack_starts: int = ATTACK_STARTS,
) -> ScenarioInstance:
    """Seeded random instance: n-t honest points i.i.d. in a ball of radius
    ``spread`` plus t Byzantine points placed by the chosen strategy.

    ``worst-case`` searches Byzantine placements maximizing the named
    rule's relaxation factor against the honest ball (random multi-start
    plus per-coordinate descent).
    """
    if n < 1 or t < 0 or t >= n or d < 1 or spread <= 0:
        raise InvalidParamsError(
            f"invalid instance parameters n={n}, t={t}, d={d}, spread={spread}"
        )
    if strategy not in STRATEGIES:
        raise InvalidParamsError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    rng = np.random.default_rng(seed)
    honest = np.array([_sample_in_ball(rng, d, spread) for _ in range(n - t)])
    if t == 0:
        byz = np.zeros((0, d))
    elif strategy == "uniform-far":
        byz = _byz_uniform_far(rng, t, d, spread)
    elif strategy == "cluster":
        byz = _byz_cluster(rng, t, d, spread)
    else:
        byz = _attack_search(rng, honest, t, spread, rule, attack_starts)
    pts = np.vstack([honest, byz]) if t else honest
    labels = (HONEST,) * (n - t) + (BYZANTINE,) * t
    spec = ScenarioSpec(
        "random",
        {"n": n, "t": t, "d": d, "spread": spread, "seed": seed, "strategy": strategy},
    )
    return ScenarioInstance(spec=spec, points=PointSet(pts, labels))


def _attack_factor(rule_fn, honest: np.ndarray, byz: np.ndarray, honest_ball: Ball) -> float:
    pts = np.vstack([honest, byz])
    try:
        result: AggregateResult = rule_fn(pts, byz.shape[0])
    except MebaggError:
        return -math.inf
    dist = float(np.linalg.norm(result.output - honest_ball.center))
    return dist / max(honest_ball.radius, 1e-12)


def _attack_search(
    rng: np.random.Generator,
    honest: np.ndarray,
    t: int,
    spread: float,
    rule: str,
    starts: int,
) -> np.ndarray:
    if rule not in RULES:
        raise InvalidParamsError(f"unknown rule {rule!r} for attack search")
    rule_fn = RULES[rule]
    d = honest.shape[1]
    ball = meb(honest)

    def rim_cluster() -> np.ndarray:
        # hug the honest ball surface just outside a support point, where a
        # colluding cluster can win selection-style rules while sitting
        # outside the ball
        if rng.random() < 0.5:
            support = honest[int(np.argmax(np.linalg.norm(honest - ball.center, axis=1)))]
            direction = support - ball.center
        else:
            direction = rng.normal(size=d)
        norm = np.linalg.norm(direction)
        direction = direction / norm if norm > 0 else np.eye(d)[0]
        anchor = ball.center + direction * ball.radius * (1.0 + rng.uniform(0.02, 0.9))
        return anchor + rng.normal(size=(t, d)) * 1e-3 * max(ball.radius, 1e-9)

    best_byz = rim_cluster()
    best = _attack_factor(rule_fn, honest, best_byz, ball)
    for _ in range(starts):
        u = rng.random()
        if u < 0.5:
            cand = rim_cluster()
        elif u < 0.75:
            cand = _byz_cluster(rng, t, d, spread)
        else:
            cand = _byz_uniform_far(rng, t, d, spread)
        val = _attack_factor(rule_fn, honest, cand, ball)
        if val > best:
            best, best_byz = val, cand
    # per-coordinate descent around the best start
    step = spread
    byz = best_byz.copy()
    for _ in range(ATTACK_DESCENT_ROUNDS):
        improved = False
        for i in range(t):
            for j in range(d):
                for sign in (1.0, -1.0):
                    cand = byz.copy()
                    cand[i, j] += sign * step
                    val = _attack_factor(rule_fn, honest, cand, ball)
                    if val > best:
                        best, byz = val, cand
                        improved = True
        if not improved:
            step *= 0.5
    return byz


GENERATORS = {
    "lower-bound": lower_bound_construction,
    "medoid-ce": medoid_counterexample,
    "gm-impossibility": gm_impossibility_instance,
    "gm-convex": gm_convex_violation_instance,
    "random": random_instance,
}
