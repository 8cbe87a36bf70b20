"""Fréchet means of weighted point masses on the cone, and the shadow-drag experiment.

For a fixed direction ``eta`` the objective ``sum w_i d(x, x_i)^2`` is a
quadratic in the radius ``r`` of ``x``::

    W r^2 - 2 r c(eta) + sum w_i r_i^2,   c(eta) = sum w_i r_i cos(theta_i)

with ``theta_i = min(d_s(eta, dir x_i), pi)``.  Its minimizer is
``max(0, c(eta) / W)``, so the grid oracle only has to scan directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .cone import APEX, PI, Cone, ConeVector
from .errors import HypothesisError, ValidationError


@dataclass(frozen=True)
class WeightedConfiguration:
    points: tuple[ConeVector, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.points:
            raise ValidationError("configuration must be nonempty")
        if len(self.points) != len(self.weights):
            raise ValidationError("one weight per point")
        for w in self.weights:
            if not (math.isfinite(w) and w > 0.0):
                raise ValidationError(f"weights must be positive and finite, got {w!r}")

    @classmethod
    def from_pairs(cls, pairs) -> "WeightedConfiguration":
        pairs = list(pairs)
        return cls(tuple(p for p, _ in pairs), tuple(float(w) for _, w in pairs))

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights)

    @property
    def max_radius(self) -> float:
        return max(p.norm for p in self.points)

    def pairs(self):
        return zip(self.points, self.weights)

    def added(self, V: ConeVector, w: float) -> "WeightedConfiguration":
        return WeightedConfiguration(self.points + (V,), self.weights + (float(w),))

    def diameter(self, X: Cone) -> float:
        return max(X.distance(a, b) for a in self.points for b in self.points)


@dataclass
class SolverReport:
    mean: ConeVector
    objective: float
    iterations: int
    gap: float
    extra: dict = field(default_factory=dict)


def objective(X: Cone, x: ConeVector, cfg: WeightedConfiguration) -> float:
    return math.fsum(w * X.distance(x, p) ** 2 for p, w in cfg.pairs())


def frechet_mean_sturm(X: Cone, cfg: WeightedConfiguration, iterations: int = 20000, seed: int = 0) -> SolverReport:
    """Inductive mean: walk toward each sample by its share of the weight seen so far.

    Samples are visited in epochs, each a fresh random permutation of
    the configuration, so every epoch feeds the exact weights once.
    """
    if iterations < 1:
        raise ValidationError("iterations must be at least 1")
    rng = np.random.default_rng(seed)
    pts, ws = cfg.points, cfg.weights
    n = len(pts)
    order = rng.permutation(n)
    x = pts[int(order[0])]
    seen = ws[int(order[0])]
    k, pos = 1, 1
    while k < iterations:
        if pos == n:
            order = rng.permutation(n)
            pos = 0
        i = int(order[pos])
        pos += 1
        k += 1
        seen += ws[i]
        x = X.geodesic(x, pts[i])(ws[i] / seen)
    F = objective(X, x, cfg)
    return SolverReport(x, F, iterations, math.nan)


def _direction_grid(X: Cone, spacing: float, extra=()):
    """Evenly spaced points on every edge, plus vertices and ``extra`` directions."""
    G = X.graph
    grid: list[tuple[str, np.ndarray]] = []
    for e in G.edges.values():
        n = max(2, math.ceil(e.length / spacing) + 1)
        grid.append((e.id, np.linspace(0.0, e.length, n)))
    by_edge: dict[str, list[float]] = {}
    for p in extra:
        if p.vertex is None:
            by_edge.setdefault(p.edge, []).append(p.offset)
    out = []
    for edge, offs in grid:
        if edge in by_edge:
            offs = np.unique(np.concatenate([offs, by_edge[edge]]))
        out.append((edge, offs))
    return out


def _c_on_edge(X: Cone, live, edge: str):
    G = X.graph

    def c(x: float) -> float:
        offs = np.array([x])
        return float(sum(w * p.norm * np.cos(np.minimum(G.edge_profile(p.dir, edge, offs), PI))[0] for p, w in live))

    return c


def frechet_mean_grid(X: Cone, cfg: WeightedConfiguration, delta: float = 1e-3, extra_directions=(),
                      polish: bool = False) -> SolverReport:
    """Exhaustive search over directions spaced ``delta / max radius`` apart.

    The optimal radius along each direction is solved exactly, so the
    grid only discretizes directions; any point within radius ``R`` is
    then within ``delta / 2`` of a scanned ray.  With ``polish`` the
    winning direction is refined by a bounded scalar search between its
    grid neighbours.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    G = X.graph
    W = cfg.total_weight
    R = max(cfg.max_radius, 1e-300)
    spacing = delta / R
    base = math.fsum(w * p.norm ** 2 for p, w in cfg.pairs())
    samples = [p.dir for p in cfg.points if not p.is_apex] + list(extra_directions)
    live = [(p, w) for p, w in cfg.pairs() if not p.is_apex]
    # c below the rounding level of its terms (e.g. cos(pi/2) sums) counts as zero
    floor = 8.0 * np.finfo(float).eps * math.fsum(w * p.norm for p, w in live)
    best = (floor, APEX)
    scanned = 0
    for edge, offs in _direction_grid(X, spacing, samples):
        c = np.zeros_like(offs)
        for p, w in live:
            theta = np.minimum(G.edge_profile(p.dir, edge, offs), PI)
            c += w * p.norm * np.cos(theta)
        scanned += len(offs)
        k = int(np.argmax(c))
        if c[k] > best[0]:
            best = (float(c[k]), X.vector(G.point(edge, float(offs[k])), float(c[k]) / W))
            bracket = (edge, float(offs[max(k - 1, 0)]), float(offs[min(k + 1, len(offs) - 1)]))
    for v in G.vertices:
        q = G.vertex_point(v)
        cv = math.fsum(w * p.norm * math.cos(X.angle(ConeVector(q, 1.0), p)) for p, w in live)
        scanned += 1
        if cv > best[0]:
            best = (cv, X.vector(q, cv / W))
    c, mean = best
    if polish and not mean.is_apex and mean.dir.vertex is None:
        edge, lo, hi = bracket
        f = _c_on_edge(X, live, edge)
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        if -res.fun > c:
            c = -res.fun
            mean = X.vector(G.point(edge, float(res.x)), c / W)
    F = base - c * c / W if not mean.is_apex else base
    return SolverReport(mean, F, scanned, delta, {"direction_spacing": spacing})


def midpoint_convexity_gap(X: Cone, cfg: WeightedConfiguration, x: ConeVector, y: ConeVector) -> float:
    """``F(mid) - (F(x) + F(y)) / 2``; nonpositive for a convex objective."""
    mid = X.geodesic(x, y)(0.5)
    return objective(X, mid, cfg) - 0.5 * (objective(X, x, cfg) + objective(X, y, cfg))


def shadow_drag_experiment(X: Cone, cfg: WeightedConfiguration, V: ConeVector, w: float, delta: float = 1e-3) -> dict:
    """Add mass ``w`` at a shadow vector ``V`` of the current mean and re-solve.

    The new mean should stay on the ray of the old one, strictly closer
    to the apex.  Raises :class:`HypothesisError` when the old mean is the
    apex, ``V`` is outside its shadow, or ``w |V| >= W |m|`` so that the
    new mean reaches (or passes through) the apex.
    """
    if w < 0:
        raise ValidationError("added weight must be nonnegative")
    old = frechet_mean_grid(X, cfg, delta, polish=True)
    m = old.mean
    if m.is_apex:
        raise HypothesisError("the mean is the apex, so it has no shadow")
    if V.is_apex or X.graph.distance(V.dir, m.dir) < PI:
        raise HypothesisError("added vector is not in the shadow of the mean")
    # past this weight the mean leaves the ray of m through the apex
    if w * V.norm >= cfg.total_weight * m.norm:
        raise HypothesisError("added mass is heavy enough to push the mean through the apex")
    if w == 0.0:
        return {"old_mean": m, "new_mean": m, "deviation": 0.0, "radius_drop": 0.0,
                "resolution": old.extra["direction_spacing"], "passed": True}
    new = frechet_mean_grid(X, cfg.added(V, w), delta, extra_directions=[m.dir], polish=True)
    m2 = new.mean
    if m2.is_apex:
        raise HypothesisError("added mass pushed the mean to the apex")
    resolution = new.extra["direction_spacing"]
    deviation = X.graph.distance(m.dir, m2.dir)
    drop = m.norm - m2.norm
    return {
        "old_mean": m,
        "new_mean": m2,
        "deviation": deviation,
        "radius_drop": drop,
        "resolution": resolution,
        "passed": deviation <= resolution and drop > 0.0,
    }


def drag_radius(cfg_mean_norm: float, total_weight: float, V_norm: float, w: float) -> float:
    """Predicted new radius ``(W |m| - w |V|) / (W + w)`` along the old ray."""
    return max(0.0, (total_weight * cfg_mean_norm - w * V_norm) / (total_weight + w))
