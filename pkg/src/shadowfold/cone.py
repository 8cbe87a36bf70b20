"""The Euclidean cone over a metric graph.

Points are :class:`ConeVector` pairs ``(direction, radius)``.  The cone
metric is the law-of-cosines metric built from the capped angle
``min(d_s, pi)`` between directions, so the cone over a graph of girth at
least ``2*pi`` is CAT(0).  In this conical model the space and its
tangent cone at the apex coincide, hence :meth:`Cone.log_apex` is the
identity on representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UndefinedAngleError, ValidationError
from .metric_graph import GraphPath, GraphPoint, MetricGraph

PI = math.pi
STRAIGHT = "straight-in-flat-sector"
THROUGH_APEX = "through-apex"


@dataclass(frozen=True)
class ConeVector:
    """A point of the cone; ``norm == 0`` is the apex (``dir`` is then None)."""

    dir: GraphPoint | None
    norm: float

    @property
    def is_apex(self) -> bool:
        return self.norm == 0.0

    def scaled(self, c: float) -> "ConeVector":
        if c < 0:
            raise ValidationError("cone vectors scale by nonnegative factors only")
        if c == 0 or self.is_apex:
            return APEX
        return ConeVector(self.dir, c * self.norm)

    def unit(self) -> "ConeVector":
        if self.is_apex:
            raise UndefinedAngleError("the apex has no direction")
        return ConeVector(self.dir, 1.0)

    def __str__(self) -> str:
        return "O" if self.is_apex else f"{self.dir}@{self.norm!r}"


APEX = ConeVector(None, 0.0)


@dataclass(frozen=True)
class ConeGeodesic:
    """Constant-speed geodesic ``s -> point`` for ``s`` in ``[0, 1]``."""

    start: ConeVector
    end: ConeVector
    kind: str
    theta: float
    length: float
    path: GraphPath | None = field(default=None, repr=False)

    def __call__(self, s: float) -> ConeVector:
        s = min(max(float(s), 0.0), 1.0)
        V, W = self.start, self.end
        if self.kind == THROUGH_APEX:
            x = s * (V.norm + W.norm)
            if x < V.norm:
                return ConeVector(V.dir, V.norm - x)
            if x == V.norm:
                return APEX
            return ConeVector(W.dir, x - V.norm)
        if s == 0.0:
            return V
        if s == 1.0:
            return W
        rv, rw = V.norm, W.norm
        px = (1.0 - s) * rv + s * rw * math.cos(self.theta)
        py = s * rw * math.sin(self.theta)
        r = math.hypot(px, py)
        if r == 0.0:
            return APEX
        alpha = min(max(math.atan2(py, px), 0.0), self.theta)
        return ConeVector(self.path.point_at(alpha), r)

    def sample(self, n: int) -> list[ConeVector]:
        return [self(s) for s in np.linspace(0.0, 1.0, n)]


class Cone:
    """Euclidean cone ``C(G)`` over a metric graph ``G``."""

    def __init__(self, graph: MetricGraph):
        self.graph = graph
        self.apex = APEX

    def __repr__(self):
        return f"Cone({self.graph!r})"

    def vector(self, direction: GraphPoint, radius: float) -> ConeVector:
        radius = float(radius)
        if not (math.isfinite(radius) and radius >= 0.0):
            raise ValidationError(f"radius must be finite and nonnegative, got {radius!r}")
        if radius == 0.0:
            return APEX
        return ConeVector(self.graph.canonical(direction), radius)

    def random_vector(self, rng: np.random.Generator, rmax: float = 2.0, rmin: float = 0.0) -> ConeVector:
        return self.vector(self.graph.sample_point(rng), float(rng.uniform(rmin, rmax)))

    # ------------------------------------------------------------------
    # metric

    def direction_distance(self, V: ConeVector, W: ConeVector) -> float:
        """Raw angular-metric distance ``d_s`` between directions (may exceed pi)."""
        if V.is_apex or W.is_apex:
            raise UndefinedAngleError("the apex has no direction")
        return self.graph.distance(V.dir, W.dir)

    def angle(self, V: ConeVector, W: ConeVector) -> float:
        """Angle at the apex, ``min(d_s, pi)``."""
        return min(self.direction_distance(V, W), PI)

    def inner(self, V: ConeVector, W: ConeVector) -> float:
        if V.is_apex or W.is_apex:
            return 0.0
        theta = self.angle(V, W)
        if theta == PI:
            return -V.norm * W.norm
        return V.norm * W.norm * math.cos(theta)

    def distance(self, V: ConeVector, W: ConeVector) -> float:
        if V.is_apex:
            return W.norm
        if W.is_apex:
            return V.norm
        theta = self.angle(V, W)
        if theta == PI:
            return V.norm + W.norm
        # (a-b)^2 + 4ab sin^2(theta/2) avoids cancellation for nearby points
        h = math.sin(0.5 * theta)
        return math.sqrt((V.norm - W.norm) ** 2 + 4.0 * V.norm * W.norm * h * h)

    def log_apex(self, x: ConeVector) -> ConeVector:
        """Log map at the apex.  The cone is its own tangent cone at O."""
        return x

    def geodesic(self, V: ConeVector, W: ConeVector) -> ConeGeodesic:
        G = self.graph
        if V.is_apex or W.is_apex:
            d = self.distance(V, W)
            if V.is_apex and W.is_apex:
                return ConeGeodesic(V, W, STRAIGHT, 0.0, 0.0, None)
            base = W.dir if V.is_apex else V.dir
            return ConeGeodesic(V, W, STRAIGHT, 0.0, d, GraphPath(G, base, base, ()))
        theta = G.distance(V.dir, W.dir)
        if theta >= PI:
            return ConeGeodesic(V, W, THROUGH_APEX, PI, V.norm + W.norm, None)
        path = G.shortest_path(V.dir, W.dir)
        return ConeGeodesic(V, W, STRAIGHT, path.length, self.distance(V, W), path)

    def point_between(self, V: ConeVector, W: ConeVector, s: float) -> ConeVector:
        return self.geodesic(V, W)(s)

    # ------------------------------------------------------------------
    # checks

    def scaled_geodesic_check(self, V: ConeVector, W: ConeVector, t: float, samples: int = 9, tol: float = 1e-12):
        """Homogeneity of distance and of geodesics under scaling by ``t``."""
        if not 0.0 <= t <= 1.0:
            raise ValidationError("scaling factor must lie in [0, 1]")
        d = self.distance(V, W)
        dist_err = abs(self.distance(V.scaled(t), W.scaled(t)) - t * d)
        g, gt = self.geodesic(V, W), self.geodesic(V.scaled(t), W.scaled(t))
        geo_err = max(self.distance(g(s).scaled(t), gt(s)) for s in np.linspace(0.0, 1.0, samples))
        scale = max(1.0, V.norm, W.norm)
        return {
            "distance_error": dist_err,
            "geodesic_error": geo_err,
            "passed": dist_err <= tol * scale and geo_err <= tol * scale,
        }

    def comparison_check(self, trials: int, seed: int = 0, tol: float = 1e-9, rmax: float = 2.0):
        """Monte Carlo test of the CAT(0) comparison inequality."""
        violations = []
        for i in range(trials):
            rng = np.random.default_rng([seed, i])
            ok, detail = comparison_trial(self, rng, tol, rmax)
            if not ok:
                violations.append({"trial": i, **detail})
        return {"trials": trials, "seed": seed, "violations": violations, "passed": not violations}


def _triangle_area(a: float, b: float, c: float) -> float:
    """Kahan's form of Heron's formula; accurate for needle-like triangles."""
    a, b, c = sorted((a, b, c), reverse=True)
    q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(max(q, 0.0))


def comparison_excess(X: Cone, x: ConeVector, y: ConeVector, z: ConeVector, t: float) -> float:
    """``d(x, gamma(t)) - d0(x', gamma'(t))`` for the geodesic ``gamma`` from y to z.

    Nonpositive for every triangle exactly when the space is CAT(0).
    """
    a = X.distance(y, z)
    c = X.distance(x, y)
    b = X.distance(x, z)
    actual = X.distance(x, X.geodesic(y, z)(t))
    if a == 0.0:
        return actual - c
    px = (c * c + a * a - b * b) / (2.0 * a)
    py = 2.0 * _triangle_area(a, b, c) / a
    return actual - math.hypot(px - t * a, py)


def comparison_trial(X: Cone, rng: np.random.Generator, tol: float = 1e-9, rmax: float = 2.0):
    x, y, z = (X.random_vector(rng, rmax) for _ in range(3))
    t = float(rng.uniform())
    excess = comparison_excess(X, x, y, z, t)
    return excess <= tol, {"x": str(x), "y": str(y), "z": str(z), "t": t, "excess": excess}


def angle_at_apex(X: Cone, V: ConeVector, W: ConeVector) -> float:
    return X.angle(V, W)


def inner_product(X: Cone, V: ConeVector, W: ConeVector) -> float:
    return X.inner(V, W)


def cone_distance(X: Cone, V: ConeVector, W: ConeVector) -> float:
    return X.distance(V, W)


def cat0_comparison_check(G: MetricGraph, trials: int, seed: int = 0, tol: float = 1e-9):
    return Cone(G).comparison_check(trials, seed, tol)
