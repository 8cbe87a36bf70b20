"""Tangent cones at non-apex points, parallel rays, and radial transport.

At a point ``z`` off the apex the cone is locally an open book: one
half-plane page per edge germ at ``dir(z)``, glued along the radial line
through ``O`` and ``z``.  A tangent vector is written in polar open-book
coordinates ``(page, phi, magnitude)`` where ``phi`` is measured from the
outward radial direction (``phi = 0`` away from ``O``, ``phi = pi``
toward it).  On the radial line the page is irrelevant and stored as
``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cone import APEX, PI, Cone, ConeVector
from .errors import ExpRangeError, HypothesisError, UndefinedAngleError, ValidationError
from .metric_graph import GraphPath, Germ, MetricGraph

PLUS, MINUS = "plus", "minus"


@dataclass(frozen=True)
class TangentAtPoint:
    base: ConeVector
    page: Germ | None
    phi: float
    magnitude: float

    @classmethod
    def make(cls, base: ConeVector, page: Germ | None, phi: float, magnitude: float) -> "TangentAtPoint":
        if base.is_apex:
            raise ValidationError("tangent vectors here live at non-apex points")
        phi, magnitude = float(phi), float(magnitude)
        if not (0.0 <= phi <= PI):
            raise ValidationError(f"polar angle {phi!r} outside [0, pi]")
        if not (math.isfinite(magnitude) and magnitude >= 0.0):
            raise ValidationError(f"magnitude {magnitude!r} must be finite and nonnegative")
        if magnitude == 0.0:
            return cls(base, None, 0.0, 0.0)
        if phi == 0.0 or phi == PI:
            page = None
        elif page is None:
            raise ValidationError("non-radial tangent vectors need a page")
        return cls(base, page, phi, magnitude)

    @property
    def is_zero(self) -> bool:
        return self.magnitude == 0.0

    def with_magnitude(self, m: float) -> "TangentAtPoint":
        return TangentAtPoint.make(self.base, self.page, self.phi, m)

    def rebased(self, base: ConeVector) -> "TangentAtPoint":
        return TangentAtPoint(base, self.page, self.phi, self.magnitude)


def page_edge_id(g: Germ) -> str:
    return f"{g.edge}.{'fwd' if g.sign > 0 else 'bwd'}"


@lru_cache(maxsize=256)
def theta_graph(germs: tuple[Germ, ...]) -> MetricGraph:
    """Two poles joined by one arc of length pi per germ."""
    return MetricGraph([PLUS, MINUS], [(page_edge_id(g), PLUS, MINUS, PI) for g in germs])


def tangent_sphere_at(X: Cone, z: ConeVector) -> MetricGraph:
    """Unit tangent directions at ``z`` as a theta-graph (``plus`` = outward radial)."""
    if z.is_apex:
        raise UndefinedAngleError("use the cone itself for directions at the apex")
    return theta_graph(tuple(X.graph.germs(z.dir)))


def open_book_angle(page1: Germ | None, phi1: float, page2: Germ | None, phi2: float) -> float:
    """Angle between two open-book directions at a common point."""
    if page1 is None or page2 is None or page1 == page2:
        return abs(phi1 - phi2)
    return min(phi1 + phi2, 2.0 * PI - phi1 - phi2, PI)


def angle_at(X: Cone, z: ConeVector, U1: TangentAtPoint, U2: TangentAtPoint) -> float:
    if U1.base != z or U2.base != z:
        raise ValidationError("tangent vectors must be based at z")
    if U1.is_zero or U2.is_zero:
        raise UndefinedAngleError("angle with a zero tangent vector")
    return open_book_angle(U1.page, U1.phi, U2.page, U2.phi)


def log_at(X: Cone, z: ConeVector, w: ConeVector) -> TangentAtPoint:
    """Initial tangent at ``z`` of the geodesic to ``w``, scaled by its length."""
    if z.is_apex:
        raise UndefinedAngleError("use Cone.log_apex at the apex")
    if w == z:
        raise ValidationError("log of the base point itself is undefined")
    rho = z.norm
    if w.is_apex:
        return TangentAtPoint.make(z, None, PI, rho)
    G = X.graph
    theta = G.distance(z.dir, w.dir)
    if theta >= PI:
        return TangentAtPoint.make(z, None, PI, rho + w.norm)
    if theta == 0.0:
        phi = 0.0 if w.norm > rho else PI
        return TangentAtPoint.make(z, None, phi, abs(w.norm - rho))
    germ = G.shortest_path(z.dir, w.dir).initial_direction()
    r = w.norm
    phi = math.atan2(r * math.sin(theta), r * math.cos(theta) - rho)
    return TangentAtPoint.make(z, germ, phi, X.distance(z, w))


def exp_at(X: Cone, z: ConeVector, U: TangentAtPoint) -> ConeVector:
    """Endpoint of the straight segment from ``z`` with initial vector ``U``.

    Defined only while the segment stays inside the flat page of ``U``
    (it may end on, but not cross, the next vertex direction) and does
    not run through the apex.
    """
    if U.base != z:
        raise ValidationError("tangent vector must be based at z")
    rho, m = z.norm, U.magnitude
    if m == 0.0:
        return z
    if U.page is None:
        if U.phi == 0.0:
            return ConeVector(z.dir, rho + m)
        if m < rho:
            return ConeVector(z.dir, rho - m)
        if m == rho:
            return APEX
        raise ExpRangeError("segment toward the apex cannot be continued past it")
    G = X.graph
    px = rho + m * math.cos(U.phi)
    py = m * math.sin(U.phi)
    alpha = math.atan2(py, px)
    room = G.remaining(z.dir, U.page)
    if alpha > room:
        raise ExpRangeError(f"segment sweeps {alpha!r} rad but page {U.page} is flat for {room!r}")
    return ConeVector(G.move(z.dir, U.page, alpha), math.hypot(px, py))


# ----------------------------------------------------------------------
# parallel rays


@dataclass(frozen=True)
class ParallelRay:
    """Unit-speed ray from ``z`` at bounded distance from ``t -> tV``."""

    z: ConeVector
    V: ConeVector
    theta: float
    path: GraphPath | None = field(default=None, repr=False)

    @property
    def through_apex(self) -> bool:
        return self.theta >= PI

    def __call__(self, t: float) -> ConeVector:
        rho = self.z.norm
        if t <= 0.0:
            return self.z
        if self.theta == 0.0:
            return ConeVector(self.z.dir, rho + t)
        if self.through_apex:
            if t < rho:
                return ConeVector(self.z.dir, rho - t)
            if t == rho:
                return APEX
            return ConeVector(self.V.dir, t - rho)
        px = rho + t * math.cos(self.theta)
        py = t * math.sin(self.theta)
        alpha = min(max(math.atan2(py, px), 0.0), self.theta)
        return ConeVector(self.path.point_at(alpha), math.hypot(px, py))


def _require_unit(V: ConeVector) -> None:
    if V.is_apex or abs(V.norm - 1.0) > 1e-12:
        raise ValidationError("reference direction must be a unit vector")


def parallel_ray_from(X: Cone, z: ConeVector, V: ConeVector) -> ParallelRay:
    """The ray from ``z`` parallel to ``t -> tV``.

    When ``dir(V)`` is within ``pi`` of ``dir(z)`` the ray is the straight
    half-line of the flat strip spanned by ``O z`` and the ray ``OV``;
    otherwise the strip degenerates and the ray runs through the apex.
    """
    _require_unit(V)
    if z.is_apex:
        raise ValidationError("base point must not be the apex")
    theta = X.graph.distance(z.dir, V.dir)
    if theta >= PI:
        return ParallelRay(z, V, theta, None)
    return ParallelRay(z, V, theta, X.graph.shortest_path(z.dir, V.dir))


@dataclass
class DistanceProfile:
    ts: np.ndarray
    values: np.ndarray
    bound: float

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def constant(self) -> bool:
        return self.max - self.min <= 1e-9

    @property
    def bounded(self) -> bool:
        return self.max <= self.bound + 1e-9


def reference_ray(X: Cone, V: ConeVector, start: ConeVector | None = None):
    """``t -> tV``, or the geodesic ray from ``start`` through ``O`` continuing along ``V``."""
    _require_unit(V)
    if start is None or start.is_apex:
        return lambda t: X.vector(V.dir, t)
    if X.graph.distance(start.dir, V.dir) < PI:
        raise HypothesisError("start must lie in the shadow of V for start -> O -> V to be a ray")
    rho = start.norm

    def ray(t):
        if t < rho:
            return ConeVector(start.dir, rho - t)
        return X.vector(V.dir, t - rho)

    return ray


def parallel_distance_profile(X: Cone, z: ConeVector, V: ConeVector, t_max: float, n: int, start: ConeVector | None = None) -> DistanceProfile:
    """Sample ``f(t) = d(reference(t), parallel_ray(t))`` on ``[0, t_max]``.

    With ``start`` given, the reference is the ray that leaves ``start``
    toward the apex and continues along ``V`` after passing through it.
    """
    ray = parallel_ray_from(X, z, V)
    ref = reference_ray(X, V, start)
    ts = np.linspace(0.0, t_max, n)
    values = np.array([X.distance(ref(float(t)), ray(float(t))) for t in ts])
    bound = z.norm + (0.0 if start is None else start.norm)
    return DistanceProfile(ts, values, bound)


# ----------------------------------------------------------------------
# radial transport


def radial_transport(X: Cone, q: ConeVector, z: ConeVector, U: TangentAtPoint) -> TangentAtPoint:
    """Transport between two non-apex points of one ray.

    In open-book coordinates this is the identity; the geometric content
    is verified by :func:`radial_chord_check`.
    """
    if q.is_apex or z.is_apex:
        raise ValidationError("use radial_transport_from_apex for the apex")
    if q.dir != z.dir:
        raise ValidationError("q and z must lie on the same ray from the apex")
    if U.base != q:
        raise ValidationError("tangent vector must be based at q")
    return U.rebased(z)


def radial_transport_from_apex(X: Cone, Z: ConeVector, V: ConeVector) -> TangentAtPoint:
    """Transport from ``O`` to ``z = exp_O(Z)``: the tangent of the parallel ray."""
    if Z.is_apex:
        raise ValidationError("transport target must not be the apex")
    if V.is_apex:
        return TangentAtPoint.make(Z, None, 0.0, 0.0)
    ray = parallel_ray_from(X, Z, V.unit())
    if ray.through_apex:
        return TangentAtPoint.make(Z, None, PI, V.norm)
    if ray.theta == 0.0:
        return TangentAtPoint.make(Z, None, 0.0, V.norm)
    T = log_at(X, Z, ray(Z.norm))
    return TangentAtPoint.make(Z, T.page, T.phi, V.norm)


def triangle_angle(a: float, b: float, c: float) -> float:
    """Angle between sides ``a`` and ``b`` opposite ``c`` (Kahan's stable form)."""
    a, b = max(a, b), min(a, b)
    if b >= c:
        mu = c - (a - b)
    else:
        mu = b - (a - c)
    den = (a + (b + c)) * ((a - c) + b)
    if den <= 0.0:
        return PI
    return 2.0 * math.atan(math.sqrt(max(((a - b) + c) * mu, 0.0) / den))


def radial_chord_check(X: Cone, q: ConeVector, z: ConeVector, U1: TangentAtPoint, U2: TangentAtPoint) -> dict:
    """Similar-triangle construction behind the isometry of radial transport.

    Exponentiate both unit vectors at ``q`` with step ``s*|Oq|/|Oz|`` and
    their transports at ``z`` with step ``s``; the chord triangles at ``q``
    and ``z`` must be similar with ratio ``|Oq|/|Oz|``.  Angles are read
    off the triangles from cone distances alone.
    """
    T1, T2 = radial_transport(X, q, z, U1), radial_transport(X, q, z, U2)
    ratio = q.norm / z.norm
    s = 0.5 * min(q.norm, z.norm) / max(ratio, 1.0)
    for _ in range(60):
        try:
            vq = exp_at(X, q, U1.with_magnitude(ratio * s))
            wq = exp_at(X, q, U2.with_magnitude(ratio * s))
            vz = exp_at(X, z, T1.with_magnitude(s))
            wz = exp_at(X, z, T2.with_magnitude(s))
            break
        except ExpRangeError:
            s *= 0.5
    else:
        raise ExpRangeError("no flat neighbourhood found for the chord construction")
    d = X.distance
    chord_q, chord_z = d(vq, wq), d(vz, wz)
    angle_q = triangle_angle(d(q, vq), d(q, wq), chord_q)
    angle_z = triangle_angle(d(z, vz), d(z, wz), chord_z)
    return {
        "step": s,
        "chord_ratio_error": abs(chord_q - ratio * chord_z) / max(chord_q, ratio * chord_z, 1e-300),
        "oracle_angle_q": angle_q,
        "oracle_angle_z": angle_z,
        "angle_q": angle_at(X, q, U1, U2),
        "angle_z": angle_at(X, z, T1, T2),
    }


# ----------------------------------------------------------------------
# first variation


def first_variation_check(X: Cone, p: ConeVector, q: ConeVector, U: TangentAtPoint, h_min: float = 1e-6, tol: float = 1e-3) -> dict:
    """One-sided difference of ``t -> d(p, exp_q(tU))`` against ``-cos angle(log_q p, U)``."""
    if p == q:
        raise ValidationError("p and q must differ")
    if abs(U.magnitude - 1.0) > 1e-12:
        raise ValidationError("direction must be a unit tangent vector")
    expected = -math.cos(angle_at(X, q, log_at(X, q, p), U))
    h = h_min
    while True:
        try:
            moved = exp_at(X, q, U.with_magnitude(h))
            break
        except ExpRangeError:
            h *= 0.1
            if h < 1e-300:
                raise
    fd = (X.distance(p, moved) - X.distance(p, q)) / h
    return {"h": h, "difference": fd, "expected": expected, "error": abs(fd - expected), "passed": abs(fd - expected) <= tol}
