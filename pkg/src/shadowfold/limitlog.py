"""Shadows, limit tangent cones, and the limit log map.

For a nonzero ``Z`` the shadow is the set of directions at angular
distance at least ``pi`` from ``dir(Z)``.  The limit tangent cone along
``Z`` is represented by a fixed open book: the cone over a theta-graph
with one arc of length ``pi`` per edge germ at ``dir(Z)``.  Its pole
``plus`` is the direction of ``Z`` itself and ``minus`` points back at
the apex.  The limit log map sends ``V`` to the tangent of the ray from
``Z`` parallel to ``V``; every shadow direction lands on ``minus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cone import PI, THROUGH_APEX, Cone, ConeVector
from .errors import HypothesisError, UndefinedAngleError, ValidationError
from .metric_graph import Germ, GraphPoint, MetricGraph
from .tangent import MINUS, PLUS, open_book_angle, page_edge_id, theta_graph

DISJOINT = "disjoint"
ENDPOINT_TOUCH = "endpoint-touch"
ONE_INTERIOR_POINT = "one-interior-point"
SEGMENT = "segment"
APEX_PASSING_MISS = "apex-passing-miss"
ISOMETRY_REGIMES = (DISJOINT, ENDPOINT_TOUCH, ONE_INTERIOR_POINT)

_MERGE_TOL = 1e-12


def _nonzero(V: ConeVector, name: str) -> None:
    if V.is_apex:
        raise UndefinedAngleError(f"{name} must be nonzero")


@dataclass(frozen=True)
class Shadow:
    Z: ConeVector
    regions: tuple[tuple[str, float, float], ...]

    def by_edge(self) -> dict[str, list[tuple[float, float]]]:
        out: dict[str, list[tuple[float, float]]] = {}
        for edge, lo, hi in self.regions:
            out.setdefault(edge, []).append((lo, hi))
        return out

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for _, lo, hi in self.regions)


def shadow(X: Cone, Z: ConeVector) -> Shadow:
    """Closed sub-arcs of directions at angular distance >= pi from ``dir(Z)``."""
    _nonzero(Z, "Z")
    G = X.graph
    raw = G.far_intervals(Z.dir, PI)
    kept: list[tuple[str, float, float]] = []
    covered_vertices: set[str] = set()

    def ends(edge, lo, hi):
        e = G.edges[edge]
        return {v for v, hit in ((e.u, lo == 0.0), (e.v, hi == e.length)) if hit}

    # nondegenerate arcs first, then isolated points not already covered
    for edge, lo, hi in sorted(raw, key=lambda r: r[1] == r[2]):
        vs = ends(edge, lo, hi)
        if lo == hi and vs and vs <= covered_vertices:
            continue
        kept.append((edge, lo, hi))
        covered_vertices |= vs
    return Shadow(Z, tuple(kept))


def in_shadow(X: Cone, V: ConeVector, Z: ConeVector) -> bool:
    _nonzero(V, "V")
    _nonzero(Z, "Z")
    return X.graph.distance(V.dir, Z.dir) >= PI


# ----------------------------------------------------------------------
# limit tangent cone


@dataclass(frozen=True)
class LimitVector:
    """Element of the limit tangent cone: page, angle from ``+spine``, norm."""

    page: Germ | None
    phi: float
    norm: float

    @classmethod
    def make(cls, page: Germ | None, phi: float, norm: float) -> "LimitVector":
        if norm == 0.0:
            return cls(None, 0.0, 0.0)
        if phi <= 0.0:
            return cls(None, 0.0, norm)
        if phi >= PI:
            return cls(None, PI, norm)
        return cls(page, phi, norm)

    @property
    def is_zero(self) -> bool:
        return self.norm == 0.0


class LimitTangentCone:
    """Open book with one page per edge germ at ``dir(Z)``."""

    def __init__(self, X: Cone, Z: ConeVector):
        _nonzero(Z, "Z")
        self.Z = Z
        self.pages: tuple[Germ, ...] = tuple(X.graph.germs(Z.dir))

    @cached_property
    def carrier(self) -> Cone:
        return Cone(theta_graph(self.pages))

    @property
    def plus_spine(self) -> LimitVector:
        return LimitVector.make(None, 0.0, 1.0)

    @property
    def minus_spine(self) -> LimitVector:
        return LimitVector.make(None, PI, 1.0)

    def to_carrier(self, v: LimitVector) -> ConeVector:
        C = self.carrier
        if v.is_zero:
            return C.apex
        if v.page is None:
            return C.vector(GraphPoint.at_vertex(PLUS if v.phi == 0.0 else MINUS), v.norm)
        return C.vector(C.graph.point(page_edge_id(v.page), v.phi), v.norm)

    def from_carrier(self, c: ConeVector) -> LimitVector:
        if c.is_apex:
            return LimitVector.make(None, 0.0, 0.0)
        if c.dir.vertex is not None:
            return LimitVector.make(None, 0.0 if c.dir.vertex == PLUS else PI, c.norm)
        page = next(g for g in self.pages if page_edge_id(g) == c.dir.edge)
        return LimitVector.make(page, c.dir.offset, c.norm)

    def angle(self, a: LimitVector, b: LimitVector) -> float:
        if a.is_zero or b.is_zero:
            raise UndefinedAngleError("angle with the zero limit vector")
        return open_book_angle(a.page, a.phi, b.page, b.phi)

    def distance(self, a: LimitVector, b: LimitVector) -> float:
        if a.is_zero:
            return b.norm
        if b.is_zero:
            return a.norm
        theta = self.angle(a, b)
        if theta == PI:
            return a.norm + b.norm
        h = math.sin(0.5 * theta)
        return math.sqrt((a.norm - b.norm) ** 2 + 4.0 * a.norm * b.norm * h * h)


def limit_tangent_cone(X: Cone, Z: ConeVector) -> LimitTangentCone:
    return LimitTangentCone(X, Z)


def limit_log(X: Cone, Z: ConeVector, V: ConeVector) -> LimitVector:
    """Limit log along ``Z``: norm-preserving, shadow collapsed to ``-spine``."""
    _nonzero(Z, "Z")
    if V.is_apex:
        return LimitVector.make(None, 0.0, 0.0)
    G = X.graph
    theta = G.distance(Z.dir, V.dir)
    if theta >= PI:
        return LimitVector.make(None, PI, V.norm)
    if theta == 0.0:
        return LimitVector.make(None, 0.0, V.norm)
    return LimitVector.make(G.shortest_path(Z.dir, V.dir).initial_direction(), theta, V.norm)


# ----------------------------------------------------------------------
# shadow crossings of geodesics


def _merge(intervals, tol: float = _MERGE_TOL) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for lo, hi in sorted((float(a), float(b)) for a, b in intervals):
        if out and lo <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def path_shadow_hits(X: Cone, path, sh: Shadow) -> list[tuple[float, float]]:
    """Arc-length intervals along a direction path that lie in the shadow."""
    regions = sh.by_edge()
    hits = []
    alpha0 = 0.0
    G = X.graph
    if not path.pieces:
        if X.graph.distance(path.start, sh.Z.dir) >= PI:
            hits.append((0.0, 0.0))
        return _merge(hits)
    for piece in path.pieces:
        a, b = sorted((piece.start, piece.end))
        forward = piece.end > piece.start
        for lo, hi in regions.get(piece.edge, ()):
            x0, x1 = max(a, lo), min(b, hi)
            if x0 > x1:
                continue
            if forward:
                hits.append((alpha0 + x0 - piece.start, alpha0 + x1 - piece.start))
            else:
                hits.append((alpha0 + piece.start - x1, alpha0 + piece.start - x0))
        alpha0 += piece.length
    # shadow points sitting exactly on a vertex may be recorded on a neighbouring edge only
    for k, point in ((0.0, path.start), (path.length, path.end)):
        if point.vertex is not None and G.distance(point, sh.Z.dir) >= PI:
            hits.append((k, k))
    return _merge(hits)


def geodesic_shadow_classification(X: Cone, V: ConeVector, W: ConeVector, Z: ConeVector, sh: Shadow | None = None) -> str:
    """How the geodesic ``VW`` meets the shadow of ``Z``."""
    for name, U in (("V", V), ("W", W), ("Z", Z)):
        _nonzero(U, name)
    sh = sh or shadow(X, Z)
    geo = X.geodesic(V, W)
    if geo.kind == THROUGH_APEX:
        if in_shadow(X, V, Z) or in_shadow(X, W, Z):
            return SEGMENT
        return APEX_PASSING_MISS
    path = geo.path
    hits = path_shadow_hits(X, path, sh)
    if not hits:
        return DISJOINT
    if len(hits) == 1 and hits[0][0] == hits[0][1]:
        if not path.pieces:
            return ENDPOINT_TOUCH if V == W else SEGMENT
        alpha = hits[0][0]
        if alpha <= _MERGE_TOL or alpha >= path.length - _MERGE_TOL:
            return ENDPOINT_TOUCH
        return ONE_INTERIOR_POINT
    return SEGMENT


# ----------------------------------------------------------------------
# verification


def check_sum_pi(X: Cone, Z: ConeVector, W_Z: LimitVector, tol: float = 1e-12) -> dict:
    """Angles from ``+spine`` and to ``-spine`` add to pi (read in the carrier)."""
    T = limit_tangent_cone(X, Z)
    if W_Z.is_zero:
        raise UndefinedAngleError("W_Z must be nonzero")
    C = T.carrier
    w = T.to_carrier(W_Z)
    total = C.angle(T.to_carrier(T.plus_spine), w) + C.angle(w, T.to_carrier(T.minus_spine))
    return {"sum": total, "error": abs(total - PI), "passed": abs(total - PI) <= tol}


def check_angle_to_Z(X: Cone, V: ConeVector, Z: ConeVector, tol: float = 1e-12) -> dict:
    T = limit_tangent_cone(X, Z)
    before = X.angle(V, Z)
    C = T.carrier
    after = C.angle(T.to_carrier(limit_log(X, Z, V)), T.to_carrier(limit_log(X, Z, Z)))
    return {"before": before, "after": after, "error": abs(before - after), "passed": abs(before - after) <= tol}


def check_contraction(X: Cone, V: ConeVector, W: ConeVector, Z: ConeVector, tol: float = 1e-9) -> dict:
    T = limit_tangent_cone(X, Z)
    lv, lw = limit_log(X, Z, V), limit_log(X, Z, W)
    C = T.carrier
    d_before = X.distance(V, W)
    d_after = C.distance(T.to_carrier(lv), T.to_carrier(lw))
    out = {"distance_before": d_before, "distance_after": d_after}
    ok = d_after <= d_before + tol
    if not (V.is_apex or W.is_apex):
        a_before = X.angle(V, W)
        a_after = C.angle(T.to_carrier(lv), T.to_carrier(lw))
        out.update(angle_before=a_before, angle_after=a_after)
        ok = ok and a_after <= a_before + tol
    out["passed"] = ok
    return out


def branch_free(X: Cone, V: ConeVector, W: ConeVector, Z: ConeVector) -> bool:
    """True when no shortest direction path among ``Z``, ``V``, ``W`` crosses a branch vertex.

    A vertex of degree other than two strictly inside one of these paths
    lets the paths from ``Z`` share a page and split later, which the
    open-book image cannot see.
    """
    G = X.graph
    for a, b in ((Z, V), (Z, W), (V, W)):
        if G.distance(a.dir, b.dir) >= PI:
            continue
        path = G.shortest_path(a.dir, b.dir)
        for piece in path.pieces[:-1]:
            e = G.edges[piece.edge]
            end = e.v if piece.end > piece.start else e.u
            if G.local_degree(GraphPoint.at_vertex(end)) != 2:
                return False
    return True


def check_isometry(X: Cone, V: ConeVector, W: ConeVector, Z: ConeVector, tol: float = 1e-9, samples: int = 32, sh: Shadow | None = None) -> dict:
    """Distance and geodesic preservation where the geodesic meets the shadow at most once.

    Raises :class:`HypothesisError` for pairs outside those regimes.
    """
    regime = geodesic_shadow_classification(X, V, W, Z, sh)
    if regime not in ISOMETRY_REGIMES:
        raise HypothesisError(f"isometry is not claimed for regime {regime!r}")
    T = limit_tangent_cone(X, Z)
    C = T.carrier
    lv, lw = T.to_carrier(limit_log(X, Z, V)), T.to_carrier(limit_log(X, Z, W))
    d_err = abs(X.distance(V, W) - C.distance(lv, lw))
    g = X.geodesic(V, W)
    gc = C.geodesic(lv, lw)
    pts_err = max(
        C.distance(T.to_carrier(limit_log(X, Z, g(s))), gc(s)) for s in np.linspace(0.0, 1.0, samples)
    )
    return {
        "regime": regime,
        "branch_free": branch_free(X, V, W, Z),
        "distance_error": d_err,
        "geodesic_error": pts_err,
        "passed": d_err <= tol and pts_err <= tol,
    }


def outward_germ(X: Cone, Z: ConeVector, eta: GraphPoint, inside: bool = False) -> Germ:
    """Germ at ``eta`` along which directions leave (or with ``inside``, enter) the shadow."""
    G = X.graph
    best = None
    for g in G.germs(eta):
        step = min(1e-3, 0.5 * G.remaining(eta, g))
        d = G.distance(G.move(eta, g, step), Z.dir)
        key = d if inside else -d
        if best is None or key > best[0]:
            best = (key, g)
    return best[1]


def check_continuity(X: Cone, Z: ConeVector, eta: GraphPoint, offsets=None, radius: float = 1.0, inside: bool = False) -> dict:
    """Images of directions approaching ``eta`` converge to the image of ``eta``."""
    if offsets is None:
        offsets = [10.0 ** -k for k in range(1, 8)]
    G = X.graph
    T = limit_tangent_cone(X, Z)
    germ = outward_germ(X, Z, eta, inside)
    room = G.remaining(eta, germ)
    target = limit_log(X, Z, X.vector(eta, radius))
    gaps = []
    used = []
    for eps in offsets:
        if eps > room:
            continue
        V = X.vector(G.move(eta, germ, eps), radius)
        gaps.append(T.distance(limit_log(X, Z, V), target))
        used.append(eps)
    monotone = all(b <= a for a, b in zip(gaps, gaps[1:]))
    final = gaps[-1] if gaps else math.inf
    return {"germ": str(germ), "offsets": used, "gaps": gaps, "monotone": monotone, "final_gap": final, "passed": monotone and final < 1e-6}


# ----------------------------------------------------------------------
# hulls


class ConeHull:
    """Convex cone over a union of closed direction arcs.

    The direction set is closed under unique shortest paths of length
    below pi; longer pairs are joined through the apex, which every
    nonempty cone contains.
    """

    def __init__(self, graph: MetricGraph, arcs: dict[str, list[tuple[float, float]]], vertices: set[str], delta: float):
        self.graph = graph
        self.arcs = arcs
        self.vertices = vertices
        self.delta = delta

    def contains_direction(self, p: GraphPoint) -> bool:
        G = self.graph
        if p.vertex is not None:
            if p.vertex in self.vertices:
                return True
            for e in G.edges.values():
                for lo, hi in self.arcs.get(e.id, ()):
                    if (e.u == p.vertex and lo <= _MERGE_TOL) or (e.v == p.vertex and hi >= e.length - _MERGE_TOL):
                        return True
            return False
        return any(lo - _MERGE_TOL <= p.offset <= hi + _MERGE_TOL for lo, hi in self.arcs.get(p.edge, ()))

    def boundary_points(self) -> list[GraphPoint]:
        G = self.graph
        pts = {G.vertex_point(v) for v in self.vertices}
        for edge, spans in self.arcs.items():
            for lo, hi in spans:
                pts.add(G.point(edge, lo))
                pts.add(G.point(edge, hi))
        return sorted(pts, key=str)

    def direction_distance(self, p: GraphPoint) -> float:
        if self.contains_direction(p):
            return 0.0
        return min((self.graph.distance(p, b) for b in self.boundary_points()), default=math.inf)

    def samples(self, delta: float | None = None) -> list[GraphPoint]:
        delta = delta or self.delta
        G = self.graph
        pts = {G.vertex_point(v) for v in self.vertices}
        for edge, spans in self.arcs.items():
            for lo, hi in spans:
                n = max(1, math.ceil((hi - lo) / delta))
                pts.update(G.point(edge, x) for x in np.linspace(lo, hi, n + 1))
        return sorted(pts, key=str)

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for spans in self.arcs.values() for lo, hi in spans)

    @property
    def is_empty(self) -> bool:
        return not self.vertices and not self.arcs


def _add_span(arcs, edge, lo, hi) -> bool:
    spans = arcs.setdefault(edge, [])
    for a, b in spans:
        if a - _MERGE_TOL <= lo and hi <= b + _MERGE_TOL:
            return False
    spans.append((lo, hi))
    arcs[edge] = _merge(spans)
    return True


def hull(X: Cone, S, delta: float = 1e-3) -> ConeHull:
    """Smallest convex cone containing ``S``.

    Any shortest path between points of the direction set that leaves
    the set does so between two of its boundary points, so closing under
    paths between boundary points reaches the fixpoint.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    G = X.graph
    arcs: dict[str, list[tuple[float, float]]] = {}
    vertices: set[str] = set()
    for V in S:
        if V.is_apex:
            continue
        if V.dir.vertex is not None:
            vertices.add(V.dir.vertex)
        else:
            _add_span(arcs, V.dir.edge, V.dir.offset, V.dir.offset)
    H = ConeHull(G, arcs, vertices, delta)
    # each round adds at least one new shortest path between finitely many boundary candidates
    guard = max(16, int(G.total_length / delta))
    for _ in range(guard):
        grown = False
        pts = H.boundary_points()
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if G.distance(a, b) >= PI:
                    continue
                path = G.shortest_path(a, b)
                for piece in path.pieces:
                    lo, hi = sorted((piece.start, piece.end))
                    grown |= _add_span(arcs, piece.edge, lo, hi)
        if not grown:
            return H
    raise ValidationError("hull closure did not reach a fixpoint")


def check_hull_subcommute(X: Cone, S, Z: ConeVector, delta: float = 1e-3) -> dict:
    """Every sample of ``L_Z(hull S)`` lies within ``2*delta`` of ``hull(L_Z S)``."""
    T = limit_tangent_cone(X, Z)
    C = T.carrier
    lhs = hull(X, S, delta)
    rhs = hull(C, [T.to_carrier(limit_log(X, Z, V)) for V in S], delta)
    worst = 0.0
    for p in lhs.samples(delta):
        image = T.to_carrier(limit_log(X, Z, X.vector(p, 1.0)))
        worst = max(worst, rhs.direction_distance(image.dir))
    return {"delta": delta, "samples": len(lhs.samples(delta)), "max_gap": worst, "passed": worst <= 2 * delta}
