"""Metric graphs: the space of directions with its intrinsic length metric.

A :class:`MetricGraph` is a finite connected graph whose edges carry
positive lengths (radians).  Self-loops and parallel edges are allowed.
Points live on edges at an arc-length offset from the edge's ``u``
endpoint; offsets ``0`` and ``length`` collapse to a shared vertex form.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

# relative tolerance used only to decide whether two path lengths tie
TIE_RTOL = 1e-12


class Edge(NamedTuple):
    id: str
    u: str
    v: str
    length: float


class Germ(NamedTuple):
    """An edge germ: leave along ``edge`` in the direction of ``sign``.

    ``sign=+1`` moves toward increasing offset (away from ``u``),
    ``sign=-1`` toward decreasing offset.
    """

    edge: str
    sign: int

    def __str__(self) -> str:
        return f"{self.edge}{'+' if self.sign > 0 else '-'}"

    @classmethod
    def parse(cls, text: str) -> "Germ":
        if text.endswith("+"):
            return cls(text[:-1], 1)
        if text.endswith("-"):
            return cls(text[:-1], -1)
        raise ValidationError(f"germ {text!r} needs a trailing + or -")


@dataclass(frozen=True)
class GraphPoint:
    """A point of a metric graph.

    Canonical points are either ``GraphPoint(vertex=name)`` or
    ``GraphPoint(edge, offset)`` with ``0 < offset < length``.  Use
    :meth:`MetricGraph.point` to build canonical points.
    """

    edge: str | None = None
    offset: float = 0.0
    vertex: str | None = None

    @classmethod
    def at_vertex(cls, name: str) -> "GraphPoint":
        return cls(None, 0.0, name)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def __str__(self) -> str:
        if self.vertex is not None:
            return f"v:{self.vertex}"
        return f"{self.edge}:{self.offset!r}"


class PathPiece(NamedTuple):
    edge: str
    start: float
    end: float

    @property
    def length(self) -> float:
        return abs(self.end - self.start)


class GraphPath:
    """A path in a metric graph, stored as a sequence of edge sub-arcs."""

    __slots__ = ("graph", "start", "end", "pieces", "tie", "length")

    def __init__(self, graph, start, end, pieces, tie=False):
        self.graph = graph
        self.start = start
        self.end = end
        self.pieces = tuple(p for p in pieces if p.start != p.end)
        self.tie = tie
        self.length = math.fsum(p.length for p in self.pieces)

    @property
    def steps(self) -> tuple[Germ, ...]:
        return tuple(Germ(p.edge, 1 if p.end > p.start else -1) for p in self.pieces)

    def initial_direction(self) -> Germ:
        """First traversed edge germ at the start point."""
        if not self.pieces:
            raise ValidationError("zero-length path has no initial direction")
        return self.steps[0]

    def point_at(self, alpha: float) -> GraphPoint:
        """Point at arc length ``alpha`` from the start (clamped to the path)."""
        if alpha <= 0.0 or not self.pieces:
            return self.start
        if alpha >= self.length:
            return self.end
        remaining = alpha
        for piece in self.pieces:
            if remaining <= piece.length:
                sign = 1.0 if piece.end > piece.start else -1.0
                return self.graph.point(piece.edge, piece.start + sign * remaining)
            remaining -= piece.length
        return self.end

    def __repr__(self) -> str:
        return (
            f"GraphPath({self.start} -> {self.end}, length={self.length!r}, "
            f"steps={[str(g) for g in self.steps]}, tie={self.tie})"
        )


class Cat1Report(NamedTuple):
    girth: float
    passed: bool


class MetricGraph:
    """Finite connected metric graph with the induced length metric."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge | tuple]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("duplicate vertex names")
        if not self.vertices:
            raise ValidationError("graph has no vertices")
        self.edges: dict[str, Edge] = {}
        for raw in edges:
            e = Edge(str(raw[0]), str(raw[1]), str(raw[2]), float(raw[3]))
            if e.id in self.edges:
                raise ValidationError(f"duplicate edge id {e.id!r}")
            if e.id == "v" or ":" in e.id or "@" in e.id or e.id[-1:] in "+-":
                raise ValidationError(f"reserved characters in edge id {e.id!r}")
            if e.u not in self.vertices or e.v not in self.vertices:
                raise ValidationError(f"edge {e.id!r} references an unknown vertex")
            if not (math.isfinite(e.length) and e.length > 0.0):
                raise ValidationError(f"edge {e.id!r} must have finite positive length")
            self.edges[e.id] = e
        self._index = {name: i for i, name in enumerate(self.vertices)}
        self._out: dict[str, list[Germ]] = {name: [] for name in self.vertices}
        for e in self.edges.values():
            self._out[e.u].append(Germ(e.id, 1))
            self._out[e.v].append(Germ(e.id, -1))
        if not np.all(np.isfinite(self._apsp[0])):
            raise ValidationError("graph is disconnected")

    # ------------------------------------------------------------------
    # structure

    def __eq__(self, other):
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return set(self.vertices) == set(other.vertices) and self.edges == other.edges

    def __hash__(self):
        return hash((frozenset(self.vertices), frozenset(self.edges.items())))

    def __repr__(self):
        return f"MetricGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges.values())

    def scaled(self, c: float) -> "MetricGraph":
        return MetricGraph(self.vertices, [(e.id, e.u, e.v, c * e.length) for e in self.edges.values()])

    def subdivide(self, edge_id: str, offset: float) -> "MetricGraph":
        """Split an edge at ``offset`` into ``<id>.0`` and ``<id>.1``.

        The new vertex is named ``<id>@split``.  Use :meth:`refine_point`
        to carry points across.
        """
        e = self.edges[edge_id]
        if not 0.0 < offset < e.length:
            raise ValidationError("subdivision offset must be interior")
        mid = f"{edge_id}@split"
        edges = [x for x in self.edges.values() if x.id != edge_id]
        edges += [(f"{edge_id}.0", e.u, mid, offset), (f"{edge_id}.1", mid, e.v, e.length - offset)]
        return MetricGraph(self.vertices + (mid,), edges)

    def refine_point(self, refined: "MetricGraph", edge_id: str, split: float, p: GraphPoint) -> GraphPoint:
        """Image of ``p`` in ``refined = self.subdivide(edge_id, split)``."""
        if p.vertex is not None or p.edge != edge_id:
            return p
        if p.offset < split:
            return refined.point(f"{edge_id}.0", p.offset)
        return refined.point(f"{edge_id}.1", p.offset - split)

    # ------------------------------------------------------------------
    # points

    def point(self, edge: str, offset: float) -> GraphPoint:
        """Canonical point at ``offset`` along ``edge``."""
        try:
            e = self.edges[edge]
        except KeyError:
            raise ValidationError(f"unknown edge {edge!r}") from None
        offset = float(offset)
        if not (math.isfinite(offset) and -1e-12 * e.length <= offset <= e.length * (1 + 1e-12)):
            raise ValidationError(f"offset {offset!r} outside edge {edge!r} of length {e.length!r}")
        if offset <= 0.0:
            return GraphPoint.at_vertex(e.u)
        if offset >= e.length:
            return GraphPoint.at_vertex(e.v)
        return GraphPoint(edge, offset)

    def vertex_point(self, name: str) -> GraphPoint:
        if name not in self._index:
            raise ValidationError(f"unknown vertex {name!r}")
        return GraphPoint.at_vertex(name)

    def canonical(self, p: GraphPoint) -> GraphPoint:
        if p.vertex is not None:
            return self.vertex_point(p.vertex)
        if p.edge is None:
            raise ValidationError("point has neither edge nor vertex")
        return self.point(p.edge, p.offset)

    def germs(self, a: GraphPoint) -> list[Germ]:
        """Edge germs leaving ``a``; interior points have two."""
        if a.vertex is not None:
            return list(self._out[a.vertex])
        return [Germ(a.edge, 1), Germ(a.edge, -1)]

    def local_degree(self, a: GraphPoint) -> int:
        return len(self.germs(self.canonical(a)))

    def remaining(self, a: GraphPoint, germ: Germ) -> float:
        """Arc length available along ``germ`` before the next vertex."""
        e = self.edges[germ.edge]
        if a.vertex is not None:
            if germ not in self._out[a.vertex]:
                raise ValidationError(f"germ {germ} does not leave {a}")
            return e.length
        if a.edge != germ.edge:
            raise ValidationError(f"germ {germ} does not leave {a}")
        return e.length - a.offset if germ.sign > 0 else a.offset

    def move(self, a: GraphPoint, germ: Germ, t: float) -> GraphPoint:
        """Point reached by travelling ``t`` along ``germ`` (no vertex crossing)."""
        room = self.remaining(a, germ)
        if t > room * (1 + 1e-12):
            raise ValidationError(f"cannot move {t!r} along {germ}; only {room!r} available")
        e = self.edges[germ.edge]
        if a.vertex is not None:
            start = 0.0 if germ.sign > 0 else e.length
        else:
            start = a.offset
        return self.point(germ.edge, min(max(start + germ.sign * t, 0.0), e.length))

    def sample_point(self, rng: np.random.Generator) -> GraphPoint:
        """Uniform point with respect to arc length."""
        ids = list(self.edges)
        lengths = np.array([self.edges[i].length for i in ids])
        k = int(rng.choice(len(ids), p=lengths / lengths.sum()))
        e = self.edges[ids[k]]
        return self.point(e.id, float(rng.uniform(0.0, e.length)))

    # ------------------------------------------------------------------
    # shortest paths

    def _dijkstra(self, source: int, skip_edge: str | None = None):
        n = len(self.vertices)
        dist = [math.inf] * n
        count = [0] * n
        pred: list[tuple[int, str, int] | None] = [None] * n
        dist[source] = 0.0
        count[source] = 1
        heap = [(0.0, source)]
        done = [False] * n
        while heap:
            d, i = heapq.heappop(heap)
            if done[i]:
                continue
            done[i] = True
            for germ in self._out[self.vertices[i]]:
                if germ.edge == skip_edge:
                    continue
                e = self.edges[germ.edge]
                if e.u == e.v:
                    continue
                j = self._index[e.v if germ.sign > 0 else e.u]
                nd = d + e.length
                tol = TIE_RTOL * max(1.0, nd)
                if nd < dist[j] - tol:
                    dist[j] = nd
                    count[j] = count[i]
                    pred[j] = (i, germ.edge, germ.sign)
                    heapq.heappush(heap, (nd, j))
                elif abs(nd - dist[j]) <= tol and not done[j]:
                    count[j] += count[i]
        return dist, count, pred

    @cached_property
    def _apsp(self):
        n = len(self.vertices)
        D = np.empty((n, n))
        C = np.zeros((n, n), dtype=np.int64)
        preds = []
        for s in range(n):
            dist, count, pred = self._dijkstra(s)
            D[s] = dist
            C[s] = count
            preds.append(pred)
        # per-source sums can differ in the last bit; keep the metric exactly symmetric
        D = np.minimum(D, D.T)
        return D, C, preds

    def _exits(self, a: GraphPoint):
        if a.vertex is not None:
            return [(self._index[a.vertex], 0.0, None)]
        e = self.edges[a.edge]
        return [
            (self._index[e.u], a.offset, PathPiece(e.id, a.offset, 0.0)),
            (self._index[e.v], e.length - a.offset, PathPiece(e.id, a.offset, e.length)),
        ]

    def _entries(self, b: GraphPoint):
        if b.vertex is not None:
            return [(self._index[b.vertex], 0.0, None)]
        e = self.edges[b.edge]
        return [
            (self._index[e.u], b.offset, PathPiece(e.id, 0.0, b.offset)),
            (self._index[e.v], e.length - b.offset, PathPiece(e.id, e.length, b.offset)),
        ]

    def vertex_distances(self, a: GraphPoint) -> np.ndarray:
        """Distances from ``a`` to every vertex, in ``self.vertices`` order."""
        D = self._apsp[0]
        a = self.canonical(a)
        return np.min([length + D[i] for i, length, _ in self._exits(a)], axis=0)

    def distance(self, a: GraphPoint, b: GraphPoint) -> float:
        """Length-metric distance between two points."""
        D = self._apsp[0]
        best = math.inf
        if a.edge is not None and a.edge == b.edge:
            best = abs(a.offset - b.offset)
        if a == b:
            return 0.0
        for i, la, _ in self._exits(a):
            for j, lb, _ in self._entries(b):
                c = (la + lb) + D[i, j]
                if c < best:
                    best = c
        return float(best)

    def shortest_path(self, a: GraphPoint, b: GraphPoint) -> GraphPath:
        """One shortest path from ``a`` to ``b``; ``tie`` flags multiplicity."""
        a = self.canonical(a)
        b = self.canonical(b)
        if a == b:
            return GraphPath(self, a, b, ())
        D, C, preds = self._apsp
        candidates = []
        if a.edge is not None and a.edge == b.edge:
            candidates.append((abs(a.offset - b.offset), 1, None, None))
        for i, la, pa in self._exits(a):
            for j, lb, pb in self._entries(b):
                candidates.append(((la + lb) + D[i, j], int(C[i, j]), (i, pa), (j, pb)))
        best = min(c[0] for c in candidates)
        tol = TIE_RTOL * max(1.0, best)
        winners = [c for c in candidates if c[0] <= best + tol]
        multiplicity = sum(c[1] for c in winners)
        length, _, exit_, entry = min(winners, key=lambda c: c[0])
        if exit_ is None:
            pieces = [PathPiece(a.edge, a.offset, b.offset)]
        else:
            (i, pa), (j, pb) = exit_, entry
            middle = []
            k = j
            while k != i:
                prev, edge_id, sign = preds[i][k]
                e = self.edges[edge_id]
                middle.append(PathPiece(edge_id, 0.0, e.length) if sign > 0 else PathPiece(edge_id, e.length, 0.0))
                k = prev
            middle.reverse()
            pieces = ([pa] if pa else []) + middle + ([pb] if pb else [])
        return GraphPath(self, a, b, pieces, tie=multiplicity > 1)

    def initial_direction(self, a: GraphPoint, b: GraphPoint) -> Germ:
        return self.shortest_path(a, b).initial_direction()

    def edge_profile(self, a: GraphPoint, edge_id: str, offsets: np.ndarray) -> np.ndarray:
        """Vectorized distances from ``a`` to points at ``offsets`` on an edge."""
        e = self.edges[edge_id]
        vd = self.vertex_distances(a)
        offsets = np.asarray(offsets, dtype=float)
        prof = np.minimum(vd[self._index[e.u]] + offsets, vd[self._index[e.v]] + (e.length - offsets))
        if a.edge == edge_id:
            prof = np.minimum(prof, np.abs(offsets - a.offset))
        return prof

    def far_intervals(self, a: GraphPoint, threshold: float) -> list[tuple[str, float, float]]:
        """Closed sub-arcs ``(edge, lo, hi)`` where the distance to ``a`` is >= threshold.

        On an edge the distance is a minimum of linear functions of the
        offset, so each constraint is solved in closed form.
        """
        a = self.canonical(a)
        vd = self.vertex_distances(a)
        out = []
        for e in self.edges.values():
            lo = max(0.0, threshold - vd[self._index[e.u]])
            hi = min(e.length, vd[self._index[e.v]] + e.length - threshold)
            pieces = [(lo, hi)]
            if a.edge == e.id:
                pieces = [(lo, min(hi, a.offset - threshold)), (max(lo, a.offset + threshold), hi)]
            for p, q in pieces:
                snapped = self._snap_far(a, e, p, q, threshold)
                if snapped is not None:
                    out.append((e.id, float(snapped[0]), float(snapped[1])))
        return out

    def _snap_far(self, a: GraphPoint, e: Edge, lo: float, hi: float, threshold: float, ulps: int = 8):
        """Shrink ``[lo, hi]`` by a few ulps until both ends pass :meth:`distance`.

        The closed-form endpoints can land one rounding step outside the
        set that ``distance`` reports as far; snapping keeps the regions
        and pointwise tests in exact agreement.
        """
        far = lambda x: self.distance(a, self.point(e.id, x)) >= threshold  # noqa: E731
        if lo > hi:
            return None
        if lo == hi:
            up = down = lo
            for _ in range(ulps + 1):
                for cand in (up, down):
                    if 0.0 <= cand <= e.length and far(cand):
                        return float(cand), float(cand)
                up, down = np.nextafter(up, np.inf), np.nextafter(down, -np.inf)
            return None
        for _ in range(ulps):
            if far(lo):
                break
            lo = float(np.nextafter(lo, np.inf))
        for _ in range(ulps):
            if far(hi):
                break
            hi = float(np.nextafter(hi, -np.inf))
        if lo > hi or not far(lo) or not far(hi):
            return None
        return lo, hi

    # ------------------------------------------------------------------
    # curvature

    def girth(self) -> float:
        """Length of the shortest cycle (``inf`` for forests).

        Every cycle through edge ``e`` consists of ``e`` plus a path
        between its endpoints avoiding ``e``.
        """
        best = math.inf
        for e in self.edges.values():
            if e.u == e.v:
                best = min(best, e.length)
                continue
            dist, _, _ = self._dijkstra(self._index[e.u], skip_edge=e.id)
            best = min(best, e.length + dist[self._index[e.v]])
        return best

    def validate_cat1(self) -> Cat1Report:
        g = self.girth()
        return Cat1Report(g, g >= TWO_PI)


def graph_distance(G: MetricGraph, a: GraphPoint, b: GraphPoint) -> float:
    return G.distance(G.canonical(a), G.canonical(b))


def shortest_path(G: MetricGraph, a: GraphPoint, b: GraphPoint) -> GraphPath:
    return G.shortest_path(a, b)


def girth(G: MetricGraph) -> float:
    return G.girth()


def validate_cat1(G: MetricGraph) -> Cat1Report:
    return G.validate_cat1()


def local_degree(G: MetricGraph, a: GraphPoint) -> int:
    return G.local_degree(a)
