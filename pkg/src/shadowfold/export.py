"""SVG and CSV output for shadows and limit-log images.

The SVG layout is fixed: vertices sit on a circle in declaration
order, edges are quadratic curves (self-loops are drawn as teardrops),
and the limit tangent cone is drawn to the right as a theta-graph with
``plus`` on top and ``minus`` at the bottom.
"""

from __future__ import annotations

import csv
import io
import math
from xml.sax.saxutils import escape

from .cone import Cone, ConeVector
from .limitlog import limit_log, limit_tangent_cone, shadow
from .spacefile import format_vector
from .tangent import page_edge_id

_W, _H = 720, 360
_R = 120.0


def _vertex_positions(G, cx: float, cy: float) -> dict[str, tuple[float, float]]:
    n = len(G.vertices)
    if n == 1:
        return {G.vertices[0]: (cx, cy + _R * 0.6)}
    return {v: (cx + _R * math.cos(2 * math.pi * k / n - math.pi / 2), cy + _R * math.sin(2 * math.pi * k / n - math.pi / 2))
            for k, v in enumerate(G.vertices)}


def _edge_curve(G, pos, edge_id: str, rank: int):
    """Bezier control points for an edge; parallel edges fan out by ``rank``."""
    e = G.edges[edge_id]
    (x0, y0), (x1, y1) = pos[e.u], pos[e.v]
    if e.u == e.v:
        spread = 0.8 + 0.35 * rank
        cx, cy = x0 - 0.0, y0 - _R * spread
        return (x0, y0), (cx - _R * 0.9 * spread, cy), (cx + _R * 0.9 * spread, cy), (x1, y1)
    mx, my = (x0 + x1) / 2, (y0 + y1) / 2
    dx, dy = x1 - x0, y1 - y0
    norm = math.hypot(dx, dy) or 1.0
    bend = 0.35 * rank * (1 if rank % 2 else -1)
    c = (mx - dy / norm * bend * _R, my + dx / norm * bend * _R)
    return (x0, y0), c, c, (x1, y1)


def _bezier(ctrl, s: float):
    (x0, y0), (x1, y1), (x2, y2), (x3, y3) = ctrl
    u = 1 - s
    return (u**3 * x0 + 3 * u * u * s * x1 + 3 * u * s * s * x2 + s**3 * x3,
            u**3 * y0 + 3 * u * u * s * y1 + 3 * u * s * s * y2 + s**3 * y3)


def _polyline(ctrl, s0: float, s1: float, n: int = 48) -> str:
    pts = [_bezier(ctrl, s0 + (s1 - s0) * k / n) for k in range(n + 1)]
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)


def _layout(G, cx, cy):
    pos = _vertex_positions(G, cx, cy)
    seen: dict[frozenset, int] = {}
    curves = {}
    for e in G.edges.values():
        key = frozenset((e.u, e.v))
        rank = seen.get(key, 0)
        seen[key] = rank + 1
        curves[e.id] = _edge_curve(G, pos, e.id, rank + (1 if e.u != e.v and rank else 0))
    return pos, curves


def _point_xy(G, curves, pos, p):
    if p.vertex is not None:
        return pos[p.vertex]
    return _bezier(curves[p.edge], p.offset / G.edges[p.edge].length)


def svg_shadow(X: Cone, Z: ConeVector, vectors=()) -> str:
    """Direction graph with the shadow of ``Z`` in red, and limit-log images on the open book."""
    G = X.graph
    pos, curves = _layout(G, 190, 200)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g id="directions" fill="none" stroke="#444" stroke-width="2">',
    ]
    for eid, ctrl in curves.items():
        out.append(f'<polyline id="edge-{escape(eid)}" points="{_polyline(ctrl, 0, 1)}"/>')
    out.append("</g>")
    sh = shadow(X, Z)
    out.append('<g id="shadow" fill="red" stroke="red" stroke-width="5" stroke-dasharray="6,3">')
    for edge, lo, hi in sh.regions:
        ell = G.edges[edge].length
        if hi > lo:
            out.append(f'<polyline fill="none" points="{_polyline(curves[edge], lo / ell, hi / ell)}"/>')
        else:
            x, y = _bezier(curves[edge], lo / ell)
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4"/>')
    out.append("</g>")
    out.append('<g id="vertices" fill="#000" font-family="monospace" font-size="11">')
    for v, (x, y) in pos.items():
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3"/><text x="{x + 5:.2f}" y="{y - 5:.2f}">{escape(v)}</text>')
    out.append("</g>")
    zx, zy = _point_xy(G, curves, pos, Z.dir)
    out.append(f'<circle id="Z" cx="{zx:.2f}" cy="{zy:.2f}" r="6" fill="#1565c0"/>')
    out.append(_svg_book(X, Z, vectors))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _svg_book(X: Cone, Z: ConeVector, vectors) -> str:
    T = limit_tangent_cone(X, Z)
    k = len(T.pages)
    cx, top, bottom = 540.0, 60.0, 320.0
    out = ['<g id="limit-cone" fill="none" stroke="#444" stroke-width="2" font-family="monospace" font-size="11">']
    arcs = {}
    for j, g in enumerate(T.pages):
        bulge = (j - (k - 1) / 2) * (240.0 / max(k, 2))
        ctrl = ((cx, top), (cx + 1.33 * bulge, top), (cx + 1.33 * bulge, bottom), (cx, bottom))
        arcs[page_edge_id(g)] = ctrl
        out.append(f'<polyline id="page-{escape(str(g))}" points="{_polyline(ctrl, 0, 1)}"/>')
        lx, ly = _bezier(ctrl, 0.5)
        out.append(f'<text stroke="none" fill="#444" x="{lx + 4:.2f}" y="{ly:.2f}">{escape(str(g))}</text>')
    out.append(f'<text stroke="none" fill="#000" x="{cx + 6}" y="{top - 6}">+spine</text>')
    out.append(f'<text stroke="none" fill="#000" x="{cx + 6}" y="{bottom + 14}">-spine</text>')
    for V in vectors:
        img = limit_log(X, Z, V)
        if img.is_zero:
            continue
        if img.page is None:
            x, y = (cx, top) if img.phi == 0.0 else (cx, bottom)
        else:
            x, y = _bezier(arcs[page_edge_id(img.page)], img.phi / math.pi)
        out.append(f'<circle stroke="none" fill="#2e7d32" cx="{x:.2f}" cy="{y:.2f}" r="{3 + 2 * min(img.norm, 3):.2f}">'
                   f'<title>{escape(format_vector(V))}</title></circle>')
    out.append("</g>")
    return "\n".join(out)


def csv_rows(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def csv_shadow(X: Cone, Z: ConeVector) -> str:
    sh = shadow(X, Z)
    return csv_rows(((e, repr(lo), repr(hi)) for e, lo, hi in sh.regions), ("edge", "lo", "hi"))


def csv_limitlog(X: Cone, Z: ConeVector, vectors) -> str:
    rows = []
    for V in vectors:
        img = limit_log(X, Z, V)
        rows.append((format_vector(V), "spine" if img.page is None else str(img.page), repr(img.phi), repr(img.norm)))
    return csv_rows(rows, ("vector", "page", "phi", "norm"))
