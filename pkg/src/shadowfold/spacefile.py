"""Text formats: space files, weighted configurations, and CLI point syntax.

Space file (UTF-8, ``#`` starts a comment)::

    v <name>
    e <edge-id> <name-u> <name-v> <length>
    m <conevector> <weight>        # optional point masses

Numbers may be written as plain floats or as multiples of pi, e.g.
``3pi/2``, ``5*pi/4``, ``pi``.  Metadata for bundled spaces lives in
``# key: value`` comment lines before the first record.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .metric_graph import Germ, GraphPoint, MetricGraph

_NUMBER = re.compile(
    r"^\s*(?P<sign>[-+])?(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*"
    r"(?P<pi>pi|π)?\s*(?:/\s*(?P<den>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))?\s*$"
)


_TERMS = re.compile(r"(?<![eE*/])(?=[-+])")


def parse_number(text: str) -> float:
    """A float, a multiple of pi such as ``3pi/2``, or a sum of such terms."""
    terms = [t for t in _TERMS.split(text.strip()) if t.strip()]
    if len(terms) > 1:
        return math.fsum(_parse_term(t) for t in terms)
    return _parse_term(text)


def _parse_term(text: str) -> float:
    m = _NUMBER.match(text)
    if not m or (m["num"] is None and m["pi"] is None):
        raise ValidationError(f"cannot parse number {text!r}")
    value = float(m["num"]) if m["num"] is not None else 1.0
    if m["pi"]:
        value *= math.pi
    if m["den"]:
        value /= float(m["den"])
    return -value if m["sign"] == "-" else value


@dataclass
class SpaceFile:
    graph: MetricGraph
    masses: list[tuple[object, float]] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)


def parse_space(text: str) -> SpaceFile:
    vertices: list[str] = []
    edges: list[tuple[str, str, str, float]] = []
    mass_lines: list[tuple[int, str, str]] = []
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            m = re.match(r"#\s*([A-Za-z_]+)\s*:\s*(.*)$", stripped)
            if m and not vertices and not edges:
                meta[m[1].lower()] = m[2].strip()
            continue
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        kind = line[0]
        try:
            if kind == "v" and len(line) == 2:
                vertices.append(line[1])
            elif kind == "e" and len(line) == 5:
                edges.append((line[1], line[2], line[3], parse_number(line[4])))
            elif kind == "m" and len(line) == 3:
                mass_lines.append((lineno, line[1], line[2]))
            else:
                raise ValidationError(f"unrecognised record {raw.strip()!r}")
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    graph = MetricGraph(vertices, edges)
    from .cone import Cone

    X = Cone(graph)
    masses = []
    for lineno, vec, weight in mass_lines:
        try:
            w = parse_number(weight)
            masses.append((parse_vector(X, vec), w))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return SpaceFile(graph, masses, meta)


def format_space(graph: MetricGraph, masses=(), meta: dict[str, str] | None = None) -> str:
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines += [f"v {name}" for name in graph.vertices]
    lines += [f"e {e.id} {e.u} {e.v} {e.length!r}" for e in graph.edges.values()]
    lines += [f"m {format_vector(V)} {w!r}" for V, w in masses]
    return "\n".join(lines) + "\n"


def bundled_names() -> list[str]:
    root = resources.files("shadowfold") / "spaces"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".space"))


def load_space(name_or_path: str) -> SpaceFile:
    """Load a space file from disk, falling back to the bundled corpus."""
    path = Path(name_or_path)
    if path.is_file():
        return parse_space(path.read_text(encoding="utf-8"))
    name = path.name if path.name.endswith(".space") else path.name + ".space"
    res = resources.files("shadowfold") / "spaces" / name
    if not res.is_file():
        raise ValidationError(f"no such space file or bundled space: {name_or_path}")
    return parse_space(res.read_text(encoding="utf-8"))


# ----------------------------------------------------------------------
# point syntax


def parse_point(graph: MetricGraph, text: str) -> GraphPoint:
    """``<edge-id>:<offset>`` or ``v:<name>``."""
    head, sep, tail = text.partition(":")
    if not sep:
        raise ValidationError(f"graph point {text!r} must look like edge:offset or v:name")
    if head == "v":
        return graph.vertex_point(tail)
    return graph.point(head, parse_number(tail))


def format_point(p: GraphPoint) -> str:
    return str(p)


def parse_vector(X, text: str):
    """``<graphpoint>@<radius>``; ``O`` denotes the apex."""
    if text in ("O", "apex"):
        return X.apex
    point, sep, radius = text.rpartition("@")
    if not sep:
        raise ValidationError(f"cone vector {text!r} must look like point@radius")
    return X.vector(parse_point(X.graph, point), parse_number(radius))


def format_vector(V) -> str:
    if V.is_apex:
        return "O"
    return f"{V.dir}@{V.norm!r}"


def parse_germ(graph: MetricGraph, at: GraphPoint, text: str) -> Germ:
    """Germ syntax: ``e1+``/``e1-``, or a bare edge id when unambiguous at ``at``."""
    germs = graph.germs(at)
    if text[-1:] in "+-" and text[:-1] in graph.edges:
        g = Germ.parse(text)
        if g not in germs:
            raise ValidationError(f"germ {text} does not leave {at}")
        return g
    matches = [g for g in germs if g.edge == text]
    if len(matches) != 1:
        raise ValidationError(f"page {text!r} is {'ambiguous' if matches else 'not incident'} at {at}; use {text}+ or {text}-")
    return matches[0]


def parse_tangent(X, text: str):
    """``<conevector>|<page|radial>|<phi>|<magnitude>``."""
    from .tangent import TangentAtPoint

    parts = text.split("|")
    if len(parts) != 4:
        raise ValidationError(f"tangent {text!r} needs four |-separated fields")
    base = parse_vector(X, parts[0])
    if base.is_apex:
        raise ValidationError("tangent base must not be the apex")
    page = None if parts[1] == "radial" else parse_germ(X.graph, base.dir, parts[1])
    return TangentAtPoint.make(base, page, parse_number(parts[2]), parse_number(parts[3]))


def format_tangent(U) -> str:
    page = "radial" if U.page is None else str(U.page)
    return f"{format_vector(U.base)}|{page}|{U.phi!r}|{U.magnitude!r}"
