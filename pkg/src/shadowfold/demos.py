"""Figure-level reproductions on bundled spaces."""

from __future__ import annotations

import math

from .cone import PI, Cone
from .spacefile import load_space
from .tangent import angle_at, log_at, parallel_distance_profile, parallel_ray_from, triangle_angle


def angle_discontinuity_demo(radii=(1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6), direction: float = 3 * PI / 4,
                             space: str = "quadrantplane") -> list[dict]:
    """Angle between the parallel rays to ``Ox`` and ``Oy`` at points ``p -> O``.

    In the plane with an open quadrant removed, ``Ox`` and ``Oy`` are the
    ends of the direction arc (coordinates ``0`` and ``3pi/2``).  Points
    ``p`` run down the bisecting ray at ``direction``.  Each row reports
    the open-book angle and, as a check from distances alone, the
    comparison angle of a small triangle at ``p``.
    """
    X = Cone(load_space(space).graph)
    G = X.graph
    ends = [G.vertex_point(e) for e in (G.edges["e0"].u, G.edges["e0"].v)]
    Ox, Oy = (X.vector(d, 1.0) for d in ends)
    rows = []
    for r in radii:
        p = X.vector(G.point("e0", direction), r)
        rx, ry = parallel_ray_from(X, p, Ox), parallel_ray_from(X, p, Oy)
        h = 1e-3 * r
        tx, ty = log_at(X, p, rx(h)), log_at(X, p, ry(h))
        a, b = rx(h), ry(h)
        comparison = triangle_angle(X.distance(p, a), X.distance(p, b), X.distance(a, b))
        rows.append({"radius": r, "angle": angle_at(X, p, tx, ty), "comparison_angle": comparison})
    rows.append({"radius": 0.0, "angle": X.angle(Ox, Oy), "comparison_angle": X.angle(Ox, Oy)})
    return rows


def no_ray_profile(t_max: float = 20.0, n: int = 401, q_direction: float = 1.2 * PI, space: str = "kale3pi"):
    """Distance from a ray through the apex to the parallel ray from a shadow point.

    The reference ray leaves ``p`` (direction 0, radius 1), passes
    through ``O`` and continues along ``V`` (direction ``3pi/2``, in the
    middle of the shadow of ``p``).  ``q`` sits in that shadow.  The
    distance stays bounded but is not constant, so no parallel ray at
    constant distance exists.
    """
    X = Cone(load_space(space).graph)
    G = X.graph
    p = X.vector(G.point("e0", 0.0), 1.0)
    V = X.vector(G.point("e0", 1.5 * PI), 1.0)
    q = X.vector(G.point("e0", q_direction), 1.0)
    prof = parallel_distance_profile(X, q, V, t_max, n, start=p)
    return {
        "p": p,
        "q": q,
        "V": V,
        "profile": prof,
        "max": prof.max,
        "min": prof.min,
        "spread": prof.max - prof.min,
        "bound": prof.bound,
        "bounded": prof.bounded,
        "constant": prof.constant,
        "q_in_shadow": G.distance(q.dir, p.dir) >= PI,
    }


def jump(rows) -> float:
    """Angle at the apex minus the common angle at the other basepoints."""
    inner = [r["angle"] for r in rows if r["radius"] > 0]
    apex = [r["angle"] for r in rows if r["radius"] == 0]
    return apex[0] - max(inner) if inner and apex else math.nan
