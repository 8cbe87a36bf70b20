import math

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from shadowfold.cone import Cone
from shadowfold.metric_graph import MetricGraph
from shadowfold.spacefile import load_space

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PI = math.pi
CAT0_SPACES = ["flat", "kale2.5pi", "kale3pi", "quadrantplane", "tripod", "openbook3", "petersen"]
ALL_SPACES = CAT0_SPACES + ["cone1.5pi"]


def cone(name: str) -> Cone:
    return Cone(load_space(name).graph)


def circle(length: float) -> MetricGraph:
    return MetricGraph(["o"], [("e0", "o", "o", length)])


@pytest.fixture(params=CAT0_SPACES)
def cat0_space(request):
    return request.param, cone(request.param)


@st.composite
def metric_graphs(draw, max_vertices: int = 5, max_extra: int = 4):
    """Small connected multigraphs (loops and parallel edges allowed)."""
    n = draw(st.integers(1, max_vertices))
    names = [f"v{i}" for i in range(n)]
    length = st.floats(0.2, 4.0, allow_nan=False)
    edges = []
    for i in range(1, n):
        edges.append((f"t{i}", names[draw(st.integers(0, i - 1))], names[i], draw(length)))
    for k in range(draw(st.integers(0 if n > 1 else 1, max_extra))):
        edges.append((f"x{k}", names[draw(st.integers(0, n - 1))], names[draw(st.integers(0, n - 1))], draw(length)))
    return MetricGraph(names, edges)


@st.composite
def graph_points(draw, G: MetricGraph):
    ids = sorted(G.edges)
    e = G.edges[draw(st.sampled_from(ids))]
    return G.point(e.id, draw(st.floats(0.0, 1.0)) * e.length)


@st.composite
def cone_vectors(draw, X: Cone, rmax: float = 3.0, rmin: float = 0.0):
    p = draw(graph_points(X.graph))
    return X.vector(p, draw(st.floats(rmin, rmax)))


# (criterion, label, ok, detail) records filled by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted({c for c, *_ in ACCEPTANCE}):
        rows = [r for r in ACCEPTANCE if r[0] == n]
        verdict = "PASS" if all(ok for _, _, ok, _ in rows) else "FAIL"
        tr.write_line(f"{verdict} criterion {n}")
        for _, label, ok, detail in rows:
            tr.write_line(f"    {'pass' if ok else 'FAIL'} {label}: {detail}")
