import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import ALL_SPACES, PI, circle, graph_points, metric_graphs
from shadowfold.errors import ValidationError
from shadowfold.metric_graph import Germ, GraphPoint, MetricGraph, girth, graph_distance, local_degree, shortest_path, validate_cat1
from shadowfold.spacefile import load_space


def path_graph(length):
    return MetricGraph(["a", "b"], [("e", "a", "b", length)])


def tripod():
    return load_space("tripod").graph


# ----------------------------------------------------------------------
# worked examples


def test_path_graph_endpoints():
    G = path_graph(1.5 * PI)
    assert graph_distance(G, G.vertex_point("a"), G.vertex_point("b")) == pytest.approx(1.5 * PI, abs=1e-15)


def test_distance_to_self_is_zero():
    G = circle(2.5 * PI)
    p = G.point("e0", 1.0)
    assert graph_distance(G, p, p) == 0.0


def test_circle_half_way_tie():
    G = circle(2.5 * PI)
    a, b = G.vertex_point("o"), G.point("e0", 1.25 * PI)
    assert graph_distance(G, a, b) == pytest.approx(1.25 * PI, abs=1e-15)
    assert shortest_path(G, a, b).tie


def test_circle_short_arc_unique():
    G = circle(2.5 * PI)
    path = shortest_path(G, G.vertex_point("o"), G.point("e0", PI / 2))
    assert path.length == pytest.approx(PI / 2, abs=1e-15)
    assert not path.tie
    # the other arc is 5pi/2 - pi/2 = 2pi, far longer
    assert 2.5 * PI - PI / 2 > path.length


def test_flat_circle_antipodal_tie():
    G = circle(2 * PI)
    path = shortest_path(G, G.point("e0", 0.3), G.point("e0", 0.3 + PI))
    assert path.tie
    assert path.length == pytest.approx(PI, abs=1e-14)


def test_tripod_leaf_tips_through_center():
    G = tripod()
    path = shortest_path(G, G.vertex_point("a"), G.vertex_point("b"))
    assert path.length == pytest.approx(PI, abs=1e-15)
    assert not path.tie
    assert path.steps == (Germ("ea", -1), Germ("eb", 1))


def test_initial_direction_from_branch_vertex():
    G = tripod()
    path = shortest_path(G, G.vertex_point("center"), G.point("ec", 0.4))
    assert path.initial_direction() == Germ("ec", 1)


def test_initial_direction_interior_backward():
    G = path_graph(3.0)
    assert shortest_path(G, G.point("e", 2.0), G.point("e", 0.5)).initial_direction() == Germ("e", -1)


def test_initial_direction_zero_length_path():
    G = path_graph(3.0)
    p = G.point("e", 1.0)
    with pytest.raises(ValidationError):
        shortest_path(G, p, p).initial_direction()


@pytest.mark.parametrize("length,passed", [(2.5 * PI, True), (1.5 * PI, False), (2 * PI, True)])
def test_circle_girth(length, passed):
    rep = validate_cat1(circle(length))
    assert rep.girth == length
    assert rep.passed is passed


def test_petersen_girth():
    G = load_space("petersen").graph
    assert girth(G) == pytest.approx(2.5 * PI, abs=1e-14)
    assert validate_cat1(G).passed


def test_forest_girth_is_infinite():
    assert girth(tripod()) == math.inf


@pytest.mark.parametrize("name", ALL_SPACES)
def test_bundled_girth_matches_cycle_basis_oracle(name):
    G = load_space(name).graph
    assert girth(G) == pytest.approx(oracles.girth(G), rel=1e-12)


def test_local_degree():
    G = tripod()
    assert local_degree(G, G.point("ea", 0.3)) == 2
    assert local_degree(G, G.vertex_point("center")) == 3
    assert local_degree(G, G.vertex_point("a")) == 1
    from shadowfold.tangent import theta_graph

    T = theta_graph((Germ("a", 1), Germ("b", 1), Germ("c", -1), Germ("d", 1)))
    assert local_degree(T, T.vertex_point("plus")) == 4


def test_loop_vertex_has_two_germs():
    G = circle(2 * PI)
    assert G.germs(G.vertex_point("o")) == [Germ("e0", 1), Germ("e0", -1)]


# ----------------------------------------------------------------------
# validation


def test_rejects_disconnected():
    with pytest.raises(ValidationError):
        MetricGraph(["a", "b", "c"], [("e", "a", "b", 1.0)])


@pytest.mark.parametrize("length", [0.0, -1.0, math.inf, math.nan])
def test_rejects_bad_lengths(length):
    with pytest.raises(ValidationError):
        MetricGraph(["a"], [("e", "a", "a", length)])


def test_rejects_unknown_vertex_and_duplicates():
    with pytest.raises(ValidationError):
        MetricGraph(["a"], [("e", "a", "b", 1.0)])
    with pytest.raises(ValidationError):
        MetricGraph(["a", "a"], [])
    with pytest.raises(ValidationError):
        MetricGraph(["a"], [("e", "a", "a", 1.0), ("e", "a", "a", 2.0)])


def test_point_canonicalization():
    G = path_graph(2.0)
    assert G.point("e", 0.0) == GraphPoint.at_vertex("a")
    assert G.point("e", 2.0) == GraphPoint.at_vertex("b")
    with pytest.raises(ValidationError):
        G.point("e", 2.5)
    with pytest.raises(ValidationError):
        G.point("nope", 0.5)


# ----------------------------------------------------------------------
# oracles and properties


@given(st.data())
def test_distance_matches_networkx(data):
    G = data.draw(metric_graphs())
    a, b = data.draw(graph_points(G)), data.draw(graph_points(G))
    assert G.distance(a, b) == pytest.approx(oracles.graph_distance(G, a, b), rel=1e-12, abs=1e-12)


@given(st.data())
def test_path_length_equals_distance(data):
    G = data.draw(metric_graphs())
    a, b = data.draw(graph_points(G)), data.draw(graph_points(G))
    path = G.shortest_path(a, b)
    assert path.length == pytest.approx(G.distance(a, b), rel=1e-12, abs=1e-12)
    assert path.point_at(path.length) == G.canonical(b)


@given(metric_graphs())
def test_girth_matches_cycle_basis(G):
    assert girth(G) == pytest.approx(oracles.girth(G), rel=1e-12)


@given(st.data())
def test_metric_axioms(data):
    G = data.draw(metric_graphs())
    a, b, c = (data.draw(graph_points(G)) for _ in range(3))
    dab, dba = G.distance(a, b), G.distance(b, a)
    assert dab >= 0.0
    assert dab == pytest.approx(dba, abs=1e-12)
    assert G.distance(a, a) == 0.0
    if a != b:
        assert dab > 0.0
    assert dab <= G.distance(a, c) + G.distance(c, b) + 1e-12


@given(st.data())
def test_subdivision_preserves_distances(data):
    G = data.draw(metric_graphs())
    e = G.edges[data.draw(st.sampled_from(sorted(G.edges)))]
    split = data.draw(st.floats(0.05, 0.95)) * e.length
    H = G.subdivide(e.id, split)
    a, b = data.draw(graph_points(G)), data.draw(graph_points(G))
    ha, hb = G.refine_point(H, e.id, split, a), G.refine_point(H, e.id, split, b)
    assert H.distance(ha, hb) == pytest.approx(G.distance(a, b), rel=1e-12, abs=1e-12)
    assert girth(H) == pytest.approx(girth(G), rel=1e-12)


@given(metric_graphs(), st.floats(0.1, 10.0))
def test_girth_scales_linearly(G, c):
    g = girth(G)
    assert girth(G.scaled(c)) == pytest.approx(c * g if math.isfinite(g) else g, rel=1e-12)


@given(st.data())
def test_canonical_is_idempotent(data):
    G = data.draw(metric_graphs())
    p = data.draw(graph_points(G))
    assert G.canonical(G.canonical(p)) == G.canonical(p)


@pytest.mark.parametrize("name", [n for n in ALL_SPACES if n != "cone1.5pi"])
def test_no_ties_below_pi_when_girth_is_large(name):
    G = load_space(name).graph
    rng = np.random.default_rng(3)
    pts = [G.sample_point(rng) for _ in range(40)] + [G.vertex_point(v) for v in G.vertices]
    for a, b in itertools.combinations(pts, 2):
        if G.distance(a, b) < PI - 1e-9:
            assert not G.shortest_path(a, b).tie


def test_short_paths_are_unique_by_enumeration():
    # every simple path between the two points, by brute force
    G = load_space("petersen").graph
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b = G.sample_point(rng), G.sample_point(rng)
        d = G.distance(a, b)
        if d >= PI or a == b:
            continue
        H = oracles.nx_graph(G, [a, b])
        paths = nx.all_simple_edge_paths(H, oracles.node_of(a), oracles.node_of(b), cutoff=6)
        best = sorted(sum(H.edges[u, v, k]["weight"] for u, v, k in path) for path in paths)
        assert best[0] == pytest.approx(d, abs=1e-12)
        assert len(best) == 1 or best[1] > d + 1e-9
