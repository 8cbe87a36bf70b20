import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import CAT0_SPACES, PI, cone, cone_vectors
from shadowfold.errors import ExpRangeError, ValidationError
from shadowfold.metric_graph import Germ, girth
from shadowfold.suites import random_tangent
from shadowfold.tangent import (
    TangentAtPoint,
    angle_at,
    exp_at,
    first_variation_check,
    log_at,
    open_book_angle,
    parallel_distance_profile,
    parallel_ray_from,
    radial_chord_check,
    radial_transport,
    radial_transport_from_apex,
    tangent_sphere_at,
    theta_graph,
)


def at(X, x, r, edge="e0"):
    return X.vector(X.graph.point(edge, x), r)


# ----------------------------------------------------------------------
# tangent spheres and angles


def test_interior_direction_gives_plane():
    X = cone("kale2.5pi")
    T = tangent_sphere_at(X, at(X, 1.0, 1.0))
    assert len(T.edges) == 2
    assert girth(T) == pytest.approx(2 * PI)


def test_tripod_center_gives_three_pages():
    X = cone("tripod")
    T = tangent_sphere_at(X, X.vector(X.graph.vertex_point("center"), 1.0))
    assert len(T.edges) == 3
    assert girth(T) == pytest.approx(2 * PI)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_theta_graph_girth(k):
    assert girth(theta_graph(tuple(Germ(f"e{i}", 1) for i in range(k)))) == pytest.approx(2 * PI)


def test_open_book_angle_examples():
    a, b = Germ("e", 1), Germ("e", -1)
    assert open_book_angle(a, PI / 4, a, PI / 2) == pytest.approx(PI / 4)
    assert open_book_angle(a, PI / 2, b, PI / 2) == pytest.approx(PI)
    eps = 0.1
    assert open_book_angle(a, PI - eps, b, PI / 4) == pytest.approx(3 * PI / 4 + eps)


# ----------------------------------------------------------------------
# log and exp


def test_log_examples():
    X = cone("kale2.5pi")
    z = at(X, 1.0, 1.0)
    U = log_at(X, z, at(X, 1.0, 3.5))
    assert (U.page, U.phi, U.magnitude) == (None, 0.0, 2.5)
    U = log_at(X, z, X.apex)
    assert (U.page, U.phi, U.magnitude) == (None, PI, 1.0)


def test_log_matches_euclidean_in_flat_plane():
    X = cone("flat")
    rng = np.random.default_rng(2)
    for _ in range(200):
        z, w = X.random_vector(rng, 2.0, 0.1), X.random_vector(rng, 2.0, 0.1)
        U = log_at(X, z, w)
        pz = z.norm * np.array([math.cos(z.dir.offset if z.dir.edge else 0.0), math.sin(z.dir.offset if z.dir.edge else 0.0)])
        pw = w.norm * np.array([math.cos(w.dir.offset if w.dir.edge else 0.0), math.sin(w.dir.offset if w.dir.edge else 0.0)])
        diff = pw - pz
        assert U.magnitude == pytest.approx(np.linalg.norm(diff), abs=1e-12)
        # polar angle from the outward radial direction
        radial = pz / np.linalg.norm(pz)
        phi = math.acos(max(-1.0, min(1.0, float(diff @ radial) / np.linalg.norm(diff))))
        assert U.phi == pytest.approx(phi, abs=1e-7)


def test_exp_examples():
    X = cone("kale2.5pi")
    z = at(X, 1.0, 2.0)
    assert exp_at(X, z, TangentAtPoint.make(z, None, 0.0, 0.5)) == at(X, 1.0, 2.5)
    assert exp_at(X, z, TangentAtPoint.make(z, None, PI, 0.5)) == at(X, 1.0, 1.5)
    assert exp_at(X, z, TangentAtPoint.make(z, None, PI, 2.0)) == X.apex
    with pytest.raises(ExpRangeError):
        exp_at(X, z, TangentAtPoint.make(z, None, PI, 3.0))


def test_exp_refuses_to_cross_a_vertex_direction():
    X = cone("tripod")
    z = at(X, 0.1, 1.0, "ea")
    with pytest.raises(ExpRangeError):
        exp_at(X, z, TangentAtPoint.make(z, Germ("ea", -1), PI / 2, 5.0))


@pytest.mark.parametrize("name", CAT0_SPACES)
@given(data=st.data())
def test_log_exp_round_trip(name, data):
    X = cone(name)
    z = data.draw(cone_vectors(X, rmin=0.1))
    germs = X.graph.germs(z.dir)
    page = data.draw(st.sampled_from(germs))
    U = TangentAtPoint.make(z, page, data.draw(st.floats(0.0, PI)), data.draw(st.floats(1e-3, 2.0)))
    try:
        w = exp_at(X, z, U)
    except ExpRangeError:
        assume(False)
    assume(w != z and not w.is_apex)
    back = log_at(X, z, w)
    assert back.magnitude == pytest.approx(U.magnitude, rel=1e-9, abs=1e-12)
    assert angle_at(X, z, back, U) <= 1e-7


def test_tangent_validation():
    X = cone("kale2.5pi")
    z = at(X, 1.0, 1.0)
    with pytest.raises(ValidationError):
        TangentAtPoint.make(z, None, 1.0, 1.0)
    with pytest.raises(ValidationError):
        TangentAtPoint.make(z, Germ("e0", 1), 4.0, 1.0)
    with pytest.raises(ValidationError):
        TangentAtPoint.make(X.apex, None, 0.0, 1.0)


# ----------------------------------------------------------------------
# parallel rays


def test_parallel_ray_along_own_direction_is_constant():
    X = cone("kale2.5pi")
    z = at(X, 1.0, 1.5)
    prof = parallel_distance_profile(X, z, at(X, 1.0, 1.0), 10.0, 51)
    assert prof.constant
    assert prof.max == pytest.approx(z.norm)


def test_flat_perpendicular_parallel_is_euclidean():
    X = cone("flat")
    z = at(X, 0.5, 2.0)
    prof = parallel_distance_profile(X, z, at(X, 0.5 + PI / 2, 1.0), 20.0, 101)
    assert prof.constant
    assert prof.max == pytest.approx(2.0, abs=1e-12)


def test_parallel_ray_through_apex():
    X = cone("kale2.5pi")
    z = at(X, 0.0, 1.0)
    V = at(X, 1.25 * PI, 1.0)
    ray = parallel_ray_from(X, z, V)
    assert ray.through_apex
    assert ray(1.0) == X.apex
    assert ray(3.0) == at(X, 1.25 * PI, 2.0)
    prof = parallel_distance_profile(X, z, V, 10.0, 101)
    # |t - (t - 1)| once past the apex
    assert prof.values[prof.ts >= 1.0] == pytest.approx(np.ones(int((prof.ts >= 1.0).sum())), abs=1e-12)


@pytest.mark.parametrize("name", CAT0_SPACES)
@given(data=st.data())
def test_parallel_rays_are_bounded_and_additive(name, data):
    X = cone(name)
    z = data.draw(cone_vectors(X, rmin=0.1))
    V = data.draw(cone_vectors(X, rmin=1.0, rmax=1.0))
    prof = parallel_distance_profile(X, z, V, 15.0, 31)
    assert prof.bounded
    ray = parallel_ray_from(X, z, V)
    s, t = data.draw(st.floats(0.0, 5.0)), data.draw(st.floats(0.0, 5.0))
    assert X.distance(ray(s), ray(s + t)) == pytest.approx(t, rel=1e-9, abs=1e-9)


def test_kale3pi_parallel_profile_is_bounded_not_constant():
    X = cone("kale3pi")
    p, V, q = at(X, 0.0, 1.0), at(X, 1.5 * PI, 1.0), at(X, 1.2 * PI, 1.0)
    prof = parallel_distance_profile(X, q, V, 20.0, 401, start=p)
    assert prof.bounded
    assert prof.max - prof.min > 1e-3


# ----------------------------------------------------------------------
# radial transport


def test_transport_to_same_point_is_identity():
    X = cone("kale2.5pi")
    q = at(X, 1.0, 1.0)
    U = TangentAtPoint.make(q, Germ("e0", 1), 0.7, 2.0)
    assert radial_transport(X, q, q, U) == U


def test_transport_keeps_radial_vectors_radial():
    X = cone("kale2.5pi")
    q, z = at(X, 1.0, 1.0), at(X, 1.0, 3.0)
    T = radial_transport(X, q, z, TangentAtPoint.make(q, None, PI, 0.4))
    assert (T.page, T.phi, T.magnitude) == (None, PI, 0.4)


def test_transport_preserves_angles_by_chord_construction():
    X = cone("kale2.5pi")
    q, z = at(X, 1.0, 1.0), at(X, 1.0, 3.0)
    U1 = TangentAtPoint.make(q, Germ("e0", 1), 0.6, 1.0)
    U2 = TangentAtPoint.make(q, Germ("e0", -1), 2.1, 1.0)
    r = radial_chord_check(X, q, z, U1, U2)
    assert r["angle_z"] == pytest.approx(r["oracle_angle_z"], abs=1e-12)
    assert r["angle_z"] == pytest.approx(r["oracle_angle_q"], abs=1e-12)
    assert r["chord_ratio_error"] < 1e-9


@pytest.mark.parametrize("name", CAT0_SPACES)
def test_transport_chord_oracle_random(name):
    X = cone(name)
    rng = np.random.default_rng(17)
    for _ in range(100):
        q = X.random_vector(rng, 2.0, 0.1)
        z = X.vector(q.dir, float(rng.uniform(0.1, 3.0)))
        U1, U2 = random_tangent(X, q, rng), random_tangent(X, q, rng)
        r = radial_chord_check(X, q, z, U1, U2)
        assert abs(r["angle_z"] - r["oracle_angle_z"]) <= 1e-12
        assert abs(r["angle_z"] - r["oracle_angle_q"]) <= 1e-12


def test_transport_from_apex_examples():
    X = cone("kale2.5pi")
    Z = at(X, 1.0, 1.5)
    T = radial_transport_from_apex(X, Z, Z)
    assert (T.page, T.phi, T.magnitude) == (None, 0.0, 1.5)
    a = radial_transport_from_apex(X, Z, at(X, 1.0 + 1.2 * PI, 2.0))
    b = radial_transport_from_apex(X, Z, at(X, 1.0 + 1.4 * PI, 2.0))
    assert (a.page, a.phi, a.magnitude) == (None, PI, 2.0)
    assert (a.page, a.phi, a.magnitude) == (b.page, b.phi, b.magnitude)
    c = radial_transport_from_apex(X, Z, at(X, 1.0 + PI / 3, 5.0))
    assert c.page == Germ("e0", 1)
    assert c.phi == pytest.approx(PI / 3, abs=1e-12)
    assert c.magnitude == 5.0


# ----------------------------------------------------------------------
# first variation


def test_first_variation_flat_examples():
    X = cone("flat")
    q, p = at(X, 0.0, 1.0), at(X, 0.0, 2.0)
    toward = TangentAtPoint.make(q, None, 0.0, 1.0)
    assert first_variation_check(X, p, q, toward)["difference"] == pytest.approx(-1.0, abs=1e-3)
    side = TangentAtPoint.make(q, Germ("e0", 1), PI / 2, 1.0)
    assert first_variation_check(X, p, q, side)["difference"] == pytest.approx(0.0, abs=1e-3)


def test_first_variation_through_apex():
    X = cone("kale2.5pi")
    q, p = at(X, 0.0, 1.0), at(X, 1.25 * PI, 1.0)
    out = TangentAtPoint.make(q, None, 0.0, 1.0)
    r = first_variation_check(X, p, q, out)
    assert r["expected"] == pytest.approx(1.0)
    assert r["passed"]
