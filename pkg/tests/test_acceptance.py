"""Acceptance criteria at their stated tolerances and trial counts.

Each check records a line in ``conftest.ACCEPTANCE``; the terminal
summary prints one PASS/FAIL line per criterion with its sub-lines.
Run with ``pytest tests/test_acceptance.py -v``.
"""

import math

import numpy as np
import pytest

import shadowfold.limitlog as ll
from conftest import ACCEPTANCE, CAT0_SPACES, PI, cone
from shadowfold.cone import THROUGH_APEX
from shadowfold.demos import angle_discontinuity_demo, jump, no_ray_profile
from shadowfold.errors import HypothesisError
from shadowfold.frechet import WeightedConfiguration, frechet_mean_grid, frechet_mean_sturm
from shadowfold.suites import SUITES, run_suite, run_trial

SEED = 0
TIME_LIMIT = 60.0


def record(criterion, label, ok, detail=""):
    ACCEPTANCE.append((criterion, label, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion} {label}: {detail}")


def suite_line(criterion, name, space, res, ok=None, extra=""):
    ok = res.passed and res.elapsed < TIME_LIMIT if ok is None else ok
    s = res.stats
    detail = (f"{s['completed']} trials, {s['failed']} failed, {res.skipped} skipped, "
              f"tol {res.tol:g}, {res.elapsed:.1f}s{extra}")
    if res.failures:
        detail += f", first witness trial {res.failures[0]['trial']}"
    record(criterion, f"{name}[{space}]", ok, detail)
    return ok


def full(res):
    return res.stats["completed"] == res.trials


# ----------------------------------------------------------------------
# 1. comparison triangles


@pytest.mark.parametrize("space", CAT0_SPACES)
def test_c1_cat0(space):
    res = run_suite("cat0", cone(space), space, seed=SEED)
    assert suite_line(1, "cat0", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


def test_c1_positive_curvature_witness():
    X = cone("cone1.5pi")
    res = run_suite("cat0", X, "cone1.5pi", seed=SEED)
    w = res.failures[0] if res.failures else None
    # the witness must reproduce from its trial index alone
    replay = run_trial("cat0", X, SEED, w["trial"]) if w else (None, {})
    ok = bool(w) and replay[0] is False and replay[1]["excess"] == w["excess"] and w["excess"] > 1e-9
    detail = f"{res.stats['failed']} violations in {res.trials} trials"
    if w:
        detail += f", witness trial {w['trial']} excess {w['excess']:.3g} replays={replay[0] is False}"
    record(1, "cat0[cone1.5pi] finds a violation", ok, detail)
    assert ok


# ----------------------------------------------------------------------
# 2-4. homogeneity, first variation, radial transport


@pytest.mark.parametrize("space", CAT0_SPACES)
@pytest.mark.parametrize("crit,suite", [(2, "homogeneity"), (3, "firstvar"), (4, "transport")])
def test_c2_to_c4(crit, suite, space):
    res = run_suite(suite, cone(space), space, seed=SEED)
    assert suite_line(crit, suite, space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


# ----------------------------------------------------------------------
# 5. limit-log invariants


@pytest.mark.parametrize("space", CAT0_SPACES)
@pytest.mark.parametrize("suite", ["norm", "anglez", "sumpi", "contraction"])
def test_c5_pointwise(suite, space):
    res = run_suite(suite, cone(space), space, seed=SEED)
    assert suite_line(5, suite, space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


@pytest.mark.parametrize("space", CAT0_SPACES)
def test_c5_isometry(space):
    res = run_suite("isometry", cone(space), space, seed=SEED)
    s = res.stats
    branching = sum(v for k, v in s.items() if "/False/" in k)
    branching_fail = s.get("failed", 0) - sum(v for k, v in s.items() if k.endswith("/True/False"))
    # apex-passing-miss pairs must never reach the isometry check
    leaked = any(k.startswith(ll.APEX_PASSING_MISS) for k in s)
    extra = f", {branching} branching pairs ({branching_fail} failed)"
    ok = res.passed and s["completed"] > 0 and not leaked and res.elapsed < TIME_LIMIT
    assert suite_line(5, "isometry", space, res, ok, extra)


@pytest.mark.parametrize("space", [s for s in CAT0_SPACES if s != "tripod"])
def test_c5_collapse(space):
    res = run_suite("collapse", cone(space), space, seed=SEED)
    assert suite_line(5, "collapse", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


def test_c5_tripod_collapse_at_a_leaf():
    # tripod shadows are non-empty only when Z points at a leaf
    X = cone("tripod")
    G = X.graph
    T = None
    ok, n = True, 0
    for leaf in "abc":
        Z = X.vector(G.vertex_point(leaf), 1.0)
        T = ll.limit_tangent_cone(X, Z)
        for other in set("abc") - {leaf}:
            for norm in (0.3, 1.0, 2.5):
                img = ll.limit_log(X, Z, X.vector(G.vertex_point(other), norm))
                ok &= img == ll.LimitVector.make(None, PI, norm)
                ok &= T.to_carrier(img) == T.to_carrier(T.minus_spine).scaled(norm)
                n += 1
    record(5, "collapse[tripod leaves]", ok, f"{n} shadow vectors collapse to -spine")
    assert ok


# ----------------------------------------------------------------------
# 6. continuity at the shadow boundary


@pytest.mark.parametrize("space", [s for s in CAT0_SPACES if s != "tripod"])
def test_c6_continuity(space):
    res = run_suite("continuity", cone(space), space, seed=SEED)
    assert suite_line(6, "continuity", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


def test_c6_continuity_tripod_leaves():
    X = cone("tripod")
    G = X.graph
    worst, ok, n = 0.0, True, 0
    for leaf in "abc":
        Z = X.vector(G.vertex_point(leaf), 1.0)
        for other in set("abc") - {leaf}:
            r = ll.check_continuity(X, Z, G.vertex_point(other))
            ok &= r["passed"] and r["monotone"] and r["final_gap"] < 1e-6
            worst = max(worst, r["final_gap"])
            n += 1
    record(6, "continuity[tripod leaves]", ok, f"{n} boundary points, worst final gap {worst:.3g}")
    assert ok


# ----------------------------------------------------------------------
# 7. angle discontinuity figure


def test_c7_angle_discontinuity():
    rows = angle_discontinuity_demo()
    inner = [r for r in rows if r["radius"] > 0]
    apex = [r for r in rows if r["radius"] == 0]
    ok = all(abs(r["angle"] - PI / 2) <= 1e-9 for r in inner)
    ok &= len(apex) == 1 and apex[0]["angle"] == PI
    ok &= abs(jump(rows) - PI / 2) <= 1e-9
    worst = max(abs(r["angle"] - PI / 2) for r in inner)
    record(7, "angle table", ok, f"{len(inner)} basepoints, max |angle - pi/2| {worst:.2g}, apex {apex[0]['angle']!r}, jump {jump(rows)!r}")
    assert ok


# ----------------------------------------------------------------------
# 8. bounded, non-constant parallel profile


def test_c8_no_constant_parallel():
    r = no_ray_profile()
    ok = r["q_in_shadow"] and r["bounded"] and r["spread"] > 1e-3
    record(8, "kale3pi profile", ok, f"max-min {r['spread']:.4g}, bound {r['bound']:.4g}, q in shadow {r['q_in_shadow']}")
    assert ok


# ----------------------------------------------------------------------
# 9. hulls


@pytest.mark.parametrize("space", CAT0_SPACES)
def test_c9_hull_subcommutation(space):
    res = run_suite("hullsub", cone(space), space, seed=SEED)
    worst = max((f["max_gap"] for f in res.failures), default=0.0)
    extra = f", worst gap {worst:.3g}" if res.failures else ""
    assert suite_line(9, "hullsub", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT, extra)


# ----------------------------------------------------------------------
# 10. Frechet means


@pytest.mark.parametrize("space", CAT0_SPACES)
def test_c10_sturm_vs_grid(space):
    res = run_suite("frechet", cone(space), space, seed=SEED)
    assert suite_line(10, "sturm-vs-grid", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


def test_c10_tripod_symmetric_apex():
    X = cone("tripod")
    G = X.graph
    cfg = WeightedConfiguration(tuple(X.vector(G.vertex_point(v), 1.0) for v in "abc"), (1.0, 1.0, 1.0))
    grid = frechet_mean_grid(X, cfg, 1e-3 * cfg.diameter(X))
    sturm = frechet_mean_sturm(X, cfg, 20_000, seed=SEED)
    ok = grid.mean.is_apex and sturm.mean.norm <= 2e-3 * cfg.diameter(X)
    record(10, "tripod symmetric mean", ok, f"grid apex {grid.mean.is_apex}, sturm |mean| {sturm.mean.norm:.3g}")
    assert ok


@pytest.mark.parametrize("space", [s for s in CAT0_SPACES if s != "tripod"])
def test_c10_drag(space):
    res = run_suite("drag", cone(space), space, seed=SEED)
    assert suite_line(10, "drag", space, res, res.passed and full(res) and res.elapsed < TIME_LIMIT)


# ----------------------------------------------------------------------
# 11. apex-passing-miss regression


def test_c11_apex_passing_miss():
    X = cone("quadrantplane")
    G = X.graph
    eps = 0.1
    Z, V, W = (X.vector(G.point("e0", a), 1.0) for a in (1.25 * PI, PI / 4 + eps, 1.5 * PI))
    T = ll.limit_tangent_cone(X, Z)
    image = T.angle(ll.limit_log(X, Z, V), ll.limit_log(X, Z, W))
    # planar model: the two directions as unit vectors in R^2
    planar = math.acos(float(np.dot([math.cos(PI / 4 + eps), math.sin(PI / 4 + eps)], [0.0, -1.0])))
    r = ll.check_contraction(X, V, W, Z)
    ok = X.geodesic(V, W).kind == THROUGH_APEX
    ok &= ll.geodesic_shadow_classification(X, V, W, Z) == ll.APEX_PASSING_MISS
    ok &= abs(planar - (3 * PI / 4 + eps)) <= 1e-12 and abs(image - planar) <= 1e-12
    ok &= r["passed"] and r["angle_after"] < r["angle_before"] and r["distance_after"] < r["distance_before"]
    try:
        ll.check_isometry(X, V, W, Z)
        excluded = False
    except HypothesisError:
        excluded = True
    ok &= excluded
    record(11, "quadrant apex-passing-miss", ok,
           f"image angle {image!r} vs planar {planar!r}, angle {r['angle_before']:.6f} -> {r['angle_after']:.6f}, "
           f"excluded from isometry {excluded}")
    assert ok


def test_suites_cover_the_criteria():
    assert {"cat0", "homogeneity", "firstvar", "transport", "norm", "anglez", "sumpi", "contraction",
            "isometry", "collapse", "continuity", "hullsub", "frechet", "drag"} <= set(SUITES)
