"""Seeded randomized verification suites.

Trial ``i`` of a run with master seed ``s`` draws everything from
``numpy.random.default_rng([s, i])``, so any failure can be replayed on
its own.  A trial returns ``(ok, witness)`` or raises
:class:`HypothesisError` when the sampled input falls outside the
statement being checked; such trials are counted as skipped.
"""

from __future__ import annotations

import os
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import limitlog as ll
from .cone import PI, Cone, ConeVector, comparison_trial
from .errors import HypothesisError
from .frechet import WeightedConfiguration, frechet_mean_grid, frechet_mean_sturm, shadow_drag_experiment
from .tangent import (
    TangentAtPoint,
    first_variation_check,
    radial_chord_check,
    radial_transport_from_apex,
)


def default_seed() -> int:
    return int(os.environ.get("SHADOWFOLD_SEED", "0"))


@dataclass
class CheckSuiteResult:
    suite: str
    space: str
    trials: int
    seed: int
    tol: float
    failures: list[dict] = field(default_factory=list)
    skipped: int = 0
    elapsed: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "space": self.space,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "failures": self.stats.get("failed", len(self.failures)),
            "skipped": self.skipped,
            "elapsed": round(self.elapsed, 3),
            "passed": self.passed,
        }


# ----------------------------------------------------------------------
# samplers


def random_tangent(X: Cone, z: ConeVector, rng: np.random.Generator, magnitude: float = 1.0) -> TangentAtPoint:
    germs = X.graph.germs(z.dir)
    page = germs[int(rng.integers(len(germs)))]
    return TangentAtPoint.make(z, page, float(rng.uniform(0.0, PI)), magnitude)


def shadow_vector(X: Cone, Z: ConeVector, rng: np.random.Generator, norm: float, boundary: bool = False) -> ConeVector:
    sh = ll.shadow(X, Z)
    if not sh.regions:
        raise HypothesisError("empty shadow")
    edge, lo, hi = sh.regions[int(rng.integers(len(sh.regions)))]
    if boundary:
        x = lo if rng.uniform() < 0.5 else hi
    else:
        x = float(rng.uniform(lo, hi))
    return X.vector(X.graph.point(edge, x), norm)


def mixed_vector(X: Cone, Z: ConeVector, rng: np.random.Generator, rmax: float = 2.0) -> ConeVector:
    """Uniform most of the time, but biased toward the shadow of ``Z`` and its boundary."""
    u = rng.uniform()
    try:
        if u < 0.15:
            return shadow_vector(X, Z, rng, float(rng.uniform(0.0, rmax)))
        if u < 0.25:
            return shadow_vector(X, Z, rng, float(rng.uniform(0.0, rmax)), boundary=True)
    except HypothesisError:
        pass
    return X.random_vector(rng, rmax)


def random_configuration(X: Cone, rng: np.random.Generator, nmin: int = 3, nmax: int = 7) -> WeightedConfiguration:
    n = int(rng.integers(nmin, nmax + 1))
    pts = tuple(X.random_vector(rng, 2.0, 0.2) for _ in range(n))
    return WeightedConfiguration(pts, tuple(float(w) for w in rng.uniform(0.5, 2.0, n)))


# ----------------------------------------------------------------------
# trials


def trial_cat0(X, rng, tol):
    return comparison_trial(X, rng, tol)


def trial_homogeneity(X, rng, tol):
    V, W = X.random_vector(rng), X.random_vector(rng)
    t = float(rng.uniform())
    r = X.scaled_geodesic_check(V, W, t, tol=tol)
    return r["passed"], {"V": str(V), "W": str(W), "t": t, **r}


def trial_firstvar(X, rng, tol):
    p, q = X.random_vector(rng, 2.0, 0.1), X.random_vector(rng, 2.0, 0.1)
    U = random_tangent(X, q, rng)
    r = first_variation_check(X, p, q, U, tol=tol)
    return r["passed"], {"p": str(p), "q": str(q), "page": str(U.page), "phi": U.phi, **r}


def trial_transport(X, rng, tol):
    q = X.random_vector(rng, 2.0, 0.1)
    z = X.vector(q.dir, float(rng.uniform(0.1, 3.0)))
    U1, U2 = random_tangent(X, q, rng), random_tangent(X, q, rng)
    r = radial_chord_check(X, q, z, U1, U2)
    err = max(abs(r["angle_z"] - r["oracle_angle_q"]), abs(r["angle_z"] - r["oracle_angle_z"]), abs(r["angle_q"] - r["angle_z"]))
    w = {"q": str(q), "z": str(z), "U1": (str(U1.page), U1.phi), "U2": (str(U2.page), U2.phi), "error": err, **r}
    return err <= tol, w


def _triple(X, rng):
    Z = X.random_vector(rng, 2.0, 0.05)
    return mixed_vector(X, Z, rng), mixed_vector(X, Z, rng), Z


def trial_norm(X, rng, tol):
    V, _, Z = _triple(X, rng)
    n = ll.limit_log(X, Z, V).norm
    return n == V.norm, {"V": str(V), "Z": str(Z), "image_norm": n}


def trial_anglez(X, rng, tol):
    V, _, Z = _triple(X, rng)
    if V.is_apex:
        raise HypothesisError("zero V")
    r = ll.check_angle_to_Z(X, V, Z, tol)
    return r["passed"], {"V": str(V), "Z": str(Z), **r}


def trial_sumpi(X, rng, tol):
    V, _, Z = _triple(X, rng)
    if V.is_apex:
        raise HypothesisError("zero V")
    r = ll.check_sum_pi(X, Z, ll.limit_log(X, Z, V), tol)
    return r["passed"], {"V": str(V), "Z": str(Z), **r}


def trial_contraction(X, rng, tol):
    V, W, Z = _triple(X, rng)
    r = ll.check_contraction(X, V, W, Z, tol)
    return r["passed"], {"V": str(V), "W": str(W), "Z": str(Z), **r}


def trial_isometry(X, rng, tol):
    V, W, Z = _triple(X, rng)
    if V.is_apex or W.is_apex:
        raise HypothesisError("zero endpoint")
    r = ll.check_isometry(X, V, W, Z, tol)
    return r["passed"], {"V": str(V), "W": str(W), "Z": str(Z), **r}


def trial_collapse(X, rng, tol):
    Z = X.random_vector(rng, 2.0, 0.05)
    norm = float(rng.uniform(0.1, 2.0))
    V1, V2 = shadow_vector(X, Z, rng, norm), shadow_vector(X, Z, rng, norm)
    T = ll.limit_tangent_cone(X, Z)
    a, b = ll.limit_log(X, Z, V1), ll.limit_log(X, Z, V2)
    expected = ll.LimitVector.make(None, PI, norm)
    ok = a == b == expected and T.to_carrier(a) == T.to_carrier(T.minus_spine).scaled(norm)
    return ok, {"V1": str(V1), "V2": str(V2), "Z": str(Z), "image1": a, "image2": b}


def trial_consistency(X, rng, tol):
    """Limit log coordinates equal those of radial transport from the apex."""
    V, _, Z = _triple(X, rng)
    if V.is_apex:
        raise HypothesisError("zero V")
    lv = ll.limit_log(X, Z, V)
    t = radial_transport_from_apex(X, Z, V)
    ok = lv.page == t.page and lv.norm == t.magnitude and abs(lv.phi - t.phi) <= tol
    return ok, {"V": str(V), "Z": str(Z), "limit_log": lv, "transport": (t.page, t.phi, t.magnitude)}


def trial_limitlog(X, rng, tol):
    """All pointwise limit-log invariants on one triple."""
    V, W, Z = _triple(X, rng)
    w = {"V": str(V), "W": str(W), "Z": str(Z)}
    ok = ll.limit_log(X, Z, V).norm == V.norm
    ok &= ll.check_contraction(X, V, W, Z, tol)["passed"]
    if not V.is_apex:
        ok &= ll.check_angle_to_Z(X, V, Z, 1e-12)["passed"]
        ok &= ll.check_sum_pi(X, Z, ll.limit_log(X, Z, V), 1e-12)["passed"]
    return bool(ok), w


def trial_continuity(X, rng, tol):
    Z = X.random_vector(rng, 2.0, 0.05)
    sh = ll.shadow(X, Z)
    if not sh.regions:
        raise HypothesisError("empty shadow")
    edge, lo, hi = sh.regions[int(rng.integers(len(sh.regions)))]
    eta = X.graph.point(edge, lo if rng.uniform() < 0.5 else hi)
    r = ll.check_continuity(X, Z, eta, radius=float(rng.uniform(0.1, 2.0)))
    return r["passed"], {"Z": str(Z), "eta": str(eta), **r}


def trial_hullsub(X, rng, tol):
    n = int(rng.integers(2, 5))
    S = [X.random_vector(rng, 2.0, 0.1) for _ in range(n)]
    Z = X.random_vector(rng, 2.0, 0.1)
    r = ll.check_hull_subcommute(X, S, Z, tol)
    return r["passed"], {"S": [str(s) for s in S], "Z": str(Z), **r}


def trial_frechet(X, rng, tol):
    cfg = random_configuration(X, rng)
    delta = tol * cfg.diameter(X)
    grid = frechet_mean_grid(X, cfg, delta)
    sturm = frechet_mean_sturm(X, cfg, 3000, seed=int(rng.integers(2**31)))
    gap = X.distance(grid.mean, sturm.mean)
    w = {"points": [str(p) for p in cfg.points], "weights": list(cfg.weights), "delta": delta,
         "grid": str(grid.mean), "sturm": str(sturm.mean), "gap": gap}
    return gap <= 2.0 * delta, w


def trial_drag(X, rng, tol):
    cfg = random_configuration(X, rng)
    delta = tol * cfg.diameter(X)
    m = frechet_mean_grid(X, cfg, delta, polish=True).mean
    if m.is_apex:
        raise HypothesisError("mean at the apex")
    V = shadow_vector(X, m, rng, float(rng.uniform(0.2, 2.0)))
    # keep c(dir m) - w |V| > 0 so the new mean stays off the apex
    w = float(rng.uniform(0.05, 0.9)) * cfg.total_weight * m.norm / V.norm
    r = shadow_drag_experiment(X, cfg, V, w, delta)
    out = {"points": [str(p) for p in cfg.points], "weights": list(cfg.weights), "V": str(V), "w": w,
           **{k: (str(v) if isinstance(v, ConeVector) else v) for k, v in r.items()}}
    return r["passed"], out


@dataclass(frozen=True)
class Suite:
    trial: Callable
    tol: float
    trials: int
    doc: str
    # count only trials whose sampled input met the hypotheses
    completed: bool = False


SUITES: dict[str, Suite] = {
    "cat0": Suite(trial_cat0, 1e-9, 10_000, "comparison-triangle inequality"),
    "homogeneity": Suite(trial_homogeneity, 1e-12, 10_000, "distance and geodesics commute with scaling"),
    "firstvar": Suite(trial_firstvar, 1e-3, 1_000, "one-sided derivative of distance"),
    "transport": Suite(trial_transport, 1e-12, 1_000, "radial transport against the chord construction"),
    "norm": Suite(trial_norm, 0.0, 10_000, "limit log preserves norms exactly"),
    "anglez": Suite(trial_anglez, 1e-12, 10_000, "limit log preserves the angle to Z"),
    "sumpi": Suite(trial_sumpi, 1e-12, 10_000, "angles to both spines add to pi"),
    "contraction": Suite(trial_contraction, 1e-9, 10_000, "limit log contracts angles and distances"),
    "isometry": Suite(trial_isometry, 1e-9, 10_000, "limit log is isometric off the shadow"),
    "collapse": Suite(trial_collapse, 0.0, 10_000, "shadow vectors of equal norm collapse together", completed=True),
    "consistency": Suite(trial_consistency, 1e-12, 10_000, "limit log agrees with transport from the apex"),
    "limitlog": Suite(trial_limitlog, 1e-9, 10_000, "pointwise limit-log invariants"),
    "continuity": Suite(trial_continuity, 1e-6, 200, "continuity at the shadow boundary", completed=True),
    "hullsub": Suite(trial_hullsub, 1e-3, 100, "hull subcommutes with limit log"),
    "frechet": Suite(trial_frechet, 1e-3, 100, "inductive mean against the grid oracle"),
    "drag": Suite(trial_drag, 1e-3, 50, "shadow mass drags the mean toward the apex", completed=True),
}


def run_trial(name: str, X: Cone, seed: int, i: int, tol: float | None = None):
    """Run trial ``i`` alone; returns ``(ok, witness)`` or ``(None, reason)`` if skipped."""
    suite = SUITES[name]
    rng = np.random.default_rng([seed, i])
    try:
        return suite.trial(X, rng, suite.tol if tol is None else tol)
    except HypothesisError as exc:
        return None, {"skipped": str(exc)}


def run_suite(name: str, X: Cone, space: str = "", trials: int | None = None, seed: int | None = None,
              tol: float | None = None, max_failures: int = 20, max_skip_factor: int = 20) -> CheckSuiteResult:
    suite = SUITES[name]
    trials = suite.trials if trials is None else trials
    seed = default_seed() if seed is None else seed
    tol = suite.tol if tol is None else tol
    res = CheckSuiteResult(name, space, trials, seed, tol)
    counts: Counter = Counter()
    nfail = completed = 0
    # suites counting completed instances keep drawing past skipped trials, up to a cap
    budget = trials * max_skip_factor if suite.completed else trials
    t0 = time.perf_counter()
    i = 0
    while i < budget and (completed < trials if suite.completed else True):
        if completed == 0 and i >= trials:
            # nothing met the hypotheses in a full round; the suite is vacuous here
            break
        ok, w = run_trial(name, X, seed, i, tol)
        i += 1
        if ok is None:
            res.skipped += 1
            continue
        completed += 1
        if "regime" in w:
            counts[(w["regime"], w.get("branch_free"), ok)] += 1
        if not ok:
            nfail += 1
            if len(res.failures) < max_failures:
                res.failures.append({"trial": i - 1, **w})
    res.elapsed = time.perf_counter() - t0
    res.stats = {"failed": nfail, "completed": completed, "drawn": i}
    res.stats.update({"/".join(map(str, k)): v for k, v in sorted(counts.items(), key=str)})
    if nfail > len(res.failures):
        res.stats["failures_truncated"] = True
    return res
