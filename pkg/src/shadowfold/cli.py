"""Command-line interface.

Reports are ``key=value`` lines.  Exit status is 0 when everything
checked holds, 1 when an assertion or suite fails, 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import demos, export
from . import limitlog as ll
from .cone import Cone
from .errors import ShadowfoldError
from .frechet import WeightedConfiguration, frechet_mean_grid, frechet_mean_sturm, shadow_drag_experiment
from .spacefile import bundled_names, format_tangent, format_vector, load_space, parse_number, parse_tangent, parse_vector
from .suites import SUITES, default_seed, run_suite, run_trial
from .tangent import exp_at, log_at, parallel_distance_profile, radial_transport, radial_transport_from_apex


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))
    if hasattr(v, "is_apex"):
        return format_vector(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, default=str)
    return str(v)


def emit(out, **kv) -> None:
    for k, v in kv.items():
        print(f"{k}={_fmt(v)}", file=out)


def _space(name: str):
    sf = load_space(name)
    return sf, Cone(sf.graph)


def _vectors(X, items):
    return [parse_vector(X, s) for s in items]


# ----------------------------------------------------------------------
# commands


def cmd_validate(a, out):
    sf, X = _space(a.space)
    rep = sf.graph.validate_cat1()
    emit(out, vertices=len(sf.graph.vertices), edges=len(sf.graph.edges), total_length=sf.graph.total_length,
         girth=rep.girth, cat1="pass" if rep.passed else "fail")
    expect = sf.meta.get("expect")
    if expect:
        emit(out, expect=expect, expect_matches=(expect == "cat0") == rep.passed)
    return 0 if rep.passed else 1


def cmd_dist(a, out):
    _, X = _space(a.space)
    V, W = _vectors(X, (a.V, a.W))
    emit(out, distance=X.distance(V, W))
    return 0


def cmd_angle(a, out):
    _, X = _space(a.space)
    V, W = _vectors(X, (a.V, a.W))
    emit(out, angle=X.angle(V, W), direction_distance=X.direction_distance(V, W), inner=X.inner(V, W))
    return 0


def cmd_geodesic(a, out):
    _, X = _space(a.space)
    V, W = _vectors(X, (a.V, a.W))
    g = X.geodesic(V, W)
    emit(out, kind=g.kind, length=g.length, theta=g.theta)
    for k, P in enumerate(g.sample(a.samples)):
        emit(out, **{f"point{k}": P})
    return 0


def cmd_log(a, out):
    _, X = _space(a.space)
    z, w = _vectors(X, (a.z, a.w))
    emit(out, tangent=format_tangent(log_at(X, z, w)))
    return 0


def cmd_exp(a, out):
    _, X = _space(a.space)
    U = parse_tangent(X, a.tangent)
    emit(out, point=exp_at(X, U.base, U))
    return 0


def cmd_transport(a, out):
    _, X = _space(a.space)
    if a.from_apex:
        Z, V = _vectors(X, (a.args[0], a.args[1])) if len(a.args) == 2 else (None, None)
        if Z is None:
            raise UsageError("transport --from-apex needs Z V")
        emit(out, tangent=format_tangent(radial_transport_from_apex(X, Z, V)))
        return 0
    if len(a.args) != 3:
        raise UsageError("transport needs q z tangent (or --from-apex Z V)")
    q, z = _vectors(X, a.args[:2])
    U = parse_tangent(X, a.args[2])
    emit(out, tangent=format_tangent(radial_transport(X, q, z, U)))
    return 0


def cmd_parallel(a, out):
    _, X = _space(a.space)
    z, V = _vectors(X, (a.z, a.V))
    start = parse_vector(X, a.start) if a.start else None
    prof = parallel_distance_profile(X, z, V, a.tmax, a.n, start)
    emit(out, max=prof.max, min=prof.min, bound=prof.bound, bounded=prof.bounded, constant=prof.constant)
    if a.csv:
        out.write(export.csv_rows(((repr(float(t)), repr(float(f))) for t, f in zip(prof.ts, prof.values)), ("t", "distance")))
    return 0


def cmd_shadow(a, out):
    _, X = _space(a.space)
    Z = parse_vector(X, a.Z)
    sh = ll.shadow(X, Z)
    emit(out, regions=len(sh.regions), measure=sh.measure)
    for k, (e, lo, hi) in enumerate(sh.regions):
        emit(out, **{f"region{k}": f"{e}:{lo!r}:{hi!r}"})
    return 0


def cmd_limitlog(a, out):
    _, X = _space(a.space)
    Z = parse_vector(X, a.Z)
    for k, V in enumerate(_vectors(X, a.V)):
        img = ll.limit_log(X, Z, V)
        page = "spine" if img.page is None else str(img.page)
        emit(out, **{f"image{k}": f"{page}|{img.phi!r}|{img.norm!r}"})
    return 0


def cmd_classify(a, out):
    _, X = _space(a.space)
    V, W, Z = _vectors(X, (a.V, a.W, a.Z))
    emit(out, classification=ll.geodesic_shadow_classification(X, V, W, Z))
    return 0


def cmd_hull(a, out):
    _, X = _space(a.space)
    H = ll.hull(X, _vectors(X, a.V), a.delta)
    emit(out, delta=a.delta, measure=H.measure, vertices=sorted(H.vertices))
    for k, (e, spans) in enumerate(sorted(H.arcs.items())):
        emit(out, **{f"arcs{k}": f"{e}:" + ",".join(f"{lo!r}-{hi!r}" for lo, hi in spans)})
    return 0


def _config(path):
    sf = load_space(path)
    if not sf.masses:
        raise UsageError(f"{path} has no 'm <conevector> <weight>' lines")
    return sf, Cone(sf.graph), WeightedConfiguration.from_pairs(sf.masses)


def cmd_frechet(a, out):
    _, X, cfg = _config(a.config)
    s = frechet_mean_sturm(X, cfg, a.iterations, a.seed)
    emit(out, sturm_mean=s.mean, sturm_objective=s.objective, iterations=s.iterations)
    if a.oracle is not None:
        g = frechet_mean_grid(X, cfg, a.oracle)
        gap = X.distance(s.mean, g.mean)
        emit(out, grid_mean=g.mean, grid_objective=g.objective, delta=a.oracle, gap=gap, agree=gap <= 2 * a.oracle)
        return 0 if gap <= 2 * a.oracle else 1
    return 0


def cmd_drag(a, out):
    _, X, cfg = _config(a.config)
    vec, sep, weight = a.add.rpartition(",")
    if not sep:
        raise UsageError("--add expects <conevector>,<weight>")
    r = shadow_drag_experiment(X, cfg, parse_vector(X, vec), parse_number(weight), a.delta)
    emit(out, **r)
    return 0 if r["passed"] else 1


def cmd_check(a, out):
    _, X = _space(a.space)
    seed = default_seed() if a.seed is None else a.seed
    if a.replay is not None:
        ok, w = run_trial(a.suite, X, seed, a.replay, a.tol)
        emit(out, suite=a.suite, trial=a.replay, seed=seed, status="skipped" if ok is None else ("pass" if ok else "fail"))
        emit(out, **w)
        return 0 if ok is not False else 1
    res = run_suite(a.suite, X, a.space, a.trials, seed, a.tol)
    emit(out, **res.summary())
    emit(out, **{f"stat.{k}": v for k, v in res.stats.items()})
    for f in res.failures[: a.witnesses]:
        emit(out, witness=f)
    return 0 if res.passed else 1


def cmd_export_svg(a, out):
    _, X = _space(a.space)
    Z = parse_vector(X, a.Z)
    text = export.svg_shadow(X, Z, _vectors(X, a.V))
    _write(a.output, text, out)
    return 0


def cmd_export_csv(a, out):
    _, X = _space(a.space)
    Z = parse_vector(X, a.Z)
    if a.what == "shadow":
        text = export.csv_shadow(X, Z)
    else:
        text = export.csv_limitlog(X, Z, _vectors(X, a.V))
    _write(a.output, text, out)
    return 0


def _write(path, text, out):
    if path in (None, "-"):
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")
        emit(out, wrote=path)


def cmd_demo_angle(a, out):
    rows = demos.angle_discontinuity_demo(direction=a.direction)
    ok = True
    for r in rows:
        expect = math.pi if r["radius"] == 0 else math.pi / 2
        good = abs(r["angle"] - expect) <= 1e-9
        ok &= good
        emit(out, radius=r["radius"], angle=r["angle"], comparison_angle=r["comparison_angle"], expected=expect, ok=good)
    emit(out, jump=demos.jump(rows), passed=ok)
    return 0 if ok else 1


def cmd_demo_noray(a, out):
    r = demos.no_ray_profile(a.tmax, a.n)
    ok = r["bounded"] and r["spread"] > 1e-3 and r["q_in_shadow"]
    emit(out, p=r["p"], q=r["q"], V=r["V"], max=r["max"], min=r["min"], spread=r["spread"], bound=r["bound"],
         bounded=r["bounded"], constant=r["constant"], passed=ok)
    return 0 if ok else 1


def cmd_spaces(a, out):
    for name in bundled_names():
        sf = load_space(name)
        emit(out, **{name: sf.meta.get("description", "")})
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shadowfold", description="Geometry of Euclidean cones over metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_, *args):
        sp = sub.add_parser(name, help=help_)
        for arg in args:
            sp.add_argument(arg)
        sp.set_defaults(fn=fn)
        return sp

    cmd("spaces", cmd_spaces, "list bundled spaces")
    cmd("validate", cmd_validate, "girth and CAT(1) verdict", "space")
    cmd("dist", cmd_dist, "cone distance", "space", "V", "W")
    cmd("angle", cmd_angle, "angle at the apex", "space", "V", "W")
    sp = cmd("geodesic", cmd_geodesic, "geodesic kind, length and samples", "space", "V", "W")
    sp.add_argument("--samples", type=int, default=5)
    cmd("log", cmd_log, "log map at a non-apex point", "space", "z", "w")
    cmd("exp", cmd_exp, "exponential of base|page|phi|magnitude", "space", "tangent")
    sp = cmd("transport", cmd_transport, "radial transport q z tangent, or --from-apex Z V", "space")
    sp.add_argument("args", nargs="+")
    sp.add_argument("--from-apex", action="store_true")
    sp = cmd("parallel", cmd_parallel, "distance profile of the parallel ray", "space", "z", "V")
    sp.add_argument("--tmax", type=float, default=10.0)
    sp.add_argument("--n", type=int, default=101)
    sp.add_argument("--start", help="reference ray leaves this shadow point through the apex")
    sp.add_argument("--csv", action="store_true")
    cmd("shadow", cmd_shadow, "shadow regions of Z", "space", "Z")
    sp = cmd("limitlog", cmd_limitlog, "limit log images along Z", "space", "Z")
    sp.add_argument("V", nargs="+")
    cmd("classify", cmd_classify, "how geodesic VW meets the shadow of Z", "space", "V", "W", "Z")
    sp = cmd("hull", cmd_hull, "convex cone hull", "space")
    sp.add_argument("V", nargs="+")
    sp.add_argument("--delta", type=float, default=1e-3)
    sp = cmd("frechet", cmd_frechet, "Frechet mean of the configuration in a space file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--oracle", type=float, metavar="DELTA")
    sp.add_argument("--iterations", type=int, default=5000)
    sp.add_argument("--seed", type=int, default=0)
    sp = cmd("drag", cmd_drag, "shadow-drag experiment")
    sp.add_argument("--config", required=True)
    sp.add_argument("--add", required=True, metavar="VECTOR,WEIGHT")
    sp.add_argument("--delta", type=float, default=1e-3)
    sp = cmd("check", cmd_check, "seeded verification suite", "suite")
    sp.add_argument("--space", required=True)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--replay", type=int, metavar="TRIAL")
    sp.add_argument("--witnesses", type=int, default=3)
    for name in ("export-svg", "export-csv"):
        sp = cmd(name, cmd_export_svg if name == "export-svg" else cmd_export_csv, f"{name[7:].upper()} of shadow and images", "space", "Z")
        sp.add_argument("V", nargs="*")
        sp.add_argument("-o", "--output")
        if name == "export-csv":
            sp.add_argument("--what", choices=("shadow", "limitlog"), default="shadow")
    sp = cmd("demo-angle", cmd_demo_angle, "angle jump between parallel rays as p -> O")
    sp.add_argument("--direction", type=parse_number, default=3 * math.pi / 4)
    sp = cmd("demo-noray", cmd_demo_noray, "bounded, non-constant parallel distance on the 3pi kale")
    sp.add_argument("--tmax", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=401)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if a.command == "check" and a.suite not in SUITES:
        print(f"error=unknown suite {a.suite!r}; choose from {', '.join(SUITES)}", file=out)
        return 2
    try:
        return a.fn(a, out)
    except (ShadowfoldError, UsageError) as exc:
        print(f"error={exc}", file=out)
        return 2


if __name__ == "__main__":
    sys.exit(main())
