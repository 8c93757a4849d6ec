"""Command-line pipeline: validate, abstract, plan, verify, export-all.

Artifacts are plain JSON/CSV/HOA files so runs are diffable; identical
scenarios produce byte-identical outputs.  Exit codes: 0 success, 2 bad
scenario, 3 task infeasible, 4 security infeasible, 5 internal consistency
failure.
"""

from __future__ import annotations

import json
import logging
import os
import re
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import abstraction, feasibility, oracle, planner
from .abstraction import SecurityInfeasibleError, build_secure_system, is_twin_mode
from .geometry import enumerate_vertices, validate_polytope, volume
from .ltl import eval_ltl_on_lasso, ltl_to_nba, to_hoa
from .oracle import OracleError
from .planner import PlannerError
from .scenario import SECURITY_MODES, Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_TASK_INFEASIBLE = 3
EXIT_SECURITY_INFEASIBLE = 4
EXIT_INTERNAL = 5

log = logging.getLogger("secureplan")


def _setup_logging():
    level = os.environ.get("SECUREPLAN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(scenario_path: str, security: str | None) -> Scenario:
    try:
        sc = load_scenario(scenario_path)
    except ScenarioError as exc:
        _fail(EXIT_SCENARIO, str(exc))
    if security is not None:
        if security not in SECURITY_MODES:
            _fail(EXIT_SCENARIO, f"security mode must be one of {SECURITY_MODES}")
        sc = Scenario(**{**sc.__dict__, "security": security})
    return sc


def _write_json(out_dir: Path, name: str, payload) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (tuple, list)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, frozenset):
        return sorted(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _build_systems(sc: Scenario):
    wts_list = [abstraction.build_wts(sc.partition, ag,
                                      self_loop_weight=sc.params.self_loop_weight)
                for ag in sc.agents]
    gwts = abstraction.product_gwts(wts_list)
    secure = build_secure_system(gwts, sc.security)
    return wts_list, gwts, secure


def _plan_pipeline(sc: Scenario, beta: float | None):
    """Everything from abstraction to a verified trajectory bundle."""
    timings = {}
    t0 = time.perf_counter()
    wts_list, gwts, secure = _build_systems(sc)
    timings["abstraction_s"] = time.perf_counter() - t0

    twin = is_twin_mode(sc.security)
    params = sc.params.feasibility()
    t0 = time.perf_counter()
    pruned, cache = feasibility.prune_infeasible(
        secure, params, list(sc.agents), sc.partition, twin)
    timings["feasibility_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    nba = ltl_to_nba(sc.formula)
    timings["translation_s"] = time.perf_counter() - t0

    atoms = {a for ag in sc.agents for atoms in ag.labels.values() for a in atoms}
    t0 = time.perf_counter()
    pba = planner.build_pba(pruned, nba, extra_atoms=atoms)
    plan = planner.search_prefix_suffix(pba, sc.params.beta if beta is None else beta)
    timings["search_s"] = time.perf_counter() - t0
    sizes = {
        "agents": len(sc.agents),
        "regions": len(sc.partition.regions),
        "gwts_states": gwts.num_states,
        "secure_states": secure.num_states,
        "secure_edges": secure.num_edges,
        "pruned_edges": secure.num_edges - pruned.num_edges,
        "nba_states": nba.num_states,
        "pba_states": pba.num_states,
    }
    return {
        "wts_list": wts_list, "gwts": gwts, "secure": secure,
        "pruned": pruned, "cache": cache, "nba": nba, "pba": pba,
        "plan": plan, "twin": twin, "params": params,
        "sizes": sizes, "timings": timings,
    }


def _real_lasso(plan, twin: bool):
    prefix = plan.system_prefix()
    suffix = plan.system_suffix()
    if twin:
        return (abstraction.project_real(prefix),
                abstraction.project_real(suffix))
    return prefix, suffix


def _verify_plan(sc: Scenario, ctx) -> dict:
    """Internal soundness checks of a produced plan; raises on failure."""
    plan, gwts, twin = ctx["plan"], ctx["gwts"], ctx["twin"]
    tr_prefix, tr_cycle = planner.plan_trace(plan, ctx["pruned"])
    if not eval_ltl_on_lasso(sc.formula, tr_prefix, tr_cycle):
        raise PlannerError("planned lasso trace does not satisfy the formula")
    real_prefix, real_cycle = _real_lasso(plan, twin)
    verdicts = {"formula_satisfied": True}
    if sc.security in ("B", "AB"):
        res = oracle.check_type_b(real_prefix + real_cycle, gwts)
        verdicts["type_b"] = {"secure": res.secure,
                              "violations": _jsonable(res.violations)}
        if not res.secure:
            raise PlannerError("planned path violates the anonymity check")
    if sc.security in ("A", "AB"):
        res = oracle.check_type_a_lasso(real_prefix, real_cycle, gwts)
        verdicts["type_a"] = {"secure": res.secure, "status": res.status,
                              "witness_prefix": _jsonable(res.witness),
                              "witness_cycle": _jsonable(res.witness_cycle)}
        if not res.secure:
            raise PlannerError(f"planned path fails the copy-path check "
                               f"({res.status})")
    return verdicts


def _geometry_block(sc: Scenario) -> dict:
    """Workspace box and region outlines, so downstream renderers need no
    access to the scenario file."""
    ws = sc.partition.workspace
    wv = enumerate_vertices(ws)
    regions = {}
    for rid in sc.partition.region_ids:
        verts = enumerate_vertices(sc.partition.regions[rid])
        if ws.dim == 2:
            c = verts.mean(axis=0)
            ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
            verts = verts[np.argsort(ang)]
        regions[rid] = {
            "vertices": [[float(x) for x in v] for v in verts],
            "agents": {ag.name: {
                "initial": rid in ag.initial_regions,
                "secret": rid in ag.secret_regions,
                "observation": ag.observation[rid],
                "labels": sorted(ag.labels.get(rid, ())),
            } for ag in sc.agents},
        }
    return {
        "workspace": [[float(v) for v in wv.min(axis=0)],
                      [float(v) for v in wv.max(axis=0)]],
        "regions": regions,
    }


def _plan_payload(sc: Scenario, ctx) -> dict:
    plan, twin = ctx["plan"], ctx["twin"]
    real_prefix, real_cycle = _real_lasso(plan, twin)
    payload = {
        "scenario": sc.name,
        "security": sc.security,
        "beta": plan.beta,
        "j_prefix": plan.j_prefix,
        "j_suffix": plan.j_suffix,
        "cost": plan.cost,
        "prefix": _jsonable(plan.prefix),
        "suffix": _jsonable(plan.suffix),
        "real_prefix": _jsonable(real_prefix),
        "real_suffix": _jsonable(real_cycle),
        "suffix_repeats": sc.params.suffix_repeats,
        "geometry": _geometry_block(sc),
        "sizes": ctx["sizes"],
        "timings": {k: round(v, 3) for k, v in ctx["timings"].items()},
    }
    if twin:
        payload["copy_prefix"] = _jsonable(
            abstraction.project_copy(plan.system_prefix()))
        payload["copy_suffix"] = _jsonable(
            abstraction.project_copy(plan.system_suffix()))
    return payload


def _write_trajectory_csv(out_dir: Path, sc: Scenario, bundle) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "trajectory.csv"
    n = sc.partition.workspace.dim
    m = sc.agents[0].B.shape[1]
    agent_index = {ag.name: i for i, ag in enumerate(sc.agents, start=1)}
    header = (["time", "agent_id", "role"]
              + [f"x{j + 1}" for j in range(n)]
              + [f"u{j + 1}" for j in range(m)]
              + ["region_id", "observation", "is_secret"])
    lines = [",".join(header)]
    for track in bundle.tracks:
        idx = agent_index[track.agent_name]
        ag = sc.agents[idx - 1]
        for t, x, u, rid in zip(track.times, track.x, track.u, track.regions):
            row = [f"{t:.10g}", track.agent_name, track.role]
            row += [f"{v:.10g}" for v in x]
            row += [f"{v:.10g}" for v in u]
            row += [rid, ag.observation[rid],
                    "1" if rid in ag.secret_regions else "0"]
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_path_spec(spec: str, gwts) -> list:
    states = []
    for chunk in spec.split("->"):
        chunk = chunk.strip()
        m = re.fullmatch(r"\(([^()]*)\)", chunk)
        body = m.group(1) if m else chunk
        state = tuple(tok.strip() for tok in body.split(",") if tok.strip())
        states.append(state)
    known = set(gwts.states)
    for s in states:
        if s not in known:
            raise OracleError(f"state {s!r} is not a global state")
    return states


@click.group()
def main():
    """Security-aware multi-agent LTL planning toolkit."""
    _setup_logging()


def _common(func):
    func = click.option("--out", "out_dir", default="secureplan-out",
                        show_default=True, help="artifact directory")(func)
    func = click.option("--security", default=None,
                        help="override the scenario's security mode")(func)
    func = click.option("--scenario", "scenario_path", required=True,
                        help="scenario file path")(func)
    return func


@main.command()
@_common
def validate(scenario_path, security, out_dir):
    """Check geometry and agent definitions; write a validation report."""
    sc = _load(scenario_path, security)
    regions = {}
    for rid, poly in sorted(sc.partition.regions.items()):
        rep = validate_polytope(poly)
        regions[rid] = {
            "bounded": rep.bounded,
            "full_dimensional": rep.full_dimensional,
            "chebyshev_radius": round(rep.chebyshev_radius, 9),
            "volume": round(volume(poly), 9),
        }
    payload = {
        "scenario": sc.name,
        "security": sc.security,
        "formula": sc.formula_text,
        "regions": regions,
        "agents": [{"name": ag.name,
                    "initial": sorted(ag.initial_regions),
                    "secrets": sorted(ag.secret_regions)}
                   for ag in sc.agents],
        "ok": True,
    }
    _write_json(Path(out_dir), "report.json", payload)
    click.echo(f"scenario {sc.name}: OK "
               f"({len(regions)} regions, {len(sc.agents)} agents)")


@main.command()
@_common
def abstract(scenario_path, security, out_dir):
    """Build the abstractions and report system sizes."""
    sc = _load(scenario_path, security)
    try:
        ctx = _plan_pipeline(sc, beta=None)
    except SecurityInfeasibleError as exc:
        _fail(EXIT_SECURITY_INFEASIBLE, str(exc))
    payload = {"scenario": sc.name, "security": sc.security,
               "sizes": ctx["sizes"],
               "timings": {k: round(v, 3) for k, v in ctx["timings"].items()}}
    _write_json(Path(out_dir), "report.json", payload)
    for key, val in sorted(ctx["sizes"].items()):
        click.echo(f"{key}: {val}")


def _run_plan(sc: Scenario, beta, out_dir: Path, export_hoa: bool):
    try:
        ctx = _plan_pipeline(sc, beta)
    except SecurityInfeasibleError as exc:
        _fail(EXIT_SECURITY_INFEASIBLE, str(exc))
    if ctx["plan"] is None:
        _fail(EXIT_TASK_INFEASIBLE,
              "no accepting lasso in the product automaton")
    try:
        verdicts = _verify_plan(sc, ctx)
        bundle = planner.assemble_trajectory(
            ctx["plan"], ctx["cache"], ctx["params"], list(sc.agents),
            sc.partition, ctx["twin"], sc.params.suffix_repeats)
    except (PlannerError, OracleError) as exc:
        _fail(EXIT_INTERNAL, str(exc))
    payload = _plan_payload(sc, ctx)
    payload["verdicts"] = verdicts
    # cycle boundary of the unrolled suffix, so consumers can loop it
    payload["suffix_start_time"] = bundle.suffix_start_time
    payload["suffix_period"] = bundle.suffix_period
    _write_json(out_dir, "plan.json", payload)
    _write_trajectory_csv(out_dir, sc, bundle)
    if export_hoa:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "nba.hoa").write_text(to_hoa(ctx["nba"], name=sc.name))
    report = {"scenario": sc.name, "command": "plan",
              "cost": ctx["plan"].cost, "sizes": ctx["sizes"],
              "verdicts": verdicts}
    _write_json(out_dir, "report.json", report)
    click.echo(f"plan cost J = {ctx['plan'].cost:.6g} "
               f"(prefix {ctx['plan'].j_prefix:.6g}, "
               f"suffix {ctx['plan'].j_suffix:.6g})")
    return ctx, bundle


@main.command("plan")
@_common
@click.option("--beta", type=float, default=None,
              help="prefix/suffix cost weight in [0, 1]")
def plan_cmd(scenario_path, security, out_dir, beta):
    """Synthesize an optimal secure plan and trajectory."""
    sc = _load(scenario_path, security)
    _run_plan(sc, beta, Path(out_dir), export_hoa=False)


@main.command("export-all")
@_common
@click.option("--beta", type=float, default=None)
def export_all(scenario_path, security, out_dir, beta):
    """Plan plus every exportable artifact (HOA automaton included)."""
    sc = _load(scenario_path, security)
    _run_plan(sc, beta, Path(out_dir), export_hoa=True)


@main.command()
@_common
@click.option("--path", "path_spec", default=None,
              help='global path to check, e.g. "(D,E)->(E,B)"')
@click.option("--beta", type=float, default=None)
def verify(scenario_path, security, out_dir, path_spec, beta):
    """Check security of a given path, or of a freshly planned one."""
    sc = _load(scenario_path, security)
    out = Path(out_dir)
    if path_spec is not None:
        _, gwts, _ = _build_systems_checked(sc)
        try:
            path = _parse_path_spec(path_spec, gwts)
            verdict = oracle.check_security(path, gwts)
        except OracleError as exc:
            _fail(EXIT_SCENARIO, str(exc))
        payload = {
            "scenario": sc.name,
            "path": _jsonable(path),
            "type_a": {"secure": verdict.type_a.secure,
                       "status": verdict.type_a.status,
                       "witness": _jsonable(verdict.type_a.witness)},
            "type_b": {"secure": verdict.type_b.secure,
                       "violations": _jsonable(verdict.type_b.violations)},
        }
        _write_json(out, "report.json", payload)
        click.echo(f"type A: {'secure' if verdict.type_a.secure else 'VIOLATED'}"
                   f" ({verdict.type_a.status})")
        click.echo(f"type B: {'secure' if verdict.type_b.secure else 'VIOLATED'}")
        return
    ctx, bundle = _run_plan(sc, beta, out, export_hoa=False)
    try:
        _check_replay(sc, ctx, bundle)
    except (OracleError, PlannerError) as exc:
        _fail(EXIT_INTERNAL, f"replay check failed: {exc}")
    click.echo("replayed trajectory projection matches the discrete plan")


def _build_systems_checked(sc: Scenario):
    try:
        return _build_systems(sc)
    except SecurityInfeasibleError as exc:
        _fail(EXIT_SECURITY_INFEASIBLE, str(exc))


def _check_replay(sc: Scenario, ctx, bundle):
    """The continuous bundle must project back onto the discrete plan."""
    plan, twin = ctx["plan"], ctx["twin"]
    real_prefix, real_cycle = _real_lasso(plan, twin)
    expected = real_prefix + real_cycle * sc.params.suffix_repeats \
        + [real_cycle[0]]
    collapsed = [expected[0]]
    for s in expected[1:]:
        if s != collapsed[-1]:
            collapsed.append(s)
    tracks = {t.agent_name: t for t in bundle.tracks if t.role == "real"}
    samples = [np.array(tracks[ag.name].x) for ag in sc.agents]
    projected = oracle.trajectory_to_path(samples, sc.partition)
    if projected != collapsed:
        raise PlannerError(
            f"projection mismatch: got {projected[:6]}..., "
            f"expected {collapsed[:6]}...")


if __name__ == "__main__":
    main()
