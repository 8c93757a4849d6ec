"""Scenario files: TOML descriptions of workspace, agents, task and knobs.

A scenario bundles everything one run needs: the partition (inline
H-representation boxes/polytopes or axis cuts), per-agent dynamics and
observation/secret/label maps, the task formula, the security mode, and
numeric parameters.  Loading is strict: unknown regions, inconsistent
matrix shapes, or malformed formulas fail with a ScenarioError up front.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .abstraction import AgentModel
from .feasibility import FeasibilityParams
from .geometry import (
    GeometryError,
    HPolytope,
    Partition,
    axis_split,
    merge_regions,
    validate_partition,
)
from .ltl import Formula, LtlError, atoms_of, parse_ltl

SECURITY_MODES = ("none", "A", "B", "AB")


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class ScenarioParams:
    beta: float = 0.5
    gamma: float = 1.0
    eps: float = 0.01
    t_f: float = 2.0
    N: int = 40
    self_loop_weight: float = 0.1
    suffix_repeats: int = 2

    def feasibility(self) -> FeasibilityParams:
        return FeasibilityParams(t_f=self.t_f, N=self.N,
                                 gamma=self.gamma, eps=self.eps)


@dataclass(frozen=True)
class Scenario:
    name: str
    partition: Partition
    agents: tuple
    formula: Formula
    formula_text: str
    security: str
    params: ScenarioParams
    source: str = ""


def _poly_from_table(table, what: str) -> HPolytope:
    if "box" in table:
        lo, hi = table["box"]
        return HPolytope.from_box(lo, hi)
    if "normals" in table and "offsets" in table:
        return HPolytope(np.array(table["normals"], dtype=float),
                         np.array(table["offsets"], dtype=float))
    raise ScenarioError(f"{what}: give either 'box' or 'normals'/'offsets'")


def _load_partition(doc) -> Partition:
    if "workspace" not in doc:
        raise ScenarioError("missing [workspace] table")
    workspace = _poly_from_table(doc["workspace"], "workspace")
    regions_doc = doc.get("regions", {})
    cuts_doc = doc.get("partition", {})
    if regions_doc and cuts_doc.get("cuts"):
        raise ScenarioError("give inline [regions.*] or partition cuts, not both")
    if cuts_doc.get("cuts"):
        cuts = [(int(axis), float(value)) for axis, value in cuts_doc["cuts"]]
        part = axis_split(workspace, cuts, prefix=cuts_doc.get("prefix", "q"))
        for group in cuts_doc.get("merge", []):
            part = merge_regions(part, [list(group)])
        return part
    if not regions_doc:
        raise ScenarioError("no regions given")
    regions = {rid: _poly_from_table(tbl, f"region {rid}")
               for rid, tbl in regions_doc.items()}
    return Partition(workspace, regions)


def _load_agent(idx, table, partition: Partition) -> AgentModel:
    name = table.get("name", f"agent{idx + 1}")
    try:
        A = np.array(table["A"], dtype=float)
        B = np.array(table["B"], dtype=float)
        b = np.array(table["b"], dtype=float)
    except KeyError as exc:
        raise ScenarioError(f"agent {name}: missing dynamics entry {exc}")
    if "input_box" in table:
        lo, hi = table["input_box"]
        input_poly = HPolytope.from_box(lo, hi)
    elif "input" in table:
        input_poly = _poly_from_table(table["input"], f"agent {name} input set")
    else:
        raise ScenarioError(f"agent {name}: missing input set")
    obs = dict(table.get("observations", {}))
    labels = {rid: frozenset(atoms)
              for rid, atoms in table.get("labels", {}).items()}
    for rid in list(obs) + list(labels):
        if rid not in partition.regions:
            raise ScenarioError(f"agent {name}: unknown region {rid!r}")
    model = AgentModel(
        name=name, A=A, B=B, b=b, input_poly=input_poly,
        initial_regions=frozenset(table.get("initial", [])),
        secret_regions=frozenset(table.get("secrets", [])),
        observation=obs, labels=labels)
    try:
        model.check(partition)
    except Exception as exc:
        raise ScenarioError(str(exc))
    return model


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file() and path.name == str(path):
        # bare names fall back to the scenarios shipped with the package
        try:
            path = bundled_scenario_path(str(path))
        except ScenarioError:
            pass
    try:
        doc = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}")

    try:
        partition = _load_partition(doc)
        validate_partition(partition)
    except GeometryError as exc:
        raise ScenarioError(f"bad geometry: {exc}")

    agents_doc = doc.get("agents", [])
    if not agents_doc:
        raise ScenarioError("need at least one [[agents]] entry")
    agents = tuple(_load_agent(i, tbl, partition)
                   for i, tbl in enumerate(agents_doc))
    for i, ag in enumerate(agents, start=1):
        for atoms in ag.labels.values():
            for atom in atoms:
                stem, _, suffix = atom.rpartition("_")
                if stem and suffix.isdigit() and int(suffix) != i:
                    raise ScenarioError(
                        f"agent {i} ({ag.name}) may not produce {atom!r}: "
                        f"its numeric suffix names agent {suffix}")

    formula_text = doc.get("formula", "true")
    try:
        formula = parse_ltl(formula_text)
    except LtlError as exc:
        raise ScenarioError(f"bad formula: {exc}")
    declared = {atom for ag in agents for atoms in ag.labels.values()
                for atom in atoms}
    free = atoms_of(formula) - declared
    if free:
        raise ScenarioError(
            f"formula atoms never produced by any label: {sorted(free)}")

    security = doc.get("security", "none")
    if security not in SECURITY_MODES:
        raise ScenarioError(f"security mode must be one of {SECURITY_MODES}")

    params_doc = doc.get("params", {})
    try:
        params = ScenarioParams(**params_doc)
    except TypeError as exc:
        raise ScenarioError(f"bad [params]: {exc}")
    if not 0.0 <= params.beta <= 1.0:
        raise ScenarioError("beta must lie in [0, 1]")
    if params.suffix_repeats < 1:
        raise ScenarioError("suffix_repeats must be >= 1")

    return Scenario(
        name=doc.get("name", path.stem),
        partition=partition, agents=agents,
        formula=formula, formula_text=formula_text,
        security=security, params=params, source=str(path))


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (name without suffix)."""
    from importlib import resources

    pkg = resources.files("secureplan.scenarios")
    candidate = pkg / f"{name}.scenario"
    if not candidate.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(candidate))
