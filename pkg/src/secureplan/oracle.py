"""Brute-force security verifier, independent of the secure constructions.

Checks global paths directly against the two security notions: the
copy-path notion (an observation-identical alternative path avoiding secrets
at the offending steps exists) and the anonymity notion (a secret visit is
always covered by another agent producing the same observation).  Used as
ground truth when property-testing the twin-system constructions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .abstraction import TransitionSystem
from .geometry import Partition

WITNESS_FOUND = "witness-found"
SEARCH_EXHAUSTED = "search-exhausted"
NO_PERIODIC_WITNESS = "periodic-witness-not-found"


class OracleError(Exception):
    pass


@dataclass(frozen=True)
class TypeAResult:
    secure: bool
    status: str
    witness: tuple = ()
    witness_cycle: tuple = ()


@dataclass(frozen=True)
class TypeBResult:
    secure: bool
    violations: tuple = ()  # (agent_index, step) pairs, steps 1-based


@dataclass(frozen=True)
class SecurityVerdict:
    type_a: TypeAResult
    type_b: TypeBResult

    @property
    def secure(self) -> bool:
        return self.type_a.secure and self.type_b.secure


def _require_path(gwts: TransitionSystem, path) -> list:
    path = list(path)
    if not gwts.is_valid_path(path):
        raise OracleError(f"not a valid path of the system: {path!r}")
    return path


def check_type_b(path, gwts: TransitionSystem) -> TypeBResult:
    """Pointwise anonymity check; enumerates every violating (agent, step)."""
    path = _require_path(gwts, path)
    violations = []
    for j, state in enumerate(path, start=1):
        obs = gwts.obs[state]
        secret = gwts.secret[state]
        m = len(secret)
        for i in range(m):
            if secret[i] and not any(obs[k] == obs[i] for k in range(m) if k != i):
                violations.append((i + 1, j))
    return TypeBResult(secure=not violations, violations=tuple(violations))


def _copy_candidates(gwts: TransitionSystem, real_state) -> list:
    """States observation-identical to real_state that avoid secrets exactly
    where real_state is secret."""
    obs = gwts.obs[real_state]
    secret = gwts.secret[real_state]
    out = []
    for q in gwts.states:
        if gwts.obs[q] != obs:
            continue
        if any(secret[i] and gwts.secret[q][i] for i in range(len(secret))):
            continue
        out.append(q)
    return out


def _layered_search(gwts: TransitionSystem, path, start_layer) -> list | None:
    """Forward BFS over per-step candidate sets; returns layer sets or None."""
    layers = [set(start_layer) & set(_copy_candidates(gwts, path[0]))]
    if not layers[0]:
        return None
    for state in path[1:]:
        allowed = set(_copy_candidates(gwts, state))
        nxt = {d for s in layers[-1] for d in gwts.successors(s) if d in allowed}
        if not nxt:
            return None
        layers.append(nxt)
    return layers


def _extract_witness(gwts: TransitionSystem, layers, end_state) -> list:
    """Walk the layer sets backwards from end_state to recover one path.

    Candidates are scanned in canonical order so the witness is stable
    across runs.
    """
    witness = [end_state]
    for layer in reversed(layers[:-1]):
        prev = next(s for s in sorted(layer, key=repr)
                    if gwts.has_edge(s, witness[0]))
        witness.insert(0, prev)
    return witness


def check_type_a(path, gwts: TransitionSystem) -> TypeAResult:
    """Exhaustive copy-path search for a finite path."""
    path = _require_path(gwts, path)
    layers = _layered_search(gwts, path, gwts.initial)
    if layers is None:
        return TypeAResult(False, SEARCH_EXHAUSTED)
    witness = _extract_witness(gwts, layers, min(layers[-1], key=repr))
    _replay_witness(gwts, path, witness)
    return TypeAResult(True, WITNESS_FOUND, witness=tuple(witness))


def check_type_a_lasso(prefix, cycle, gwts: TransitionSystem) -> TypeAResult:
    """Copy-path search for the infinite path prefix . cycle^omega.

    A periodic witness is required: the copy path must revisit the same
    state at the start of consecutive cycle periods, so that one period
    extends to an infinite copy path.  ``prefix`` may be empty; ``cycle[0]``
    must follow prefix[-1] (or be initial), and cycle must close on itself.
    """
    prefix, cycle = list(prefix), list(cycle)
    if not cycle:
        raise OracleError("cycle must be non-empty")
    full = prefix + cycle
    _require_path(gwts, full)
    if not gwts.has_edge(cycle[-1], cycle[0]):
        raise OracleError("cycle does not close on itself")

    layers = _layered_search(gwts, full, gwts.initial)
    if layers is None:
        return TypeAResult(False, SEARCH_EXHAUSTED)
    # anchor candidates: copy states aligned with cycle[0]
    anchor_layer = layers[len(prefix)]
    for anchor in sorted(anchor_layer, key=repr):
        cyc_layers = _layered_search(gwts, cycle + [cycle[0]], {anchor})
        if cyc_layers is None or anchor not in cyc_layers[-1]:
            continue
        wit_cycle = _extract_witness(gwts, cyc_layers, anchor)[:-1]
        if prefix:
            pre_layers = _layered_search(gwts, prefix, gwts.initial)
            head = {s for s in pre_layers[-1] if gwts.has_edge(s, wit_cycle[0])}
            if not head:
                continue
            wit_prefix = _extract_witness(gwts, pre_layers, min(head, key=repr))
        else:
            wit_prefix = []
        _replay_witness(gwts, full + cycle, wit_prefix + wit_cycle + wit_cycle)
        return TypeAResult(True, WITNESS_FOUND,
                           witness=tuple(wit_prefix), witness_cycle=tuple(wit_cycle))
    return TypeAResult(False, NO_PERIODIC_WITNESS)


def _replay_witness(gwts: TransitionSystem, path, witness) -> None:
    """Re-validate a found witness instead of trusting the search."""
    if len(witness) < len(path):
        raise OracleError("witness shorter than the path")
    if witness[0] not in gwts.initial:
        raise OracleError("witness does not start in an initial state")
    if not gwts.is_valid_fragment(witness):
        raise OracleError("witness is not a path of the system")
    for j, (q, qp) in enumerate(zip(path, witness)):
        if gwts.obs[q] != gwts.obs[qp]:
            raise OracleError(f"witness observation mismatch at step {j + 1}")
        if any(a and b for a, b in zip(gwts.secret[q], gwts.secret[qp])):
            raise OracleError(f"witness enters a secret at step {j + 1}")


def check_security(path, gwts: TransitionSystem) -> SecurityVerdict:
    return SecurityVerdict(check_type_a(path, gwts), check_type_b(path, gwts))


def check_security_lasso(prefix, cycle, gwts: TransitionSystem) -> SecurityVerdict:
    type_b = check_type_b(list(prefix) + list(cycle), gwts)
    return SecurityVerdict(check_type_a_lasso(prefix, cycle, gwts), type_b)


def _classify_samples(samples, partition: Partition, tie_tol: float = 1e-7):
    """Region id per sample; boundary samples inherit from a neighbor.

    A sample is ambiguous when its two best margins tie within tie_tol
    (it sits on a shared facet); such samples adopt the region of the next
    unambiguous sample so a crossing instant belongs to the target region.
    """
    ids = partition.region_ids
    raw: list[str | None] = []
    for x in samples:
        margins = []
        for rid in ids:
            poly = partition.regions[rid]
            margins.append((float(min(poly.normals @ x + poly.offsets)), rid))
        margins.sort(key=lambda t: (-t[0], t[1]))
        best, rid = margins[0]
        if best < -tie_tol:
            raise OracleError(f"sample {x!r} lies outside every region")
        second = margins[1][0] if len(margins) > 1 else -1.0
        ambiguous = best <= tie_tol and second >= -tie_tol
        raw.append(None if ambiguous else rid)
    out = list(raw)
    for k in range(len(out) - 1, -1, -1):
        if out[k] is None:
            out[k] = out[k + 1] if k + 1 < len(out) else _nearest_prev(out, k)
    for k in range(len(out)):
        if out[k] is None:
            raise OracleError("could not disambiguate any sample")
    return out


def _nearest_prev(out, k):
    for j in range(k - 1, -1, -1):
        if out[j] is not None:
            return out[j]
    return None


def trajectory_to_path(per_agent_samples, partition: Partition) -> list[tuple]:
    """Discrete global path induced by sampled trajectories.

    ``per_agent_samples`` is a list (one entry per agent) of equal-length
    sample arrays.  Agents switch regions simultaneously by convention:
    the global path advances whenever any agent's region changes, and
    consecutive duplicate global states collapse to one.
    """
    if not per_agent_samples:
        raise OracleError("need at least one agent trajectory")
    lengths = {len(s) for s in per_agent_samples}
    if len(lengths) != 1:
        raise OracleError("agent trajectories must share the sampling grid")
    per_agent_regions = [_classify_samples(s, partition) for s in per_agent_samples]
    path = []
    for step in zip(*per_agent_regions):
        if not path or path[-1] != step:
            path.append(step)
    return path
