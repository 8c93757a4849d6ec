"""Polytopic workspace geometry.

Regions are convex polytopes in half-space form with the interior-positive
convention: a point ``x`` belongs to the polytope iff ``h_j(x) = p_j . x + g_j
>= 0`` for every facet ``j``.  All heavy lifting (boundedness, redundancy,
Chebyshev center) is done with linear programs; vertex enumeration is a
brute-force hyperplane intersection, which is fine for the supported
dimensions (n <= 3).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

VERTEX_FEAS_TOL = 1e-9
VERTEX_DEDUP_TOL = 1e-7
FACET_DIM_TOL = 1e-8
MAX_VERTEX_DIM = 3


class GeometryError(Exception):
    """Geometric computation failed (degenerate data, enumeration failure)."""


class StructuralError(GeometryError):
    """Malformed input: dimension mismatch, empty system, bad cut placement."""


class UnsupportedDimensionError(GeometryError):
    """Operation not available in this dimension."""


@dataclass(frozen=True)
class HPolytope:
    """Convex polytope {x | normals[j] . x + offsets[j] >= 0 for all j}."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if normals.shape[0] != offsets.shape[0]:
            raise StructuralError(
                f"{normals.shape[0]} normals but {offsets.shape[0]} offsets"
            )
        if normals.shape[0] == 0:
            raise StructuralError("empty half-space system")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms < 1e-12):
            raise StructuralError("zero normal vector")
        normals = normals / norms[:, None]
        offsets = offsets / norms
        normals.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def num_halfspaces(self) -> int:
        return self.normals.shape[0]

    def margins(self, x) -> np.ndarray:
        """Values h_j(x); all nonnegative iff x is in the polytope."""
        return self.normals @ np.asarray(x, dtype=float) + self.offsets

    def contains(self, x, tol: float = VERTEX_FEAS_TOL) -> bool:
        return bool(np.all(self.margins(x) >= -tol))

    @staticmethod
    def from_box(lo, hi) -> "HPolytope":
        """Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            raise StructuralError("box bounds have different dimensions")
        n = lo.shape[0]
        eye = np.eye(n)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([-lo, hi])
        return HPolytope(normals, offsets)


@dataclass(frozen=True)
class Facet:
    """An (n-1)-face shared between a region and a neighbor (or the boundary).

    ``normal``/``offset`` follow the owner's h-convention: ``normal . x +
    offset >= 0`` holds inside the owner and equals zero on the facet.
    """

    normal: np.ndarray
    offset: float
    owner: str
    neighbor: str | None

    @property
    def outward_normal(self) -> np.ndarray:
        """Unit normal pointing out of the owner (into the neighbor)."""
        return -self.normal

    def h(self, x) -> float:
        return float(np.dot(self.normal, np.asarray(x, dtype=float)) + self.offset)


@dataclass(frozen=True)
class ValidationReport:
    bounded: bool
    full_dimensional: bool
    chebyshev_radius: float
    chebyshev_center: np.ndarray | None
    redundant_rows: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.bounded and self.full_dimensional


def _lp(c, A_ub, b_ub):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * len(c),
                  method="highs")
    return res


def validate_polytope(poly: HPolytope, tol: float = 1e-9) -> ValidationReport:
    """Check boundedness (axis-direction LPs) and full-dimensionality.

    Full-dimensionality is decided by the Chebyshev radius: the largest
    inscribed ball, found by maximizing ``r`` subject to
    ``p_j . x + g_j >= r`` (normals are unit, so the margin bound is exact).
    """
    n = poly.dim
    # h_j(x) >= 0  <=>  -p_j . x <= g_j
    A_ub = -poly.normals
    b_ub = poly.offsets

    bounded = True
    for axis in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[axis] = -sign  # maximize sign * x_axis
            res = _lp(c, A_ub, b_ub)
            if res.status == 3:  # unbounded
                bounded = False
            elif res.status == 2:  # infeasible: empty set, not full-dim
                return ValidationReport(True, False, -np.inf, None)
        if not bounded:
            break

    # Chebyshev: maximize r s.t. -p_j . x + r <= g_j
    A_cheb = np.hstack([-poly.normals, np.ones((poly.num_halfspaces, 1))])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_cheb, b_ub=poly.offsets,
                  bounds=[(None, None)] * n + [(None, None)], method="highs")
    if res.status == 3:
        # Radius unbounded (e.g. a half-space); report +inf.
        radius, center = np.inf, None
    elif not res.success:
        radius, center = -np.inf, None
    else:
        radius = float(res.x[-1])
        center = res.x[:-1].copy()

    full_dim = radius > tol
    redundant = _redundant_rows(poly) if bounded and full_dim else ()
    return ValidationReport(bounded, full_dim, radius, center, redundant)


def _redundant_rows(poly: HPolytope, tol: float = 1e-9) -> tuple[int, ...]:
    """Rows whose removal does not change the set."""
    redundant = []
    m = poly.num_halfspaces
    for j in range(m):
        others = [k for k in range(m) if k != j and k not in redundant]
        if not others:
            continue
        # minimize h_j subject to the other constraints
        res = _lp(poly.normals[j], -poly.normals[others], poly.offsets[others])
        if res.status == 3:
            continue  # h_j unbounded below without row j: essential
        if res.success and res.fun + poly.offsets[j] >= -tol:
            redundant.append(j)
    return tuple(redundant)


def remove_redundancy(poly: HPolytope) -> HPolytope:
    """Canonical form with redundant half-spaces dropped."""
    drop = set(_redundant_rows(poly))
    if not drop:
        return poly
    keep = [j for j in range(poly.num_halfspaces) if j not in drop]
    return HPolytope(poly.normals[keep], poly.offsets[keep])


def enumerate_vertices(poly: HPolytope) -> np.ndarray:
    """All 0-faces, by intersecting every n-subset of facet hyperplanes.

    Supported for n <= 3 only; the combinatorics explode beyond that and the
    toolkit does not need it.
    """
    n = poly.dim
    if n > MAX_VERTEX_DIM:
        raise UnsupportedDimensionError(f"vertex enumeration limited to n <= {MAX_VERTEX_DIM}, got {n}")
    vertices: list[np.ndarray] = []
    for subset in itertools.combinations(range(poly.num_halfspaces), n):
        A = poly.normals[list(subset)]
        b = -poly.offsets[list(subset)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, b)
        if not np.all(np.isfinite(x)):
            continue
        if np.all(poly.margins(x) >= -VERTEX_FEAS_TOL):
            if not any(np.linalg.norm(x - v) <= VERTEX_DEDUP_TOL for v in vertices):
                vertices.append(x)
    if not vertices:
        raise GeometryError("no vertices found (degenerate or empty polytope)")
    order = np.lexsort(np.array(vertices).T[::-1])
    return np.array(vertices)[order]


def representative_point(poly: HPolytope) -> np.ndarray:
    """Vertex-average interior point used as the transition waypoint.

    Strictly interior for any bounded full-dimensional polytope, which is all
    the planner needs from a 'centroid'.
    """
    verts = enumerate_vertices(poly)
    point = verts.mean(axis=0)
    if not np.all(poly.margins(point) > 0):
        raise GeometryError("vertex average is not strictly interior")
    return point


def volume(poly: HPolytope) -> float:
    """Volume via the convex hull of the enumerated vertices (n <= 3)."""
    verts = enumerate_vertices(poly)
    n = poly.dim
    if n == 1:
        return float(verts.max() - verts.min())
    if verts.shape[0] <= n:
        return 0.0
    try:
        return float(ConvexHull(verts).volume)
    except Exception as exc:
        raise GeometryError(f"hull volume failed: {exc}") from exc


def intersection(a: HPolytope, b: HPolytope) -> HPolytope:
    if a.dim != b.dim:
        raise StructuralError("dimension mismatch in intersection")
    return HPolytope(np.vstack([a.normals, b.normals]),
                     np.concatenate([a.offsets, b.offsets]))


def _affine_dim(points: np.ndarray, tol: float = FACET_DIM_TOL) -> int:
    if points.shape[0] <= 1:
        return 0
    centered = points - points.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    return int(np.sum(svals > tol))


def shared_facet(q: HPolytope, q_next: HPolytope,
                 owner_id: str = "q", neighbor_id: str = "q'") -> Facet | None:
    """Common (n-1)-dimensional facet of two regions, or None.

    The returned normal/offset is the owner's facet row, so ``h(x) >= 0``
    inside ``q`` and the outward direction (into ``q_next``) is ``-normal``.
    """
    n = q.dim
    for j in range(q.num_halfspaces):
        p, g = q.normals[j], q.offsets[j]
        # matching row of q_next: the same hyperplane with flipped orientation
        match = np.where(
            (np.linalg.norm(q_next.normals + p, axis=1) < 1e-7)
            & (np.abs(q_next.offsets + g) < 1e-7)
        )[0]
        if match.size == 0:
            continue
        # restrict the joint system to the hyperplane and measure its dimension
        both = intersection(q, q_next)
        try:
            pts = _hyperplane_face_points(both, p, g)
        except GeometryError:
            continue
        if pts is not None and _affine_dim(pts) == n - 1:
            return Facet(p.copy(), float(g), owner_id, neighbor_id)
    return None


def _hyperplane_face_points(poly: HPolytope, p: np.ndarray, g: float) -> np.ndarray | None:
    """Vertices of poly ∩ {p.x + g = 0}, or None if lower-dimensional/empty."""
    n = poly.dim
    if n > MAX_VERTEX_DIM:
        raise UnsupportedDimensionError("facet test limited to n <= 3")
    # enumerate vertices of the face polytope: add both orientations of the plane
    face = HPolytope(
        np.vstack([poly.normals, p[None, :], -p[None, :]]),
        np.concatenate([poly.offsets, [g, -g]]),
    )
    vertices: list[np.ndarray] = []
    rows = face.normals
    offs = face.offsets
    for subset in itertools.combinations(range(rows.shape[0]), n):
        A = rows[list(subset)]
        b = -offs[list(subset)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, b)
        if np.all(face.margins(x) >= -1e-7):
            if not any(np.linalg.norm(x - v) <= VERTEX_DEDUP_TOL for v in vertices):
                vertices.append(x)
    if not vertices:
        return None
    return np.array(vertices)


@dataclass(frozen=True)
class Partition:
    """Ordered set of regions covering a workspace with disjoint interiors."""

    workspace: HPolytope
    regions: dict[str, HPolytope]
    _facets: dict[tuple[str, str], Facet] = field(default_factory=dict, repr=False)
    _points: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def region_ids(self) -> list[str]:
        return list(self.regions.keys())

    def facet(self, owner: str, neighbor: str) -> Facet | None:
        """Shared facet between two regions (memoized)."""
        key = (owner, neighbor)
        if key not in self._facets:
            f = shared_facet(self.regions[owner], self.regions[neighbor],
                             owner, neighbor)
            self._facets[key] = f
        return self._facets[key]

    def adjacent(self, a: str, b: str) -> bool:
        return a != b and self.facet(a, b) is not None

    def adjacency_pairs(self) -> list[tuple[str, str]]:
        ids = self.region_ids
        return [(a, b) for a in ids for b in ids if a != b and self.adjacent(a, b)]

    def point(self, region_id: str) -> np.ndarray:
        if region_id not in self._points:
            self._points[region_id] = representative_point(self.regions[region_id])
        return self._points[region_id]

    def locate(self, x, tol: float = 1e-9) -> list[str]:
        """Regions containing x (more than one on shared facets)."""
        return [rid for rid, poly in self.regions.items() if poly.contains(x, tol)]


def validate_partition(partition: Partition, rel_tol: float = 1e-6) -> None:
    """Raise GeometryError unless regions tile the workspace.

    Coverage is a volume check (n <= 3): region volumes must sum to the
    workspace volume.  Interior disjointness: every pairwise intersection must
    have (numerically) zero Chebyshev radius.
    """
    ws_report = validate_polytope(partition.workspace)
    if not ws_report.ok:
        raise GeometryError("workspace must be bounded and full-dimensional")
    total = 0.0
    for rid, poly in partition.regions.items():
        report = validate_polytope(poly)
        if not report.ok:
            raise GeometryError(f"region {rid} is not a bounded full-dimensional polytope")
        total += volume(poly)
    ws_vol = volume(partition.workspace)
    if abs(total - ws_vol) > rel_tol * max(ws_vol, 1.0):
        raise GeometryError(
            f"region volumes sum to {total}, workspace volume is {ws_vol}")
    ids = partition.region_ids
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            inter = intersection(partition.regions[a], partition.regions[b])
            report = validate_polytope(inter, tol=1e-7)
            if report.full_dimensional:
                raise GeometryError(f"regions {a} and {b} have overlapping interiors")


def axis_split(workspace: HPolytope, cuts: list[tuple[int, float]],
               prefix: str = "q") -> Partition:
    """Partition a workspace by full axis-aligned hyperplane cuts.

    ``cuts`` are (axis, value) pairs; each must pass strictly through the
    workspace interior.  Regions are the full-dimensional cells of the cut
    arrangement, named ``q_1, q_2, ...`` in lexicographic cell order.
    """
    report = validate_polytope(workspace)
    if not report.ok:
        raise GeometryError("workspace must be bounded and full-dimensional")
    n = workspace.dim
    verts = enumerate_vertices(workspace)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    per_axis: dict[int, list[float]] = {}
    for axis, value in cuts:
        if not (0 <= axis < n):
            raise StructuralError(f"cut axis {axis} out of range")
        if not (lo[axis] < value < hi[axis]):
            raise StructuralError(f"cut {axis}={value} lies outside the workspace")
        per_axis.setdefault(axis, []).append(value)
    grids = []
    for axis in range(n):
        vals = sorted(per_axis.get(axis, []))
        grids.append(list(zip([lo[axis]] + vals, vals + [hi[axis]])))
    regions: dict[str, HPolytope] = {}
    count = 0
    for cell in itertools.product(*grids):
        normals = []
        offsets = []
        for axis, (a, b) in enumerate(cell):
            e = np.zeros(n)
            e[axis] = 1.0
            normals.extend([e, -e])
            offsets.extend([-a, b])
        slab = HPolytope(np.array(normals), np.array(offsets))
        cell_poly = remove_redundancy(intersection(workspace, slab))
        if validate_polytope(cell_poly).ok:
            count += 1
            regions[f"{prefix}_{count}"] = cell_poly
    partition = Partition(workspace, regions)
    validate_partition(partition)
    return partition


def merge_regions(partition: Partition, groups: list[list[str]],
                  prefix: str = "q") -> Partition:
    """Merge groups of cells whose union is convex; renumbers all regions.

    A union is accepted only when the convex hull of the member vertices has
    the same volume as the members combined (within 1e-9 relative).
    """
    merged: list[HPolytope] = []
    used: set[str] = set()
    for group in groups:
        vol_sum = 0.0
        all_verts = []
        for rid in group:
            if rid in used:
                raise StructuralError(f"region {rid} appears in multiple groups")
            used.add(rid)
            poly = partition.regions[rid]
            vol_sum += volume(poly)
            all_verts.append(enumerate_vertices(poly))
        pts = np.vstack(all_verts)
        hull = ConvexHull(pts)
        if abs(hull.volume - vol_sum) > 1e-9 * max(vol_sum, 1.0):
            raise GeometryError(f"union of {group} is not convex")
        # hull equations: Ax + b <= 0  ->  normals=-A, offsets=-b
        eqs = hull.equations
        poly = remove_redundancy(HPolytope(-eqs[:, :-1], -eqs[:, -1]))
        merged.append(poly)
    regions: dict[str, HPolytope] = {}
    count = 0
    for poly in merged:
        count += 1
        regions[f"{prefix}_{count}"] = poly
    for rid, poly in partition.regions.items():
        if rid not in used:
            count += 1
            regions[f"{prefix}_{count}"] = poly
    out = Partition(partition.workspace, regions)
    validate_partition(out)
    return out
