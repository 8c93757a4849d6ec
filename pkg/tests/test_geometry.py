"""Geometry tests: H-rep polytopes, facet detection, partitions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secureplan.geometry import (
    GeometryError,
    HPolytope,
    Partition,
    StructuralError,
    UnsupportedDimensionError,
    axis_split,
    enumerate_vertices,
    intersection,
    merge_regions,
    remove_redundancy,
    representative_point,
    shared_facet,
    validate_partition,
    validate_polytope,
    volume,
)

UNIT_BOX = HPolytope.from_box([0.0, 0.0], [1.0, 1.0])


def test_box_membership():
    assert UNIT_BOX.contains([0.5, 0.5])
    assert UNIT_BOX.contains([0.0, 1.0])
    assert not UNIT_BOX.contains([1.1, 0.5])
    np.testing.assert_allclose(UNIT_BOX.margins([0.5, 0.25]),
                               [0.5, 0.25, 0.5, 0.75])


def test_rows_are_normalized():
    poly = HPolytope(np.array([[2.0, 0.0], [0.0, -4.0]]),
                     np.array([6.0, 8.0]))
    np.testing.assert_allclose(np.linalg.norm(poly.normals, axis=1), 1.0)
    np.testing.assert_allclose(poly.offsets, [3.0, 2.0])


def test_structural_errors():
    with pytest.raises(StructuralError):
        HPolytope(np.zeros((1, 2)), np.array([1.0]))
    with pytest.raises(StructuralError):
        HPolytope(np.eye(2), np.array([1.0]))
    with pytest.raises(StructuralError):
        HPolytope.from_box([0.0], [1.0, 2.0])


def test_validate_unit_box():
    report = validate_polytope(UNIT_BOX)
    assert report.ok and report.bounded and report.full_dimensional
    assert report.chebyshev_radius == pytest.approx(0.5, abs=1e-8)
    assert report.redundant_rows == ()


def test_validate_unbounded_and_flat():
    half = HPolytope(np.array([[1.0, 0.0]]), np.array([0.0]))
    assert not validate_polytope(half).bounded
    # slab of zero width: not full-dimensional
    flat = HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0],
                               [0.0, 1.0], [0.0, -1.0]]),
                     np.array([0.0, 0.0, 0.0, 1.0]))
    assert not validate_polytope(flat).full_dimensional


def test_redundancy_removal():
    loose = HPolytope(np.vstack([UNIT_BOX.normals, [[1.0, 0.0]]]),
                      np.concatenate([UNIT_BOX.offsets, [5.0]]))
    assert validate_polytope(loose).redundant_rows == (4,)
    tight = remove_redundancy(loose)
    assert tight.num_halfspaces == 4


def test_vertices_and_volume():
    verts = enumerate_vertices(UNIT_BOX)
    assert verts.shape == (4, 2)
    assert volume(UNIT_BOX) == pytest.approx(1.0, abs=1e-9)
    tri = HPolytope(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]),
                    np.array([0.0, 0.0, 1.0]))
    assert volume(tri) == pytest.approx(0.5, abs=1e-9)
    box3 = HPolytope.from_box([0, 0, 0], [1, 2, 3])
    assert volume(box3) == pytest.approx(6.0, abs=1e-8)
    with pytest.raises(UnsupportedDimensionError):
        enumerate_vertices(HPolytope.from_box([0] * 4, [1] * 4))


def test_representative_point_interior():
    point = representative_point(UNIT_BOX)
    assert np.all(UNIT_BOX.margins(point) > 0.4)


def test_shared_facet_between_boxes():
    left = HPolytope.from_box([0.0, 0.0], [1.0, 1.0])
    right = HPolytope.from_box([1.0, 0.0], [2.0, 1.0])
    facet = shared_facet(left, right, "L", "R")
    assert facet is not None
    assert facet.owner == "L" and facet.neighbor == "R"
    # owner convention: h >= 0 inside the owner, zero on the facet
    assert facet.h([0.5, 0.5]) > 0
    assert facet.h([1.0, 0.3]) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(facet.outward_normal, [1.0, 0.0])


def test_corner_touch_is_not_a_facet():
    a = HPolytope.from_box([0.0, 0.0], [1.0, 1.0])
    b = HPolytope.from_box([1.0, 1.0], [2.0, 2.0])
    assert shared_facet(a, b) is None
    c = HPolytope.from_box([3.0, 0.0], [4.0, 1.0])
    assert shared_facet(a, c) is None


def test_partition_adjacency(grid_partition):
    pairs = set(grid_partition.adjacency_pairs())
    undirected = {tuple(sorted(p)) for p in pairs}
    assert undirected == {("A", "B"), ("A", "F"), ("B", "C"), ("B", "E"),
                          ("C", "D"), ("D", "E"), ("E", "F")}
    # both directions present
    assert ("A", "B") in pairs and ("B", "A") in pairs
    assert grid_partition.locate([0.5, 2.5]) == ["A"]
    assert set(grid_partition.locate([1.0, 2.5])) == {"A", "F"}
    for rid in grid_partition.region_ids:
        assert grid_partition.regions[rid].contains(grid_partition.point(rid))


def test_validate_partition_rejects_gaps_and_overlaps():
    ws = HPolytope.from_box([0.0, 0.0], [2.0, 1.0])
    gap = Partition(ws, {"a": HPolytope.from_box([0.0, 0.0], [0.9, 1.0]),
                         "b": HPolytope.from_box([1.0, 0.0], [2.0, 1.0])})
    with pytest.raises(GeometryError):
        validate_partition(gap)
    overlap = Partition(ws, {"a": HPolytope.from_box([0.0, 0.0], [1.2, 1.0]),
                             "b": HPolytope.from_box([1.0, 0.0], [2.0, 1.0])})
    with pytest.raises(GeometryError):
        validate_partition(overlap)


def test_axis_split_grid():
    ws = HPolytope.from_box([0.0, 0.0], [2.0, 3.0])
    part = axis_split(ws, [(0, 1.0), (1, 1.0), (1, 2.0)])
    assert len(part.regions) == 6
    validate_partition(part)
    with pytest.raises(StructuralError):
        axis_split(ws, [(0, 5.0)])
    with pytest.raises(StructuralError):
        axis_split(ws, [(3, 1.0)])


def test_merge_regions():
    ws = HPolytope.from_box([0.0, 0.0], [2.0, 2.0])
    part = axis_split(ws, [(0, 1.0), (1, 1.0)])
    ids = sorted(part.regions)
    # find two horizontally adjacent cells and merge them
    pair = next([a, b] for a in ids for b in ids
                if a < b and part.adjacent(a, b))
    merged = merge_regions(part, [pair])
    assert len(merged.regions) == 3
    validate_partition(merged)
    # an L-shaped union is rejected
    tri_ids = sorted(part.regions)[:3]
    corner = [a for a in tri_ids]
    with pytest.raises((GeometryError, StructuralError)):
        merge_regions(part, [corner])


def test_intersection_dim_mismatch():
    with pytest.raises(StructuralError):
        intersection(UNIT_BOX, HPolytope.from_box([0.0], [1.0]))


@settings(max_examples=50, deadline=None)
@given(lo=st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       width=st.lists(st.floats(0.1, 5), min_size=2, max_size=2))
def test_random_boxes_have_interior_representative(lo, width):
    lo = np.array(lo)
    poly = HPolytope.from_box(lo, lo + np.array(width))
    point = representative_point(poly)
    assert np.all(poly.margins(point) > 0)
    assert volume(poly) == pytest.approx(float(np.prod(width)), rel=1e-6)
