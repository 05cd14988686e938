from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from junctionlab.errors import (BadValence, EmptyInput, ExteriorOffBoundary, InvalidNetwork, NotATree,
                                SelfIntersection)
from junctionlab.geometry import (Arc, DomainSpec, SignConvention, build_network, dumps_network,
                                  hausdorff_distance, network_from_dict, network_to_dict, point_polyline_distance,
                                  regions, signed_distance, topology_signature)
from junctionlab.networks import (five_leaf_partition, h_network, jittered, random_tree_network, segment,
                                  triod)

DISK = DomainSpec("disk", 1.0)


def _triod_arcs():
    ext = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)]
    return [Arc(segment((0, 0), p, 0.05), "i0", f"e{k}") for k, p in enumerate(ext)]


def test_triod_counts():
    net = build_network(_triod_arcs(), DISK)
    assert len(net.interior) == 1 and len(net.arcs) == 3 and net.n == 3


def test_h_network_counts():
    net = h_network()
    assert (len(net.interior), len(net.arcs)) == (2, 5) == (net.n - 2, 2 * net.n - 3)


def test_crossing_arcs_rejected():
    arcs = _triod_arcs()
    # replace the third arm by one that crosses the first
    arcs[2] = Arc(np.array([[0.0, 0.0], [0.5, -0.2], [0.6, 0.2], [0.0, 0.0 + 1e-9] ]), "i0", "e2")
    with pytest.raises(InvalidNetwork):
        build_network(arcs, DISK)
    a = Arc(segment((-0.8, -0.6), (0.8, 0.6), 0.05), "e0", "i0")
    b = Arc(segment((0.8, -0.6), (-0.8, 0.6), 0.05), "e1", "i0")
    c = Arc(segment((0.8, 0.6), (0.0, 1.0), 0.05), "i0", "e2")
    with pytest.raises(InvalidNetwork):
        build_network([a, b, c], DISK)


def test_self_intersection_specific():
    # arms 0 and 2 cross in the interior, node valences are fine
    O = np.array([0.0, 0.0])
    a0 = Arc(np.array([O, [0.5, 0.5], [1.0, 0.0]]), "i0", "e0")
    a1 = Arc(segment(O, (0.0, 1.0), 0.1), "i0", "e1")
    a2 = Arc(np.array([O, [0.6, 0.1], [0.6, 0.6], [-0.6, 0.6], [-1.0, 0.0]]), "i0", "e2")
    with pytest.raises(SelfIntersection):
        build_network([a0, a1, a2], DISK)


def test_bad_valence_and_cycle():
    ext = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    four = [Arc(segment((0, 0), p, 0.1), "i0", f"e{k}") for k, p in enumerate(ext)]
    with pytest.raises((BadValence, InvalidNetwork)):
        build_network(four, DISK)
    # two junctions joined by two different arcs: valences are 3 but there is a cycle
    A, B = np.array([-0.3, 0.0]), np.array([0.3, 0.0])
    cyc = [Arc(segment((-1.0, 0.0), A, 0.1), "e0", "i0"),
           Arc(segment(B, (1.0, 0.0), 0.1), "i1", "e1"),
           Arc(np.array([A, [0.0, 0.3], B]), "i0", "i1"),
           Arc(np.array([A, [0.0, -0.3], B]), "i0", "i1")]
    with pytest.raises(NotATree):
        build_network(cyc, DISK)


def test_exterior_off_boundary():
    arcs = _triod_arcs()
    arcs[0] = Arc(segment((0, 0), (0.7, 0.0), 0.05), "i0", "e0")
    with pytest.raises(ExteriorOffBoundary):
        build_network(arcs, DISK)


def test_regions_triod_all_adjacent():
    part = regions(triod())
    assert len(part.regions) == 3
    assert all(part.adjacent(a, b) for a in range(3) for b in range(3) if a != b)


def test_regions_five_leaf():
    assert len(regions(five_leaf_partition()).regions) == 5


def test_regions_h_network_nonadjacent_pair():
    part = regions(h_network("horizontal"))
    assert len(part.regions) == 4
    pairs = {(a, b) for a, b, _ in part.region_adjacency}
    # regions 0 and 2 are separated by the bridge's two ends; each shares no arc
    non = [(a, b) for a in range(4) for b in range(a + 1, 4) if (a, b) not in pairs]
    assert len(non) == 1
    assert len(pairs) == 5


def test_region_areas_sum_to_disk():
    for net in (triod(), h_network(), five_leaf_partition()):
        total = sum(r.area for r in regions(net).regions)
        assert total == pytest.approx(net.domain.area, rel=2e-4)


def test_region_locate_raster_covers_disk():
    net = five_leaf_partition()
    part = regions(net)
    xs = np.linspace(-0.99, 0.99, 81)
    X, Y = np.meshgrid(xs, xs)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = np.hypot(pts[:, 0], pts[:, 1]) < 0.98
    rid = part.locate(pts[inside])
    assert np.mean(rid >= 0) > 0.99


def test_signature_same_and_different_class():
    a = h_network("horizontal", half_bridge=0.3)
    b = h_network("horizontal", half_bridge=0.15)
    c = h_network("vertical")
    assert topology_signature(a) == topology_signature(b)
    assert topology_signature(a) != topology_signature(c)
    assert topology_signature(a) == "1((2,3),4)"
    assert topology_signature(c) == "1(2,(3,4))"
    assert topology_signature(triod()) == "1(2,3)"


def test_signature_resample_and_jitter(rng):
    for net in (h_network(), five_leaf_partition(), random_tree_network(7, rng)):
        s = topology_signature(net)
        assert topology_signature(net.resampled(0.013)) == s
        assert topology_signature(jittered(net, 0.02, rng)) == s


def test_signed_distance_examples():
    arcs = _triod_arcs()
    net = build_network(arcs, DISK)
    mid = net.arcs[0].points[len(net.arcs[0].points) // 2]
    assert abs(signed_distance(net, 0, mid)) < 1e-15
    seg = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert point_polyline_distance(np.array([0.5, 0.25]), seg, signed=True) == pytest.approx(0.25, abs=1e-15)
    assert point_polyline_distance(np.array([0.5, -0.25]), seg, signed=True) == pytest.approx(-0.25, abs=1e-15)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_signed_distance_flip_and_bruteforce(x, y):
    net = triod(bumps=(0.1, -0.1, 0.05))
    p = np.array([x, y])
    for k in range(3):
        d = signed_distance(net, k, p)
        assert signed_distance(net, k, p, SignConvention.RIGHT_POSITIVE) == -d
        pts = net.arcs[k].points
        dense = np.vstack([a + np.linspace(0, 1, 50)[:, None] * (b - a) for a, b in zip(pts[:-1], pts[1:])])
        brute = np.hypot(*(dense - p).T).min()
        assert abs(abs(d) - brute) <= 1e-3


def test_hausdorff_examples():
    s = [np.array([[0.0, 0.0], [1.0, 0.0]])]
    assert hausdorff_distance(s, s) == 0.0
    t = [s[0] + np.array([0.0, 0.1])]
    assert hausdorff_distance(s, t) == pytest.approx(0.1, abs=1e-12)
    with pytest.raises(EmptyInput):
        hausdorff_distance([], s)


@given(st.integers(0, 10_000))
def test_hausdorff_matches_point_cloud_oracle(seed):
    r = np.random.default_rng(seed)
    A = [np.cumsum(r.normal(size=(6, 2)), axis=0)]
    B = [np.cumsum(r.normal(size=(5, 2)), axis=0), r.normal(size=(3, 2))]
    res = 1e-2
    d = hausdorff_distance(A, B, resolution=res)

    def dense(P):
        out = []
        for p in P:
            for a, b in zip(p[:-1], p[1:]):
                k = int(math.ceil(np.hypot(*(b - a)) / 2e-3)) + 1
                out.append(a + np.linspace(0, 1, k)[:, None] * (b - a))
        return np.vstack(out)

    from scipy.spatial.distance import cdist
    DA, DB = dense(A), dense(B)
    M = cdist(DA, DB)
    oracle = max(M.min(axis=1).max(), M.min(axis=0).max())
    assert abs(d - oracle) <= res


def test_json_roundtrip():
    net = five_leaf_partition()
    back = network_from_dict(network_to_dict(net))
    assert dumps_network(back) == dumps_network(net)
    assert topology_signature(back) == topology_signature(net)


@given(st.integers(3, 8), st.integers(0, 10_000))
def test_counts_random_trees(n, seed):
    net = random_tree_network(n, np.random.default_rng(seed))
    assert len(net.interior) == n - 2
    assert len(net.arcs) == 2 * n - 3
    assert len(regions(net).regions) == n
