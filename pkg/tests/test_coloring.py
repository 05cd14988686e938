from __future__ import annotations

import itertools

import numpy as np
import pytest
import shapely
from hypothesis import given
from hypothesis import strategies as st

from junctionlab.coloring import Coloring, enumerate_colorings, three_color, transfer_coloring, verify_coloring
from junctionlab.errors import ClassMismatch, TooLarge, UnknownRegionId
from junctionlab.geometry import regions
from junctionlab.networks import (caterpillar_network, five_leaf_partition, h_network, jittered,
                                  random_tree_network, triod)


def _geometric_adjacency(net):
    """Regions are adjacent iff their polygons share a boundary piece of positive length."""
    polys = [shapely.Polygon(r.polygon).buffer(0) for r in regions(net).regions]
    adj = set()
    for a, b in itertools.combinations(range(len(polys)), 2):
        if polys[a].buffer(1e-7).intersection(polys[b].buffer(1e-7)).area > 1e-9:
            adj.add((a, b))
    return adj


def _brute_force(net):
    adj = _geometric_adjacency(net)
    return [c for c in itertools.product((1, 2, 3), repeat=net.n) if all(c[a] != c[b] for a, b in adj)]


def test_triod_colors():
    assert three_color(triod()).colors == (1, 2, 3)


def test_h_network_bridge_rule():
    for bridge in ("horizontal", "vertical"):
        net = h_network(bridge)
        c = three_color(net)
        part = regions(net)
        pairs = {(a, b) for a, b, _ in part.region_adjacency}
        (non,) = [(a, b) for a in range(4) for b in range(a + 1, 4) if (a, b) not in pairs]
        assert c[non[0]] == c[non[1]]
        others = [c[k] for k in range(4) if k not in non]
        assert sorted(others + [c[non[0]]]) == [1, 2, 3]
    assert three_color(h_network("horizontal")).colors == (1, 2, 3, 2)
    assert three_color(h_network("vertical")).colors == (1, 2, 1, 3)


def test_five_leaf_matches_partition_example():
    # regions 1..5 of the figure are gaps 0..4 here: {1,4} -> c1, {2} -> c2, {3,5} -> c3
    assert three_color(five_leaf_partition()).colors == (1, 2, 3, 1, 3)


def test_verify_examples():
    net = triod()
    c = three_color(net)
    assert verify_coloring(net, c)
    assert not verify_coloring(net, Coloring((1, 1, 1)))
    assert verify_coloring(net, c.relabeled({1: 2, 2: 1, 3: 3}))
    with pytest.raises(UnknownRegionId):
        verify_coloring(net, {0: 1, 1: 2, 5: 3})
    with pytest.raises(UnknownRegionId):
        verify_coloring(net, {0: 1, 1: 2})


def test_enumerate_examples():
    assert len(enumerate_colorings(triod())) == 6
    assert len(enumerate_colorings(caterpillar_network(8))) == 6
    assert len(enumerate_colorings(random_tree_network(6, np.random.default_rng(3)))) == 6
    with pytest.raises(TooLarge):
        enumerate_colorings(caterpillar_network(11))


def test_enumerate_matches_geometric_oracle():
    for net in (triod(), h_network(), five_leaf_partition(), caterpillar_network(7)):
        got = sorted(c.colors for c in enumerate_colorings(net))
        assert got == sorted(_brute_force(net))


def test_transfer():
    rng = np.random.default_rng(7)
    a = h_network("horizontal", half_bridge=0.3)
    c = three_color(a)
    assert transfer_coloring(c, a, jittered(a, 0.03, rng)) == c
    b = h_network("horizontal", half_bridge=0.12)
    assert verify_coloring(b, transfer_coloring(c, a, b))
    with pytest.raises(ClassMismatch):
        transfer_coloring(c, a, h_network("vertical"))


@given(st.integers(3, 8), st.integers(0, 100_000))
def test_random_tree_coloring_properties(n, seed):
    net = random_tree_network(n, np.random.default_rng(seed))
    cols = enumerate_colorings(net)
    assert len(cols) == 6
    c = three_color(net)
    assert c in cols
    assert c[0] == 1 and c[1] == 2
    # relabelings act as a bijection on the proper colorings
    perms = [dict(zip((1, 2, 3), p)) for p in itertools.permutations((1, 2, 3))]
    assert {c.relabeled(p) for p in perms} == set(cols)


@given(st.integers(3, 7), st.integers(0, 100_000))
def test_coloring_stable_under_jitter(n, seed):
    rng = np.random.default_rng(seed)
    net = random_tree_network(n, rng)
    assert three_color(jittered(net, 0.02, rng)) == three_color(net)
