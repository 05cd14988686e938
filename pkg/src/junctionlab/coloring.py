"""Three-colorings of the complement regions of a tree network.

Regions are labelled by boundary gap: region i lies between exterior nodes
p_i and p_{i+1}. Colors are 1, 2, 3.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ClassMismatch, TooLarge, UnknownRegionId
from .geometry import PlanarNetwork, regions, topology_signature


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]  # colors[region id]

    def __getitem__(self, region: int) -> int:
        return self.colors[region]

    def __len__(self) -> int:
        return len(self.colors)

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.colors))

    def relabeled(self, perm: Mapping[int, int]) -> "Coloring":
        return Coloring(tuple(perm[c] for c in self.colors))


def _adjacent_pairs(net: PlanarNetwork) -> list[tuple[int, int]]:
    return [(a, b) for a, b, _ in regions(net).region_adjacency]


def _tree_adjacency(net: PlanarNetwork) -> dict[str, list[str]]:
    return {r: [net.other_end(k, r) for k in inc] for r, inc in net.incidence.items()}


def _color_recursive(adj: dict[str, list[str]], leaves: list[int]) -> dict[tuple[int, int], int]:
    """Colors of gaps (leaf, next leaf) for the tree ``adj`` with leaves in cyclic order.

    Removes a cherry leaf, colors the smaller tree, then restores the leaf and
    gives the cherry region the third color.
    """
    n = len(leaves)
    if n == 3:
        return {(leaves[i], leaves[(i + 1) % 3]): i + 1 for i in range(3)}
    best = None
    for pos in range(n):
        a, b = leaves[pos], leaves[(pos + 1) % n]
        va, vb = adj[f"e{a}"][0], adj[f"e{b}"][0]
        if va == vb:
            key = tuple(sorted((a, b)))
            if best is None or key < best[0]:
                best = (key, pos)
    assert best is not None, "a trivalent tree with n > 3 leaves always has a cherry"
    pos = best[1]
    a, b = leaves[pos], leaves[(pos + 1) % n]
    prev = leaves[pos - 1]
    nxt = leaves[(pos + 2) % n]
    v = adj[f"e{a}"][0]
    (w,) = [x for x in adj[v] if x not in (f"e{a}", f"e{b}")]
    # drop leaf a and node v; the arcs e_{b v} and e_{v w} become one arc
    sub = {k: list(vs) for k, vs in adj.items() if k not in (v, f"e{a}")}
    sub[f"e{b}"] = [w]
    sub[w] = [f"e{b}" if x == v else x for x in sub[w]]
    sub_leaves = [x for x in leaves if x != a]
    col = _color_recursive(sub, sub_leaves)
    X = col.pop((prev, b))
    Y = col[(b, nxt)]
    col[(prev, a)] = X
    col[(a, b)] = 6 - X - Y
    return col


def three_color(net: PlanarNetwork) -> Coloring:
    """The unique proper three-coloring, normalised so that region 0 (gap p_0 p_1) has
    color 1 and region 1 (across the arc ending at p_1) has color 2."""
    n = net.n
    if n == 2:  # a single arc (two-phase stripe)
        return Coloring((1, 2))
    col = _color_recursive(_tree_adjacency(net), list(range(n)))
    raw = [col[(i, (i + 1) % n)] for i in range(n)]
    first, second = raw[0], raw[1]
    perm = {first: 1, second: 2, 6 - first - second: 3}
    return Coloring(tuple(perm[c] for c in raw))


def verify_coloring(net: PlanarNetwork, c) -> bool:
    """True iff ``c`` (Coloring or region->color mapping) is total and proper."""
    n = net.n
    mapping = c.as_dict() if isinstance(c, Coloring) else dict(c)
    unknown = [k for k in mapping if not (isinstance(k, (int, np.integer)) and 0 <= k < n)]
    if unknown:
        raise UnknownRegionId(f"regions {unknown} do not exist (network has {n})")
    missing = [k for k in range(n) if k not in mapping]
    if missing:
        raise UnknownRegionId(f"coloring is not total, missing regions {missing}")
    if any(mapping[k] not in (1, 2, 3) for k in range(n)):
        return False
    return all(mapping[a] != mapping[b] for a, b in _adjacent_pairs(net))


def enumerate_colorings(net: PlanarNetwork, cap: int = 10) -> list[Coloring]:
    """All proper three-colorings by exhaustive search over 3^n assignments."""
    n = net.n
    if n > cap:
        raise TooLarge(f"{n} regions exceed the enumeration cap {cap}")
    allc = np.array(list(itertools.product((1, 2, 3), repeat=n)), dtype=np.int8)
    ok = np.ones(len(allc), dtype=bool)
    for a, b in _adjacent_pairs(net):
        ok &= allc[:, a] != allc[:, b]
    return [Coloring(tuple(int(x) for x in row)) for row in allc[ok]]


def transfer_coloring(c: Coloring, source: PlanarNetwork, target: PlanarNetwork) -> Coloring:
    """Carry a coloring to another network of the same topological class via gap labels."""
    if topology_signature(source) != topology_signature(target):
        raise ClassMismatch("networks belong to different topological classes")
    out = Coloring(tuple(c.colors))
    assert verify_coloring(target, out)
    return out
