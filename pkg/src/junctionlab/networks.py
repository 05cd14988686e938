"""Ready-made networks: triods, H-shapes, the five-leaf partition, random trees."""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidNetwork
from .geometry import Arc, DomainSpec, PlanarNetwork, build_network


def fermat_point(points, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    """Point minimising the summed distance to three points (Newton from the centroid)."""
    P = np.asarray(points, dtype=float)
    x = P.mean(axis=0)
    for _ in range(max_iter):
        r = x - P
        d = np.hypot(r[:, 0], r[:, 1])
        if d.min() == 0:
            break
        u = r / d[:, None]
        g = u.sum(axis=0)
        H = sum((np.eye(2) - np.outer(ui, ui)) / di for ui, di in zip(u, d))
        step = np.linalg.solve(H, g)
        x = x - step
        if np.hypot(*step) < tol * max(1.0, np.abs(P).max()):
            break
    return x


def segment(a, b, spacing: float) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    k = max(2, int(math.ceil(np.hypot(*(b - a)) / spacing)))
    t = np.linspace(0.0, 1.0, k + 1)[:, None]
    return a + t * (b - a)


def bumped_segment(a, b, spacing: float, amplitude: float) -> np.ndarray:
    """Segment a->b displaced to the left by amplitude * sin(pi s)^2 (tangent kept at both ends)."""
    pts = segment(a, b, spacing)
    d = np.asarray(b, float) - np.asarray(a, float)
    nrm = np.array([-d[1], d[0]]) / np.hypot(*d)
    s = np.linspace(0.0, 1.0, len(pts))
    return pts + amplitude * np.sin(np.pi * s)[:, None] ** 2 * nrm


def on_circle(angles_deg, radius: float = 1.0) -> np.ndarray:
    a = np.deg2rad(np.asarray(angles_deg, dtype=float))
    return radius * np.column_stack([np.cos(a), np.sin(a)])


def triod(angles_deg=(90.0, 210.0, 330.0), radius: float = 1.0, spacing: float = 0.02,
          bumps=(0.0, 0.0, 0.0)) -> PlanarNetwork:
    """Three arcs from boundary points to their Fermat point (120 degree junction).

    Nonzero ``bumps`` displace each arm sideways while keeping its end tangents,
    so the junction stays at 120 degrees but the arms carry curvature.
    """
    ext = on_circle(angles_deg, radius)
    O = fermat_point(ext)
    arcs = []
    for k in range(3):
        pts = bumped_segment(O, ext[k], spacing, bumps[k]) if bumps[k] else segment(O, ext[k], spacing)
        arcs.append(Arc(pts, "i0", f"e{k}"))
    return build_network(arcs, DomainSpec("disk", radius))


def h_network(bridge: str = "horizontal", angles_deg=(45.0, 135.0, 225.0, 315.0), radius: float = 1.0,
              half_bridge: float = 0.3, spacing: float = 0.02) -> PlanarNetwork:
    """Four boundary points, two junctions joined by a bridge.

    ``horizontal`` pairs (e0,e3) and (e1,e2); ``vertical`` pairs (e0,e1) and (e2,e3).
    """
    ext = on_circle(angles_deg, radius)
    if bridge == "horizontal":
        O = np.array([[half_bridge, 0.0], [-half_bridge, 0.0]])
        pairs = {0: 0, 3: 0, 1: 1, 2: 1}
    elif bridge == "vertical":
        O = np.array([[0.0, half_bridge], [0.0, -half_bridge]])
        pairs = {0: 0, 1: 0, 2: 1, 3: 1}
    else:
        raise ValueError("bridge must be 'horizontal' or 'vertical'")
    arcs = [Arc(segment(O[j], ext[k], spacing), f"i{j}", f"e{k}") for k, j in pairs.items()]
    arcs.append(Arc(segment(O[0], O[1], spacing), "i0", "i1"))
    return build_network(arcs, DomainSpec("disk", radius))


def tree_network(ext_points, edges, domain: DomainSpec, spacing: float = 0.02,
                 interior_points=None, validate: bool = True) -> PlanarNetwork:
    """Straight-arc network for an abstract tree.

    ``edges`` are (ref, ref) pairs. Interior nodes not given explicitly are placed
    by the barycentric (Tutte) embedding with the exterior nodes held fixed.
    """
    ext_points = np.asarray(ext_points, dtype=float)
    m = len(ext_points) - 2
    if interior_points is None:
        A = np.zeros((m, m))
        rhs = np.zeros((m, 2))
        for u, v in edges:
            for a, b in ((u, v), (v, u)):
                if a[0] == "i":
                    ia = int(a[1:])
                    A[ia, ia] += 1
                    if b[0] == "i":
                        A[ia, int(b[1:])] -= 1
                    else:
                        rhs[ia] += ext_points[int(b[1:])]
        interior_points = np.linalg.solve(A, rhs) if m else np.zeros((0, 2))
    pos = {f"e{i}": p for i, p in enumerate(ext_points)}
    pos.update({f"i{j}": p for j, p in enumerate(np.asarray(interior_points, dtype=float))})
    arcs = [Arc(segment(pos[u], pos[v], spacing), u, v) for u, v in edges]
    return build_network(arcs, domain, validate=validate)


def random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[str, str]]:
    """Uniformly random cherry merges of cyclically adjacent subtrees.

    Every trivalent plane tree whose leaves e0..e{n-1} appear in boundary order
    arises this way.
    """
    if n < 3:
        raise InvalidNetwork("need at least three leaves")
    items = [f"e{i}" for i in range(n)]
    edges = []
    nxt = 0
    while len(items) > 3:
        k = int(rng.integers(len(items)))
        a, b = items[k], items[(k + 1) % len(items)]
        v = f"i{nxt}"
        nxt += 1
        edges += [(v, a), (v, b)]
        if k + 1 < len(items):
            items[k:k + 2] = [v]
        else:
            items = [v] + items[1:-1]
    v = f"i{nxt}"
    edges += [(v, x) for x in items]
    return edges


def random_tree_network(n: int, rng: np.random.Generator, radius: float = 1.0,
                        spacing: float = 0.05, max_tries: int = 50) -> PlanarNetwork:
    """Random boundary-anchored trivalent tree with n leaves at random boundary angles."""
    for _ in range(max_tries):
        gaps = rng.uniform(0.5, 1.5, size=n)
        ang = np.cumsum(gaps) / gaps.sum() * 360.0 + rng.uniform(0, 360)
        ext = on_circle(np.sort(ang % 360.0), radius)
        edges = random_tree_edges(n, rng)
        try:
            return tree_network(ext, edges, DomainSpec("disk", radius), spacing)
        except InvalidNetwork:
            continue
    raise InvalidNetwork("could not embed a random tree")


def caterpillar_network(n: int, radius: float = 1.0, spacing: float = 0.05) -> PlanarNetwork:
    """Spine of n-2 interior nodes; e0 and e1 hang off the first, e{n-1} off the last."""
    edges = [("i0", "e0"), ("i0", "e1")]
    for j in range(1, n - 2):
        edges += [(f"i{j - 1}", f"i{j}"), (f"i{j}", f"e{j + 1}")]
    edges.append((f"i{n - 3}", f"e{n - 1}"))
    ext = on_circle(np.arange(n) * 360.0 / n + 90.0, radius)
    return tree_network(ext, edges, DomainSpec("disk", radius), spacing)


def five_leaf_partition(radius: float = 1.0, spacing: float = 0.02) -> PlanarNetwork:
    """Five boundary points; cherries {e0,e1} and {e2,e3}, e4 on the middle node."""
    ext = on_circle([100.0, 160.0, 230.0, 290.0, 20.0], radius)
    edges = [("i0", "e0"), ("i0", "e1"), ("i1", "e2"), ("i1", "e3"),
             ("i2", "i0"), ("i2", "i1"), ("i2", "e4")]
    return tree_network(ext, edges, DomainSpec("disk", radius), spacing)


def jittered(net: PlanarNetwork, amplitude: float, rng: np.random.Generator,
             max_tries: int = 20) -> PlanarNetwork:
    """Same network with interior nodes and arc vertices randomly displaced.

    Arc interiors get a smooth bump so consecutive vertices never swap. The
    amplitude is halved until the result is a valid network.
    """
    amp = amplitude
    for _ in range(max_tries):
        shift = {f"i{j}": rng.normal(scale=amp, size=2) for j in range(len(net.interior))}
        arcs = []
        for a in net.arcs:
            pts = a.points.copy()
            s = np.linspace(0.0, 1.0, len(pts))[:, None]
            d0 = shift.get(a.start, np.zeros(2))
            d1 = shift.get(a.end, np.zeros(2))
            bump = rng.normal(scale=amp, size=2) * np.sin(np.pi * s) ** 2
            pts = pts + (1 - s) * d0 + s * d1 + bump
            arcs.append(Arc(pts, a.start, a.end))
        try:
            return build_network(arcs, net.domain)
        except InvalidNetwork:
            amp *= 0.5
    return net
