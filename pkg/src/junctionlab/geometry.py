"""Boundary-anchored planar tree networks and geometric queries on them.

Node references follow the file format: ``"e<i>"`` for exterior (boundary)
nodes, numbered counterclockwise along the boundary, and ``"i<j>"`` for
interior trivalent nodes. All indices are 0-based.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import (
    BadValence,
    EmptyInput,
    ExteriorOffBoundary,
    InvalidNetwork,
    NotATree,
    SelfIntersection,
)

GEOM_TOL = 1e-9


# =============================================================================
# Domain
# =============================================================================


@dataclass(frozen=True)
class DomainSpec:
    """Disk of radius ``size`` or square of half-width ``size``, centred at 0."""

    kind: str = "disk"
    size: float = 1.0

    def __post_init__(self):
        if self.kind not in ("disk", "rect"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.size > 0:
            raise ValueError("domain size must be positive")

    @property
    def perimeter(self) -> float:
        if self.kind == "disk":
            return 2 * math.pi * self.size
        return 8 * self.size

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.size**2
        return 4 * self.size**2

    def depth(self, pts) -> np.ndarray:
        """Signed distance to the boundary, positive inside."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "disk":
            return self.size - np.hypot(pts[..., 0], pts[..., 1])
        return self.size - np.max(np.abs(pts), axis=-1)

    def contains(self, pts, tol: float = GEOM_TOL) -> np.ndarray:
        return self.depth(pts) >= -tol

    def boundary_param(self, p) -> float:
        """Counterclockwise arc-length coordinate of a boundary point in [0, perimeter)."""
        x, y = float(p[0]), float(p[1])
        if self.kind == "disk":
            return (math.atan2(y, x) % (2 * math.pi)) * self.size
        L = self.size
        # start at (L, -L), walk up the right side
        if abs(x - L) <= 1e-9 * L and y < L:
            return y + L
        if abs(y - L) <= 1e-9 * L and x > -L:
            return 2 * L + (L - x)
        if abs(x + L) <= 1e-9 * L and y > -L:
            return 4 * L + (L - y)
        return 6 * L + (x + L)

    def boundary_point(self, s: float) -> np.ndarray:
        s = s % self.perimeter
        if self.kind == "disk":
            a = s / self.size
            return np.array([self.size * math.cos(a), self.size * math.sin(a)])
        L = self.size
        side, r = divmod(s, 2 * L)
        if side == 0:
            return np.array([L, -L + r])
        if side == 1:
            return np.array([L - r, L])
        if side == 2:
            return np.array([-L, L - r])
        return np.array([-L + r, -L])

    def boundary_path(self, s0: float, s1: float, spacing: float) -> np.ndarray:
        """Points along the boundary going counterclockwise from s0 to s1 (corners kept)."""
        P = self.perimeter
        span = (s1 - s0) % P
        if span == 0:
            span = P
        stops = [0.0, span]
        if self.kind == "rect":
            L = self.size
            for c in (2 * L, 4 * L, 6 * L, 8 * L):
                off = (c - s0) % P
                if 0 < off < span:
                    stops.append(off)
        stops = sorted(stops)
        out = []
        for a, b in zip(stops[:-1], stops[1:]):
            k = max(1, int(math.ceil((b - a) / spacing)))
            for t in np.linspace(a, b, k + 1)[:-1]:
                out.append(self.boundary_point(s0 + t))
        out.append(self.boundary_point(s0 + span))
        return np.array(out)

    def to_dict(self) -> dict:
        if self.kind == "disk":
            return {"kind": "disk", "radius": self.size}
        return {"kind": "rect", "half_width": self.size}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        kind = d.get("kind", "disk")
        if kind == "disk":
            return cls("disk", float(d.get("radius", 1.0)))
        return cls("rect", float(d.get("half_width", 1.0)))


# =============================================================================
# Polyline utilities
# =============================================================================


def cumulative_length(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    seg = np.hypot(*np.diff(points, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(seg)])


def polyline_length(points) -> float:
    return float(cumulative_length(points)[-1])


def resample_polyline(points, spacing: float | None = None, count: int | None = None) -> np.ndarray:
    """Equidistant linear resampling, endpoints kept."""
    points = np.asarray(points, dtype=float)
    s = cumulative_length(points)
    if count is None:
        if spacing is None:
            raise ValueError("either spacing or count is required")
        count = max(2, int(math.ceil(s[-1] / spacing)) + 1)
    t = np.linspace(0.0, s[-1], count)
    return np.column_stack([np.interp(t, s, points[:, 0]), np.interp(t, s, points[:, 1])])


def resample_spline(points, count: int, closed: bool = False) -> np.ndarray:
    """Equidistant resampling along an arc-length cubic spline through the vertices.

    Far less diffusive than linear resampling, which cuts corners by O(h^2/r)
    each time it is applied.
    """
    points = np.asarray(points, dtype=float)
    if closed:
        pts = np.vstack([points, points[:1]])
        s = cumulative_length(pts)
        cs = CubicSpline(s, pts, bc_type="periodic")
        t = np.linspace(0.0, s[-1], count + 1)[:-1]
        return cs(t)
    if len(points) < 4:
        return resample_polyline(points, count=count)
    s = cumulative_length(points)
    cs = CubicSpline(s, points)
    # spline arc length differs from chord length; one correction pass
    fine = cs(np.linspace(0.0, s[-1], 8 * count + 1))
    sf = cumulative_length(fine)
    u = np.interp(np.linspace(0.0, sf[-1], count), sf, np.linspace(0.0, s[-1], len(fine)))
    out = cs(u)
    out[0], out[-1] = points[0], points[-1]
    return out


def menger_curvature_vectors(points, closed: bool = False) -> np.ndarray:
    """Curvature vector at each interior vertex: (circumcentre - vertex) / R^2.

    Magnitude is the Menger curvature 1/R of the vertex and its two neighbours;
    zero for collinear triples. For open curves the result has len(points)-2 rows.
    """
    p = np.asarray(points, dtype=float)
    if closed:
        prev, cur, nxt = np.roll(p, 1, axis=0), p, np.roll(p, -1, axis=0)
    else:
        prev, cur, nxt = p[:-2], p[1:-1], p[2:]
    a = prev - cur
    b = nxt - cur
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    D = 2.0 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    num = np.column_stack([aa * b[:, 1] - bb * a[:, 1], bb * a[:, 0] - aa * b[:, 0]])
    nn = np.einsum("ij,ij->i", num, num)
    out = np.zeros_like(num)
    ok = nn > 0
    out[ok] = num[ok] * (D[ok] / nn[ok])[:, None]
    return out


def vertex_normals(points) -> np.ndarray:
    """Left unit normals at interior vertices, perpendicular to the chord of the neighbours."""
    p = np.asarray(points, dtype=float)
    chord = p[2:] - p[:-2]
    chord /= np.hypot(chord[:, 0], chord[:, 1])[:, None]
    return np.column_stack([-chord[:, 1], chord[:, 0]])


def point_polyline_distance(x, points, signed: bool = False):
    """Distance from query points to a polyline; optionally signed, positive on the left.

    The sign at a vertex uses the angle-bisecting pseudo-normal, which keeps the
    sign consistent across the wedge regions of convex corners. Beyond the end
    segments the sign follows the end segment's supporting line.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    q = x.reshape(-1, 2)
    p = np.asarray(points, dtype=float)
    a, b = p[:-1], p[1:]
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    nseg = len(a)
    seg_n = np.column_stack([-d[:, 1], d[:, 0]]) / np.sqrt(dd)[:, None]
    # pseudo-normals at interior vertices
    vn = seg_n[:-1] + seg_n[1:]
    vn_len = np.hypot(vn[:, 0], vn[:, 1])
    vn = np.where(vn_len[:, None] > 0, vn / np.maximum(vn_len, 1e-300)[:, None], seg_n[:-1])

    dist = np.empty(len(q))
    sign = np.ones(len(q))
    chunk = max(1, 2_000_000 // max(nseg, 1))
    for s0 in range(0, len(q), chunk):
        qq = q[s0:s0 + chunk]
        rel = qq[:, None, :] - a[None, :, :]
        t = np.einsum("qsk,sk->qs", rel, d) / dd[None, :]
        t = np.clip(t, 0.0, 1.0)
        proj = rel - t[..., None] * d[None, :, :]
        d2 = np.einsum("qsk,qsk->qs", proj, proj)
        k = np.argmin(d2, axis=1)
        rows = np.arange(len(qq))
        dist[s0:s0 + chunk] = np.sqrt(d2[rows, k])
        if signed:
            tk = t[rows, k]
            relk = rel[rows, k]
            s = np.einsum("qk,qk->q", relk, seg_n[k])
            at_start = (tk <= 0.0) & (k > 0)
            at_end = (tk >= 1.0) & (k < nseg - 1)
            if at_start.any():
                v = k[at_start]
                s[at_start] = np.einsum("qk,qk->q", qq[at_start] - a[v], vn[v - 1])
            if at_end.any():
                v = k[at_end]
                s[at_end] = np.einsum("qk,qk->q", qq[at_end] - b[v], vn[v])
            sign[s0:s0 + chunk] = np.where(s < 0, -1.0, 1.0)
    out = dist * sign if signed else dist
    return out.reshape(shape) if shape else float(out[0])


def clip_polyline_to_disk(points, radius: float) -> list[np.ndarray]:
    """Pieces of a polyline inside the closed disk |x| <= radius."""
    line = shapely.LineString(np.asarray(points, dtype=float))
    disk = shapely.Point(0.0, 0.0).buffer(radius, quad_segs=256)
    inter = line.intersection(disk)
    out = []
    for g in getattr(inter, "geoms", [inter]):
        if isinstance(g, shapely.LineString) and not g.is_empty and g.length > 0:
            out.append(np.asarray(g.coords))
    return out


# =============================================================================
# Network types
# =============================================================================


def parse_ref(ref: str) -> tuple[str, int]:
    if not isinstance(ref, str) or len(ref) < 2 or ref[0] not in "ei" or not ref[1:].isdigit():
        raise InvalidNetwork(f"bad node reference {ref!r}")
    return ref[0], int(ref[1:])


@dataclass(frozen=True)
class Arc:
    points: np.ndarray
    start: str
    end: str

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise InvalidNetwork("an arc needs at least two 2-D points")
        if np.any(np.hypot(*np.diff(pts, axis=0).T) == 0):
            raise InvalidNetwork("arc has repeated consecutive points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        parse_ref(self.start)
        parse_ref(self.end)

    @property
    def length(self) -> float:
        return polyline_length(self.points)

    def reversed(self) -> "Arc":
        return Arc(self.points[::-1], self.end, self.start)

    def resampled(self, spacing: float) -> "Arc":
        return Arc(resample_polyline(self.points, spacing), self.start, self.end)


@dataclass(frozen=True)
class PlanarNetwork:
    domain: DomainSpec
    exterior: np.ndarray
    interior: np.ndarray
    arcs: tuple[Arc, ...]
    incidence: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.exterior)

    def node_position(self, ref: str) -> np.ndarray:
        kind, i = parse_ref(ref)
        return self.exterior[i] if kind == "e" else self.interior[i]

    def node_refs(self) -> list[str]:
        return [f"e{i}" for i in range(len(self.exterior))] + [f"i{j}" for j in range(len(self.interior))]

    def arcs_at(self, ref: str) -> list[int]:
        return self.incidence[ref]

    def other_end(self, arc_id: int, ref: str) -> str:
        a = self.arcs[arc_id]
        return a.end if a.start == ref else a.start

    def outgoing_points(self, arc_id: int, ref: str) -> np.ndarray:
        """Arc points ordered starting at node ``ref``."""
        a = self.arcs[arc_id]
        return a.points if a.start == ref else a.points[::-1]

    def total_length(self) -> float:
        return sum(a.length for a in self.arcs)

    def polylines(self) -> list[np.ndarray]:
        return [a.points for a in self.arcs]

    def with_arcs(self, arcs: Sequence[Arc], validate: bool = True) -> "PlanarNetwork":
        return build_network(arcs, self.domain, validate=validate)

    def resampled(self, spacing: float) -> "PlanarNetwork":
        return self.with_arcs([a.resampled(spacing) for a in self.arcs])


def build_network(arcs: Iterable[Arc], domain: DomainSpec, validate: bool = True) -> PlanarNetwork:
    """Assemble a network from arcs whose endpoint refs name the nodes; validates invariants.

    Node positions are read from arc endpoints. Raises NotATree, BadValence,
    SelfIntersection or ExteriorOffBoundary.
    """
    arcs = tuple(arcs)
    if not arcs:
        raise InvalidNetwork("network has no arcs")
    pos: dict[str, np.ndarray] = {}
    incidence: dict[str, list[int]] = {}
    for k, a in enumerate(arcs):
        for ref, p in ((a.start, a.points[0]), (a.end, a.points[-1])):
            incidence.setdefault(ref, []).append(k)
            if ref in pos:
                if np.hypot(*(pos[ref] - p)) > 1e-9 * max(1.0, domain.size):
                    raise InvalidNetwork(f"arcs disagree on the position of node {ref}")
            else:
                pos[ref] = np.array(p, dtype=float)
    ext_ids = sorted(parse_ref(r)[1] for r in pos if r[0] == "e")
    int_ids = sorted(parse_ref(r)[1] for r in pos if r[0] == "i")
    if ext_ids != list(range(len(ext_ids))) or int_ids != list(range(len(int_ids))):
        raise InvalidNetwork("node references must be numbered contiguously from 0")
    exterior = np.array([pos[f"e{i}"] for i in ext_ids]).reshape(-1, 2)
    interior = np.array([pos[f"i{j}"] for j in int_ids]).reshape(-1, 2)
    exterior.setflags(write=False)
    interior.setflags(write=False)
    net = PlanarNetwork(domain, exterior, interior, arcs, incidence)
    if validate:
        _validate(net)
    return net


def _validate(net: PlanarNetwork) -> None:
    n, m = len(net.exterior), len(net.interior)
    for ref, inc in net.incidence.items():
        want = 1 if ref[0] == "e" else 3
        if len(inc) != want:
            raise BadValence(f"node {ref} has degree {len(inc)}, expected {want}")
    for a in net.arcs:
        if a.start == a.end:
            raise NotATree(f"arc from {a.start} to itself")
    # connected with |E| = |V| - 1  <=>  tree
    refs = net.node_refs()
    if len(net.arcs) != len(refs) - 1:
        raise NotATree(f"{len(net.arcs)} arcs for {len(refs)} nodes")
    seen = {refs[0]}
    stack = [refs[0]]
    while stack:
        r = stack.pop()
        for k in net.incidence[r]:
            o = net.other_end(k, r)
            if o not in seen:
                seen.add(o)
                stack.append(o)
    if len(seen) != len(refs):
        raise NotATree("network is disconnected")
    if n < 2 or m != n - 2:
        raise NotATree(f"{n} exterior nodes need {n - 2} interior nodes, got {m}")

    tol = 1e-7 * net.domain.size
    for i, p in enumerate(net.exterior):
        if abs(net.domain.depth(p)) > tol:
            raise ExteriorOffBoundary(f"exterior node e{i} at {p.tolist()} is not on the boundary")
    params = [net.domain.boundary_param(p) for p in net.exterior]
    steps = [(params[(i + 1) % n] - params[i]) % net.domain.perimeter for i in range(n)]
    if n > 1 and (min(steps) <= 0 or abs(sum(steps) - net.domain.perimeter) > 1e-6 * net.domain.perimeter):
        raise ExteriorOffBoundary("exterior nodes are not listed in counterclockwise boundary order")
    for j, p in enumerate(net.interior):
        if net.domain.depth(p) <= tol:
            raise InvalidNetwork(f"interior node i{j} is not inside the domain")
    for k, a in enumerate(net.arcs):
        if np.any(net.domain.depth(a.points[1:-1]) <= 0):
            raise SelfIntersection(f"arc {k} touches or leaves the domain boundary")

    lines = [shapely.LineString(a.points) for a in net.arcs]
    for k, ln in enumerate(lines):
        if not ln.is_simple:
            raise SelfIntersection(f"arc {k} intersects itself")
    tree = shapely.STRtree(lines)
    left, right = tree.query(lines, predicate="intersects")
    for i, j in zip(left, right):
        if i >= j:
            continue
        shared = {net.arcs[i].start, net.arcs[i].end} & {net.arcs[j].start, net.arcs[j].end}
        inter = lines[i].intersection(lines[j])
        allowed = [net.node_position(r) for r in shared]
        for g in getattr(inter, "geoms", [inter]):
            if not isinstance(g, shapely.Point):
                raise SelfIntersection(f"arcs {i} and {j} overlap")
            gp = np.array(g.coords[0])
            if not any(np.hypot(*(gp - q)) <= 1e-9 * max(1.0, net.domain.size) for q in allowed):
                raise SelfIntersection(f"arcs {i} and {j} cross at {gp.tolist()}")


# =============================================================================
# Regions
# =============================================================================


@dataclass(frozen=True)
class Region:
    id: int
    gap: tuple[int, int]
    arcs: tuple[int, ...]
    polygon: np.ndarray = field(repr=False)

    @property
    def area(self) -> float:
        x, y = self.polygon[:, 0], self.polygon[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class RegionPartition:
    regions: tuple[Region, ...]
    region_adjacency: tuple[tuple[int, int, int], ...]
    arc_sides: tuple[tuple[int, int], ...]  # per arc: (left region, right region) w.r.t. start->end

    def adjacent(self, r1: int, r2: int) -> bool:
        return any({a, b} == {r1, r2} for a, b, _ in self.region_adjacency)

    def locate(self, pts) -> np.ndarray:
        """Region id of each query point (-1 outside every region)."""
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, 2)
        out = np.full(len(flat), -1, dtype=int)
        for r in self.regions:
            poly = shapely.Polygon(r.polygon)
            inside = shapely.contains_xy(poly, flat[:, 0], flat[:, 1])
            out[inside & (out < 0)] = r.id
        return out.reshape(pts.shape[:-1])


def tree_path(net: PlanarNetwork, src: str, dst: str) -> list[tuple[int, bool]]:
    """Arcs on the tree path from src to dst as (arc id, traversed start->end)."""
    prev: dict[str, tuple[str, int] | None] = {src: None}
    stack = [src]
    while stack:
        r = stack.pop()
        if r == dst:
            break
        for k in net.incidence[r]:
            o = net.other_end(k, r)
            if o not in prev:
                prev[o] = (r, k)
                stack.append(o)
    path = []
    r = dst
    while prev[r] is not None:
        p, k = prev[r]
        path.append((k, net.arcs[k].start == p))
        r = p
    return path[::-1]


def regions(net: PlanarNetwork, boundary_spacing: float | None = None) -> RegionPartition:
    """Complement regions, one per boundary gap (p_i, p_{i+1}).

    Region i is bounded by the boundary arc from p_i counterclockwise to p_{i+1}
    and the tree path back from p_{i+1} to p_i; an arc traversed forward on that
    path has region i on its left.
    """
    n = net.n
    dom = net.domain
    spacing = boundary_spacing or dom.perimeter / 720
    sides: list[list[int]] = [[-1, -1] for _ in net.arcs]
    regs = []
    for i in range(n):
        j = (i + 1) % n
        path = tree_path(net, f"e{j}", f"e{i}")
        s0 = dom.boundary_param(net.exterior[i])
        s1 = dom.boundary_param(net.exterior[j])
        ring = [dom.boundary_path(s0, s1, spacing)[:-1]]
        for k, fwd in path:
            sides[k][0 if fwd else 1] = i
            pts = net.arcs[k].points if fwd else net.arcs[k].points[::-1]
            ring.append(pts[:-1])
        regs.append(Region(i, (i, j), tuple(sorted(k for k, _ in path)), np.vstack(ring)))
    for k, (l, r) in enumerate(sides):
        if l < 0 or r < 0 or l == r:
            raise InvalidNetwork(f"arc {k} does not separate two regions")
    adjacency = tuple(sorted((min(l, r), max(l, r), k) for k, (l, r) in enumerate(sides)))
    return RegionPartition(tuple(regs), adjacency, tuple((l, r) for l, r in sides))


# =============================================================================
# Topological class
# =============================================================================


def _out_angle(net: PlanarNetwork, arc_id: int, ref: str) -> float:
    pts = net.outgoing_points(arc_id, ref)
    d = pts[1] - pts[0]
    return math.atan2(d[1], d[0])


def topology_signature(net: PlanarNetwork) -> str:
    """Canonical string of the leaf-labelled plane tree, rooted at exterior node 1.

    Leaves carry 1-based boundary indices; children are listed counterclockwise
    starting after the arc towards the root.
    """

    def encode(ref: str, via: int) -> str:
        if ref[0] == "e":
            return str(parse_ref(ref)[1] + 1)
        inc = net.incidence[ref]
        base = _out_angle(net, via, ref)
        rest = sorted((k for k in inc if k != via), key=lambda k: (_out_angle(net, k, ref) - base) % (2 * math.pi))
        return "(" + ",".join(encode(net.other_end(k, ref), k) for k in rest) + ")"

    (k0,) = net.incidence["e0"]
    return "1" + encode(net.other_end(k0, "e0"), k0)


# =============================================================================
# Distances
# =============================================================================


class SignConvention(str, Enum):
    LEFT_POSITIVE = "left"
    RIGHT_POSITIVE = "right"

    def flipped(self) -> "SignConvention":
        return SignConvention.RIGHT_POSITIVE if self is SignConvention.LEFT_POSITIVE else SignConvention.LEFT_POSITIVE


def signed_distance(net: PlanarNetwork, arc_id: int, x, orientation=SignConvention.LEFT_POSITIVE):
    """Distance from x to arc ``arc_id``, positive on the left of start->end (or flipped)."""
    d = point_polyline_distance(x, net.arcs[arc_id].points, signed=True)
    return d if SignConvention(orientation) is SignConvention.LEFT_POSITIVE else -d


def _densify(polylines, resolution: float) -> np.ndarray:
    pts = []
    for pl in polylines:
        pl = np.asarray(pl, dtype=float)
        if len(pl) == 1:
            pts.append(pl)
            continue
        for a, b in zip(pl[:-1], pl[1:]):
            k = max(1, int(math.ceil(np.hypot(*(b - a)) / resolution)))
            t = np.arange(k)[:, None] / k
            pts.append(a + t * (b - a))
        pts.append(pl[-1:])
    return np.vstack(pts)


def sample_polylines(polylines, resolution: float) -> np.ndarray:
    """All vertices plus points inserted so consecutive samples are <= resolution apart."""
    return _densify(polylines, resolution)


def hausdorff_distance(A: Sequence, B: Sequence, resolution: float | None = None) -> float:
    """Symmetric Hausdorff distance between two polyline sets sampled at ``resolution``."""
    A = [np.asarray(p, dtype=float).reshape(-1, 2) for p in A if len(p)]
    B = [np.asarray(p, dtype=float).reshape(-1, 2) for p in B if len(p)]
    if not A or not B:
        raise EmptyInput("hausdorff_distance needs two nonempty polyline sets")
    if resolution is None:
        span = np.ptp(np.vstack(A + B), axis=0).max()
        resolution = max(span, 1e-12) / 2000
    pa, pb = _densify(A, resolution), _densify(B, resolution)
    dab = cKDTree(pb).query(pa)[0].max()
    dba = cKDTree(pa).query(pb)[0].max()
    return float(max(dab, dba))


# =============================================================================
# JSON
# =============================================================================


def network_to_dict(net: PlanarNetwork) -> dict:
    return {
        "domain": net.domain.to_dict(),
        "exterior": net.exterior.tolist(),
        "interior": net.interior.tolist(),
        "arcs": [{"from": a.start, "to": a.end, "points": a.points.tolist()} for a in net.arcs],
    }


def network_from_dict(d: dict, validate: bool = True) -> PlanarNetwork:
    domain = DomainSpec.from_dict(d.get("domain", {}))
    arcs = [Arc(np.asarray(a["points"], dtype=float), a["from"], a["to"]) for a in d["arcs"]]
    net = build_network(arcs, domain, validate=validate)
    for key, arr in (("exterior", net.exterior), ("interior", net.interior)):
        if key in d and len(d[key]):
            given = np.asarray(d[key], dtype=float).reshape(-1, 2)
            if given.shape != arr.shape or np.abs(given - arr).max() > 1e-9 * max(1.0, domain.size):
                raise InvalidNetwork(f"'{key}' node list disagrees with arc endpoints")
    return net


def dumps_network(net: PlanarNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=1)


def load_network(path) -> PlanarNetwork:
    with open(path) as fh:
        return network_from_dict(json.load(fh))


def save_network(net: PlanarNetwork, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_network(net))
