"""Glued approximate solution n_eps of the vector Allen-Cahn system and its parabolic solver.

Away from the triple junctions n_eps blends heteroclinic tubes around the arcs
with the constant region colors through a partition of unity; within eps^rho of
every junction it is replaced by a rotated, rescaled copy of the three-sector
solution u*.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from .coloring import Coloring
from .errors import BadCFL, GridMismatch, Instability, NodeTooCloseToBoundary, UnresolvedEpsilon
from .fields import Grid2, VectorField2, laplacian
from .flow import FlowTrajectory
from .geometry import PlanarNetwork, point_polyline_distance, regions
from .potential import (
    PROFILE_STRETCH,
    HeteroclinicTable,
    Potential,
    UStar,
    compute_u_star,
    heteroclinic_set,
    standard_potential,
)

WORKING_BALL = 2.5


# =============================================================================
# Cutoffs and parameters
# =============================================================================


def smoothstep(x):
    """C^2 quintic step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


def bump(x):
    """Even cutoff equal to 1 for |x| <= 1/2 and 0 for |x| >= 1."""
    return 1.0 - smoothstep(2.0 * np.abs(x) - 1.0)


def ramp_down(x):
    """One-sided cutoff equal to 1 for x <= 1/2 and 0 for x >= 1."""
    return 1.0 - smoothstep(2.0 * np.asarray(x, dtype=float) - 1.0)


@dataclass(frozen=True)
class AnsatzParams:
    eps: float
    rho: float = 0.75
    delta_tilde: float | None = None  # outer node radius (delta variant); default 4 eps^rho
    delta: float | None = None  # tube half-width (delta variant); default delta_tilde / 2
    theta_int: float = math.pi / 12
    variant: str = "rho"  # "rho": eps^rho-scale sets; "delta": fixed-scale sets with angular node blending
    profile_scale: float = PROFILE_STRETCH  # tube profile is zeta(profile_scale * d / eps)
    # lower bounds, in units of eps, for the tube half-width and node radius of the rho variant;
    # eps^rho / eps is only about 2 at desk-scale eps, which would cut the profiles inside their cores
    tube_floor: float = 6.0
    node_floor: float = 4.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 2.0 / 3.0 < self.rho < 1.0:
            raise ValueError("rho must lie strictly between 2/3 and 1")
        if not 0 < self.theta_int < math.pi / 6:
            raise ValueError("theta_int must lie in (0, pi/6)")
        if self.variant not in ("rho", "delta"):
            raise ValueError("variant must be 'rho' or 'delta'")
        if self.variant == "delta" and not self.tube_width > 2 * self.eps:
            raise ValueError("delta must exceed 2 eps")

    @property
    def node_radius(self) -> float:
        return max(self.eps**self.rho, self.node_floor * self.eps)

    @property
    def outer_radius(self) -> float:
        return 4 * self.node_radius if self.delta_tilde is None else self.delta_tilde

    @property
    def tube_width(self) -> float:
        """Half-width of the tube sets D_i."""
        if self.variant == "rho":
            return max(self.eps**self.rho / 2, self.tube_floor * self.eps)
        return self.outer_radius / 2 if self.delta is None else self.delta


@dataclass(frozen=True, eq=False)
class PotentialArtifacts:
    W: Potential
    profiles: dict = field(repr=False)  # (i, j) -> HeteroclinicTable, colors 1..3
    ustar: UStar = field(repr=False)


@functools.lru_cache(maxsize=None)
def potential_artifacts(W: Potential | None = None) -> PotentialArtifacts:
    W = W or standard_potential()
    return PotentialArtifacts(W, heteroclinic_set(W), compute_u_star(W))


def _d3_map(minima: np.ndarray, colors) -> np.ndarray:
    """Linear isometry sending c1, c2, c3 to c_{colors[0]}, c_{colors[1]}, c_{colors[2]}."""
    src = np.column_stack([minima[0], minima[1]])
    dst = np.column_stack([minima[colors[0] - 1], minima[colors[1] - 1]])
    return dst @ np.linalg.inv(src)


def _rot(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


# =============================================================================
# Geometry of one snapshot
# =============================================================================


@dataclass
class _NodeFrame:
    O: np.ndarray
    angles: np.ndarray  # outgoing tangent angles, CCW sorted
    arcs: list[int]  # arc ids in the same order
    colors: tuple[int, int, int]  # color of the sector from arcs[j] to arcs[j+1]
    Q: np.ndarray  # value-space isometry
    rot: float  # u* coordinates are R(-rot)(x - O)/eps


class _Snapshot:
    """Per-network data needed to evaluate the ansatz at arbitrary points."""

    def __init__(self, net: PlanarNetwork, coloring: Coloring, art: PotentialArtifacts, p: AnsatzParams):
        self.net, self.p, self.art = net, p, art
        part = regions(net)
        self.part = part
        self.region_color = np.array(coloring.colors)
        self.sides = [(int(self.region_color[l]), int(self.region_color[r])) for l, r in part.arc_sides]
        self.polys = [shapely.Polygon(r.polygon) for r in part.regions]
        for poly in self.polys:
            shapely.prepare(poly)
        ext = 2 * p.tube_width + 0.1 * net.domain.size
        self.lines = [self._extended(net, k, ext) for k in range(len(net.arcs))]
        # (point, unit tangent into the arc) at each junction end; tubes are cut off behind it
        self.caps = [[(net.node_position(ref), self._tangent(net, k, ref))
                      for ref in (a.start, a.end) if ref[0] == "i"] for k, a in enumerate(net.arcs)]
        self.nodes = [self._frame(net, f"i{j}") for j in range(len(net.interior))]
        min_clear = p.node_radius if p.variant == "rho" else p.outer_radius
        for f in self.nodes:
            if net.domain.depth(f.O) < min_clear:
                raise NodeTooCloseToBoundary(f"junction at {f.O.round(4).tolist()} is within {min_clear:.3g} of the boundary")

    @staticmethod
    def _extended(net, k, ext):
        """Arc polyline continued straight past exterior endpoints (for points outside the domain)."""
        a = net.arcs[k]
        pts = np.array(a.points)
        if a.start[0] == "e":
            d = pts[0] - pts[1]
            pts = np.vstack([pts[0] + ext * d / np.hypot(*d), pts])
        if a.end[0] == "e":
            d = pts[-1] - pts[-2]
            pts = np.vstack([pts, pts[-1] + ext * d / np.hypot(*d)])
        return pts

    @staticmethod
    def _tangent(net, k, ref):
        q = net.outgoing_points(k, ref)
        d = q[1] - q[0]
        return d / np.hypot(*d)

    def _frame(self, net, ref) -> _NodeFrame:
        O = np.array(net.node_position(ref))
        arcs = list(net.arcs_at(ref))
        ang = []
        for k in arcs:
            q = net.outgoing_points(k, ref)[1]
            ang.append(math.atan2(q[1] - O[1], q[0] - O[0]))
        order = np.argsort(ang)
        arcs = [arcs[i] for i in order]
        ang = np.array(ang)[order]
        colors = []
        for k in arcs:
            l, r = self.sides[k]
            outgoing_forward = net.arcs[k].start == ref
            colors.append(l if outgoing_forward else r)  # region CCW after the outgoing arc
        Q = _d3_map(self.art.W.minima, colors)
        # u* sector 1 lies between its walls at -alpha_1/2 and +alpha_1/2
        wall_lo = self.art.ustar.wall_angles[2] - 2 * math.pi
        return _NodeFrame(O, ang, arcs, tuple(colors), Q, float(ang[0] - wall_lo))

    # ---- pieces -------------------------------------------------------------

    def color_at(self, pts) -> np.ndarray:
        """Region color of each point; points on no region take the side of the nearest arc."""
        x, y = pts[:, 0], pts[:, 1]
        rid = np.full(len(pts), -1)
        for i, poly in enumerate(self.polys):
            inside = shapely.contains_xy(poly, x, y)
            rid[inside & (rid < 0)] = i
        col = np.where(rid >= 0, self.region_color[np.maximum(rid, 0)], 0)
        miss = np.nonzero(rid < 0)[0]
        if len(miss):
            best = np.full(len(miss), np.inf)
            for k, line in enumerate(self.lines):
                d = point_polyline_distance(pts[miss], line, signed=True)
                closer = np.abs(d) < best
                best[closer] = np.abs(d[closer])
                l, r = self.sides[k]
                col[miss[closer]] = np.where(d[closer] >= 0, l, r)
        return col

    def distances(self, pts, reach: float) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per arc: (indices of points within ``reach`` of the arc bbox, signed distances there)."""
        out = []
        for line in self.lines:
            lo = line.min(axis=0) - reach
            hi = line.max(axis=0) + reach
            idx = np.nonzero(np.all((pts >= lo) & (pts <= hi), axis=1))[0]
            d = point_polyline_distance(pts[idx], line, signed=True) if len(idx) else np.zeros(0)
            out.append((idx, d))
        return out

    def tube_value(self, k: int, d: np.ndarray) -> np.ndarray:
        l, r = self.sides[k]
        prof: HeteroclinicTable = self.art.profiles[(r, l)]  # right color at -inf, left color at +inf
        return prof(self.p.profile_scale * d / self.p.eps)

    def patch(self, f: _NodeFrame, pts) -> np.ndarray:
        y = (pts - f.O) @ _rot(-f.rot).T / self.p.eps
        return self.art.ustar(y) @ f.Q.T

    # ---- far field ----------------------------------------------------------

    def far_field(self, pts, return_parts: bool = False):
        """phi_eps: partition of unity over the tube sets D_i and the bulk sets C_i."""
        p = self.p
        w_out = p.tube_width
        w_in = w_out / 2
        n = len(pts)
        num = np.zeros((n, 2))
        wsum = np.zeros(n)
        keep = np.ones(n)  # product of (1 - w_D)
        dmin = np.full(n, np.inf)
        for k, (idx, d) in enumerate(self.distances(pts, w_out)):
            if not len(idx):
                continue
            ad = np.abs(d)
            dmin[idx] = np.minimum(dmin[idx], ad)
            sel = ad < w_out
            if not np.any(sel):
                continue
            i2, d2 = idx[sel], d[sel]
            w = 1.0 - smoothstep((np.abs(d2) - w_in) / (w_out - w_in))
            for O, tau in self.caps[k]:
                w = w * smoothstep((pts[i2] - O) @ tau / w_in)
            num[i2] += w[:, None] * self.tube_value(k, d2)
            wsum[i2] += w
            keep[i2] *= 1.0 - w
        col = self.color_at(pts)
        cvals = self.art.W.minima[col - 1]
        num += keep[:, None] * cvals
        total = wsum + keep
        phi = num / total[:, None]
        if return_parts:
            return phi, {"w_tube": wsum / total, "w_bulk": keep / total, "dmin": dmin, "color": col}
        return phi

    # ---- full ansatz --------------------------------------------------------

    def node_value_rho(self, pts, phi):
        p = self.p
        keep = np.ones(len(pts))
        add = np.zeros((len(pts), 2))
        eta = np.zeros(len(pts))
        for f in self.nodes:
            r = np.hypot(*(pts - f.O).T)
            sel = r < p.node_radius
            if not np.any(sel):
                continue
            e = bump(r[sel] / p.node_radius)
            keep[sel] *= 1.0 - e
            add[sel] += e[:, None] * self.patch(f, pts[sel])
            eta[sel] = np.maximum(eta[sel], e)
        return keep[:, None] * phi + add, eta

    def node_value_delta(self, pts, phi):
        p = self.p
        keep = np.ones(len(pts))
        add = np.zeros((len(pts), 2))
        eta = np.zeros(len(pts))
        for f in self.nodes:
            r = np.hypot(*(pts - f.O).T)
            sel = np.nonzero(r < p.outer_radius)[0]
            if not len(sel):
                continue
            s = r[sel] / (2 * p.eps) + 1.0 - p.outer_radius / (2 * p.eps)
            e1 = ramp_down(s)
            q = pts[sel]
            inner = self._angular(f, q)
            e2 = bump(r[sel] / p.node_radius)
            near = e2 > 0
            if np.any(near):
                inner[near] = (1 - e2[near])[:, None] * inner[near] + e2[near][:, None] * self.patch(f, q[near])
            keep[sel] *= 1.0 - e1
            add[sel] += e1[:, None] * inner
            eta[sel] = np.maximum(eta[sel], e1)
        return keep[:, None] * phi + add, eta

    def _angular(self, f: _NodeFrame, q) -> np.ndarray:
        """Angular partition around a junction: tubes near the three tangents, colors in between."""
        p = self.p
        th = np.arctan2(q[:, 1] - f.O[1], q[:, 0] - f.O[0])
        out = np.zeros((len(q), 2))
        wsum = np.zeros(len(q))
        for j, k in enumerate(f.arcs):
            dth = np.abs(np.angle(np.exp(1j * (th - f.angles[j]))))
            w = 1.0 - smoothstep((dth - p.theta_int / 2) / (p.theta_int / 2))
            if np.any(w > 0):
                d = point_polyline_distance(q, self.lines[k], signed=True)
                out += w[:, None] * self.tube_value(k, d)
                wsum += w
        rel = np.mod(th[:, None] - f.angles[None, :], 2 * np.pi)
        sector = np.argmin(rel, axis=1)  # last tangent passed going CCW
        cvals = self.art.W.minima[np.array(f.colors)[sector] - 1]
        out += (1 - wsum)[:, None] * cvals
        return out

    def value(self, pts, return_parts: bool = False):
        phi, parts = self.far_field(pts, return_parts=True)
        if self.p.variant == "rho":
            n, eta = self.node_value_rho(pts, phi)
        else:
            n, eta = self.node_value_delta(pts, phi)
        if return_parts:
            parts["eta"] = eta
            return n, parts
        return n


# =============================================================================
# Public ansatz interface
# =============================================================================


@dataclass(frozen=True)
class RegionMask:
    """Per-node membership of the sets used by the construction."""

    region_color: np.ndarray  # color 1..3 of the containing region
    tube: np.ndarray  # inside some D_i (|d_i| <= tube width)
    bulk: np.ndarray  # outside every tube set D_i and away from node balls (constant colors)
    node_ball: np.ndarray  # within the node cutoff of some junction
    tube_core: np.ndarray  # partition weight of the tubes is 1 and no node cutoff is active
    dmin: np.ndarray  # distance to the nearest arc


class Ansatz:
    """n_eps along a flow trajectory; exact at snapshot times, linear in time between them."""

    def __init__(self, tr: FlowTrajectory, coloring: Coloring, art: PotentialArtifacts, p: AnsatzParams):
        self.tr, self.coloring, self.art, self.p = tr, coloring, art, p
        self.times = tr.times
        self._snaps: dict[int, _Snapshot] = {}

    def snapshot(self, k: int) -> _Snapshot:
        if k not in self._snaps:
            self._snaps[k] = _Snapshot(self.tr.snapshots[k][1], self.coloring, self.art, self.p)
        return self._snaps[k]

    def _bracket(self, t: float):
        ts = self.times
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise ValueError(f"t={t} outside the trajectory span [{ts[0]}, {ts[-1]}]")
        k = int(np.searchsorted(ts, t - 1e-12))
        k = min(max(k, 0), len(ts) - 1)
        if abs(ts[k] - t) <= 1e-12 * max(1.0, abs(t)):
            return k, k, 0.0
        return k - 1, k, (t - ts[k - 1]) / (ts[k] - ts[k - 1])

    def _interp(self, t, fn):
        a, b, s = self._bracket(t)
        va = fn(self.snapshot(a))
        if a == b:
            return va
        return (1 - s) * va + s * fn(self.snapshot(b))

    def values(self, pts, t: float) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return self._interp(t, lambda sn: sn.value(pts))

    def far_field(self, pts, t: float) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return self._interp(t, lambda sn: sn.far_field(pts))

    def field(self, grid: Grid2, t: float, boundary: np.ndarray | None = None) -> VectorField2:
        pts = grid.points().reshape(-1, 2)
        return VectorField2(grid, self.values(pts, t).reshape(grid.shape + (2,)), t, boundary)

    def mask(self, grid: Grid2, k: int) -> RegionMask:
        """Set memberships at snapshot k."""
        pts = grid.points().reshape(-1, 2)
        sn = self.snapshot(k)
        _, parts = sn.value(pts, return_parts=True)
        w = self.p.tube_width
        dmin = parts["dmin"]
        shp = grid.shape
        tube = dmin <= w
        node_ball = parts["eta"] > 0
        bulk = (dmin >= w) & ~node_ball
        core = (parts["w_tube"] >= 1.0) & ~node_ball
        return RegionMask(parts["color"].reshape(shp), tube.reshape(shp), bulk.reshape(shp),
                          node_ball.reshape(shp), core.reshape(shp), dmin.reshape(shp))


def check_resolution(p: AnsatzParams, h: float) -> None:
    if h > p.eps / 4 + 1e-15:
        raise UnresolvedEpsilon(f"grid spacing {h:g} exceeds eps/4 = {p.eps / 4:g}")


def ac_grid(domain, h: float) -> tuple[Grid2, np.ndarray]:
    """Grid over the domain with one layer of outside nodes; returns (grid, Dirichlet mask)."""
    grid = Grid2.covering(domain.size, h, pad=1)
    depth = domain.depth(grid.points())
    return grid, ~(depth > 1e-12)


def build_ansatz(tr: FlowTrajectory, coloring: Coloring, art: PotentialArtifacts, p: AnsatzParams,
                 t: float, grid: Grid2 | None = None, h: float | None = None) -> VectorField2:
    """n_eps(., t) sampled on a grid (default: the solver grid with spacing eps/4)."""
    dom = tr.snapshots[0][1].domain
    if grid is None:
        grid, bmask = ac_grid(dom, h or p.eps / 4)
    else:
        bmask = ~(dom.depth(grid.points()) > 1e-12)
    check_resolution(p, grid.h)
    return Ansatz(tr, coloring, art, p).field(grid, t, bmask)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet values on the masked nodes at a sequence of times (linear in between)."""

    grid: Grid2
    mask: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (n_times, n_masked, 2)

    def at(self, t: float) -> np.ndarray:
        ts = self.times
        if len(ts) == 1 or t <= ts[0]:
            return self.values[0]
        if t >= ts[-1]:
            return self.values[-1]
        k = int(np.searchsorted(ts, t))
        s = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
        return (1 - s) * self.values[k - 1] + s * self.values[k]

    @classmethod
    def constant(cls, field: VectorField2, mask: np.ndarray) -> "BoundaryData":
        return cls(field.grid, mask, np.array([0.0]), field.values[mask][None])


def initial_and_boundary_data(tr: FlowTrajectory, coloring: Coloring, art: PotentialArtifacts,
                              p: AnsatzParams, h: float | None = None) -> tuple[VectorField2, BoundaryData]:
    """psi_eps = n_eps(., t0) on the solver grid and the far-field trace on the Dirichlet nodes."""
    dom = tr.snapshots[0][1].domain
    h = h or p.eps / 4
    check_resolution(p, h)
    grid, bmask = ac_grid(dom, h)
    A = Ansatz(tr, coloring, art, p)
    psi = A.field(grid, float(tr.times[0]), bmask)
    bpts = grid.points()[bmask]
    vals = np.stack([A.snapshot(k).far_field(bpts) for k in range(len(tr.times))])
    return psi, BoundaryData(grid, bmask, tr.times.copy(), vals)


# =============================================================================
# Solver
# =============================================================================


def stable_dt(W: Potential, eps: float, h: float) -> float:
    if not W.hessian_bound > 0:
        return 0.2 * h * h
    return min(0.2 * h * h, 0.2 * eps * eps / W.hessian_bound)


def solve(psi: VectorField2, bc: BoundaryData, W: Potential, eps: float, T: float,
          times=None, dt: float | None = None, grid: Grid2 | None = None) -> list[tuple[float, VectorField2]]:
    """Explicit scheme u <- u + dt (Lap_h u - grad W(u) / eps^2) with Dirichlet overwrite.

    Snapshots are returned at ``times`` (default: the boundary-data times up to T,
    always including 0 and T).
    """
    grid = grid or psi.grid
    if not grid.same_as(psi.grid) or not grid.same_as(bc.grid):
        raise GridMismatch("initial data, boundary data and grid differ")
    h = grid.h
    if h > eps / 4 + 1e-15:
        raise UnresolvedEpsilon(f"grid spacing {h:g} exceeds eps/4 = {eps / 4:g}")
    bound = stable_dt(W, eps, h)
    if dt is None:
        dt = bound
    elif dt > bound * (1 + 1e-12):
        raise BadCFL(f"dt={dt:g} exceeds the stable step {bound:g}")
    t0 = float(psi.t or 0.0)
    if times is None:
        times = [x for x in bc.times if t0 < x < T - 1e-12]
    times = sorted(set([t0] + [float(x) for x in times if t0 <= x <= T] + [float(T)]))
    mask = bc.mask
    active = ~mask
    # only Dirichlet nodes next to an active node are ever read by the stencil
    near = np.zeros_like(active)
    near[1:, :] |= active[:-1, :]
    near[:-1, :] |= active[1:, :]
    near[:, 1:] |= active[:, :-1]
    near[:, :-1] |= active[:, 1:]
    ring = np.nonzero((mask & near).ravel())[0]
    ring_sel = (mask & near)[mask]
    ring_bc = BoundaryData(grid, mask, bc.times, bc.values[:, ring_sel])
    act = active[..., None].astype(float)
    u = np.array(psi.values)
    u[mask] = bc.at(t0)
    flat = u.reshape(-1, 2)
    out = [(t0, VectorField2(grid, u.copy(), t0, mask))]
    inv_e2 = 1.0 / (eps * eps)
    inv_h2 = 1.0 / (h * h)
    upd = np.zeros_like(u)
    t = t0
    step = 0
    for t_next in times[1:]:
        while t < t_next - 1e-13:
            tau = min(dt, t_next - t)
            upd[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) * inv_h2
            upd -= W.grad(u) * inv_e2
            upd *= act
            u += tau * upd
            t += tau
            flat[ring] = ring_bc.at(t)
            step += 1
            if step % 200 == 0 and not np.abs(u).max() <= WORKING_BALL:
                raise Instability(f"solution left the working ball at t={t:.4g}")
        t = float(t_next)
        u[mask] = bc.at(t)
        if not np.all(np.hypot(u[..., 0], u[..., 1]) <= WORKING_BALL):
            raise Instability(f"solution left the working ball at t={t:.4g}")
        out.append((t, VectorField2(grid, u.copy(), t, mask)))
    return out


# =============================================================================
# Diagnostics
# =============================================================================


@dataclass(frozen=True)
class NodalSet:
    segments: np.ndarray  # (m, 2, 2)
    ambiguous_fraction: float  # share of nodes farther than kappa from every minimum

    def polylines(self) -> list[np.ndarray]:
        return list(self.segments)

    @property
    def empty(self) -> bool:
        return len(self.segments) == 0


def color_index(u: np.ndarray, minima: np.ndarray) -> np.ndarray:
    d = np.stack([np.hypot(u[..., 0] - c[0], u[..., 1] - c[1]) for c in minima], axis=-1)
    return np.argmin(d, axis=-1), d.min(axis=-1)


def extract_nodal_set(u: VectorField2, minima, kappa: float | None = None, mask: np.ndarray | None = None) -> NodalSet:
    """Midlines between grid nodes of different nearest-minimum color (marching squares).

    A cell with two color-change edges contributes the segment joining their
    midpoints; with three or four, each midpoint is joined to the cell centre.
    ``mask`` restricts the result to cells whose four corners are all masked in.
    """
    minima = np.asarray(minima, dtype=float)
    if kappa is None:
        dm = min(np.hypot(*(minima[i] - minima[j])) for i in range(3) for j in range(i + 1, 3))
        kappa = 0.3 * dm
    C, dist = color_index(u.values, minima)
    if mask is None:
        mask = np.ones(C.shape, dtype=bool)
    g = u.grid
    xs, ys = g.xs, g.ys
    c00, c10, c11, c01 = C[:-1, :-1], C[1:, :-1], C[1:, 1:], C[:-1, 1:]
    ok = mask[:-1, :-1] & mask[1:, :-1] & mask[1:, 1:] & mask[:-1, 1:]
    X0, Y0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
    h = g.h
    # edge midpoints: bottom, right, top, left
    mids = np.stack([
        np.stack([X0 + h / 2, Y0], -1),
        np.stack([X0 + h, Y0 + h / 2], -1),
        np.stack([X0 + h / 2, Y0 + h], -1),
        np.stack([X0, Y0 + h / 2], -1),
    ], axis=2)
    cross = np.stack([c00 != c10, c10 != c11, c01 != c11, c00 != c01], axis=-1) & ok[..., None]
    ncross = cross.sum(axis=-1)
    segs = []
    two = np.nonzero(ncross == 2)
    if len(two[0]):
        cr = cross[two]
        m = mids[two]
        first = np.argmax(cr, axis=1)
        second = 3 - np.argmax(cr[:, ::-1], axis=1)
        rows = np.arange(len(first))
        segs.append(np.stack([m[rows, first], m[rows, second]], axis=1))
    many = np.nonzero(ncross >= 3)
    for i, j in zip(*many):
        centre = np.array([xs[i] + h / 2, ys[j] + h / 2])
        for e in range(4):
            if cross[i, j, e]:
                segs.append(np.stack([mids[i, j, e], centre])[None])
    seg = np.concatenate(segs) if segs else np.zeros((0, 2, 2))
    amb = float(np.mean(dist[mask] > kappa)) if mask.any() else 0.0
    return NodalSet(seg, amb)


def sup_difference(A, B) -> list[tuple[float, float]]:
    """Discrete sup norm of the difference, snapshot by snapshot."""
    A = [A] if isinstance(A, VectorField2) else list(A)
    B = [B] if isinstance(B, VectorField2) else list(B)
    A = [a if isinstance(a, VectorField2) else a[1] for a in A]
    B = [b if isinstance(b, VectorField2) else b[1] for b in B]
    if len(A) != len(B):
        raise GridMismatch(f"{len(A)} vs {len(B)} snapshots")
    out = []
    for a, b in zip(A, B):
        if not a.grid.same_as(b.grid):
            raise GridMismatch("fields live on different grids")
        ta, tb = a.t, b.t
        if ta is not None and tb is not None and abs(ta - tb) > 1e-9 * max(1.0, abs(ta)):
            raise GridMismatch(f"snapshot times differ: {ta} vs {tb}")
        diff = a.values - b.values
        out.append((float(ta if ta is not None else (tb or 0.0)), float(np.hypot(diff[..., 0], diff[..., 1]).max())))
    return out


@dataclass(frozen=True)
class ResidualReport:
    eps: float
    times: np.ndarray
    bulk: np.ndarray  # sup |R| over bulk nodes per time
    tube: np.ndarray  # sup |R| over tube-core nodes per time
    tube_weighted: np.ndarray  # sup |R| exp(c |d| / eps) over tube-core nodes
    node: np.ndarray  # sup |R| over node balls per time
    node_t_weighted: float  # sup_t t * node[t]

    def scaled(self) -> dict:
        """Residuals multiplied by eps^2 (units of the reaction term)."""
        e2 = self.eps**2
        return {"bulk": self.bulk * e2, "tube": self.tube * e2, "node": self.node * e2}

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "times": self.times.tolist(),
            "bulk": self.bulk.tolist(),
            "tube": self.tube.tolist(),
            "tube_weighted": self.tube_weighted.tolist(),
            "node": self.node.tolist(),
            "node_t_weighted": self.node_t_weighted,
        }


def residual_diagnostics(tr: FlowTrajectory, coloring: Coloring, art: PotentialArtifacts, p: AnsatzParams,
                         times=None, h: float | None = None, weight_rate: float = 0.5) -> ResidualReport:
    """R = d_t n - Lap_h n + grad W(n)/eps^2 of the ansatz, sorted by region type.

    The time derivative is a centred difference over neighbouring flow snapshots
    (one-sided at the ends). Only interior grid nodes whose whole stencil lies
    in the same set type enter each supremum.
    """
    dom = tr.snapshots[0][1].domain
    h = h or p.eps / 4
    check_resolution(p, h)
    grid, bmask = ac_grid(dom, h)
    A = Ansatz(tr, coloring, art, p)
    ks = range(len(tr.times)) if times is None else [int(np.argmin(np.abs(tr.times - t))) for t in times]
    pts = grid.points().reshape(-1, 2)
    cache: dict[int, np.ndarray] = {}

    def n_at(k):
        if k not in cache:
            cache[k] = A.snapshot(k).value(pts).reshape(grid.shape + (2,))
        return cache[k]

    inner = np.zeros(grid.shape, dtype=bool)
    inner[1:-1, 1:-1] = ~bmask[1:-1, 1:-1]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        inner[1:-1, 1:-1] &= ~bmask[1 + di:grid.nx - 1 + di, 1 + dj:grid.ny - 1 + dj]

    def stencil_all(m):
        out = m.copy()
        out[1:-1, 1:-1] &= m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
        out[[0, -1], :] = False
        out[:, [0, -1]] = False
        return out

    T, bulk, tube, tubew, node = [], [], [], [], []
    nt = len(tr.times)
    for k in ks:
        a, b = max(k - 1, 0), min(k + 1, nt - 1)
        if a == b:
            dndt = np.zeros(grid.shape + (2,))
        else:
            dndt = (n_at(b) - n_at(a)) / (tr.times[b] - tr.times[a])
        n = n_at(k)
        R = dndt - laplacian(n, h) + art.W.grad(n) / p.eps**2
        Rn = np.hypot(R[..., 0], R[..., 1])
        M = A.mask(grid, k)
        pure = M.bulk.copy()
        for j in (a, b):
            if j != k:
                pure &= A.mask(grid, j).bulk
        bmask_k = stencil_all(pure) & inner
        cmask = stencil_all(M.tube_core) & inner
        nmask = M.node_ball & inner
        T.append(float(tr.times[k]))
        bulk.append(float(Rn[bmask_k].max()) if bmask_k.any() else 0.0)
        tube.append(float(Rn[cmask].max()) if cmask.any() else 0.0)
        tubew.append(float((Rn[cmask] * np.exp(weight_rate * M.dmin[cmask] / p.eps)).max()) if cmask.any() else 0.0)
        node.append(float(Rn[nmask].max()) if nmask.any() else 0.0)
    T = np.array(T)
    node = np.array(node)
    return ResidualReport(p.eps, T, np.array(bulk), np.array(tube), np.array(tubew), node,
                          float(np.max(T * node)) if len(T) else 0.0)
