"""Front-tracking curve shortening flow of networks with 120 degree triple junctions.

Interior polyline vertices move by their discrete (Menger) curvature vector;
after every step each triple junction is moved to the Fermat point of the
first vertices of its three arcs, which makes the three unit tangents into the
node sum to zero. Exterior nodes never move.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ArcCollapse, ClassInfeasible, InvalidNetwork, JunctionDiverged, StepUnderflow
from .geometry import (
    Arc,
    DomainSpec,
    PlanarNetwork,
    build_network,
    clip_polyline_to_disk,
    cumulative_length,
    hausdorff_distance,
    menger_curvature_vectors,
    resample_spline,
    topology_signature,
    vertex_normals,
)
from .networks import on_circle, segment


@dataclass(frozen=True)
class FlowConfig:
    dt_safety: float = 0.2
    target_spacing: float = 0.02
    junction_tol: float = 1e-10
    t_start: float = 0.0
    t_end: float = 0.1
    snapshot_every: float | None = None  # default: (t_end - t_start) / 20
    regrid_band: tuple[float, float] = (0.5, 1.5)  # allowed segment length / target_spacing
    max_steps: int = 5_000_000
    # short arcs are gridded with at least four segments but never finer than this;
    # None means target_spacing (every arc uses target_spacing)
    min_spacing: float | None = None

    def __post_init__(self):
        if not 0 < self.dt_safety <= 0.5:
            raise ValueError("dt_safety must lie in (0, 0.5]")
        if not self.target_spacing > 0:
            raise ValueError("target_spacing must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        lo, hi = self.regrid_band
        if not 0 < lo < 1 < hi:
            raise ValueError("regrid_band must bracket 1")
        if self.min_spacing is not None and not 0 < self.min_spacing <= self.target_spacing:
            raise ValueError("min_spacing must lie in (0, target_spacing]")

    @property
    def floor_spacing(self) -> float:
        return self.target_spacing if self.min_spacing is None else self.min_spacing

    def arc_spacing(self, length: float) -> float:
        return max(self.floor_spacing, min(self.target_spacing, length / 4))

    def snapshot_times(self) -> np.ndarray:
        every = self.snapshot_every or (self.t_end - self.t_start) / 20
        k = max(1, int(round((self.t_end - self.t_start) / every)))
        return np.linspace(self.t_start, self.t_end, k + 1)


@dataclass(frozen=True)
class ClosedCurve:
    """A single closed polyline (first point not repeated)."""

    points: np.ndarray

    def polylines(self) -> list[np.ndarray]:
        return [np.vstack([self.points, self.points[:1]])]

    @property
    def length(self) -> float:
        return float(cumulative_length(self.polylines()[0])[-1])

    @property
    def area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


@dataclass(frozen=True)
class SnapshotDiagnostics:
    t: float
    max_k: float
    min_len: float
    min_internode: float
    node_speed: float
    junction_residual: float  # max tangent-sum residual over the steps since the last snapshot
    total_length: float
    steps: int


@dataclass(frozen=True)
class FlowTrajectory:
    snapshots: tuple[tuple[float, object], ...]
    diagnostics: tuple[SnapshotDiagnostics, ...]
    config: FlowConfig
    max_junction_residual: float = 0.0
    length_increase: float = 0.0  # largest relative per-step increase of total length

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def at(self, t: float):
        """Snapshot whose time is closest to t."""
        k = int(np.argmin(np.abs(self.times - t)))
        return self.snapshots[k][1]

    def final(self):
        return self.snapshots[-1][1]

    def diagnostics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "max_k", "sqrt_t_k", "min_len", "junction_residual"])
        for d in self.diagnostics:
            w.writerow([f"{d.t:.10g}", f"{d.max_k:.10g}", f"{math.sqrt(max(d.t, 0.0)) * d.max_k:.10g}",
                        f"{d.min_len:.10g}", f"{d.junction_residual:.6e}"])
        return buf.getvalue()


# =============================================================================
# Junction relocation
# =============================================================================


def tangent_sum(O, q) -> np.ndarray:
    r = np.asarray(O, float) - np.asarray(q, float)
    return (r / np.hypot(r[:, 0], r[:, 1])[:, None]).sum(axis=0)


def _fermat_closed_form(q: np.ndarray) -> np.ndarray:
    """Fermat point from barycentric weights a csc(A + pi/3) (valid when every angle is below 120 degrees)."""
    w = np.empty(3)
    for k in range(3):
        a = q[(k + 1) % 3] - q[k]
        b = q[(k + 2) % 3] - q[k]
        ang = math.acos(float(np.clip(np.dot(a, b) / (np.hypot(*a) * np.hypot(*b)), -1.0, 1.0)))
        side = float(np.hypot(*(q[(k + 2) % 3] - q[(k + 1) % 3])))
        w[k] = side / math.sin(ang + math.pi / 3)
    return (w[:, None] * q).sum(axis=0) / w.sum()


def relocate_junction(q: np.ndarray, x0: np.ndarray, tol: float, max_iter: int = 50) -> tuple[np.ndarray, float]:
    """Point at which the unit vectors towards q_1, q_2, q_3 sum to zero (damped Newton).

    Newton starts from x0 or from the closed-form Fermat point, whichever is closer to stationarity.
    """
    q = np.asarray(q, dtype=float)
    for k in range(3):
        a = q[(k + 1) % 3] - q[k]
        b = q[(k + 2) % 3] - q[k]
        cosang = np.dot(a, b) / (np.hypot(*a) * np.hypot(*b))
        if cosang <= -0.5 + 1e-12:
            raise JunctionDiverged("three neighbouring vertices span an angle of 120 degrees or more")

    def F(x):
        return float(np.sum(np.hypot(*(x - q).T)))

    def resid(x):
        d = np.hypot(*(x - q).T)
        return float(np.hypot(*tangent_sum(x, q))) if d.min() > 0 else math.inf

    x = np.asarray(x0, dtype=float).copy()
    xc = _fermat_closed_form(q)
    if resid(xc) < resid(x):
        x = xc
    g = tangent_sum(x, q)
    res = float(np.hypot(*g))
    for _ in range(max_iter):
        if res <= tol:
            return x, res
        r = x - q
        d = np.hypot(r[:, 0], r[:, 1])
        u = r / d[:, None]
        H = sum((np.eye(2) - np.outer(ui, ui)) / di for ui, di in zip(u, d))
        step = -np.linalg.solve(H, g)
        f0, lam = F(x), 1.0
        while lam > 1e-8 and F(x + lam * step) > f0 + 1e-15 * max(1.0, f0):
            lam *= 0.5
        x = x + lam * step
        g = tangent_sum(x, q)
        res = float(np.hypot(*g))
    if res <= tol:
        return x, res
    raise JunctionDiverged(f"junction Newton stalled at tangent residual {res:.3e}")


# =============================================================================
# Network evolution
# =============================================================================


def _regrid(pts: np.ndarray, spacing: float, closed: bool = False) -> np.ndarray:
    L = float(cumulative_length(np.vstack([pts, pts[:1]]) if closed else pts)[-1])
    count = max(12 if closed else 2, int(round(L / spacing)) + (0 if closed else 1))
    return resample_spline(pts, count, closed=closed)


def _max_curvature(polys) -> float:
    m = 0.0
    for p in polys:
        if len(p) >= 3:
            kv = menger_curvature_vectors(p)
            if len(kv):
                m = max(m, float(np.hypot(kv[:, 0], kv[:, 1]).max()))
    return m


def _min_internode(net: PlanarNetwork) -> float:
    P = np.vstack([net.exterior, net.interior]) if len(net.interior) else net.exterior
    d = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def _fermat_scalar(q, x, y, tol, max_iter=50):
    """Scalar-math version of relocate_junction for the inner time loop."""
    (ax, ay), (bx, by), (cx, cy) = q

    def parts(x, y):
        gx = gy = hxx = hxy = hyy = f = 0.0
        for px, py in ((ax, ay), (bx, by), (cx, cy)):
            rx, ry = x - px, y - py
            d = math.hypot(rx, ry)
            ux, uy = rx / d, ry / d
            gx += ux
            gy += uy
            hxx += (1 - ux * ux) / d
            hxy -= ux * uy / d
            hyy += (1 - uy * uy) / d
            f += d
        return gx, gy, hxx, hxy, hyy, f

    gx, gy, hxx, hxy, hyy, f = parts(x, y)
    res = math.hypot(gx, gy)
    for _ in range(max_iter):
        if res <= tol:
            return x, y, res
        det = hxx * hyy - hxy * hxy
        sx = -(hyy * gx - hxy * gy) / det
        sy = -(-hxy * gx + hxx * gy) / det
        lam = 1.0
        while True:
            nx, ny = x + lam * sx, y + lam * sy
            out = parts(nx, ny)
            if out[5] <= f + 1e-15 * max(1.0, f) or lam < 1e-8:
                break
            lam *= 0.5
        x, y = nx, ny
        gx, gy, hxx, hxy, hyy, f = out
        res = math.hypot(gx, gy)
    if res <= tol:
        return x, y, res
    xs, _ = relocate_junction(np.array(q, dtype=float), np.array([x, y]), tol, max_iter)
    return float(xs[0]), float(xs[1]), float(np.hypot(*tangent_sum(xs, q)))


class _Packed:
    """All arc vertices in one array so a time step is a handful of vectorised operations."""

    def __init__(self, arcs):
        self.pack(arcs)

    def pack(self, arcs):
        self.sizes = np.array([len(p) for p in arcs])
        self.starts = np.concatenate([[0], np.cumsum(self.sizes)[:-1]])
        self.ends = self.starts + self.sizes - 1
        self.P = np.vstack(arcs)
        inner = np.ones(len(self.P), dtype=bool)
        inner[self.starts] = False
        inner[self.ends] = False
        self.inner = np.nonzero(inner)[0]
        seg_ok = np.ones(len(self.P) - 1, dtype=bool)
        seg_ok[self.ends[:-1]] = False
        self.seg_idx = np.nonzero(seg_ok)[0]
        # arc k owns segments [seg_starts[k], seg_starts[k] + sizes[k] - 1) of the masked list
        self.seg_starts = np.concatenate([[0], np.cumsum(self.sizes - 1)[:-1]])

    def arcs(self):
        return [self.P[s:e + 1] for s, e in zip(self.starts, self.ends)]

    def segments(self):
        d = np.diff(self.P, axis=0)[self.seg_idx]
        return np.hypot(d[:, 0], d[:, 1])

    def move(self, dt):
        P = self.P
        i = self.inner
        a = P[i - 1] - P[i]
        b = P[i + 1] - P[i]
        aa = a[:, 0] * a[:, 0] + a[:, 1] * a[:, 1]
        bb = b[:, 0] * b[:, 0] + b[:, 1] * b[:, 1]
        D = 2.0 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        nx = aa * b[:, 1] - bb * a[:, 1]
        ny = bb * a[:, 0] - aa * b[:, 0]
        nn = nx * nx + ny * ny
        f = np.divide(D, nn, out=np.zeros_like(nn), where=nn > 0)
        P[i, 0] += dt * nx * f
        P[i, 1] += dt * ny * f


def evolve(net0: PlanarNetwork, cfg: FlowConfig) -> FlowTrajectory:
    """Explicit front-tracking curve shortening flow with Dirichlet exterior nodes."""
    lo, hi = cfg.regrid_band
    spacing = [cfg.arc_spacing(a.length) for a in net0.arcs]
    packed = _Packed([_regrid(np.array(a.points), h) for a, h in zip(net0.arcs, spacing)])
    collapse = 3 * cfg.floor_spacing
    refs = [(a.start, a.end) for a in net0.arcs]
    sig0 = topology_signature(net0)
    nodes = [f"i{j}" for j in range(len(net0.interior))]
    node_arcs = {r: [(k, refs[k][0] == r) for k in net0.arcs_at(r)] for r in nodes}
    pos = {r: np.array(net0.node_position(r), dtype=float) for r in nodes}

    def index_tables():
        # per node: rows of the node copies and of the first vertices of its arcs
        own, nbr = {}, {}
        for r in nodes:
            own[r] = [packed.starts[k] if s else packed.ends[k] for k, s in node_arcs[r]]
            nbr[r] = [packed.starts[k] + 1 if s else packed.ends[k] - 1 for k, s in node_arcs[r]]
        return own, nbr

    own, nbr = index_tables()

    def relocate():
        worst = 0.0
        P = packed.P
        for r in nodes:
            x, y, res = _fermat_scalar(P[nbr[r]].tolist(), pos[r][0], pos[r][1], cfg.junction_tol)
            pos[r] = np.array([x, y])
            P[own[r]] = pos[r]
            worst = max(worst, res)
        return worst

    def arc_lengths(seg):
        return np.add.reduceat(seg, packed.seg_starts)

    def check(seg):
        L = arc_lengths(seg)
        k = int(np.argmin(L))
        if L[k] < collapse:
            raise ArcCollapse(f"arc {k} ({refs[k][0]}-{refs[k][1]}) shrank to length {L[k]:.4g}")
        return float(L.sum())

    jres = relocate()
    total = check(packed.segments())

    def make_net():
        return build_network([Arc(p.copy(), s, e) for p, (s, e) in zip(packed.arcs(), refs)], net0.domain)

    def diag(t, net, speed, res, steps):
        return SnapshotDiagnostics(t, _max_curvature(net.polylines()), min(a.length for a in net.arcs),
                                   _min_internode(net), speed, res, net.total_length(), steps)

    times = cfg.snapshot_times()
    t = float(times[0])
    first = make_net()
    snaps = [(t, first)]
    diags = [diag(t, first, 0.0, jres, 0)]
    last_pos = {r: pos[r].copy() for r in nodes}
    steps = 0
    max_jres, worst_rise = jres, 0.0
    seg = packed.segments()
    for t_next in times[1:]:
        seg_res = 0.0
        t_prev = t
        while t < t_next - 1e-14 * max(1.0, abs(t_next)):
            hmin = float(seg.min())
            dt = min(cfg.dt_safety * hmin * hmin, t_next - t)
            if dt < 1e-14 * max(1.0, abs(t)) or steps >= cfg.max_steps:
                raise StepUnderflow(f"time step {dt:.3e} at t={t:.6g} after {steps} steps")
            packed.move(dt)
            seg = packed.segments()
            smin = np.minimum.reduceat(seg, packed.seg_starts)
            smax = np.maximum.reduceat(seg, packed.seg_starts)
            h = np.asarray(spacing)
            bad = np.nonzero((smin < lo * h) | (smax > hi * h))[0]
            if len(bad):
                arcs = packed.arcs()
                L = arc_lengths(seg)
                for k in bad:
                    spacing[k] = cfg.arc_spacing(float(L[k]))
                    arcs[k] = _regrid(arcs[k], spacing[k])
                packed.pack([a.copy() for a in arcs])
                own, nbr = index_tables()
            seg_res = max(seg_res, relocate())
            seg = packed.segments()
            new_total = check(seg)
            worst_rise = max(worst_rise, (new_total - total) / total)
            total = new_total
            t += dt
            steps += 1
        t = float(t_next)
        net = make_net()
        if topology_signature(net) != sig0:
            raise InvalidNetwork("topological class changed during the flow")
        speed = max((float(np.hypot(*(pos[r] - last_pos[r]))) / (t - t_prev) for r in nodes), default=0.0)
        last_pos = {r: pos[r].copy() for r in nodes}
        max_jres = max(max_jres, seg_res)
        snaps.append((t, net))
        diags.append(diag(t, net, speed, seg_res, steps))
    return FlowTrajectory(tuple(snaps), tuple(diags), cfg, max_jres, worst_rise)


def evolve_curve(points, cfg: FlowConfig) -> FlowTrajectory:
    """Curve shortening of one closed polyline (the auxiliary single-curve mode)."""
    ts = cfg.target_spacing
    lo, hi = cfg.regrid_band
    p = _regrid(np.asarray(points, dtype=float), ts, closed=True)
    times = cfg.snapshot_times()
    t = float(times[0])

    def diag(t, c, steps):
        kmax = float(np.hypot(*menger_curvature_vectors(c.points, closed=True).T).max())
        return SnapshotDiagnostics(t, kmax, c.length, float("nan"), 0.0, 0.0, c.length, steps)

    c = ClosedCurve(p.copy())
    snaps, diags = [(t, c)], [diag(t, c, 0)]
    steps = 0
    total = c.length
    worst_rise = 0.0
    for t_next in times[1:]:
        while t < t_next - 1e-14 * max(1.0, abs(t_next)):
            seg = np.hypot(*(np.roll(p, -1, axis=0) - p).T)
            dt = min(cfg.dt_safety * float(seg.min()) ** 2, t_next - t)
            if dt < 1e-14 * max(1.0, abs(t)) or steps >= cfg.max_steps:
                raise StepUnderflow(f"time step {dt:.3e} at t={t:.6g}")
            p = p + dt * menger_curvature_vectors(p, closed=True)
            seg = np.hypot(*(np.roll(p, -1, axis=0) - p).T)
            if (seg.min() < lo * ts or seg.max() > hi * ts) and seg.sum() / len(seg) > lo * ts:
                p = _regrid(p, ts, closed=True)
            L = float(np.hypot(*(np.roll(p, -1, axis=0) - p).T).sum())
            if L < 12 * lo * ts:
                raise ArcCollapse(f"closed curve shrank to length {L:.4g}")
            worst_rise = max(worst_rise, (L - total) / total)
            total = L
            t += dt
            steps += 1
        t = float(t_next)
        c = ClosedCurve(p.copy())
        snaps.append((t, c))
        diags.append(diag(t, c, steps))
    return FlowTrajectory(tuple(snaps), tuple(diags), cfg, 0.0, worst_rise)


def circle(radius: float, spacing: float, center=(0.0, 0.0)) -> np.ndarray:
    n = max(12, int(round(2 * math.pi * radius / spacing)))
    a = 2 * math.pi * np.arange(n) / n
    return np.asarray(center) + radius * np.column_stack([np.cos(a), np.sin(a)])


# =============================================================================
# Curvature statistics and self-similarity
# =============================================================================


@dataclass(frozen=True)
class CurvatureStats:
    t: np.ndarray
    max_k: np.ndarray
    sqrt_t_k: np.ndarray
    min_len: np.ndarray
    min_len_over_sqrt_t: np.ndarray

    def ratio(self, t_min: float = 0.0, t_max: float = math.inf) -> float:
        """max / min of sqrt(t) max|k| over the snapshots with t in [t_min, t_max]."""
        sel = (self.t >= t_min) & (self.t <= t_max) & (self.t > 0)
        v = self.sqrt_t_k[sel]
        if len(v) == 0 or v.min() <= 0:
            return math.inf if len(v) and v.max() > 0 else 1.0
        return float(v.max() / v.min())

    def bounded(self, t_min: float = 0.0, t_max: float = math.inf, ratio: float = 1.5) -> bool:
        return self.ratio(t_min, t_max) <= ratio

    def rows(self) -> list[tuple[float, float, float, float, float]]:
        return list(zip(*(a.tolist() for a in (self.t, self.max_k, self.sqrt_t_k, self.min_len, self.min_len_over_sqrt_t))))


def curvature_stats(tr: FlowTrajectory) -> CurvatureStats:
    if not tr.snapshots:
        raise ValueError("empty trajectory")
    t = np.array([d.t for d in tr.diagnostics])
    k = np.array([d.max_k for d in tr.diagnostics])
    L = np.array([d.min_len for d in tr.diagnostics])
    st = np.sqrt(np.maximum(t, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(st > 0, L / np.where(st > 0, st, 1.0), np.inf)
    return CurvatureStats(t, k, st * k, L, lr)


def _clip(polys, radius):
    out = []
    for p in polys:
        out += clip_polyline_to_disk(p, radius)
    return out


def self_similarity_error(tr: FlowTrajectory, t_ref: float, radius: float | None = None,
                          scale: Callable[[float, float], float] | None = None,
                          resolution: float | None = None) -> list[tuple[float, float]]:
    """Hausdorff distance between N(t) and the rescaled reference sqrt(t/t_ref) N(t_ref).

    Both sets are clipped to the disk of the given radius (default: half the
    domain radius) so that effects of the truncation at the outer boundary are excluded.
    """
    ref = tr.at(t_ref)
    if radius is None:
        dom = getattr(ref, "domain", None)
        radius = 0.5 * dom.size if dom is not None else math.inf
    scale = scale or (lambda t, tr_: math.sqrt(t / tr_))
    res = resolution or tr.config.target_spacing / 8
    out = []
    for t, net in tr.snapshots:
        if t <= 0:
            continue
        f = scale(t, t_ref)
        A = [p * f for p in ref.polylines()]
        B = net.polylines()
        if math.isfinite(radius):
            A, B = _clip(A, radius), _clip(B, radius)
        out.append((float(t), hausdorff_distance(A, B, resolution=res)))
    return out


def expander_profile_residual(net: PlanarNetwork, t: float = 1.0, radius: float | None = None) -> tuple[float, float]:
    """(sup |kappa - <x, n> n / (2 t)|, sup |kappa|) over arc vertices inside the disk.

    kappa is the curvature vector; for N(t) = sqrt(t) N(1) to move by curvature
    the profile must satisfy kappa = <x, n> n / (2 t).
    """
    radius = 0.5 * net.domain.size if radius is None else radius
    worst, kmax = 0.0, 0.0
    for p in net.polylines():
        if len(p) < 3:
            continue
        kv = menger_curvature_vectors(p)
        n = vertex_normals(p)
        x = p[1:-1]
        sel = np.hypot(x[:, 0], x[:, 1]) <= radius
        if not np.any(sel):
            continue
        target = (np.einsum("ij,ij->i", x, n) / (2 * t))[:, None] * n
        worst = max(worst, float(np.hypot(*(kv - target)[sel].T).max()))
        kmax = max(kmax, float(np.hypot(*kv[sel].T).max()))
    return worst, kmax


# =============================================================================
# Expanders from k half-lines
# =============================================================================


def _plane_trees(k: int) -> list[list[tuple[str, str]]]:
    """Edge lists of all trivalent plane trees whose leaves e0..e{k-1} are in cyclic order."""
    out = {}

    def rec(items, edges, nxt):
        if len(items) == 3:
            v = f"i{nxt}"
            full = edges + [(v, x) for x in items]
            out[_edge_key(full)] = full
            return
        for pos in range(len(items)):
            a, b = items[pos], items[(pos + 1) % len(items)]
            v = f"i{nxt}"
            if pos + 1 < len(items):
                new = items[:pos] + [v] + items[pos + 2:]
            else:
                new = [v] + items[1:-1]
            rec(new, edges + [(v, a), (v, b)], nxt + 1)

    rec([f"e{i}" for i in range(k)], [], 0)
    return list(out.values())


def _edge_key(edges):
    # interior names depend on merge order; key on the leaf bipartitions instead
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)

    def leaves_beyond(u, v):
        seen, stack, out = {u}, [v], []
        while stack:
            x = stack.pop()
            seen.add(x)
            if x[0] == "e":
                out.append(int(x[1:]))
            stack += [y for y in adj[x] if y not in seen]
        return frozenset(out)

    return frozenset(frozenset((leaves_beyond(u, v), leaves_beyond(v, u))) for u, v in edges)


def cone_network(edges, directions: np.ndarray, R: float, sigma: float, spacing: float) -> PlanarNetwork:
    """Half-lines truncated at radius R, their common vertex replaced by a straight tree at scale sigma."""
    k = len(directions)
    m = k - 2
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
                    rhs[ia] += directions[int(b[1:])]
    inner = np.linalg.solve(A, rhs)
    inner -= inner.mean(axis=0) if m > 1 else inner
    if m > 1:
        dmin = min(float(np.hypot(*(inner[int(u[1:])] - inner[int(v[1:])])))
                   for u, v in edges if u[0] == "i" and v[0] == "i")
        inner *= sigma / dmin
    pos = {f"e{i}": R * d for i, d in enumerate(directions)}
    pos.update({f"i{j}": p for j, p in enumerate(inner)})
    sp = min(spacing, sigma / 4) if m > 1 else spacing
    arcs = []
    for u, v in edges:
        s = sp if (u[0] == "i" and v[0] == "i") else spacing
        arcs.append(Arc(segment(pos[u], pos[v], s), u, v))
    return build_network(arcs, DomainSpec("disk", R))


def expander_classes(k_lines: int, angles_deg=None, R: float = 4.0, sigma: float | None = None,
                     spacing: float = 0.01) -> dict[str, PlanarNetwork]:
    """Initial networks for every topological class of k half-lines, keyed by signature."""
    if k_lines < 3:
        raise ValueError("need at least three half-lines")
    if angles_deg is None:
        angles_deg = 90.0 + 360.0 * np.arange(k_lines) / k_lines
    dirs = on_circle(angles_deg, 1.0)
    sigma = 0.01 * R if sigma is None else sigma
    out = {}
    for edges in _plane_trees(k_lines):
        try:
            net = cone_network(edges, dirs, R, sigma, spacing)
        except InvalidNetwork:
            continue
        out.setdefault(topology_signature(net), net)
    return dict(sorted(out.items()))


def expander_evolution(k_lines: int, class_sig: str, R: float = 4.0, sigma: float | None = None,
                       cfg: FlowConfig | None = None, angles_deg=None) -> FlowTrajectory:
    """Flow from k truncated half-lines whose vertex is resolved by a small tree of the given class."""
    cfg = cfg or FlowConfig(t_end=1.0, target_spacing=0.01, snapshot_every=0.05)
    sigma = 0.01 * R if sigma is None else sigma
    if cfg.min_spacing is None and sigma < 4 * cfg.target_spacing:
        # let the initial sigma-scale arcs be resolved instead of collapsing at once
        cfg = replace(cfg, min_spacing=sigma / 6)
    classes = expander_classes(k_lines, angles_deg, R, sigma, cfg.target_spacing)
    if class_sig not in classes:
        raise ClassInfeasible(f"class {class_sig!r} is not available for {k_lines} half-lines "
                              f"(known: {sorted(classes)})")
    return evolve(classes[class_sig], cfg)


def bridge_signatures(angles_deg=(45.0, 135.0, 225.0, 315.0)) -> dict[str, str]:
    """Signatures of the two four-line classes: bridge pairing (e0,e3),(e1,e2) vs (e0,e1),(e2,e3)."""
    del angles_deg
    return {"horizontal": "1((2,3),4)", "vertical": "1(2,(3,4))"}
