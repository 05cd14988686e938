"""Three-well potential, interface energies, heteroclinic profiles and the triple-junction solution.

Profiles follow the convention zeta'' = grad W(zeta) / 2, for which equipartition
reads |zeta'|^2 = W(zeta) and the action of a profile equals the interface energy
Gamma. The Allen-Cahn equation with grad W / eps^2 and the entire solution u*
(Laplacian u = grad W(u)) have the steeper steady profile zeta(sqrt(2) s).
"""
from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize
from scipy.sparse.csgraph import dijkstra
from scipy.sparse.linalg import splu

from .errors import BadWindow, GridTooCoarse, NoConvergence, NoSolution, NotConverged
from .fields import Grid2, VectorField2, laplacian

PROFILE_STRETCH = math.sqrt(2.0)


# =============================================================================
# Potential
# =============================================================================


@dataclass(frozen=True, eq=False)
class Potential:
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    minima: np.ndarray
    working_radius: float
    hessian_bound: float = float("nan")
    name: str = "custom"

    def __call__(self, u) -> np.ndarray:
        return self.value(u)

    def sqrt_value(self, u) -> np.ndarray:
        return np.sqrt(np.maximum(self.value(u), 0.0))


_SEAM = 2.0
_EXT_B = 60.0  # half the radial second derivative at the seam; keeps the extension ~C^2


def _std_value(u):
    u = np.asarray(u, dtype=float)
    x, y = u[..., 0], u[..., 1]
    r = np.hypot(x, y)
    c3 = np.cos(3 * np.arctan2(y, x))
    inside = 0.25 * (r**6 - 2 * r**3 * c3 + 1.0)
    g = 0.25 * (_SEAM**6 - 2 * _SEAM**3 * c3 + 1.0)
    a = 0.25 * (6 * _SEAM**5 - 6 * _SEAM**2 * c3)
    outside = g + a * (r - _SEAM) + _EXT_B * (r - _SEAM) ** 2
    return np.where(r <= _SEAM, inside, outside)


def _std_grad(u):
    u = np.asarray(u, dtype=float)
    x, y = u[..., 0], u[..., 1]
    # 1.5 (z^3 - 1) conj(z)^2 in real arithmetic
    x2, y2 = x * x, y * y
    a, b = x * (x2 - 3 * y2) - 1.0, y * (3 * x2 - y2)
    c, d = x2 - y2, -2 * x * y
    g_in2 = np.empty(u.shape)
    g_in2[..., 0] = 1.5 * (a * c - b * d)
    g_in2[..., 1] = 1.5 * (a * d + b * c)
    r2 = x2 + y2
    if r2.size == 0 or r2.max() <= _SEAM * _SEAM:
        return g_in2
    r = np.sqrt(r2)
    th = np.arctan2(y, x)
    c3, s3 = np.cos(3 * th), np.sin(3 * th)
    a = 0.25 * (6 * _SEAM**5 - 6 * _SEAM**2 * c3)
    d_r = a + 2 * _EXT_B * (r - _SEAM)
    g_th = 0.25 * 6 * _SEAM**3 * s3  # dg/dtheta
    a_th = 0.25 * 18 * _SEAM**2 * s3  # da/dtheta
    d_t = (g_th + a_th * (r - _SEAM)) / np.maximum(r, 1e-300)
    er = np.stack([np.cos(th), np.sin(th)], axis=-1)
    et = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    g_out = d_r[..., None] * er + d_t[..., None] * et
    return np.where((r <= _SEAM)[..., None], g_in2, g_out)


def _std_hess(u):
    u = np.asarray(u, dtype=float)
    z = u[..., 0] + 1j * u[..., 1]
    A = 4.5 * np.abs(z) ** 4
    B = 3.0 * (z**3 - 1.0) * np.conj(z)
    H = np.empty(u.shape[:-1] + (2, 2))
    H[..., 0, 0] = A + B.real
    H[..., 1, 1] = A - B.real
    H[..., 0, 1] = H[..., 1, 0] = B.imag
    out = np.abs(z) > _SEAM
    if np.any(out):
        uo = u[out]
        e = 1e-6
        for k in range(2):
            d = np.zeros(2)
            d[k] = e
            H[out, :, k] = (_std_grad(uo + d) - _std_grad(uo - d)) / (2 * e)
    return H


def hessian_sup(W: Potential, radius: float, n: int = 241) -> float:
    """Sampled sup of the spectral norm of D^2 W over the disk |u| <= radius."""
    r = np.linspace(0.0, radius, n)
    th = np.linspace(0.0, 2 * np.pi, 4 * n, endpoint=False)
    R, T = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1)
    H = W.hess(pts)
    return float(np.abs(np.linalg.eigvalsh(H)).max())


@functools.lru_cache(maxsize=None)
def standard_potential() -> Potential:
    """W(u) = |u^3 - 1|^2 / 4 (u as a complex number), extended quadratically beyond |u| = 2."""
    k = np.arange(3)
    minima = np.column_stack([np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3)])
    minima.setflags(write=False)
    W = Potential(_std_value, _std_grad, _std_hess, minima, working_radius=2.5, name="cubic-roots")
    return Potential(_std_value, _std_grad, _std_hess, minima, 2.5, hessian_sup(W, 2.5), "cubic-roots")


# =============================================================================
# Interface energy Gamma
# =============================================================================


@dataclass(frozen=True)
class Geodesic:
    value: float
    raw_value: float  # grid-graph shortest path before relaxation
    path: np.ndarray = field(repr=False)


def _grid_shortest_path(W: Potential, a, b, n: int, box: float):
    xs = np.linspace(-box, box, n)
    h = xs[1] - xs[0]
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    s = W.sqrt_value(np.stack([X, Y], axis=-1))
    idx = np.arange(n * n).reshape(n, n)
    rows, cols, wts = [], [], []
    for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
        i0, i1 = max(0, -di), n - max(0, di)
        j0, j1 = max(0, -dj), n - max(0, dj)
        src = idx[i0:i1, j0:j1]
        dst = idx[i0 + di:i1 + di, j0 + dj:j1 + dj]
        w = 0.5 * (s[i0:i1, j0:j1] + s[i0 + di:i1 + di, j0 + dj:j1 + dj]) * h * math.hypot(di, dj)
        rows.append(src.ravel())
        cols.append(dst.ravel())
        wts.append(w.ravel() + 1e-300)
    G = sp.coo_matrix((np.concatenate(wts), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n)).tocsr()

    def nearest(p):
        i = int(round((p[0] + box) / h))
        j = int(round((p[1] + box) / h))
        return idx[i, j]

    src, dst = nearest(a), nearest(b)
    dist, pred = dijkstra(G, directed=False, indices=src, return_predecessors=True)
    path = [dst]
    while path[-1] != src:
        path.append(pred[path[-1]])
    path = np.array(path[::-1])
    pts = np.column_stack([X.ravel()[path], Y.ravel()[path]])
    pts[0], pts[-1] = a, b
    return float(dist[dst]), pts


def _action(W: Potential, pts: np.ndarray) -> float:
    mid = 0.5 * (pts[1:] + pts[:-1])
    return float(np.sum(W.sqrt_value(mid) * np.hypot(*np.diff(pts, axis=0).T)))


def _relax_path(W: Potential, pts: np.ndarray, m: int = 401) -> np.ndarray:
    """Minimise the midpoint-rule length in the degenerate metric, endpoints fixed."""
    from .geometry import resample_polyline

    p = resample_polyline(pts, count=m)
    a, b = p[0].copy(), p[-1].copy()

    def f(flat):
        q = np.vstack([a, flat.reshape(-1, 2), b])
        d = np.diff(q, axis=0)
        ln = np.hypot(d[:, 0], d[:, 1])
        mid = 0.5 * (q[1:] + q[:-1])
        Wm = np.maximum(W.value(mid), 1e-300)
        sq = np.sqrt(Wm)
        gsq = W.grad(mid) / (2 * sq)[:, None]
        t = d / np.maximum(ln, 1e-300)[:, None]
        # d/dq_k of sum_k sq(mid_k) |d_k|
        gmid = 0.5 * gsq * ln[:, None]
        grad = np.zeros_like(q)
        grad[:-1] += gmid - sq[:, None] * t
        grad[1:] += gmid + sq[:, None] * t
        return float(np.sum(sq * ln)), grad[1:-1].ravel()

    res = minimize(f, p[1:-1].ravel(), jac=True, method="L-BFGS-B",
                   options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-12})
    q = np.vstack([a, res.x.reshape(-1, 2), b])
    return resample_polyline(q, count=m)


@functools.lru_cache(maxsize=None)
def gamma_geodesic(W: Potential, i: int, j: int, n: int = 801, box: float = 2.0,
                   check_refinement: bool = True) -> Geodesic:
    """Minimal path between minima c_i, c_j (colors 1..3) in the metric W^{1/2}|dx|.

    Dijkstra on an 8-connected n x n grid over [-box, box]^2, then relaxation of
    the polyline. With ``check_refinement`` the same is done on a grid of half the
    resolution and GridTooCoarse is raised if the values differ by more than 2%.
    """
    _check_pair(i, j)
    a, b = W.minima[i - 1], W.minima[j - 1]
    raw, pts = _grid_shortest_path(W, a, b, n, box)
    path = _relax_path(W, pts)
    value = _action(W, path)
    if check_refinement:
        raw2, pts2 = _grid_shortest_path(W, a, b, n // 2 + 1, box)
        value2 = _action(W, _relax_path(W, pts2))
        if abs(value2 - value) > 0.02 * value:
            raise GridTooCoarse(f"Gamma changes from {value2:.6g} to {value:.6g} under refinement")
    path.setflags(write=False)
    return Geodesic(value, raw, path)


def _check_pair(i, j):
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError(f"minima are numbered 1..3, got ({i}, {j})")


def gamma_distance(W: Potential, i: int, j: int, **kw) -> float:
    """Interface energy Gamma(c_i, c_j), colors 1..3."""
    _check_pair(i, j)
    if i == j:
        return 0.0
    lo, hi = min(i, j), max(i, j)
    return gamma_geodesic(W, lo, hi, **kw).value


def gamma_matrix(W: Potential, **kw) -> np.ndarray:
    G = np.zeros((3, 3))
    for i in range(3):
        for j in range(i + 1, 3):
            G[i, j] = G[j, i] = gamma_distance(W, i + 1, j + 1, **kw)
    return G


# =============================================================================
# Heteroclinic profiles
# =============================================================================


def _sqrtm_psd(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.T


@dataclass(frozen=True)
class HeteroclinicTable:
    lam: np.ndarray
    zeta: np.ndarray
    c_from: np.ndarray
    c_to: np.ndarray
    nu: float  # fitted exponential tail rate
    speed: float = 0.0  # auxiliary wave speed, ~0 for wells of equal depth
    residual: float = float("nan")
    pair: tuple[int, int] = (1, 2)
    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._spline is None:
            object.__setattr__(self, "_spline", CubicSpline(self.lam, self.zeta))

    @property
    def L(self) -> float:
        return float(self.lam[-1])

    def __call__(self, s) -> np.ndarray:
        """Profile value; beyond the window the tail decays like exp(-nu |s|)."""
        s = np.asarray(s, dtype=float)
        L = self.L
        out = self._spline(np.clip(s, -L, L))
        lo, hi = s < -L, s > L
        if np.any(lo):
            out[lo] = self.c_from + (self.zeta[0] - self.c_from) * np.exp(-self.nu * (-L - s[lo]))[:, None]
        if np.any(hi):
            out[hi] = self.c_to + (self.zeta[-1] - self.c_to) * np.exp(-self.nu * (s[hi] - L))[:, None]
        return out

    def derivative(self, s) -> np.ndarray:
        return self._spline(np.clip(np.asarray(s, dtype=float), -self.L, self.L), 1)

    def reversed(self) -> "HeteroclinicTable":
        return HeteroclinicTable(-self.lam[::-1], self.zeta[::-1].copy(), self.c_to, self.c_from, self.nu,
                                 -self.speed, self.residual, self.pair[::-1])

    def equipartition_error(self, W: Potential) -> float:
        d = _fd4(self.zeta, self.lam[1] - self.lam[0])
        return float(np.max(np.abs(np.sum(d**2, axis=1) - W.value(self.zeta[2:-2]))))

    def action(self) -> float:
        d = _fd4(self.zeta, self.lam[1] - self.lam[0])
        from scipy.integrate import simpson

        return float(simpson(np.sum(d**2, axis=1), x=self.lam[2:-2]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "zeta_x", "zeta_y"])
        for l, (zx, zy) in zip(self.lam, self.zeta):
            w.writerow([repr(float(l)), repr(float(zx)), repr(float(zy))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, W: Potential, pair: tuple[int, int]) -> "HeteroclinicTable":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        data = np.array([[float(v) for v in r] for r in rows])
        i, j = pair
        t = cls(data[:, 0], data[:, 1:3], W.minima[i - 1], W.minima[j - 1], 1.0, pair=pair)
        return cls(t.lam, t.zeta, t.c_from, t.c_to, tail_fit(t)[0], pair=pair)


def _fd4(z: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central first derivative at samples 2..N-3."""
    return (-z[4:] + 8 * z[3:-1] - 8 * z[1:-3] + z[:-4]) / (12 * h)


def tail_fit(table: HeteroclinicTable) -> tuple[float, float]:
    """Log-linear fit of |zeta - c_to| on the last quarter of the window: (rate, R^2)."""
    L = table.L
    sel = table.lam >= L / 2
    y = np.log(np.hypot(*(table.zeta[sel] - table.c_to).T))
    x = table.lam[sel]
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    r2 = 1.0 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2)
    return float(-coef[0]), float(r2)


@functools.lru_cache(maxsize=None)
def heteroclinic(W: Potential, i: int, j: int, L_het: float = 14.0, tol: float = 1e-8,
                 h: float = 0.002, max_iter: int = 60) -> HeteroclinicTable:
    """Profile from c_i to c_j (colors 1..3) solving zeta'' = grad W(zeta)/2 on [-L_het, L_het].

    Central differences, damped Newton. Translation invariance is removed by a
    phase condition (zeta(0) on the bisector of c_i c_j) balanced by an
    auxiliary wave-speed unknown; the window ends carry the linearised decay
    conditions zeta' = +-sqrt(D^2W(c)/2)(zeta - c). The start is the Gamma-geodesic
    reparametrised to equipartition.
    """
    if i == j:
        raise ValueError("heteroclinic needs two distinct minima")
    _check_pair(i, j)
    ci, cj = np.asarray(W.minima[i - 1], float), np.asarray(W.minima[j - 1], float)
    Vi, Vj = _sqrtm_psd(W.hess(ci) / 2), _sqrtm_psd(W.hess(cj) / 2)
    nu_min = min(np.linalg.eigvalsh(Vi).min(), np.linalg.eigvalsh(Vj).min())
    if nu_min <= 0 or math.exp(-nu_min * L_het) > tol:
        raise BadWindow(f"window half-width {L_het} cannot resolve the tail to {tol:g} (rate {nu_min:.3g})")

    N = 2 * int(round(L_het / h)) + 1
    lam = np.linspace(-L_het, L_het, N)
    h = lam[1] - lam[0]
    mid = N // 2

    # initial guess: geodesic with d(lambda) = ds / sqrt(W)
    lo, hi = min(i, j), max(i, j)
    path = gamma_geodesic(W, lo, hi).path
    if (lo, hi) != (i, j):
        path = path[::-1]
    mids = 0.5 * (path[1:] + path[:-1])
    ds = np.hypot(*np.diff(path, axis=0).T)
    dl = ds / np.maximum(W.sqrt_value(mids), 1e-12)
    lp = np.concatenate([[0.0], np.cumsum(dl)])
    proj = (path - 0.5 * (ci + cj)) @ (cj - ci)
    k0 = int(np.argmin(np.abs(proj)))
    lp -= lp[k0]
    z = np.column_stack([np.interp(lam, lp, path[:, 0]), np.interp(lam, lp, path[:, 1])])
    mu = 0.0
    n_unk = 2 * N + 1

    def residual(z, mu):
        F = np.zeros(n_unk)
        g = W.grad(z[1:-1])
        F[2:2 * N - 2] = ((z[2:] - 2 * z[1:-1] + z[:-2]) / h**2 + mu * (z[2:] - z[:-2]) / (2 * h) - 0.5 * g).ravel()
        F[0:2] = (-3 * z[0] + 4 * z[1] - z[2]) / (2 * h) - Vi @ (z[0] - ci)
        F[2 * N - 2:2 * N] = (3 * z[-1] - 4 * z[-2] + z[-3]) / (2 * h) + Vj @ (z[-1] - cj)
        F[2 * N] = (z[mid] - 0.5 * (ci + cj)) @ (cj - ci)
        return F

    def jacobian(z, mu):
        rows, cols, vals = [], [], []

        def add(r, c, v):
            rows.append(r)
            cols.append(c)
            vals.append(v)

        H = W.hess(z[1:-1])
        ks = np.arange(1, N - 1)
        for a in range(2):
            r = 2 * ks + a
            add(r, 2 * (ks - 1) + a, np.full(len(ks), 1 / h**2 - mu / (2 * h)))
            add(r, 2 * (ks + 1) + a, np.full(len(ks), 1 / h**2 + mu / (2 * h)))
            add(r, 2 * ks + a, np.full(len(ks), -2 / h**2))
            for b in range(2):
                add(r, 2 * ks + b, -0.5 * H[:, a, b])
            add(r, np.full(len(ks), 2 * N), (z[2:, a] - z[:-2, a]) / (2 * h))
        for a in range(2):
            add(np.array([a] * 3), np.array([a, 2 + a, 4 + a]), np.array([-3, 4, -1]) / (2 * h))
            add(np.array([a, a]), np.array([0, 1]), -Vi[a])
            r = 2 * N - 2 + a
            add(np.array([r] * 3), np.array([2 * (N - 1) + a, 2 * (N - 2) + a, 2 * (N - 3) + a]), np.array([3, -4, 1]) / (2 * h))
            add(np.array([r, r]), np.array([2 * (N - 1), 2 * (N - 1) + 1]), Vj[a])
        add(np.array([2 * N, 2 * N]), np.array([2 * mid, 2 * mid + 1]), cj - ci)
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n_unk, n_unk))

    F = residual(z, mu)
    norm = np.abs(F).max()
    for _ in range(max_iter):
        if norm <= tol * 1e-3:
            break
        step = splu(jacobian(z, mu)).solve(-F)
        dz, dmu = step[:-1].reshape(N, 2), step[-1]
        alpha = 1.0
        while alpha > 1e-4:
            zn, mun = z + alpha * dz, mu + alpha * dmu
            Fn = residual(zn, mun)
            nn = np.abs(Fn).max()
            if nn < norm or nn <= tol * 1e-3:
                break
            alpha *= 0.5
        else:
            if norm <= tol:
                break  # round-off floor reached
            raise NoConvergence(f"Newton stalled at residual {norm:.3e}")
        z, mu, F, norm = zn, mun, Fn, nn
    ode_res = float(np.abs((z[2:] - 2 * z[1:-1] + z[:-2]) / h**2 - 0.5 * W.grad(z[1:-1])).max())
    if ode_res > tol:
        raise NoConvergence(f"profile residual {ode_res:.3e} exceeds {tol:g}")
    if max(np.hypot(*(z[0] - ci)), np.hypot(*(z[-1] - cj))) > tol:
        raise BadWindow("profile has not reached the minima at the window ends")
    z.setflags(write=False)
    lam.setflags(write=False)
    table = HeteroclinicTable(lam, z, ci, cj, nu_min, float(mu), ode_res, (i, j))
    rate, _ = tail_fit(table)
    return HeteroclinicTable(lam, z, ci, cj, rate, float(mu), ode_res, (i, j))


def heteroclinic_set(W: Potential, **kw) -> dict[tuple[int, int], HeteroclinicTable]:
    """Profiles for all six ordered pairs of minima."""
    out = {}
    for i in range(1, 4):
        for j in range(i + 1, 4):
            t = heteroclinic(W, i, j, **kw)
            out[(i, j)] = t
            out[(j, i)] = t.reversed()
    return out


# =============================================================================
# Junction angles
# =============================================================================


def junction_angles(G) -> tuple[float, float, float]:
    """Sector opening angles (alpha_1, alpha_2, alpha_3) at a triple junction.

    ``G`` is a 3x3 interface-energy matrix or the triple
    (Gamma(c2,c3), Gamma(c1,c3), Gamma(c1,c2)); alpha_i is the opening of the
    sector of phase c_i and satisfies sin(alpha_i) / Gamma(c_j, c_k) = const,
    sum alpha_i = 2 pi, found by a 1-D root find on the common ratio.
    """
    G = np.asarray(G, dtype=float)
    g = np.array([G[1, 2], G[0, 2], G[0, 1]]) if G.shape == (3, 3) else G.reshape(3)
    if np.any(g <= 0) or np.any(2 * g >= g.sum()):
        raise NoSolution(f"interface energies {g.tolist()} violate the triangle inequality")
    if g[0] == g[1] == g[2]:
        a = 2 * math.pi / 3
        return (a, a, a)
    # alpha_i = pi - A_i with A_i the triangle angle opposite side g_i, sin A_i = kappa g_i
    kmax = 1.0 / g.max()
    big = int(np.argmax(g))

    def total(k, obtuse):
        A = np.arcsin(np.clip(k * g, -1.0, 1.0))
        if obtuse:
            A[big] = math.pi - A[big]
        return A.sum() - math.pi

    obtuse = total(kmax, False) < 0
    if obtuse:
        # total(k) -> 0 as k -> 0 on this branch; divide the trivial root out
        k = brentq(lambda k: total(k, True) / k, 1e-9 * kmax, kmax, xtol=1e-16, rtol=4 * np.finfo(float).eps,
                   maxiter=500)
    else:
        k = brentq(lambda k: total(k, False), 1e-15 * kmax, kmax, xtol=1e-16, rtol=4 * np.finfo(float).eps,
                   maxiter=500)
    A = np.arcsin(np.clip(k * g, -1.0, 1.0))
    if obtuse:
        A[big] = math.pi - A[big]
    alpha = math.pi - A
    return tuple(float(a) for a in alpha)


# =============================================================================
# Triple-junction entire solution u*
# =============================================================================


@dataclass(frozen=True)
class UStar:
    """Entire solution of Laplacian u = grad W(u) with three sectors.

    Sector k (color c_{k+1}) is centred on ``sector_centres[k]``; walls at
    ``wall_angles`` separate sector k from sector k+1 (counterclockwise).
    """

    field: VectorField2
    R_star: float
    wall_angles: tuple[float, float, float]
    sector_centres: tuple[float, float, float]
    profiles: dict = field(repr=False, compare=False)
    residual: float = float("nan")

    def far_field(self, pts) -> np.ndarray:
        return _sector_far_field(np.asarray(pts, float), self.wall_angles, self.profiles)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[..., 0], pts[..., 1])
        inner = r <= self.R_star - 2 * self.field.grid.h
        out = self.far_field(pts)
        if np.any(inner):
            out[inner] = self.field.sample(pts[inner])
        return out


def _sector_far_field(pts: np.ndarray, walls, profiles) -> np.ndarray:
    """Glue of the three straight wall profiles, each used on its nearest angular side."""
    phi = np.arctan2(pts[..., 1], pts[..., 0])
    r = np.hypot(pts[..., 0], pts[..., 1])
    d_ang = np.stack([np.angle(np.exp(1j * (phi - w))) for w in walls], axis=-1)
    k = np.argmin(np.abs(d_ang), axis=-1)
    out = np.empty(pts.shape[:-1] + (2,))
    for w in range(3):
        sel = k == w
        if np.any(sel):
            s = r[sel] * np.sin(d_ang[..., w][sel])
            prof = profiles[(w + 1, (w + 1) % 3 + 1)]
            out[sel] = prof(PROFILE_STRETCH * s)
    return out


def wall_layout(alpha) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Wall and sector-centre angles with sector 1 centred on the positive x-axis."""
    a1, a2, a3 = alpha
    walls = (a1 / 2, a1 / 2 + a2, a1 / 2 + a2 + a3)
    centres = (0.0, a1 / 2 + a2 / 2, a1 / 2 + a2 + a3 / 2)
    return walls, centres


@functools.lru_cache(maxsize=None)
def compute_u_star(W: Potential, R_star: float = 8.0, grid_h: float = 0.1, relax_time: float = 4.0,
                   tol: float = 1e-5) -> UStar:
    """Steady three-sector solution on the disk of radius R_star (units eps = 1).

    Dirichlet data from the three wall profiles; parabolic relaxation of
    du/dt = Laplacian u - grad W(u) (explicit, Jacobi-style, dt = 0.2 h^2),
    finished with Newton steps on the discrete steady equation.
    """
    if R_star < 8:
        raise ValueError("R_star must be at least 8")
    profiles = heteroclinic_set(W)
    alpha = junction_angles(gamma_matrix(W))
    walls, centres = wall_layout(alpha)
    grid = Grid2.covering(R_star, grid_h, pad=1)
    pts = grid.points()
    r = np.hypot(pts[..., 0], pts[..., 1])
    active = r < R_star
    active[[0, -1], :] = False
    active[:, [0, -1]] = False
    u = _sector_far_field(pts, walls, profiles)
    h = grid.h
    dt = 0.2 * h * h
    for _ in range(int(math.ceil(relax_time / dt))):
        upd = laplacian(u, h) - W.grad(u)
        u[active] += dt * upd[active]

    idx = -np.ones(grid.shape, dtype=int)
    idx[active] = np.arange(active.sum())
    na = int(active.sum())
    ii, jj = np.nonzero(active)
    L = _laplacian_matrix(idx, ii, jj, h)
    for _ in range(30):
        F = (laplacian(u, h) - W.grad(u))[active]
        res = np.abs(F).max()
        if res < 1e-11:
            break
        H = W.hess(u[active])
        J = sp.kron(L, sp.identity(2)) - sp.block_diag(list(H), format="csc")
        step = splu(J.tocsc()).solve(-F.ravel())
        u[active] += step.reshape(na, 2)
    res = float(np.abs((laplacian(u, h) - W.grad(u))[active]).max())
    if res > tol:
        raise NotConverged(f"u* residual {res:.3e} above {tol:g}")
    u.setflags(write=False)
    fld = VectorField2(grid, u, None, ~active)
    return UStar(fld, R_star, walls, centres, profiles, res)


def _laplacian_matrix(idx, ii, jj, h):
    n = len(ii)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [np.full(n, -4.0 / h**2)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = idx[ii + di, jj + dj]
        ok = nb >= 0
        rows.append(np.arange(n)[ok])
        cols.append(nb[ok])
        vals.append(np.full(ok.sum(), 1.0 / h**2))
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
