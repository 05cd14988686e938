from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from junctionlab.allen_cahn import (Ansatz, AnsatzParams, BoundaryData, build_ansatz, extract_nodal_set,
                                    initial_and_boundary_data, residual_diagnostics, smoothstep, solve,
                                    stable_dt, sup_difference)
from junctionlab.coloring import three_color
from junctionlab.errors import BadCFL, GridMismatch, NodeTooCloseToBoundary, UnresolvedEpsilon
from junctionlab.fields import Grid2, VectorField2
from junctionlab.flow import FlowConfig, evolve
from junctionlab.geometry import Arc, DomainSpec, build_network, clip_polyline_to_disk, hausdorff_distance
from junctionlab.networks import segment, triod
from junctionlab.potential import Potential


def _frame(g: Grid2) -> np.ndarray:
    m = np.zeros(g.shape, dtype=bool)
    m[[0, -1], :] = True
    m[:, [0, -1]] = True
    return m


def _clip(polylines, R):
    return [q for pl in polylines for q in clip_polyline_to_disk(np.asarray(pl), R)]


@pytest.fixture(scope="module")
def stripe_tr():
    net = build_network([Arc(segment((-1, 0), (1, 0), 0.02), "e0", "e1")], DomainSpec("disk", 1.0))
    return evolve(net, FlowConfig(t_end=0.01, snapshot_every=0.005))


@pytest.fixture(scope="module")
def triod_tr():
    return evolve(triod(), FlowConfig(t_end=0.01, snapshot_every=0.005))


def _stripe(art, eps, h, half=(0.5, 0.3)):
    g = Grid2(-half[0], -half[1], h, int(round(2 * half[0] / h)) + 1, int(round(2 * half[1] / h)) + 1)
    x = g.points()[..., 0].ravel()
    v = art.profiles[(1, 2)](math.sqrt(2) * x / eps).reshape(g.shape + (2,))
    return VectorField2(g, v, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        AnsatzParams(0.05, rho=0.6)
    with pytest.raises(ValueError):
        AnsatzParams(-1.0)
    p = AnsatzParams(0.05)
    assert p.tube_width == pytest.approx(0.3)
    assert p.node_radius == pytest.approx(0.2)


def test_pure_color_is_fixed_point(W):
    g = Grid2.covering(0.5, 0.02, pad=1)
    for c in W.minima:
        u = VectorField2(g, np.broadcast_to(c, g.shape + (2,)).copy(), 0.0)
        out = solve(u, BoundaryData.constant(u, _frame(g)), W, 0.08, 0.01)
        assert sup_difference(out[-1][1], VectorField2(g, u.values, 0.01))[0][1] <= 1e-14


def test_stripe_is_nearly_stationary(artifacts):
    eps = 0.05
    psi = _stripe(artifacts, eps, eps / 8)
    out = solve(psi, BoundaryData.constant(psi, _frame(psi.grid)), artifacts.W, eps, 0.02)
    drift = sup_difference(out[-1][1], VectorField2(psi.grid, psi.values, 0.02))[0][1]
    assert drift <= 1e-3


@pytest.mark.parametrize("eps", [0.08, 0.05])
def test_stripe_tracks_ansatz(artifacts, stripe_tr, eps):
    p = AnsatzParams(eps)
    col = three_color(stripe_tr.snapshots[0][1])
    psi, bc = initial_and_boundary_data(stripe_tr, col, artifacts, p)
    sol = solve(psi, bc, artifacts.W, eps, 0.01)
    A = Ansatz(stripe_tr, col, artifacts, p)
    sups = [sup_difference(u, A.field(u.grid, t, bc.mask))[0][1] for t, u in sol]
    assert max(sups) <= 5e-3


def test_nodal_set_of_constant_is_empty(W):
    g = Grid2.covering(0.5, 0.05)
    u = VectorField2(g, np.broadcast_to(W.minima[0], g.shape + (2,)).copy())
    ns = extract_nodal_set(u, W.minima)
    assert ns.empty and ns.ambiguous_fraction == 0.0


def test_nodal_set_of_stripe(artifacts):
    eps = 0.05
    for h in (eps / 4, eps / 8):
        ns = extract_nodal_set(_stripe(artifacts, eps, h), artifacts.W.minima)
        assert hausdorff_distance(list(ns.segments), [np.array([[0.0, -0.3], [0.0, 0.3]])]) <= h


def test_triod_ansatz_nodal_set(artifacts, triod_tr):
    net = triod_tr.snapshots[0][1]
    n = build_ansatz(triod_tr, three_color(net), artifacts, AnsatzParams(0.05), 0.0)
    ns = extract_nodal_set(n, artifacts.W.minima, mask=~n.boundary)
    segs = [s for s in ns.segments if np.hypot(*s.mean(axis=0)) < 0.9]
    assert hausdorff_distance(segs, _clip(net.polylines(), 0.9)) <= n.grid.h


def test_ansatz_pointwise(artifacts, triod_tr):
    net = triod_tr.snapshots[0][1]
    col = three_color(net)
    A = Ansatz(triod_tr, col, artifacts, AnsatzParams(0.05))
    sn = A.snapshot(0)
    f = sn.nodes[0]
    centre = A.values(np.zeros((1, 2)), 0.0)[0]
    assert np.allclose(centre, f.Q @ artifacts.ustar(np.zeros((1, 2)))[0], atol=1e-14)
    # arc midpoint, far from the junction: the profile centre value
    k = 0
    mid = net.arcs[k].points[len(net.arcs[k].points) * 3 // 4]
    l, r = sn.sides[k]
    assert np.allclose(A.values(mid[None], 0.0)[0], artifacts.profiles[(r, l)](0.0), atol=1e-6)
    # far from every arc, pure region color
    for ang in (30.0, 150.0, 270.0):
        x = 0.7 * np.array([math.cos(math.radians(ang)), math.sin(math.radians(ang))])
        v = A.values(x[None], 0.0)[0]
        assert np.min(np.hypot(*(artifacts.W.minima - v).T)) <= 1e-14


def test_initial_and_boundary_data(artifacts, triod_tr):
    net = triod_tr.snapshots[0][1]
    col = three_color(net)
    p = AnsatzParams(0.05)
    psi, bc = initial_and_boundary_data(triod_tr, col, artifacts, p)
    n0 = build_ansatz(triod_tr, col, artifacts, p, 0.0)
    assert sup_difference(psi, n0)[0][1] == 0.0
    # boundary trace away from the arcs is a pure color
    pts = psi.grid.points()[bc.mask]
    far = np.hypot(*pts.T) > 1.0
    vals = bc.values[0][far]
    dist = np.min(np.stack([np.hypot(*(vals - c).T) for c in artifacts.W.minima]), axis=0)
    assert np.median(dist) <= 1e-14
    assert len(bc.times) == len(triod_tr.times)


def test_bulk_residual_vanishes(artifacts, triod_tr):
    net = triod_tr.snapshots[0][1]
    rep = residual_diagnostics(triod_tr, three_color(net), artifacts, AnsatzParams(0.08))
    assert rep.bulk.max() <= 1e-10
    assert rep.node_t_weighted >= 0
    assert set(rep.to_dict()) >= {"bulk", "tube", "node", "tube_weighted"}


def test_straight_arc_tube_residual(artifacts, stripe_tr):
    col = three_color(stripe_tr.snapshots[0][1])
    eps = 0.05
    rep = residual_diagnostics(stripe_tr, col, artifacts, AnsatzParams(eps), times=[0.005], h=eps / 16)
    assert rep.scaled()["tube"].max() <= 1e-3
    assert rep.scaled()["bulk"].max() <= 1e-10


def test_sup_difference(W):
    g = Grid2.covering(0.3, 0.1)
    a = VectorField2(g, np.broadcast_to(W.minima[0], g.shape + (2,)).copy(), 0.0)
    b = VectorField2(g, np.broadcast_to(W.minima[1], g.shape + (2,)).copy(), 0.0)
    assert sup_difference(a, a)[0][1] == 0.0
    assert sup_difference(a, b)[0][1] == pytest.approx(math.sqrt(3), abs=1e-12)
    other = VectorField2(Grid2.covering(0.3, 0.05), np.zeros((13, 13, 2)), 0.0)
    with pytest.raises(GridMismatch):
        sup_difference(a, other)
    with pytest.raises(GridMismatch):
        sup_difference([a, a], [a])


def test_solver_guards(W, artifacts, triod_tr):
    g = Grid2.covering(0.3, 0.01, pad=1)
    u = VectorField2(g, np.broadcast_to(W.minima[0], g.shape + (2,)).copy(), 0.0)
    bc = BoundaryData.constant(u, _frame(g))
    with pytest.raises(BadCFL):
        solve(u, bc, W, 0.05, 0.01, dt=2 * stable_dt(W, 0.05, 0.01))
    with pytest.raises(UnresolvedEpsilon):
        solve(u, bc, W, 0.02, 0.01)
    with pytest.raises(GridMismatch):
        solve(u, BoundaryData.constant(VectorField2(Grid2.covering(0.3, 0.02), np.zeros((31, 31, 2))),
                                       np.zeros((31, 31), bool)), W, 0.05, 0.01)
    net = triod_tr.snapshots[0][1]
    with pytest.raises(UnresolvedEpsilon):
        build_ansatz(triod_tr, three_color(net), artifacts, AnsatzParams(0.05), 0.0, h=0.05)
    small = triod(radius=0.15, spacing=0.01)
    tr = evolve(small, FlowConfig(t_end=0.001, snapshot_every=0.001))
    with pytest.raises(NodeTooCloseToBoundary):
        build_ansatz(tr, three_color(small), artifacts, AnsatzParams(0.05), 0.0)


def test_heat_equation_limit(W):
    """With a flat potential the scheme is the 5-point heat solver: error O(h^2)."""
    flat = Potential(lambda u: np.zeros(u.shape[:-1]), lambda u: np.zeros_like(u), None, W.minima, 2.5, 0.0)
    errs = []
    for h in (0.05, 0.025):
        g = Grid2(0.0, 0.0, h, int(round(1 / h)) + 1, int(round(1 / h)) + 1)
        P = g.points()

        def exact(t):
            return math.exp(-2 * math.pi**2 * t) * np.sin(math.pi * P[..., 0]) * np.sin(math.pi * P[..., 1])

        u0 = VectorField2(g, np.stack([exact(0), -0.5 * exact(0)], -1), 0.0)
        out = solve(u0, BoundaryData.constant(u0, _frame(g)), flat, 1.0, 0.05)
        errs.append(np.abs(out[-1][1].values[..., 0] - exact(0.05)).max())
    assert errs[1] < 2e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


@given(st.floats(-3, 3))
def test_smoothstep_partition(x):
    assert smoothstep(x) + smoothstep(1 - x) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= smoothstep(x) <= 1.0


def test_far_field_partition_of_unity(artifacts, triod_tr, rng):
    net = triod_tr.snapshots[0][1]
    A = Ansatz(triod_tr, three_color(net), artifacts, AnsatzParams(0.05))
    pts = rng.uniform(-1, 1, (3000, 2))
    _, parts = A.snapshot(0).far_field(pts, return_parts=True)
    assert np.abs(parts["w_tube"] + parts["w_bulk"] - 1.0).max() <= 1e-12
    assert np.all(parts["w_tube"] >= 0) and np.all(parts["w_bulk"] >= 0)
