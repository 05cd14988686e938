from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from junctionlab.errors import BadWindow, NoSolution
from junctionlab.potential import (HeteroclinicTable, gamma_distance, gamma_matrix, heteroclinic, heteroclinic_set,
                                   junction_angles, tail_fit)

ROT = np.array([[math.cos(2 * math.pi / 3), -math.sin(2 * math.pi / 3)],
                [math.sin(2 * math.pi / 3), math.cos(2 * math.pi / 3)]])

# Dijkstra on the 801 x 801 grid over [-2, 2]^2 followed by path relaxation
GAMMA_12 = 0.6495216


def test_minima_and_origin(W):
    for c in W.minima:
        assert abs(W(c)) < 1e-12
        assert np.abs(W.grad(c)).max() < 1e-12
    assert W(np.array([0.0, 0.0])) == pytest.approx(0.25, abs=1e-15)
    assert W(np.array([1.0, 0.0])) == 0.0


def test_rotation_symmetry(W, rng):
    pts = rng.uniform(-2.5, 2.5, size=(500, 2))
    assert np.abs(W(pts) - W(pts @ ROT.T)).max() < 1e-12
    assert np.allclose(W.minima @ ROT.T, W.minima[[1, 2, 0]], atol=1e-12)


def test_positive_away_from_minima(W):
    xs = np.linspace(-3, 3, 121)
    P = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    far = np.min([np.hypot(*(P - c).T) for c in W.minima], axis=0) > 1e-3
    assert (W(P[far]) > 0).all()


def test_seam_is_c1(W):
    th = np.linspace(0, 2 * np.pi, 37)
    a = np.column_stack([(2 - 1e-8) * np.cos(th), (2 - 1e-8) * np.sin(th)])
    b = np.column_stack([(2 + 1e-8) * np.cos(th), (2 + 1e-8) * np.sin(th)])
    assert np.abs(W(a) - W(b)).max() < 1e-5
    assert np.abs(W.grad(a) - W.grad(b)).max() < 1e-5


def test_gradient_matches_finite_differences(W, rng):
    pts = rng.uniform(-2.8, 2.8, size=(200, 2))
    e = 1e-6
    fd = np.column_stack([(W(pts + [e, 0]) - W(pts - [e, 0])) / (2 * e), (W(pts + [0, e]) - W(pts - [0, e])) / (2 * e)])
    assert np.abs(fd - W.grad(pts)).max() < 1e-5 * max(1.0, np.abs(fd).max())


def test_hessian_bound(W):
    assert W.hessian_bound == pytest.approx(126.0, rel=1e-6)


def test_gamma_values(W):
    assert gamma_distance(W, 2, 2) == 0.0
    g12, g13, g23 = gamma_distance(W, 1, 2), gamma_distance(W, 1, 3), gamma_distance(W, 2, 3)
    assert max(g12, g13, g23) - min(g12, g13, g23) < 1e-3
    assert g12 == pytest.approx(GAMMA_12, abs=2e-6)
    # closed form 3 sqrt(3) / 8 of the straight-chord integral, within the 2% target
    assert g12 == pytest.approx(3 * math.sqrt(3) / 8, rel=0.02)
    G = gamma_matrix(W)
    assert np.allclose(G, G.T) and np.all(np.diag(G) == 0)
    assert G[0, 1] <= G[0, 2] + G[1, 2]


def test_heteroclinic_properties(W):
    t = heteroclinic(W, 1, 2)
    assert np.abs(t.zeta[0] - W.minima[0]).max() <= 1e-8
    assert np.abs(t.zeta[-1] - W.minima[1]).max() <= 1e-8
    assert t.equipartition_error(W) <= 1e-6
    assert t.action() == pytest.approx(gamma_distance(W, 1, 2), rel=0.01)
    rate, r2 = tail_fit(t)
    assert rate > 0 and r2 >= 0.99
    L = t.lam[-1]
    assert np.abs(t(np.array([L - 1e-9])) - t(np.array([L + 1e-9]))).max() < 1e-8
    assert np.abs(t(np.array([-1e3])) - W.minima[0]).max() < 1e-12


def test_heteroclinic_set_and_reverse(W):
    S = heteroclinic_set(W)
    assert sorted(S) == [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j]
    lam = np.linspace(-5, 5, 11)
    assert np.abs(S[(2, 1)](lam) - S[(1, 2)](-lam)).max() < 1e-6
    # symmetry: rotating the 1->2 profile gives the 2->3 profile
    assert np.abs(S[(1, 2)](lam) @ ROT.T - S[(2, 3)](lam)).max() < 1e-6


def test_heteroclinic_csv_roundtrip(W):
    t = heteroclinic(W, 1, 2)
    back = HeteroclinicTable.from_csv(t.to_csv(), W, (1, 2))
    lam = np.linspace(-20, 20, 41)
    assert np.abs(back(lam) - t(lam)).max() < 1e-12


def test_heteroclinic_bad_window(W):
    with pytest.raises(BadWindow):
        heteroclinic(W, 1, 2, L_het=2.0)


def test_junction_angles_examples():
    assert junction_angles((1.0, 1.0, 1.0)) == (2 * math.pi / 3,) * 3
    a = junction_angles((1.0, 1.0, 1.2))
    assert sum(a) == pytest.approx(2 * math.pi, abs=1e-12)
    assert math.sin(a[0]) / 1.0 == pytest.approx(math.sin(a[2]) / 1.2, abs=1e-10)
    assert math.sin(a[1]) / 1.0 == pytest.approx(math.sin(a[2]) / 1.2, abs=1e-10)
    b3 = math.acos((1 + 1 - 1.44) / 2)
    assert a[2] == pytest.approx(math.pi - b3, abs=1e-10)
    with pytest.raises(NoSolution):
        junction_angles((1.0, 1.0, 3.0))


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.05, 0.95))
def test_junction_angles_sine_relation(g1, g2, frac):
    lo, hi = abs(g1 - g2), g1 + g2
    g3 = lo + frac * (hi - lo)
    a = junction_angles((g1, g2, g3))
    assert all(0 < x < math.pi for x in a)
    assert sum(a) == pytest.approx(2 * math.pi, abs=1e-10)
    r = [math.sin(x) / g for x, g in zip(a, (g1, g2, g3))]
    assert max(r) - min(r) <= 1e-10 * max(1.0, max(abs(v) for v in r))
    beta1 = math.acos(max(-1.0, min(1.0, (g2**2 + g3**2 - g1**2) / (2 * g2 * g3))))
    assert a[0] == pytest.approx(math.pi - beta1, abs=1e-7)


def test_u_star(W, artifacts):
    us = artifacts.ustar
    assert us.residual <= 1e-5
    r = 0.9 * us.R_star
    for k, a in enumerate(us.sector_centres):
        v = us(np.array([[r * math.cos(a), r * math.sin(a)]]))[0]
        assert np.hypot(*(v - W.minima[k])) <= 1e-2
    z0 = heteroclinic(W, 1, 2)(np.array([0.0]))[0]
    w0 = us.wall_angles[0]
    v = us(np.array([[r * math.cos(w0), r * math.sin(w0)]]))[0]
    assert np.hypot(*(v - z0)) <= 1e-2


def test_u_star_equivariance(artifacts):
    us = artifacts.ustar
    rng = np.random.default_rng(0)
    pts = rng.uniform(-5, 5, size=(300, 2))
    # rotating space by 2 pi / 3 maps sector k to sector k + 1, i.e. colors rotate the same way
    lhs = us(pts @ ROT.T)
    rhs = us(pts) @ ROT.T
    assert np.abs(lhs - rhs).max() < 5e-3
    conj = np.array([[1.0, 0.0], [0.0, -1.0]])
    assert np.abs(us(pts @ conj) - us(pts) @ conj).max() < 1e-6
