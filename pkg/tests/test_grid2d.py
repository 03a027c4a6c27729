import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monostab import Reaction
from monostab.grid2d import branch as br
from monostab.grid2d import masks as gm
from monostab.grid2d import relax as rx

DH = Reaction.double_hump(3 * math.pi ** 2, 0.3, 1e-4)


def test_interval_and_rectangle_counts():
    assert gm.interval(1.0, 0.1).n == 9
    r = gm.rectangle(1.0, 2.0, 0.25)
    assert r.n == 3 * 7
    with pytest.raises(gm.MaskError):
        gm.rectangle(1.0, 1.0, 0.3)


def test_frame_is_added():
    m = gm.Mask(np.ones((3, 3), dtype=bool), 0.1)
    assert m.shape == (5, 5)
    assert m.origin == pytest.approx((-0.1, -0.1))
    assert not m.inside[0].any() and not m.inside[:, -1].any()


def test_disk_half_step_rule():
    h = 0.1
    m = gm.disk(1.0, h)
    X, Y = m.coords()
    rr = np.hypot(X, Y)
    assert np.all(rr[m.inside] < 1 - h / 2)
    assert not np.any((rr < 1 - h / 2) & ~m.inside)


def test_annulus_and_wedge_shapes():
    a = gm.annulus(1.0, 2.0, 0.1)
    X, Y = a.coords()
    rr = np.hypot(X, Y)[a.inside]
    assert rr.min() > 1.05 and rr.max() < 1.95
    w = gm.wedge(1.0, 2.0, 0.05)
    X, Y = w.coords()
    assert np.all(Y[w.inside] > np.abs(X[w.inside]))


def test_pocket_regions_partition():
    m = gm.pocket(0.1, 0.5, 0.05)
    reg = gm.pocket_regions(m)
    total = reg["pocket"].astype(int) + reg["bridge"] + reg["base"]
    assert np.array_equal(total > 0, m.inside)
    assert total.max() == 1
    assert m.is_connected()


def test_wells_mask_connected():
    m = gm.wells(0.5, 2.0, 0.05)
    assert m.is_connected()
    X, Y = m.coords()
    assert Y[m.inside].min() == pytest.approx(-2.0 + 0.05)


def test_mask_json_round_trip():
    m = gm.pocket(0.1, 0.5, 0.05)
    back = gm.Mask.from_json(m.to_json())
    assert np.array_equal(back.inside, m.inside)
    assert back.origin == pytest.approx(m.origin)
    assert back.h == m.h


def test_laplacian_matrix_matches_stencil():
    rng = np.random.default_rng(0)
    m = gm.disk(1.0, 0.1)
    u = np.where(m.inside, rng.normal(size=m.shape), 0.0)
    A = gm.laplacian(m)
    assert np.allclose(A @ u[m.inside], gm.apply_laplacian(u, m)[m.inside])
    # symmetric negative definite
    assert abs(A - A.T).max() == 0
    assert u[m.inside] @ (A @ u[m.inside]) < 0


def test_distance_transform_against_brute_force():
    rng = np.random.default_rng(1)
    inside = rng.uniform(size=(20, 24)) > 0.3
    m = gm.Mask(inside, 0.1)
    assert np.allclose(gm.distance_to_boundary(m), gm.distance_brute(m))


def test_relax_reaches_max_solution_on_large_interval():
    m = gm.interval(20.0, 0.1)
    r = Reaction.logistic()
    res = rx.relax(m, r, np.where(m.inside, 1.0, 0.0), "down", scheme="implicit", newton=True)
    assert res.converged
    assert rx.residual(res.u, m, r) < 1e-8
    assert 0.99 < res.sup < 1.0


@pytest.mark.parametrize("scheme", ["explicit", "implicit"])
def test_upward_relaxation_from_tiny_seed_grows(scheme):
    # the absolute rate of a 1e-20 seed is far below tol; it must still grow
    m = gm.interval(1.0, 1 / 64)
    r = Reaction.logistic(50.0)
    x = m.coords()
    u0 = np.where(m.inside, 1e-20 * np.sin(math.pi * x), 0.0)
    res = rx.relax(m, r, u0, "up", scheme=scheme, tol=1e-9)
    assert res.converged and res.sup > 0.5
    assert rx.residual(res.u, m, r) < 1e-6


def test_relax_detects_wrong_direction():
    m = gm.interval(2.0, 0.05)
    r = Reaction.logistic(10.0)
    with pytest.raises(rx.RelaxError):
        rx.relax(m, r, np.where(m.inside, 0.2, 0.0), "down")
    with pytest.raises(rx.RelaxError):
        rx.relax(m, r, np.full(m.shape, 2.0))


def test_min_max_below_threshold():
    # lambda_1 of (0, 1) is pi^2 > f'(0) = 5: only the zero solution
    m = gm.interval(1.0, 0.02)
    mm = rx.min_max_solutions(m, Reaction.logistic(5.0))
    assert np.all(mm.u_min == 0)
    assert mm.u_max.max() < 1e-3


def test_min_max_nonuniqueness_on_unit_interval():
    m = gm.interval(1.0, 1 / 200)
    mm = rx.min_max_solutions(m, DH, scheme="implicit", newton=True)
    assert mm.gap > 0.2
    assert np.all(mm.u_min <= mm.u_max + 1e-12)
    assert rx.residual(mm.u_min, m, DH) < 1e-6
    assert rx.residual(mm.u_max, m, DH) < 1e-6


def test_explicit_and_implicit_agree():
    m = gm.rectangle(2.0, 2.0, 0.1)
    r = Reaction.logistic(10.0)
    u0 = np.where(m.inside, 1.0, 0.0)
    a = rx.relax(m, r, u0, "down", scheme="explicit", tol=1e-10)
    b = rx.relax(m, r, u0, "down", scheme="implicit", tol=1e-10, newton=True)
    assert np.max(np.abs(a.u - b.u)) < 1e-7


def test_phi_kappa_and_field_io():
    m = gm.rectangle(2.0, 2.0, 0.1)
    r = Reaction.logistic()
    phi = br.phi_kappa(m, r)
    assert np.all(phi[m.inside] > 0) and phi.max() < 1
    back = br.field_from_csv(br.field_to_csv(phi, m), m)
    assert np.array_equal(back, phi)
    pbm = br.mask_to_pbm(m).decode().splitlines()
    assert pbm[0] == "P1" and pbm[1] == f"{m.shape[1]} {m.shape[0]}"


def test_deep_threshold_logistic():
    # f' = 1 - 2 s <= -1/2 from s = 3/4 on
    assert br.deep_threshold(Reaction.logistic()) == pytest.approx(0.75, abs=1e-5)


def test_deep_maximum_principle_disk():
    m = gm.disk(6.0, 0.2)
    rep = br.deep_mp_check(m, Reaction.logistic(), trials=3)
    assert rep.deep_cells > 0
    assert rep.violations == 0


# properties

@st.composite
def pairs(draw):
    seed = draw(st.integers(0, 100_000))
    return np.random.default_rng(seed)


@given(pairs())
def test_comparison_preserved(rng):
    # a subsolution below a supersolution stays below along both relaxations
    m = gm.rectangle(1.0, 1.0, 1 / 16)
    r = Reaction.logistic(float(rng.uniform(25, 60)))
    from monostab.spectra import eigen2d
    psi = np.abs(eigen2d(m).vectors[0])
    lo = 1e-3 * float(rng.uniform(0.1, 1)) * psi
    hi = np.where(m.inside, 1.0, 0.0)
    assert rx.is_subsolution(lo, m, r) and rx.is_supersolution(hi, m, r)
    a = rx.relax(m, r, lo, "up", scheme="implicit", max_steps=int(rng.integers(1, 30)), tol=0.0)
    b = rx.relax(m, r, hi, "down", scheme="implicit", max_steps=int(rng.integers(1, 30)), tol=0.0)
    assert np.all(a.u <= b.u + 1e-12)


@given(st.integers(0, 100_000))
def test_range_invariance(seed):
    rng = np.random.default_rng(seed)
    m = gm.rectangle(1.0, 1.0, 1 / 16)
    r = Reaction.double_hump(float(rng.uniform(5, 60)), float(rng.uniform(0.2, 0.8)), 1e-2)
    u0 = np.where(m.inside, rng.uniform(0, 1, m.shape), 0.0)
    res = rx.relax(m, r, u0, scheme="explicit", max_steps=200, tol=0.0)
    assert res.u.min() >= 0 and res.u.max() <= 1
