import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monostab import Reaction
from monostab import shoot1d as sh

# Reference lengths from 40-digit quadrature of the first-integral formula (mpmath),
# computed independently of the package.
FROZEN = [
    (Reaction.logistic(1.0), 0.3, 3.7319884411956173, 0.3413415604841713),
    (Reaction.cubic(1.0, 2.0), 0.2, 2.9852618393594039, 0.191478469447421),
    (Reaction.logistic(1.0), 0.5, 4.8609809638199616, None),
]


@pytest.mark.parametrize("r,alpha,L,s", FROZEN)
def test_length_against_reference(r, alpha, L, s):
    assert sh.shoot(r, alpha).length == pytest.approx(L, abs=1e-9)
    assert sh.length_by_quadrature(r, alpha) == pytest.approx(L, abs=1e-10)
    if s is not None:
        assert sh.s_max(r, alpha) == pytest.approx(s, abs=1e-13)


def test_alpha_star_and_limit():
    r = Reaction.logistic(4.0)
    assert sh.alpha_star(r) == pytest.approx(math.sqrt(2 * 4.0 / 6))
    # small-amplitude limit pi m^{-1/2}
    assert sh.length_by_quadrature(r, 1e-4 * sh.alpha_star(r)) == pytest.approx(math.pi / 2, abs=1e-3)


def test_shoot_rejects_bad_alpha():
    r = Reaction.logistic()
    with pytest.raises(sh.ShootError):
        sh.shoot(r, sh.alpha_star(r))
    with pytest.raises(sh.ShootError):
        sh.shoot(r, 0.0)


def test_profile_keeps_trajectory():
    r = Reaction.cubic(1.0, 2.0)
    rec = sh.shoot(r, 0.2, keep_profile=True)
    assert rec.x[0] == 0 and rec.phi[0] == 0
    assert rec.phi.max() == pytest.approx(rec.s_max, abs=1e-5)
    assert rec.energy_residual < 1e-8


def test_profile_on_grid_is_symmetric():
    r = Reaction.logistic()
    x, phi = sh.profile_on_grid(r, 0.3, 256)
    assert x[-1] == pytest.approx(3.7319884411956173, abs=1e-9)
    assert phi[0] == 0 and abs(phi[-1]) < 1e-12
    assert np.allclose(phi, phi[::-1], atol=1e-9)


def test_energy_residual_fourth_order():
    r = Reaction.logistic()
    ell = sh.length_scale(r)
    res = [sh.shoot(r, 0.4, step=k * ell).energy_residual for k in (0.08, 0.04, 0.02)]
    ratios = [res[0] / res[1], res[1] / res[2]]
    assert all(12 < q < 24 for q in ratios), ratios


def test_length_curve_detects_dip():
    r = Reaction.cubic(1.0, 2.0)
    c = sh.length_curve(r, sh.alpha_grid(r, 10, 40))
    assert c.nonmonotone
    assert len(c.sign_changes) == 1
    assert c.to_csv().startswith("alpha,L,dL,s_max\n")
    # logistic is strong-KPP: L increasing
    lg = Reaction.logistic()
    assert not sh.length_curve(lg, sh.alpha_grid(lg, 10, 40)).nonmonotone


def test_halfline_profile():
    r = Reaction.logistic()
    p = sh.halfline_profile(r, x_max=30.0)
    assert p.phi[0] == 0
    assert np.all(np.diff(p.phi) > 0)
    # first integral: phi'^2 = 2 (F(1) - F(phi))
    assert np.max(np.abs(p.dphi ** 2 - 2 * (r.F1 - r.F(p.phi)))) < 1e-8
    assert p.dphi[0] == pytest.approx(sh.alpha_star(r), rel=1e-6)
    # exponential tail continues the sampled range
    assert float(p(30.0)) <= float(p(31.0)) <= 1.0
    assert 1.0 - float(p(30.5)) == pytest.approx(p.w[-1] * math.exp(-0.5 * p._rate), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_radial_exterior_monotone(d):
    r = Reaction.logistic()
    P = sh.radial_exterior(r, d, 1.0, 40.0)
    assert P.u[0] == 0
    assert np.all(np.diff(P.w) < 0)
    # higher dimension needs a larger launch slope
    assert P.slope > 0


def test_radial_slope_ordering():
    r = Reaction.logistic()
    s2 = sh.radial_exterior(r, 2, 1.0, 30.0).slope
    s3 = sh.radial_exterior(r, 3, 1.0, 30.0).slope
    assert s2 < s3


@given(st.floats(0.5, 20.0), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_s_max_increasing(m, a, b):
    r = Reaction.logistic(m)
    a_s = sh.alpha_star(r)
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    assert sh.s_max(r, lo * a_s) < sh.s_max(r, hi * a_s)


@given(st.floats(0.5, 20.0), st.floats(0.05, 0.9))
def test_length_scales_with_m(m, frac):
    # L for f(s) = m g(s) equals L for g at alpha / sqrt(m), divided by sqrt(m)
    g = Reaction.cubic(1.0, 2.0)
    r = Reaction.cubic(m, 2.0)
    a = frac * sh.alpha_star(r)
    assert sh.length_by_quadrature(r, a) == pytest.approx(
        sh.length_by_quadrature(g, a / math.sqrt(m)) / math.sqrt(m), rel=1e-9)
