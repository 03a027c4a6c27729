import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monostab import Reaction
from monostab import spatialdyn as sd
from monostab.shoot1d import length_by_quadrature


@pytest.fixture(scope="module")
def cs():
    return sd.cross_section(Reaction.cubic(1.0, 2.0))


def test_cross_section_spectrum(cs):
    assert cs.alpha == pytest.approx(0.1474, abs=2e-3)
    assert cs.L == pytest.approx(length_by_quadrature(cs.reaction, cs.alpha), abs=1e-9)
    assert cs.lambda1 < -1e-3 < 1e-3 < cs.lambda2
    assert np.all(cs.psi1 > 0)


def test_cross_section_needs_dip():
    with pytest.raises(sd.OrbitError):
        sd.cross_section(Reaction.logistic())


def test_fourier_diff_exact_on_trig():
    D1, D2 = sd.fourier_diff(16)
    s = np.arange(16) / 16
    u = np.sin(2 * np.pi * 3 * s)
    assert np.allclose(D1 @ u, 6 * np.pi * np.cos(2 * np.pi * 3 * s), atol=1e-10)
    assert np.allclose(D2 @ u, -(6 * np.pi) ** 2 * u, atol=1e-8)


def test_orbit(cs):
    orb = sd.orbit_search(cs, 1e-2)
    T0 = 2 * math.pi / math.sqrt(-cs.lambda1)
    assert orb.residual < 1e-8
    assert orb.amplitude >= 5e-4
    assert abs(orb.period - T0) / T0 < 0.1
    # reference period at this amplitude, from a 64-node run
    assert orb.period == pytest.approx(25.683, abs=5e-3)
    H = sd.spatial_energy(orb.field, orb.period, cs.reaction, cs.h)
    assert (H.max() - H.min()) / np.max(np.abs(H)) < 1e-5
    assert abs(orb.unfolding) < 1e-8
    assert orb.to_csv().startswith("tau,y,u\n")


def test_orbit_epsilon_guard(cs):
    with pytest.raises(sd.OrbitError):
        sd.orbit_search(cs, 0.2)


def test_floquet_squares_are_operator_eigenvalues(cs):
    mu = sd.floquet_exponents(cs, k=4)
    w = np.linalg.eigvalsh(cs.operator().toarray())[:2]
    sq = np.sort_complex(mu ** 2)
    # the smallest pairs are +-sqrt(lambda1) (imaginary) and +-sqrt(lambda2)
    assert np.allclose(np.sort(sq.real)[[0, 2]], w, rtol=1e-8)
    assert np.allclose(sq.imag, 0, atol=1e-8)


@given(st.integers(1, 40))
def test_floquet_pairs(k):
    # mu^2 runs over eig(M) for every mode, so mu and -mu come together
    cs_small = sd.cross_section(Reaction.cubic(1.0, 2.0), n=48, alpha=0.1474)
    mu = np.linalg.eigvals(np.block([[np.zeros((47, 47)), np.eye(47)],
                                     [cs_small.operator().toarray(), np.zeros((47, 47))]]))
    w = np.linalg.eigvalsh(cs_small.operator().toarray())
    j = (k - 1) % 47
    assert np.min(np.abs(mu ** 2 - w[j])) < 1e-8 * (1 + abs(w[j]))
    assert np.min(np.abs(mu + mu[np.argmin(np.abs(mu ** 2 - w[j]))])) < 1e-8 * (1 + abs(w[j]))
