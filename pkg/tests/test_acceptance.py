"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a single PASS/FAIL line that is printed in the terminal
summary of the pytest run.
"""
import csv
import io
import math
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from monostab import Reaction
from monostab import shoot1d as sh
from monostab import spectra as sp
from monostab.grid2d import masks as gm
from monostab.grid2d import relax as rx
from monostab.pipelines import load, run
from monostab.spatialdyn import cross_section

from .conftest import ACCEPTANCE

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@contextmanager
def criterion(num, title):
    detail = {}
    try:
        yield detail
    except BaseException:
        ACCEPTANCE.append(f"criterion {num}: FAIL  {title}  {_fmt(detail)}")
        raise
    ACCEPTANCE.append(f"criterion {num}: PASS  {title}  {_fmt(detail)}")


def _fmt(d):
    return " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in d.items())


def _run_config(name):
    rep = run(load(CONFIGS / f"{name}.json"))
    return rep, {c.name: c for c in rep.checks}


def _assert_report(rep, checks, detail):
    for c in rep.checks:
        detail[c.name] = c.value
    failed = [f"{c.name}={c.value:.6g} ({c.bound})" for c in rep.checks if not c.passed]
    assert not failed, failed


def test_01_limit_length():
    with criterion(1, "limit length L_alpha -> pi m^-1/2") as d:
        for r, tag in ((Reaction.logistic(1.0), "logistic"), (Reaction.cubic(1.0, 2.0), "cubic")):
            err = abs(sh.shoot(r, 1e-3).length - math.pi)
            d[tag] = err
            assert err <= 2e-3


def test_02_oracle_agreement():
    reactions = [Reaction.logistic(1.0), Reaction.cubic(1.0, 2.0),
                 Reaction.double_hump(3 * math.pi ** 2, 0.3, 1e-4)]
    with criterion(2, "shooting vs quadrature over 50 alphas x 3 reactions") as d:
        worst = 0.0
        for r in reactions:
            for a in np.linspace(0.01, 0.99, 50) * sh.alpha_star(r):
                worst = max(worst, abs(sh.shoot(r, a).length - sh.length_by_quadrature(r, a)))
        d["max_err"] = worst
        assert worst <= 1e-6


def test_03_energy_invariant():
    with criterion(3, "first-integral residual and fourth-order decay") as d:
        worst = 0.0
        for r in (Reaction.logistic(1.0), Reaction.cubic(1.0, 2.0)):
            for a in np.linspace(0.05, 0.95, 10) * sh.alpha_star(r):
                worst = max(worst, sh.shoot(r, a).energy_residual)
        d["max_residual"] = worst
        r = Reaction.logistic(1.0)
        res = [sh.shoot(r, 0.4, step=k).energy_residual for k in (0.08, 0.04, 0.02)]
        orders = [math.log2(res[0] / res[1]), math.log2(res[1] / res[2])]
        d["orders"] = f"{orders[0]:.2f},{orders[1]:.2f}"
        assert worst <= 1e-8
        assert all(3.5 <= p <= 4.5 for p in orders)


def test_04_spectral_structure():
    with criterion(4, "Cubic(1,2) at the dip: lambda1 < 0 < lambda2") as d:
        cs = cross_section(Reaction.cubic(1.0, 2.0))
        _, phi = sh.profile_on_grid(cs.reaction, cs.alpha, 2048, cs.L)
        lam = sp.eigen1d(cs.reaction.df(phi), cs.L, 2).values
        d.update(alpha=cs.alpha, lambda1=float(lam[0]), lambda2=float(lam[1]))
        assert lam[0] < -1e-3 and lam[1] > 1e-3


def test_05_halfline_stability():
    with criterion(5, "half-line profile is stable, X-independent") as d:
        r = Reaction.logistic(1.0)
        lams = {}
        for X in (20.0, 40.0):
            p = sh.halfline_profile(r, x_max=X)
            x = np.linspace(0.0, X, 8001)
            lams[X] = sp.eigen1d(r.df(p(x)), X).lambda1
        d.update(lambda_40=lams[40.0], dX=abs(lams[20.0] - lams[40.0]))
        assert 0 < lams[40.0] <= 1
        assert abs(lams[20.0] - lams[40.0]) <= 1e-3


def test_06_product_lemma():
    prof = sh.halfline_profile(Reaction.logistic(16.0))
    potentials = {"q0": lambda x: 0.0 * x, "logistic16": lambda x: Reaction.logistic(16.0).df(prof(x))}
    with criterion(6, "strip vs interval eigenvalue, h=1/64") as d:
        for tag, q in potentials.items():
            gaps = [sp.product_lemma_check(q, 1.0, T, 1 / 64).gap for T in (4, 8, 16)]
            d[f"{tag}_T16"] = gaps[-1]
            assert gaps[-1] <= 0.02
            assert gaps[0] > gaps[1] > gaps[2]


def test_07_lieb():
    with criterion(7, "Lieb inequality, 5 fixed + 20 seeded masks") as d:
        rep, _ = _run_config("lieb")
        rows = list(csv.DictReader(io.StringIO(rep.tables["lieb"])))
        slack = min(float(r["slack"]) for r in rows)
        d.update(cases=len(rows), min_slack=slack)
        assert len(rows) == 25
        assert slack >= 0
        _assert_report(rep, None, d)


def test_08_dilation_merging():
    with criterion(8, "dilation merging on kappa (0,1)") as d:
        _assert_report(*_run_config("dilate1d"), d)


def test_09_pocket():
    with criterion(9, "pocket nonuniqueness and bridge decay") as d:
        _assert_report(*_run_config("pocket"), d)


def test_10_marginal():
    with criterion(10, "marginal stability at tau*") as d:
        _assert_report(*_run_config("marginal"), d)


def test_11_wells():
    with criterion(11, "wells: lambda decreasing, extrapolates near 0") as d:
        _assert_report(*_run_config("wells"), d)


def test_12_strip_orbit():
    with criterion(12, "periodic orbit in the strip") as d:
        _assert_report(*_run_config("striporbit"), d)


def test_13_exterior():
    with criterion(13, "exterior radial monotonicity and annulus match") as d:
        _assert_report(*_run_config("exterior"), d)


def test_14_geometry():
    with criterion(14, "star geometry: hourglass, hexagon, separation") as d:
        _assert_report(*_run_config("stargeom"), d)


def test_15_property_suites():
    rng = np.random.default_rng(2024)
    h = 1 / 16
    square = gm.rectangle(1.0, 1.0, h)
    psi = np.abs(sp.eigen2d(square).vectors[0])
    with criterion(15, "comparison, monotone relaxation, positivity, range") as d:
        comparison = monotone = positivity = rng_viol = 0
        n_pairs = 40
        for _ in range(n_pairs):
            r = Reaction.double_hump(float(rng.uniform(25, 60)), float(rng.uniform(0.2, 0.6)), 1e-2)
            lo = float(rng.uniform(1e-5, 1e-3)) * psi
            hi = np.where(square.inside, 1.0, 0.0)
            if not rx.is_subsolution(lo, square, r):
                continue
            steps = int(rng.integers(5, 60))
            try:
                a = rx.relax(square, r, lo, "up", scheme="implicit", max_steps=steps, tol=0.0)
                b = rx.relax(square, r, hi, "down", scheme="implicit", max_steps=steps, tol=0.0)
            except rx.RelaxError:
                monotone += 1
                continue
            comparison += int(np.any(a.u > b.u + 1e-12))
            u0 = np.where(square.inside, rng.uniform(0, 1, square.shape), 0.0)
            c = rx.relax(square, r, u0, scheme="explicit", max_steps=100, tol=0.0)
            rng_viol += int(c.u.min() < 0 or c.u.max() > 1)
        for _ in range(20):
            keep = square.inside & (rng.uniform(size=square.shape) > 0.2)
            for comp in gm.Mask(keep, h, square.origin).components():
                m = gm.Mask(comp, h, square.origin)
                e = sp.eigen2d(m, rng.uniform(0, 5, m.shape))
                positivity += int(not np.all(e.vectors[0][comp] > 0))
        d.update(comparison=comparison, monotone=monotone, positivity=positivity, range=rng_viol)
        assert comparison == monotone == positivity == rng_viol == 0
