"""End-to-end experiments.  Each runner takes an ExperimentConfig and returns a Report."""
from __future__ import annotations

import math

import numpy as np

from .. import stargeom as sg
from ..grid2d import masks as gm
from ..grid2d.branch import dilation_branch
from ..grid2d.relax import min_max_solutions, relax
from ..reaction import Reaction
from ..shoot1d import (alpha_grid, halfline_profile, length_by_quadrature, length_curve,
                       length_scale, profile_on_grid, radial_exterior, shoot)
from ..spatialdyn import cross_section, orbit_search, spatial_energy
from ..spectra import eigen1d, eigen2d, lieb_check
from . import marginal as mg
from . import tuning
from .config import ExperimentConfig
from .report import Report, csv_table

PI2 = math.pi ** 2


def _reaction(cfg: ExperimentConfig, default: dict) -> Reaction:
    return Reaction.from_dict(cfg.reaction or default)


def _report(cfg: ExperimentConfig) -> Report:
    return Report(cfg.experiment, cfg.to_dict())


# one dimension

def run_lengthcurve(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    r = _reaction(cfg, {"family": "Cubic", "params": {"m": 1.0, "c": 2.0}})
    c = length_curve(r, alpha_grid(r, cfg.param("n_geo", 40), cfg.param("n_uni", 160)))
    rep.tables["length_curve"] = c.to_csv()
    m = r.fprime0
    L_small = length_by_quadrature(r, 1e-3)
    rep.results.update({"reaction": r.to_dict(), "nonmonotone": c.nonmonotone, "sign_changes": c.sign_changes,
                        "L_min": float(c.length.min()), "L_max": float(c.length.max()),
                        "L_limit": math.pi / math.sqrt(m), "L_alpha_1e-3": L_small})
    rep.upper("small_alpha_limit", abs(L_small - math.pi / math.sqrt(m)), cfg.tol("small_alpha_limit", 2e-3))
    probe = c.alpha[:: max(1, len(c.alpha) // 10)]
    err = max(abs(shoot(r, a).length - length_by_quadrature(r, a)) for a in probe)
    rep.upper("shoot_vs_quadrature", err, cfg.tol("shoot_vs_quadrature", 1e-6))
    return rep


def run_dilate1d(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    if cfg.reaction is None and cfg.param("tune", False):
        r = tuning.tune_double_hump_1d().reaction
    else:
        r = _reaction(cfg, {"family": "DoubleHump", "params": {"m": 3 * PI2, "theta": 0.3, "eps": 1e-4}})
    h = cfg.h or 1 / 200
    kappas = cfg.param("kappas", [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0])
    b = dilation_branch(lambda k: gm.interval(k, h), r, kappas)
    rep.tables["branch"] = b.to_csv()
    prof = halfline_profile(r)
    X = float(prof.x[-1])
    n = 4096
    lam_half = float(eigen1d(r.df(prof(np.linspace(0.0, X, n + 1))), X).values[0])
    merge_tol = cfg.tol("merge", 1e-4)
    kap_low = next((p.kappa for i, p in enumerate(b.points)
                    if all(q.gap <= merge_tol for q in b.points[i:])), None)
    cross = next((p.kappa for p in b.points if p.sup_umin > 0.5), None)
    rep.results.update({"reaction": r.to_dict(), "kappa_lower": kap_low, "kappa_half_crossing": cross,
                        "lambda_halfline": lam_half, "h": h})
    rep.lower("gap_at_kappa_1", b.points[0].gap, cfg.tol("gap_at_kappa_1", 0.2))
    rep.check("merged_by_largest_kappa", b.points[-1].gap, f"<= {merge_tol:g}", kap_low is not None)
    dist = {p.kappa: max(p.dist_phi_min, p.dist_phi_max) for p in b.points}
    seq = [dist[k] for k in (1.0, 2.0, 4.0, 8.0) if k in dist]
    slack = cfg.tol("discretization", 1e-4)
    rep.results["dist_to_Phi"] = seq
    rep.check("dist_to_Phi_decreasing", max(np.diff(seq)) if len(seq) > 1 else 0.0, f"<= {slack:g}",
              len(seq) > 1 and all(b2 <= a2 + slack for a2, b2 in zip(seq, seq[1:])))
    rep.upper("lambda_Phi_vs_halfline", abs(b.points[-1].lambda_phi - lam_half), cfg.tol("lambda_Phi_vs_halfline", 0.05))
    return rep


def run_dilate2d(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    r = _reaction(cfg, {"family": "DoubleHump", "params": {"m": 6 * PI2, "theta": 0.3, "eps": 1e-2}})
    h = cfg.h or 1 / 40
    side = cfg.geometry.get("side", 1.0)
    kappas = cfg.param("kappas", [1.0, 1.5, 2.0, 4.0])
    b = dilation_branch(lambda k: gm.rectangle(k * side, k * side, h), r, kappas)
    rep.tables["branch"] = b.to_csv()
    rep.results.update({"reaction": r.to_dict(), "kappa_merge": b.kappa_merge,
                        "gaps": [p.gap for p in b.points]})
    rep.lower("gap_at_kappa_1", b.points[0].gap, cfg.tol("gap_at_kappa_1", 0.2))
    rep.upper("gap_at_largest_kappa", b.points[-1].gap, cfg.tol("merge", 1e-4))
    return rep


def run_marginal(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    m = cfg.param("m", 3 * PI2)
    f0 = Reaction.logistic(m)
    f1 = _reaction(cfg, {"family": "DoubleHump", "params": {"m": m, "theta": 0.3, "eps": 1e-4}})
    width = cfg.tol("tau_width", 1e-3)
    ts = mg.find_tau_star(f0, f1, width)
    rep.tables["tau_bisection"] = csv_table(["tau", "min_dL"], sorted(ts.history))
    rep.results.update({"f0": f0.to_dict(), "f1": f1.to_dict(), "tau_lo": ts.tau_lo, "tau_hi": ts.tau_hi,
                        "tau_star": ts.tau_star, "alpha": ts.alpha, "L": ts.length,
                        "lambda1": ts.lambda1, "lambda2": ts.lambda2, "min_dL": ts.min_dl})
    rep.upper("tau_bracket_width", ts.tau_hi - ts.tau_lo, width)
    rep.upper("abs_lambda1_at_critical", abs(ts.lambda1), cfg.tol("abs_lambda1_at_critical", 1e-2))
    off = cfg.param("offset", 0.05)
    below = mg.dip(max(ts.tau_star - off, 0.0), f0, f1).min_dl
    dl_above, lam_above = mg.lambda_at_dip(min(ts.tau_star + off, 1.0), f0, f1)
    rep.results.update({"min_dL_below": below, "min_dL_above": dl_above, "lambda1_above": lam_above})
    rep.check("injective_below", below, "> 0", below > 0)
    rep.check("dip_above", dl_above, "< 0", dl_above < 0)
    rep.check("unstable_above", lam_above, "< 0", lam_above < 0)
    return rep


def run_striporbit(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    r = _reaction(cfg, {"family": "Cubic", "params": {"m": 1.0, "c": 2.0}})
    cs = cross_section(r, n=cfg.param("n", 128), alpha=cfg.param("alpha"))
    eps_list = cfg.param("epsilons", [5e-3, 1e-2, 2e-2])
    primary = cfg.param("epsilon", 1e-2)
    T0 = 2 * math.pi / math.sqrt(-cs.lambda1)
    rows, main = [], None
    for eps in sorted(set(eps_list) | {primary}):
        orb = orbit_search(cs, eps, n_tau=cfg.param("n_tau", 32))
        H = spatial_energy(orb.field, orb.period, r, cs.h)
        scale = float(np.max(np.abs(H))) or 1.0
        rel = float((H.max() - H.min()) / scale)
        rows.append((eps, orb.period, cs.lambda1, orb.amplitude, orb.residual, rel))
        if eps == primary:
            main = (orb, rel)
            rep.tables["orbit_field"] = orb.to_csv()
    rep.tables["orbits"] = csv_table(["epsilon", "T", "lambda1", "amplitude", "residual", "energy_rel_var"], rows)
    orb, rel = main
    rep.results.update({"reaction": r.to_dict(), "alpha": cs.alpha, "L": cs.L, "lambda1": cs.lambda1,
                        "lambda2": cs.lambda2, "T": orb.period, "T_linear": T0, "epsilon": primary,
                        "header": orb.header()})
    rep.lower("amplitude", orb.amplitude, cfg.tol("amplitude", 5e-4))
    rep.upper("residual", orb.residual, cfg.tol("residual", 1e-8))
    rep.upper("period_rel_dev", abs(orb.period - T0) / T0, cfg.tol("period_rel_dev", 0.1))
    rep.upper("energy_rel_var", rel, cfg.tol("energy_rel_var", 1e-5))
    return rep


# composite domains

def _line_rate(y, u):
    p = np.polyfit(y, np.log(u), 1)
    return abs(float(p[0]))


def run_pocket(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    if cfg.reaction is None and cfg.param("tune", False):
        r = tuning.tune_pocket().reaction
    else:
        r = _reaction(cfg, {"family": "DoubleHump", "params": {"m": 6 * PI2, "theta": 0.3, "eps": 1e-4}})
    g = cfg.geometry
    h = cfg.h or 0.0125
    half = g.get("half_length", 1.0)
    side, base = g.get("pocket_side", 1.0), g.get("base_side", 3.0)
    sweep = sorted(cfg.param("delta_sweep", [0.2, 0.1, 0.05, 0.025]), reverse=True)
    alpha_cross = PI2 / 4  # lambda(-d^2/dx^2, (-1, 1))
    mu = r.lipschitz()
    rows, chosen = [], None
    for delta in sweep:
        lam_cross = alpha_cross / delta ** 2
        if lam_cross <= mu:
            rows.append((delta, lam_cross, math.nan, "skip"))
            continue
        m = gm.pocket(delta, half, h, side, base)
        u = relax(m, r, np.where(m.inside, 1.0, 0.0), "down", scheme="implicit", newton=True).u
        X, Y = m.coords()
        i0 = int(np.argmin(np.abs(Y[:, 0])))
        sel = m.inside[i0]
        ratio = float(np.max(u[i0][sel] / np.cos(math.pi * X[i0][sel] / (2 * delta))))
        ok = ratio <= 0.25
        rows.append((delta, lam_cross, ratio, "pass" if ok else "fail"))
        if ok:
            chosen = (delta, m)
            break
    rep.tables["delta_sweep"] = csv_table(["delta", "lambda_cross", "midpoint_ratio", "status"], rows)
    if chosen is None:
        rep.check("sweep_found_delta", 0, "exists", False)
        return rep
    delta, m = chosen
    mm = min_max_solutions(m, r, scheme="implicit", newton=True)
    reg = gm.pocket_regions(m)
    sup_min = float(mm.u_min[reg["pocket"]].max())
    sup_max = float(mm.u_max[reg["pocket"]].max())
    X, Y = m.coords()
    j0 = int(np.argmin(np.abs(X[0])))
    y = Y[:, j0]
    a, b = cfg.param("fit_window", [0.25, 0.75])
    win = m.inside[:, j0] & (y >= a * half) & (y <= b * half)
    rate = 0.5 * (_line_rate(y[win], mm.u_min[win, j0]) + _line_rate(y[win], mm.u_max[win, j0]))
    pred_lip = math.sqrt(alpha_cross / delta ** 2 - mu)
    pred_lin = math.sqrt(alpha_cross / delta ** 2 - r.fprime0)
    rep.results.update({"reaction": r.to_dict(), "delta": delta, "gap": mm.gap, "sup_pocket_umin": sup_min,
                        "sup_pocket_umax": sup_max, "decay_rate": rate, "rate_lipschitz": pred_lip,
                        "rate_linearized": pred_lin, "unknowns": m.n})
    tol = cfg.tol("decay_rel", 0.2)
    rep.lower("gap", mm.gap, cfg.tol("gap", 0.2))
    rep.check("pocket_sups_straddle_half", sup_max - sup_min, "sup u_min < 1/2 < sup u_max",
              sup_min < 0.5 < sup_max)
    rep.upper("decay_vs_lipschitz_rate", abs(rate - pred_lip) / pred_lip, tol)
    rep.upper("decay_vs_linearized_rate", abs(rate - pred_lin) / pred_lin, tol)
    if cfg.param("report_wide", True):
        wide = 4 * delta
        mw = gm.pocket(wide, half, h, side, base)
        gw = min_max_solutions(mw, r, scheme="implicit", newton=True).gap
        rep.results["gap_at_4delta"] = gw
    return rep


def run_wells(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    m = cfg.param("m", 3 * PI2)
    f0 = Reaction.logistic(m)
    f1 = _reaction(cfg, {"family": "DoubleHump", "params": {"m": m, "theta": 0.3, "eps": 1e-4}})
    ts = mg.find_tau_star(f0, f1, cfg.tol("tau_width", 1e-3))
    n = cfg.param("cells_across", 16)
    dm = mg.discrete_marginal(f0, f1, n, ts.tau_star, ts.length)
    L, h, r = dm.length, dm.h, dm.reaction
    depths = cfg.param("depths", [2, 4, 8, 16, 32])
    lams, rows, deep_row = [], [], None
    for D in depths:
        w = gm.wells(L, D * L, h)
        u = relax(w, r, np.where(w.inside, 1.0, 0.0), "down", scheme="implicit", newton=True).u
        lam = eigen2d(w, np.where(w.inside, r.df(u), 0.0)).lambda1
        lams.append(lam)
        rows.append((D, D * L, lam, w.n))
        _, Y = w.coords()
        i = int(np.argmin(np.abs(Y[:, 0] + D * L / 2)))
        deep_row = u[i][w.inside[i]]
    rep.tables["wells"] = csv_table(["depth_over_L", "depth", "lambda", "unknowns"], rows)
    lam_inf = mg.richardson(depths, lams, cfg.param("order", 2.0))
    p_obs = mg.observed_order(depths, lams) if len(depths) >= 3 else math.nan
    # interval solutions: grid recurrence and the continuum profile rescaled to L
    _, phi_cont = profile_on_grid(r, dm.alpha, n, length_by_quadrature(r, dm.alpha))
    err_disc = float(np.max(np.abs(deep_row - dm.profile[1:-1])))
    err_cont = float(np.max(np.abs(deep_row - phi_cont[1:-1])))
    rep.results.update({"tau_star": ts.tau_star, "tau_discrete": dm.tau, "L": L, "h": h, "cells_across": n,
                        "lambda_interval_discrete": dm.lambda1, "lambdas": lams, "lambda_extrapolated": lam_inf,
                        "observed_order": p_obs, "mid_depth_vs_grid_phi": err_disc,
                        "mid_depth_vs_phi": err_cont, "reaction": r.to_dict()})
    rep.check("lambda_strictly_decreasing", float(np.max(np.diff(lams))), "< 0",
              bool(np.all(np.diff(lams) < 0)))
    band = cfg.tol("extrapolation_band", 0.02)
    rep.check("lambda_extrapolated_in_band", lam_inf, f"in [-{band:g}, {band:g}]", abs(lam_inf) <= band)
    rep.upper("mid_depth_vs_phi", max(err_disc, err_cont), cfg.tol("mid_depth_vs_phi", 0.05))
    return rep


def run_exterior(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    r = _reaction(cfg, {"family": "Logistic", "params": {"m": 1.0}})
    g = cfg.geometry
    R0, r_max = g.get("R0", 1.0), g.get("r_max", 40.0)
    dims = cfg.param("dims", [2, 3])
    prof = {}
    for d in dims:
        P = radial_exterior(r, d, R0, r_max)
        prof[d] = P
        # monotonicity is read off w = 1 - u, which keeps full relative precision
        worst = float(np.max(np.diff(P.w)))
        rep.check(f"radial_increasing_d{d}", worst, "< 0 at every sample", bool(np.all(np.diff(P.w) < 0)))
        rep.tables[f"radial_d{d}"] = csv_table(["rho", "u", "w"], zip(P.rho, P.u, P.w))
        rep.results[f"slope_d{d}"] = P.slope
        rep.results[f"splice_mismatch_d{d}"] = P.splice_mismatch
    R1, h = g.get("R1", 12.0), cfg.h or 0.1
    if 2 in prof:
        m = gm.annulus(R0, R1, h)
        u = relax(m, r, np.where(m.inside, 1.0, 0.0), "down", scheme="implicit", newton=True).u
        X, Y = m.coords()
        i = int(np.argmin(np.abs(Y[:, 0])))
        away = cfg.param("outer_margin", 8.0 * length_scale(r))
        sel = m.inside[i] & (X[i] > R0) & (X[i] < R1 - away)
        err = np.abs(u[i][sel] - prof[2](X[i][sel]))
        rep.tables["annulus_ray"] = csv_table(["rho", "u_grid", "u_radial"], zip(X[i][sel], u[i][sel], prof[2](X[i][sel])))
        rep.results.update({"annulus_unknowns": m.n, "annulus_R1": R1, "h": h})
        rep.upper("annulus_vs_radial", float(err.max()), cfg.tol("annulus_vs_radial", 0.02))
    rep.results["reaction"] = r.to_dict()
    return rep


def lieb_instances(h: float = 1 / 32):
    """Five fixed (name, mask, q, R) cases."""
    sq = gm.rectangle(1.0, 1.0, h)
    Xs, _ = sq.coords()
    dk = gm.disk(0.5, h)
    Ls = gm.from_rectangles([(0, 1, 0, 0.5), (0, 0.5, 0, 1)], h)
    an = gm.annulus(0.25, 0.75, h)
    Xa, Ya = an.coords()
    return [
        ("square_q0", sq, None, 0.3),
        ("square_qx", sq, 5.0 * Xs, 0.25),
        ("disk_qconst", dk, 3.0, 0.25),
        ("lshape_q0", Ls, None, 0.3),
        ("annulus_qr", an, 4.0 * np.hypot(Xa, Ya), 0.3),
    ]


def random_mask(rng, h: float = 1 / 24):
    k = int(rng.integers(1, 4))
    rects = []
    for _ in range(k):
        x0, y0 = rng.uniform(0.0, 0.5, 2)
        w, t = rng.uniform(0.3, 0.5, 2)
        rects.append((x0, min(x0 + w, 1.0), y0, min(y0 + t, 1.0)))
    return gm.from_rectangles(rects, h)


def run_lieb(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    rng = np.random.default_rng(cfg.seed)
    n_random = cfg.param("n_random", 20)
    n_centers = cfg.param("n_centers", 12)
    rows, viol = [], 0
    cases = lieb_instances(cfg.h or 1 / 32)
    for k in range(n_random):
        m = random_mask(rng)
        q = float(rng.uniform(0.0, 5.0))
        R = float(rng.uniform(0.2, 0.35))
        cases.append((f"random_{k:02d}", m, q, R))
    for idx, (name, m, q, R) in enumerate(cases):
        res = lieb_check(m, q, R, n_centers=n_centers, seed=int(cfg.seed) + idx)
        viol += 0 if res.holds else 1
        rows.append((name, res.lhs, res.rhs, res.slack, res.tol, "ok" if res.holds else "violated"))
    rep.tables["lieb"] = csv_table(["case", "min_ball_lambda", "rhs", "slack", "tol", "status"], rows)
    rep.results.update({"cases": len(cases), "violations": viol})
    rep.upper("violations", viol, 0)
    return rep


def run_stargeom(cfg: ExperimentConfig) -> Report:
    rep = _report(cfg)
    grid = cfg.param("grid", 32)
    polys = {"hourglass": sg.hourglass(), "hexagon": sg.regular_polygon(6), "lshape": sg.l_shape(),
             "square": sg.Polygon(np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)], float))}
    for name, text in cfg.geometry.get("polygons", {}).items():
        polys[name] = sg.Polygon.from_json(text) if isinstance(text, str) else sg.Polygon(np.array(text, float))
    kappas = cfg.param("kappas", [1.01, 2.0, 4.0, 8.0])
    rows, sep_rows = [], []
    for name, p in polys.items():
        k = sg.star_center_set(p, grid)
        origin = sg.is_star_center(p, (0.0, 0.0))
        rows.append((name, k.area, k.area_ratio, "strong" if k.strongly_star else ("star" if k.star else "none"),
                     "yes" if origin else "no"))
        rep.results[f"{name}_strongly_star"] = k.strongly_star
        if origin:
            seps = [sg.dilation_separation(p, kk) for kk in kappas]
            sep_rows += [(name, kk, s) for kk, s in zip(kappas, seps)]
            if k.strongly_star:
                rep.check(f"{name}_separation_increasing", min(np.diff(seps)), "> 0",
                          bool(np.all(np.diff(seps) > 0) and seps[0] > 0))
            if name == "hexagon":
                err = max(abs(s - (kk - 1) * math.sqrt(3) / 2) for kk, s in zip(kappas, seps))
                rep.upper("hexagon_vs_apothem", err, cfg.tol("hexagon_vs_apothem", 1e-3))
    rep.tables["kernels"] = csv_table(["polygon", "kernel_area", "area_ratio", "class", "origin_center"], rows)
    rep.tables["separation"] = csv_table(["polygon", "kappa", "separation"], sep_rows)
    hg = sg.star_center_set(polys["hourglass"], grid)
    rep.check("hourglass_not_strongly_star", hg.area, "not strongly star-shaped", not hg.strongly_star)
    rep.check("hourglass_origin_only", float(sg.is_star_center(polys["hourglass"], (0.01, 0.3))),
              "origin is a centre, (0.01, 0.3) is not",
              sg.is_star_center(polys["hourglass"], (0.0, 0.0)) and not sg.is_star_center(polys["hourglass"], (0.01, 0.3)))
    return rep


RUNNERS = {
    "LengthCurve": run_lengthcurve,
    "Dilate1D": run_dilate1d,
    "Dilate2D": run_dilate2d,
    "Pocket": run_pocket,
    "Marginal": run_marginal,
    "StripOrbit": run_striporbit,
    "WellsLambda": run_wells,
    "ExteriorRadial": run_exterior,
    "LiebSuite": run_lieb,
    "StarGeom": run_stargeom,
}


def run(cfg: ExperimentConfig) -> Report:
    return RUNNERS[cfg.experiment](cfg)
