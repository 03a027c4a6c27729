"""Dilation sweeps, the distance profile Phi_kappa and the deep maximum principle check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..reaction import Reaction
from ..shoot1d import halfline_profile
from ..spectra import eigen2d, radius_of_positivity
from . import masks as gm
from .relax import min_max_solutions, relax

MERGE_TOL = 1e-4


def phi_kappa(m: gm.Mask, r: Reaction, profile=None) -> np.ndarray:
    """phi(dist(x, boundary)) with phi the half-line profile of r."""
    prof = halfline_profile(r) if profile is None else profile
    d = gm.distance_to_boundary(m)
    return np.where(m.inside, prof(d), 0.0)


@dataclass
class BranchPoint:
    kappa: float
    u_min: np.ndarray
    u_max: np.ndarray
    gap: float
    sup_umin: float
    sup_umax: float
    dist_phi_min: float
    dist_phi_max: float
    lambda_phi: float
    converged: bool


@dataclass
class Branch:
    points: list
    kappa_merge: float | None

    def to_csv(self) -> str:
        rows = ["kappa,gap,sup_umin,sup_umax,dist_phi_min,dist_phi_max,lambda_phi"]
        for p in self.points:
            rows.append(",".join(f"{v:.17g}" for v in (p.kappa, p.gap, p.sup_umin, p.sup_umax,
                                                        p.dist_phi_min, p.dist_phi_max, p.lambda_phi)))
        return "\n".join(rows) + "\n"


def dilation_branch(builder: Callable[[float], gm.Mask], r: Reaction, kappas, scheme: str = "implicit",
                    newton: bool = True, keep_fields: bool = False) -> Branch:
    """Min/max solutions on builder(kappa) for each kappa, compared with Phi_kappa."""
    kappas = np.asarray(kappas, dtype=float)
    if np.any(np.diff(kappas) <= 0):
        raise ValueError("kappas must be increasing")
    prof = halfline_profile(r)
    pts = []
    merge = None
    for k in kappas:
        m = builder(float(k))
        mm = min_max_solutions(m, r, scheme=scheme, newton=newton)
        phi = phi_kappa(m, r, prof)
        q = np.where(m.inside, r.df(phi), 0.0)
        lam = eigen2d(m, q).lambda1
        ins = m.inside
        p = BranchPoint(float(k), mm.u_min if keep_fields else None, mm.u_max if keep_fields else None,
                        mm.gap, float(mm.u_min.max()), float(mm.u_max.max()),
                        float(np.max(np.abs(mm.u_min - phi)[ins])), float(np.max(np.abs(mm.u_max - phi)[ins])),
                        lam, bool(mm.res_min.converged and mm.res_max.converged))
        pts.append(p)
        if merge is None and p.gap <= MERGE_TOL:
            merge = float(k)
    return Branch(pts, merge)


# deep maximum principle

def deep_threshold(r: Reaction, n: int = 100_000) -> float:
    """Smallest theta with f' <= f'(1)/2 on [theta, 1]."""
    s = np.linspace(0.0, 1.0, n + 1)
    bad = r.df(s) > 0.5 * r.fprime1
    if not bad.any():
        return 0.0
    return float(s[np.nonzero(bad)[0][-1] + 1])


@dataclass
class DeepReport:
    R: float
    theta: float
    trials: int
    violations: int
    max_excess: float
    deep_cells: int


def deep_mp_check(m: gm.Mask, r: Reaction, R: float | None = None, trials: int = 8, seed: int = 0,
                  u: np.ndarray | None = None) -> DeepReport:
    """Empirical check that solutions dominate subsolutions on the deep set Omega[R].

    u is the minimal positive solution on the mask unless given.  Each trial
    draws Dirichlet data g <= u on the nodes just outside Omega[R] and takes
    v as the maximal steady state on Omega[R] with those data (a solution,
    hence a subsolution, with values in [0, 1]).  A violation is a node of
    Omega[R] with v > u.  With R = None the radius attached to the threshold
    theta (f' <= f'(1)/2 on [theta, 1]) is used.
    """
    theta = deep_threshold(r)
    if R is None:
        R = radius_of_positivity(r, max(theta, 1e-6), m.ndim)
    if u is None:
        u = min_max_solutions(m, r, scheme="implicit", newton=True).u_min
    dist = gm.distance_to_boundary(m)
    deep = m.inside & (dist > R)
    if not deep.any():
        raise ValueError(f"Omega[R] is empty for R={R:.4g}")
    D = gm.Mask(deep, m.h, m.origin, "deep")
    rng = np.random.default_rng(seed)
    viol, excess = 0, 0.0
    for t in range(trials):
        if t == 0:
            g = np.maximum(u - 0.1, 0.0)
        else:
            g = u * rng.uniform(0.0, 1.0, size=u.shape)
        v = relax(D, r, np.where(deep, 1.0, 0.0), scheme="implicit", bc=g, newton=True).u
        diff = (v - u)[deep]
        e = float(diff.max())
        excess = max(excess, e)
        if e > 1e-8:
            viol += 1
    return DeepReport(float(R), theta, trials, viol, excess, int(deep.sum()))


# field I/O

def field_to_csv(u: np.ndarray, m: gm.Mask) -> str:
    rows = ["x,y,value"] if m.ndim == 2 else ["x,value"]
    if m.ndim == 1:
        x = m.coords()
        for i in np.nonzero(m.inside)[0]:
            rows.append(f"{x[i]:.17g},{u[i]:.17g}")
    else:
        X, Y = m.coords()
        for i, j in zip(*np.nonzero(m.inside)):
            rows.append(f"{X[i, j]:.17g},{Y[i, j]:.17g},{u[i, j]:.17g}")
    return "\n".join(rows) + "\n"


def field_from_csv(text: str, m: gm.Mask) -> np.ndarray:
    data = np.loadtxt(text.splitlines()[1:], delimiter=",", ndmin=2)
    u = np.zeros(m.shape)
    if m.ndim == 1:
        idx = np.rint((data[:, 0] - m.origin[0]) / m.h).astype(int)
        u[idx] = data[:, 1]
    else:
        j = np.rint((data[:, 0] - m.origin[0]) / m.h).astype(int)
        i = np.rint((data[:, 1] - m.origin[1]) / m.h).astype(int)
        u[i, j] = data[:, 2]
    return u


def mask_to_pbm(m: gm.Mask) -> bytes:
    """Plain PBM (P1), black = inside, top row = largest y."""
    a = m.inside if m.ndim == 2 else m.inside[None, :]
    a = a[::-1]
    lines = ["P1", f"{a.shape[1]} {a.shape[0]}"]
    lines += [" ".join("1" if v else "0" for v in row) for row in a]
    return ("\n".join(lines) + "\n").encode()
