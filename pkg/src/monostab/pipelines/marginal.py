"""Locating a marginally stable interval solution by interpolating two reactions.

Along f_tau = (1 - tau) f0 + tau f1 the length map alpha -> L_alpha is
increasing at tau = 0 and dips at tau = 1.  At the first tau where
min_alpha dL/dalpha reaches zero, the solution at the minimizing alpha has
principal eigenvalue zero.

The same search is available for the finite-difference interval problem with
n cells, where the length of the solution with first step u_1 = a h is n h for
the h solving u_n(h) = 0.  Calibrating on that map gives a reaction and
length that are marginal for the grid operator itself, which is what deep
grid wells converge to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..reaction import Reaction
from ..shoot1d import alpha_star, alpha_grid, dlength, length_by_quadrature, profile_on_grid
from ..spectra import eigen1d


class MarginalError(RuntimeError):
    pass


def family(tau: float, f0: Reaction, f1: Reaction) -> Reaction:
    return Reaction.interpolated(float(tau), f0, f1)


@dataclass
class Dip:
    tau: float
    min_dl: float
    alpha: float


def _minimize_on_grid(g, grid):
    vals = np.array([g(a) for a in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(g, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10 * grid[-1]})
    if res.fun < vals[i]:
        return float(res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def min_dlength(r: Reaction, n_grid: int = 40) -> tuple:
    """(min dL/dalpha, argmin) over alpha in [1e-2, 0.99] alpha*."""
    grid = alpha_grid(r, 8, n_grid, lo=1e-2, hi=0.99)
    return _minimize_on_grid(lambda a: dlength(r, a), grid)


def dip(tau: float, f0: Reaction, f1: Reaction, n_grid: int = 40) -> Dip:
    v, a = min_dlength(family(tau, f0, f1), n_grid)
    return Dip(float(tau), v, a)


@dataclass
class TauSearch:
    tau_lo: float
    tau_hi: float
    tau_star: float
    alpha: float
    length: float
    lambda1: float
    lambda2: float
    min_dl: float
    history: list


def find_tau_star(f0: Reaction, f1: Reaction, width: float = 1e-3, n_grid: int = 40,
                  n_eig: int = 2048) -> TauSearch:
    """Bisect tau on 'min dL/dalpha < 0' to the given width, then refine the root."""
    if dip(0.0, f0, f1, n_grid).min_dl < 0:
        raise MarginalError("the base reaction already has a non-injective length map")
    d1 = dip(1.0, f0, f1, n_grid)
    if not d1.min_dl < 0:
        raise MarginalError("predicate-never-true: the second reaction has an injective length map")
    lo, hi = 0.0, 1.0
    hist = [(0.0, dip(0.0, f0, f1, n_grid).min_dl), (1.0, d1.min_dl)]
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        v = dip(mid, f0, f1, n_grid).min_dl
        hist.append((mid, v))
        if v < 0:
            hi = mid
        else:
            lo = mid
    tau = optimize.brentq(lambda t: dip(t, f0, f1, n_grid).min_dl, lo, hi, xtol=1e-12)
    d = dip(tau, f0, f1, n_grid)
    r = family(tau, f0, f1)
    L = length_by_quadrature(r, d.alpha)
    _, phi = profile_on_grid(r, d.alpha, n_eig, L)
    e = eigen1d(r.df(phi), L, 2)
    return TauSearch(lo, hi, float(tau), d.alpha, float(L), float(e.values[0]), float(e.values[1]),
                     d.min_dl, hist)


def lambda_at_dip(tau: float, f0: Reaction, f1: Reaction, n_eig: int = 2048) -> tuple:
    """(min dL/dalpha, lambda_1) at the minimizing alpha for f_tau."""
    d = dip(tau, f0, f1)
    r = family(tau, f0, f1)
    L = length_by_quadrature(r, d.alpha)
    _, phi = profile_on_grid(r, d.alpha, n_eig, L)
    return d.min_dl, float(eigen1d(r.df(phi), L, 1).values[0])


# the finite-difference interval problem

def discrete_march(r: Reaction, a: float, h: float, n: int) -> np.ndarray:
    """u_0 = 0, u_1 = a h, u_{i+1} = 2 u_i - u_{i-1} - h^2 f(u_i), up to u_n."""
    c = r.coef
    u = np.zeros(n + 1)
    u[1] = a * h
    h2 = h * h
    for i in range(1, n):
        x = u[i]
        fx = 0.0
        for ck in c[::-1]:
            fx = fx * x + ck
        u[i + 1] = 2 * x - u[i - 1] - h2 * fx
        if abs(u[i + 1]) > 1e3:
            u[i + 2:] = u[i + 1]
            break
    return u


def discrete_length(r: Reaction, a: float, n: int, L0: float) -> float:
    """n h for the smallest h with u_n(h) = 0, searched in [0.3, 3] L0 / n."""
    def g(h):
        return discrete_march(r, a, h, n)[n]

    hs = np.linspace(0.3 * L0 / n, 3.0 * L0 / n, 60)
    prev = g(hs[0])
    for h0, h1 in zip(hs[:-1], hs[1:]):
        cur = g(h1)
        if prev > 0 >= cur:
            return n * optimize.brentq(g, h0, h1, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        prev = cur
    raise MarginalError(f"no discrete solution with slope {a:.6g} near length {L0:.6g}")


def discrete_min_dlength(r: Reaction, n: int, L0: float, n_grid: int = 46) -> tuple:
    a_s = alpha_star(r)
    da = 1e-4 * a_s

    def g(a):
        return (discrete_length(r, a + da, n, L0) - discrete_length(r, a - da, n, L0)) / (2 * da)

    return _minimize_on_grid(g, np.linspace(0.05, 0.95, n_grid) * a_s)


@dataclass
class DiscreteMarginal:
    tau: float
    alpha: float
    length: float
    n: int
    h: float
    profile: np.ndarray
    lambda1: float
    reaction: Reaction


def discrete_marginal(f0: Reaction, f1: Reaction, n: int, tau_guess: float, L0: float,
                      spread: float = 0.05) -> DiscreteMarginal:
    """Marginal reaction and length for the n-cell finite-difference interval problem."""
    def g(t):
        return discrete_min_dlength(family(t, f0, f1), n, L0)[0]

    lo, hi = max(tau_guess - spread, 0.0), min(tau_guess + spread, 1.0)
    if not (g(lo) > 0 > g(hi)):
        raise MarginalError("discrete marginal tau not bracketed near the continuum value")
    tau = optimize.brentq(g, lo, hi, xtol=1e-12)
    r = family(tau, f0, f1)
    _, a = discrete_min_dlength(r, n, L0)
    L = discrete_length(r, a, n, L0)
    h = L / n
    u = discrete_march(r, a, h, n)
    u[n] = 0.0
    from scipy.linalg import eigh_tridiagonal

    q = r.df(u[1:-1])
    lam = eigh_tridiagonal(2 / h ** 2 - q, -np.ones(n - 2) / h ** 2, select="i", select_range=(0, 0))[0][0]
    return DiscreteMarginal(float(tau), float(a), float(L), n, float(h), u, float(lam), r)


def richardson(depths, lams, order: float = 2.0) -> float:
    """Extrapolate the last two values to infinite depth assuming lambda - lambda_inf ~ D^-order."""
    D1, D2 = float(depths[-2]), float(depths[-1])
    l1, l2 = float(lams[-2]), float(lams[-1])
    ratio = (D2 / D1) ** order
    return (ratio * l2 - l1) / (ratio - 1.0)


def observed_order(depths, lams) -> float:
    """Order p from three depths in geometric progression."""
    d = np.asarray(depths[-3:], float)
    l = np.asarray(lams[-3:], float)
    q = d[1] / d[0]
    return float(math.log(abs((l[0] - l[1]) / (l[1] - l[2]))) / math.log(q))
