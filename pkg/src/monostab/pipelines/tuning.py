"""Bounded grid searches for DoubleHump parameters that produce several solutions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..grid2d import masks as gm
from ..grid2d.relax import min_max_solutions
from ..reaction import Reaction
from ..shoot1d import alpha_grid, length_curve

PI2 = math.pi ** 2


@dataclass
class Candidate:
    reaction: Reaction
    score: float
    s_lo: float
    s_hi: float
    info: dict


def interval_solutions(r: Reaction, L: float = 1.0, n_geo: int = 8, n_uni: int = 60) -> tuple:
    """Maxima s of all solutions on (0, L) found as crossings of L_alpha = L."""
    c = length_curve(r, alpha_grid(r, n_geo, n_uni, lo=1e-2, hi=0.995))
    s = []
    for i in range(len(c.alpha) - 1):
        a, b = c.length[i] - L, c.length[i + 1] - L
        if a == 0 or a * b < 0:
            t = a / (a - b) if a != b else 0.0
            s.append(c.s_max[i] + t * (c.s_max[i + 1] - c.s_max[i]))
    return np.array(s), c


def score_1d(r: Reaction, L: float = 1.0, margin: float = 0.05) -> Candidate | None:
    """Gap between the smallest and largest solution maxima on (0, L).

    Admissible only with at least two solutions, the extreme maxima straddling
    (0.45, 0.55), and L inside the dip window with a relative margin.
    """
    s, c = interval_solutions(r, L)
    if len(s) < 2:
        return None
    lo, hi = float(s.min()), float(s.max())
    if not (lo < 0.45 and hi > 0.55):
        return None
    Lmin, Lmax = float(c.length.min()), float(c.length.max())
    if not (Lmin < L * (1 - margin) and L * (1 + margin) < Lmax):
        return None
    return Candidate(r, hi - lo, lo, hi, {"n_solutions": int(len(s))})


def tune_double_hump_1d(m_values=None, thetas=(0.3, 0.4, 0.5), eps_values=(1e-4, 1e-3, 1e-2),
                        L: float = 1.0) -> Candidate:
    """Best DoubleHump on (0, L) over the box m in [pi^2, 4 pi^2], theta in [0.3, 0.5], eps in [1e-4, 1e-2]."""
    m_values = [k * PI2 for k in (1, 2, 3, 4)] if m_values is None else m_values
    best = None
    for m, th, eps in itertools.product(m_values, thetas, eps_values):
        try:
            c = score_1d(Reaction.double_hump(m, th, eps), L)
        except (ValueError, RuntimeError):
            continue
        if c is not None and (best is None or c.score > best.score):
            best = c
    if best is None:
        raise RuntimeError("no admissible DoubleHump in the search box")
    return best


def score_pocket(r: Reaction, side: float = 1.0, h: float = 0.05) -> Candidate | None:
    """Min/max solutions on the square pocket; admissible if their sups straddle 1/2."""
    m = gm.rectangle(side, side, h)
    mm = min_max_solutions(m, r, scheme="implicit", newton=True)
    lo, hi = float(mm.u_min.max()), float(mm.u_max.max())
    if not (lo < 0.5 < hi):
        return None
    return Candidate(r, hi - lo, lo, hi, {"h": h})


def tune_pocket(m_values=None, thetas=(0.3, 0.4, 0.5), eps_values=(1e-4, 1e-3, 1e-2),
                side: float = 1.0, h: float = 0.05) -> Candidate:
    """Best DoubleHump for the square pocket; m ranges up to 8 pi^2 since lambda(square) = 2 pi^2."""
    m_values = [k * PI2 for k in (2, 3, 4, 6, 8)] if m_values is None else m_values
    best = None
    for m, th, eps in itertools.product(m_values, thetas, eps_values):
        try:
            c = score_pocket(Reaction.double_hump(m, th, eps), side, h)
        except (ValueError, RuntimeError):
            continue
        if c is not None and (best is None or c.score > best.score):
            best = c
    if best is None:
        raise RuntimeError("no admissible DoubleHump for the pocket")
    return best
