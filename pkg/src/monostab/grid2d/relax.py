"""Order-preserving relaxation to steady states of Lap_h u + f(u) = 0.

Two schemes, both monotone in the data:

* ``explicit``: forward Euler u <- u + dt (Lap_h u + f(u)) with dt = h^2/5 (2-D)
  or h^2/3 (1-D).  Stops when |du|_inf / dt < tol.
* ``implicit``: the shifted iteration (K - Lap_h) u_new = f(u) + K u with
  K = Lip(f).  The right-hand side is nondecreasing in u and (K - Lap_h)^-1 is
  a nonnegative matrix, so iterates started from a sub- or supersolution move
  monotonically.  It is forward Euler's implicit cousin with pseudo-step 1/K.

Once the iteration is close, Newton steps may finish the job; a Newton
result is only accepted if it continues the monotone direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..reaction import Reaction
from . import masks as gm
from .linsolve import factor


REL_TOL = 1e-6


class RelaxError(RuntimeError):
    pass


@dataclass
class RelaxResult:
    u: np.ndarray
    residual: float
    steps: int
    converged: bool
    direction: int
    newton: bool = False
    history: list = field(default_factory=list, repr=False)

    @property
    def sup(self) -> float:
        return float(self.u.max())


def residual(u: np.ndarray, m: gm.Mask, r: Reaction, bc: np.ndarray | None = None) -> float:
    res = gm.apply_laplacian(u, m) + np.where(m.inside, r.f(u), 0.0)
    if bc is not None:
        res = res + _boundary_term(m, np.where(m.inside, 0.0, bc))
    return float(np.max(np.abs(res[m.inside]))) if m.n else 0.0


def is_subsolution(u: np.ndarray, m: gm.Mask, r: Reaction, tol: float = 0.0) -> bool:
    res = gm.apply_laplacian(u, m) + r.f(u)
    return bool(np.all(res[m.inside] >= -tol))


def is_supersolution(u: np.ndarray, m: gm.Mask, r: Reaction, tol: float = 0.0) -> bool:
    res = gm.apply_laplacian(u, m) + r.f(u)
    return bool(np.all(res[m.inside] <= tol))


def relax(m: gm.Mask, r: Reaction, u0: np.ndarray, direction: str | None = None, scheme: str = "explicit",
          tol: float = 1e-9, max_steps: int | None = None, dt: float | None = None, newton: bool = False,
          bc: np.ndarray | None = None, record_every: int = 0) -> RelaxResult:
    """Relax u0 towards a steady state.

    ``direction`` ("up" or "down") asserts that u0 is a discrete sub- or
    supersolution; every step is then checked for monotonicity and a
    RelaxError is raised on violation.  ``bc`` optionally gives Dirichlet
    values on the nodes outside the mask (zero otherwise).
    """
    u = np.where(m.inside, np.asarray(u0, dtype=float), 0.0)
    if u.shape != m.shape:
        raise RelaxError("u0 shape does not match the mask")
    if np.any(u[m.inside] < 0) or np.any(u[m.inside] > 1.5):
        raise RelaxError("u0 must take values in [0, 1.5]")
    sign = {None: 0, "up": 1, "down": -1}.get(direction)
    if sign is None:
        raise RelaxError(f"direction must be 'up', 'down' or None, got {direction!r}")
    bcf = np.zeros(m.shape) if bc is None else np.where(m.inside, 0.0, np.asarray(bc, dtype=float))
    if scheme == "explicit":
        return _explicit(m, r, u, sign, tol, max_steps, dt, bcf, record_every)
    if scheme == "implicit":
        return _implicit(m, r, u, sign, tol, max_steps, newton, bcf, record_every)
    raise RelaxError(f"unknown scheme {scheme!r}")


def _boundary_term(m: gm.Mask, bcf: np.ndarray) -> np.ndarray:
    """Contribution of the Dirichlet values to Lap_h at the inside nodes."""
    out = np.zeros(m.shape)
    for ax in range(m.ndim):
        out += np.roll(bcf, 1, axis=ax) + np.roll(bcf, -1, axis=ax)
    return np.where(m.inside, out / (m.h * m.h), 0.0)


def _rel_rate(du: np.ndarray, u: np.ndarray) -> float:
    """max |du| / u over positive nodes.

    Upward runs start from a positive subsolution that may be exponentially
    small somewhere (a pocket behind a bridge); the absolute rate there is
    negligible long before the iterate has grown, so they also need this.
    """
    pos = u > 0
    return float(np.max(np.abs(du[pos]) / u[pos])) if pos.any() else 0.0


def _check_direction(sign: int, du: np.ndarray, scale: float) -> None:
    slack = 1e-12 * max(scale, 1.0)
    if sign > 0 and np.any(du < -slack):
        raise RelaxError("monotonicity violation: u0 is not a discrete subsolution")
    if sign < 0 and np.any(du > slack):
        raise RelaxError("monotonicity violation: u0 is not a discrete supersolution")


def _explicit(m, r, u, sign, tol, max_steps, dt, bcf, record_every):
    h2 = m.h * m.h
    if dt is None:
        # order preserving needs 1 - 2d dt/h^2 + dt f'(u) >= 0
        dt = min(h2 / (2 * m.ndim + 1), 1.0 / (2 * m.ndim / h2 + r.lipschitz()))
    max_steps = 10_000_000 if max_steps is None else max_steps
    ins = m.inside
    b = _boundary_term(m, bcf)
    hist = []
    direction = sign
    for k in range(1, max_steps + 1):
        du = dt * (gm.apply_laplacian(u, m) + b + np.where(ins, r.f(u), 0.0))
        if sign:
            _check_direction(sign, du[ins], dt)
        elif direction == 0:
            if np.all(du[ins] >= 0):
                direction = 1
            elif np.all(du[ins] <= 0):
                direction = -1
        u = u + du
        rate = float(np.max(np.abs(du))) / dt
        if record_every and k % record_every == 0:
            hist.append((k * dt, rate))
        if rate < tol and (sign <= 0 or _rel_rate(du[ins], u[ins]) / dt < REL_TOL):
            return RelaxResult(u, residual(u, m, r, bcf), k, True, direction, False, hist)
    return RelaxResult(u, residual(u, m, r, bcf), max_steps, False, direction, False, hist)


def _implicit(m, r, u, sign, tol, max_steps, newton, bcf, record_every):
    ins = m.inside
    L = gm.laplacian(m)
    b = _boundary_term(m, bcf)[ins]
    K = max(r.lipschitz(), 1e-3)
    solve = factor((K * sparse.identity(m.n) - L).tocsc(), spd=True)
    x = u[ins].copy()
    max_steps = 200_000 if max_steps is None else max_steps
    hist = []
    direction = sign
    used_newton = False
    next_try = 1e-3
    converged = False
    k = 0
    for k in range(1, max_steps + 1):
        x_new = solve(r.f(x) + K * x + b)
        dx = x_new - x
        if sign:
            _check_direction(sign, dx, 1.0 / K)
        elif direction == 0 and np.any(dx != 0):
            direction = 1 if np.all(dx >= -1e-14) else (-1 if np.all(dx <= 1e-14) else 0)
        x = x_new
        rate = K * float(np.max(np.abs(dx)))
        if record_every and k % record_every == 0:
            hist.append((k / K, rate))
        grown = sign <= 0 or K * _rel_rate(dx, x) < REL_TOL
        if rate < tol and grown:
            converged = True
            break
        if newton and rate < next_try and grown:
            y = _newton(L, b, r, x, direction)
            if y is not None:
                x = y
                used_newton = converged = True
                break
            next_try *= 0.1
    out = np.zeros(m.shape)
    out[ins] = x
    return RelaxResult(out, residual(out, m, r, bcf), k, converged, direction, used_newton, hist)


def _newton(L, b, r, x, direction, max_iter=12, tol=1e-11):
    y = x.copy()
    for _ in range(max_iter):
        F = L @ y + b + r.f(y)
        if np.max(np.abs(F)) < tol:
            break
        J = (L + sparse.diags(r.df(y))).tocsc()
        try:
            y = y - factor(J)(F)
        except RuntimeError:
            return None
        if not np.all(np.isfinite(y)):
            return None
    else:
        return None
    if np.max(np.abs(L @ y + b + r.f(y))) >= tol:
        return None
    slack = 1e-7
    if direction > 0 and np.any(y < x - slack):
        return None
    if direction < 0 and np.any(y > x + slack):
        return None
    return y


# extremal solutions

@dataclass
class MinMax:
    u_min: np.ndarray
    u_max: np.ndarray
    gap: float
    seed_eps: float
    lambda_mask: float
    res_min: RelaxResult
    res_max: RelaxResult


def principal_seed(m: gm.Mask, r: Reaction, eps0: float = 1e-2, sweeps: int = 40):
    """eps psi_1 with psi_1 the principal Dirichlet eigenfunction of -Lap_h.

    Requires lambda_1 < f'(0); eps is halved until eps psi_1 is a strict
    subsolution.  Where psi_1 is tiny (a pocket behind a thin bridge) the
    eigensolver's output lacks pointwise relative accuracy, so psi_1 is
    polished by inverse iteration below lambda_1 until the test passes.
    """
    from ..spectra import _certified_factor, eigen2d

    e = eigen2d(m)
    lam = e.lambda1
    if not lam < r.fprime0:
        raise RelaxError(f"lambda_1 = {lam:.6g} >= f'(0) = {r.fprime0:.6g}: no positive solution")
    psi = np.abs(e.vectors[0])
    ins = m.inside
    solve = None
    for _ in range(sweeps + 1):
        eps = eps0
        for _ in range(60):
            w = eps * psi
            res = gm.apply_laplacian(w, m) + r.f(w)
            if np.all(res[ins] > 0):
                return w, eps, lam
            eps *= 0.5
        if solve is None:
            A = -gm.laplacian(m)
            for gap in (1e-3, 1e-2, 1e-1, 0.5):
                solve = _certified_factor(A.tocsc(), lam - gap * (1 + abs(lam)))
                if solve is not None:
                    break
            else:
                break
        x = solve(psi[ins])
        psi = np.zeros(m.shape)
        psi[ins] = np.abs(x) / np.max(np.abs(x))
    raise RelaxError("could not find a subsolution eps psi_1")


def min_max_solutions(m: gm.Mask, r: Reaction, scheme: str = "explicit", tol: float = 1e-9,
                      newton: bool = False, max_steps: int | None = None) -> MinMax:
    """Minimal positive solution (from eps psi_1 upward) and maximal one (from 1 downward).

    When lambda_1(-Lap_h) >= f'(0) there is no positive solution; both fields
    are then returned as the zero-ish limits of the downward relaxation.
    """
    from ..spectra import eigen2d

    hi = relax(m, r, np.where(m.inside, 1.0, 0.0), "down", scheme=scheme, tol=tol, newton=newton,
               max_steps=max_steps)
    lam = eigen2d(m).lambda1
    if lam >= r.fprime0:
        zero = RelaxResult(np.zeros(m.shape), residual(np.zeros(m.shape), m, r), 0, True, 0)
        return MinMax(zero.u, hi.u, float(np.max(np.abs(hi.u))), 0.0, lam, zero, hi)
    seed, eps, lam = principal_seed(m, r)
    lo = relax(m, r, seed, "up", scheme=scheme, tol=tol, newton=newton, max_steps=max_steps)
    gap = float(np.max(np.abs(hi.u - lo.u)))
    return MinMax(lo.u, hi.u, gap, eps, lam, lo, hi)
