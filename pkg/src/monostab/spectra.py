"""Dirichlet eigenvalues of -Lap - q on intervals and grid masks.

Sign convention: the principal eigenvalue lambda_1 is the smallest
eigenvalue of -Lap - q.  lambda_1 > 0 means the linearization at a steady
state is stable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg, optimize, sparse
from scipy.sparse import linalg as spla

from .grid2d import masks as gm
from .grid2d.linsolve import DIRECT_LIMIT, factor
from .reaction import Reaction

EIG_TOL = 1e-10
RES_TOL = 1e-8


class EigenError(RuntimeError):
    pass


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray  # full-grid arrays, one per mode, sup-normalised
    residual: float
    iterations: int

    @property
    def lambda1(self) -> float:
        return float(self.values[0])


# one dimension

def _tridiag_eigs(q: np.ndarray, h: float, k: int):
    n = q.size
    d = 2.0 / (h * h) - q
    e = -np.ones(n - 1) / (h * h)
    w, v = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    return w, v, d, e


def _refine(d, e, lam, v, sweeps=2):
    """Inverse iteration at the computed eigenvalue, to push the residual down to rounding level."""
    n = d.size
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d - lam * (1 + 1e-14) - 1e-300
    ab[2, :-1] = e
    for _ in range(sweeps):
        try:
            v = linalg.solve_banded((1, 1), ab, v)
        except linalg.LinAlgError:
            break
        v /= np.max(np.abs(v))
    Av = d * v
    Av[:-1] += e * v[1:]
    Av[1:] += e * v[:-1]
    lam = float(v @ Av / (v @ v))
    return lam, v


def eigen1d(q, length: float, n_modes: int = 1, extrapolate: bool = True) -> EigenResult:
    """Eigenvalues of -d^2/dx^2 - q on (0, length) with Dirichlet ends.

    ``q`` holds samples on N equispaced nodes including both endpoints
    (N - 1 even when extrapolating).  The tridiagonal eigenproblem is solved
    by Sturm-sequence bisection (LAPACK stebz) and, with ``extrapolate``,
    combined with the same problem on every other node:
    lambda = (4 lambda_h - lambda_2h) / 3.
    """
    q = np.asarray(q, dtype=float)
    N = q.size
    if N < 200:
        raise EigenError("need at least 200 samples of q")
    if not length > 0:
        raise EigenError("length must be positive")
    if not 1 <= n_modes <= N - 2:
        raise EigenError("n_modes out of range")
    h = length / (N - 1)
    w, V, d, e = _tridiag_eigs(q[1:-1], h, n_modes)
    vals, vecs, res = [], [], 0.0
    for j in range(n_modes):
        v = V[:, j] / np.max(np.abs(V[:, j]))
        lam, v = _refine(d, e, w[j], v)
        if j == 0 and v.sum() < 0:
            v = -v
        Av = d * v
        Av[:-1] += e * v[1:]
        Av[1:] += e * v[:-1]
        res = max(res, float(np.max(np.abs(Av - lam * v))) / (1 + abs(lam)))
        vals.append(lam)
        full = np.zeros(N)
        full[1:-1] = v
        vecs.append(full)
    vals = np.array(vals)
    if extrapolate:
        if (N - 1) % 2:
            raise EigenError("extrapolation needs an even number of intervals")
        wc, _, _, _ = _tridiag_eigs(q[2:-1:2], 2 * h, n_modes)
        vals = (4.0 * vals - wc) / 3.0
    return EigenResult(vals, np.array(vecs), res, 1)


def sturm_count(q: np.ndarray, h: float, lam: float) -> int:
    """Number of eigenvalues below lam of the tridiagonal -D2 - q (interior samples)."""
    d = 2.0 / (h * h) - q
    off2 = 1.0 / h ** 4
    cnt = 0
    p = d[0] - lam
    if p < 0:
        cnt += 1
    for i in range(1, q.size):
        if p == 0:
            p = 1e-300
        p = d[i] - lam - off2 / p
        if p < 0:
            cnt += 1
    return cnt


# two dimensions

def _box_lower_bound(comp: np.ndarray, h: float) -> float:
    """Smallest Dirichlet eigenvalue of -Lap_h on the bounding box of a component.

    The component's matrix is a principal submatrix of the box's, so by
    interlacing this is a lower bound for it.
    """
    if comp.ndim == 1:
        idx = np.nonzero(comp)[0]
        n = idx[-1] - idx[0] + 1
        return 4.0 / h ** 2 * math.sin(math.pi / (2 * (n + 1))) ** 2
    rows = np.nonzero(comp.any(axis=1))[0]
    cols = np.nonzero(comp.any(axis=0))[0]
    ny, nx = rows[-1] - rows[0] + 1, cols[-1] - cols[0] + 1
    return 4.0 / h ** 2 * (math.sin(math.pi / (2 * (nx + 1))) ** 2 + math.sin(math.pi / (2 * (ny + 1))) ** 2)


def _certified_factor(A, sigma):
    """LU of A - sigma I with symmetric pivoting, or None when sigma is not below the spectrum.

    With diagonal pivots only, the signs of U's diagonal give the inertia of
    A - sigma I (Sylvester), so all-positive pivots certify sigma < lambda_1.
    """
    n = A.shape[0]
    try:
        lu = spla.splu((A - sigma * sparse.identity(n, format="csc")).tocsc(), permc_spec="MMD_AT_PLUS_A",
                       diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    except RuntimeError:
        return None
    if not np.array_equal(lu.perm_r, lu.perm_c) or not np.all(lu.U.diagonal() > 0):
        return None
    return lu.solve


def _eigen_component(m: gm.Mask, q_in: np.ndarray, k: int, max_iter: int, seed: int):
    """Block shifted inverse iteration with Rayleigh-Ritz on one connected mask.

    The shift starts at a rigorous lower bound and is moved towards the
    lowest Ritz value whenever an inertia count certifies the new shift is
    still below lambda_1; clustered spectra (long strips) need this.
    """
    A = (-gm.laplacian(m) - sparse.diags(q_in)).tocsc()
    n = A.shape[0]
    k = min(k, n)
    I = sparse.identity(n, format="csc")
    sigma0 = _box_lower_bound(m.inside, m.h) - float(np.max(q_in)) - 1.0
    rng = np.random.default_rng(seed)
    X = np.ones((n, k))
    if k > 1:
        X[:, 1:] = rng.standard_normal((n, k - 1))
    sigma = sigma0
    solve = factor(A - sigma * I)
    certify = n <= DIRECT_LIMIT
    theta_prev = None
    shifted = False
    for it in range(1, max_iter + 1):
        Y = solve(X)
        Q, _ = np.linalg.qr(Y)
        AQ = A @ Q
        H = Q.T @ AQ
        theta, W = np.linalg.eigh(0.5 * (H + H.T))
        X = Q @ W
        R = AQ @ W - X * theta
        scale = np.max(np.abs(X), axis=0)
        res = np.max(np.abs(R), axis=0) / scale / (1 + np.abs(theta))
        if theta_prev is not None:
            dtheta = np.max(np.abs(theta - theta_prev))
            if dtheta < EIG_TOL and np.max(res) <= RES_TOL:
                break
            r2 = np.linalg.norm(R[:, 0]) / np.linalg.norm(X[:, 0])
            target = theta[0] - max(2.0 * r2, 1e-9 * (1 + abs(theta[0])))
            if certify:
                # only move when the shift gets substantially closer
                if target - sigma > 0.5 * (theta[0] - sigma):
                    for _ in range(6):
                        s = _certified_factor(A, target)
                        if s is not None:
                            sigma, solve = target, s
                            break
                        target = 0.5 * (sigma + target)
            elif not shifted and dtheta < 1e-3 * (1 + abs(theta[0])):
                new = theta[0] - max(10.0 * r2, 1e-3 * (1 + abs(theta[0])))
                if new > sigma + 1e-6 * (1 + abs(new)):
                    sigma = new
                    solve = factor(A - sigma * I)
                    shifted = True
        theta_prev = theta
    else:
        raise EigenError(f"inverse iteration did not converge in {max_iter} iterations")
    x1 = X[:, 0]
    if x1.sum() < 0:
        X[:, 0] = -x1
    if np.min(X[:, 0]) < -1e-6 * np.max(X[:, 0]):
        if shifted:
            # the shift overtook lambda_1; redo conservatively
            return _eigen_component_fixed(A, sigma0, k, max_iter, seed)
        raise EigenError("principal vector is not single-signed")
    return theta, X, float(np.max(res)), it


def _eigen_component_fixed(A, sigma, k, max_iter, seed):
    n = A.shape[0]
    solve = factor(A - sigma * sparse.identity(n, format="csc"))
    rng = np.random.default_rng(seed)
    X = np.ones((n, k))
    if k > 1:
        X[:, 1:] = rng.standard_normal((n, k - 1))
    theta_prev = None
    for it in range(1, 50 * max_iter + 1):
        Q, _ = np.linalg.qr(solve(X))
        AQ = A @ Q
        theta, W = np.linalg.eigh(Q.T @ AQ)
        X = Q @ W
        R = AQ @ W - X * theta
        res = np.max(np.abs(R), axis=0) / np.max(np.abs(X), axis=0) / (1 + np.abs(theta))
        if theta_prev is not None and np.max(np.abs(theta - theta_prev)) < EIG_TOL and np.max(res) <= RES_TOL:
            break
        theta_prev = theta
    else:
        raise EigenError("inverse iteration did not converge")
    if X[:, 0].sum() < 0:
        X[:, 0] = -X[:, 0]
    return theta, X, float(np.max(res)), it


def eigen2d(mask: gm.Mask, q=None, n_modes: int = 1, max_iter: int = 500, seed: int = 0) -> EigenResult:
    """Lowest eigenvalues of -Lap_h - q on a mask (1-D or 2-D).

    ``q`` is a full-grid array (or scalar, or None for zero).  A disconnected
    mask is split into components; the spectrum is the union.
    """
    if mask.n == 0:
        raise EigenError("empty mask")
    if q is None:
        qf = np.zeros(mask.shape)
    else:
        qf = np.broadcast_to(np.asarray(q, dtype=float), mask.shape)
    if not np.all(np.isfinite(qf[mask.inside])):
        raise EigenError("q must be finite on the mask")
    vals, vecs, res, its = [], [], 0.0, 0
    for comp in mask.components():
        sub = gm.Mask(comp, mask.h, mask.origin, mask.name)
        theta, X, r, it = _eigen_component(sub, qf[comp], n_modes, max_iter, seed)
        res, its = max(res, r), max(its, it)
        for j in range(len(theta)):
            full = np.zeros(mask.shape)
            full[comp] = X[:, j] / np.max(np.abs(X[:, j]))
            vals.append(theta[j])
            vecs.append(full)
    order = np.argsort(vals)[:n_modes]
    return EigenResult(np.array(vals)[order], np.array(vecs)[order], res, its)


# ball constants

@lru_cache(maxsize=None)
def ball_eigenvalue(d: int) -> float:
    """lambda_1(-Lap, unit ball in R^d) from the radial equation.

    psi'' + (d-1)/r psi' + lambda psi = 0, psi(0) = 1, psi'(0) = 0; the
    root in lambda of psi(1; lambda) = 0 is found by Brent's method.
    """
    if d < 1:
        raise ValueError("d >= 1")

    def psi1(lam):
        r0 = 1e-6
        y0 = [1 - lam * r0 ** 2 / (2 * d), -lam * r0 / d]
        sol = integrate.solve_ivp(lambda r, y: [y[1], -(d - 1) / r * y[1] - lam * y[0]],
                                  (r0, 1.0), y0, rtol=1e-12, atol=1e-14, method="DOP853")
        return sol.y[0, -1]

    lo, hi = 0.5, 0.5
    # the first root lies below (d/2 + 1)^2 pi^2 / 4 comfortably
    hi = (d / 2 + 2) ** 2 * math.pi ** 2 / 4
    return optimize.brentq(psi1, lo, hi, xtol=1e-14, rtol=1e-14)


def disk_eigenvalue_grid(h: float = 1 / 64) -> float:
    return eigen2d(gm.disk(1.0, h)).lambda1


# analytic bounds as numerical checks

@dataclass
class ProductCheck:
    lambda_strip: float
    lambda_interval: float
    gap: float
    half_length: float
    h: float


def product_lemma_check(q, width: float, half_length: float, h: float) -> ProductCheck:
    """Strip (0, width) x (-T, T) with q depending on the cross variable only.

    ``q`` is a callable of x.  The interval eigenvalue is computed on the same
    grid without extrapolation, so the gap isolates the truncation in y.
    """
    m = gm.strip(width, half_length, h)
    X, _ = m.coords()
    lam_s = eigen2d(m, np.where(m.inside, q(X), 0.0)).lambda1
    n = int(round(width / h))
    xs = np.linspace(0.0, width, n + 1)
    q1 = q(xs)
    w, _, _, _ = _tridiag_eigs(q1[1:-1], h, 1)
    lam_i = float(w[0])
    return ProductCheck(lam_s, lam_i, lam_s - lam_i, half_length, h)


@dataclass
class LiebResult:
    lhs: float
    rhs: float
    slack: float
    tol: float
    centers_evaluated: int
    seed: int
    argmin: tuple

    @property
    def holds(self) -> bool:
        return self.slack >= -self.tol

    def to_json(self) -> str:
        return json.dumps({"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                           "centers_evaluated": self.centers_evaluated, "seed": self.seed},
                          sort_keys=True)


def lieb_check(mask: gm.Mask, q=None, R: float = 0.5, n_centers: int = 32, seed: int = 0,
               n_top: int = 8) -> LiebResult:
    """min over sampled centres x of lambda(-Lap - q, mask n B_R(x)) against
    lambda(-Lap - q, mask) + lambda(-Lap, B_1) / R^2.

    Centres are grid nodes within distance R of the mask, drawn with ``seed``,
    plus the ``n_top`` nodes where the principal eigenfunction is largest.
    The discretization allowance is 10 h^2 (1 + |lambda| + max|q|).
    """
    if mask.ndim != 2:
        raise EigenError("lieb_check works on 2-D masks")
    if R < 4 * mask.h:
        raise EigenError("R must be at least 4h")
    qf = np.zeros(mask.shape) if q is None else np.broadcast_to(np.asarray(q, float), mask.shape)
    e = eigen2d(mask, qf)
    lam = e.lambda1
    X, Y = mask.coords()
    from scipy import ndimage

    near = ndimage.distance_transform_edt(~mask.inside) * mask.h < R - 0.5 * mask.h
    cand = np.argwhere(near)
    rng = np.random.default_rng(seed)
    if len(cand) > n_centers:
        cand = cand[rng.choice(len(cand), n_centers, replace=False)]
    # the inequality only needs one good centre; the peaks of psi_1 are the natural ones
    psi = np.abs(e.vectors[0])
    top = np.argsort(psi, axis=None)[::-1][:n_top]
    cand = np.unique(np.vstack([cand, np.column_stack(np.unravel_index(top, psi.shape))]), axis=0)
    best, arg = math.inf, None
    for i, j in cand:
        ball = np.hypot(X - X[i, j], Y - Y[i, j]) < R - 0.5 * mask.h
        sub = mask.inside & ball
        if not sub.any():
            continue
        v = eigen2d(gm.Mask(sub, mask.h, mask.origin), qf).lambda1
        if v < best:
            best, arg = v, (float(X[i, j]), float(Y[i, j]))
    rhs = lam + ball_eigenvalue(2) / R ** 2
    tol = 10 * mask.h ** 2 * (1 + abs(lam) + float(np.max(np.abs(qf[mask.inside]))))
    return LiebResult(best, rhs, rhs - best, tol, len(cand), seed, arg)


def radius_of_positivity(r: Reaction, s: float, d: int) -> float:
    """R with sqrt(rho) R = sqrt(lambda(B_1)) and rho = inf over (0, s] of f(t)/t."""
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    g = r.coef[1:]
    P = np.polynomial.polynomial
    cand = [1e-300, s]
    for z in P.polyroots(P.polyder(g)) if len(g) > 1 else []:
        if abs(z.imag) < 1e-12 and 0 < z.real < s:
            cand.append(z.real)
    rho = float(np.min(P.polyval(np.array(cand), g)))
    if rho <= 0:
        raise ValueError("f(t)/t must stay positive on (0, s]")
    return math.sqrt(ball_eigenvalue(d) / rho)
