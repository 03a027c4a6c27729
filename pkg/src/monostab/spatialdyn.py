"""Periodic-in-tau steady states on the strip R x (0, L).

Around an unstable interval solution phi (lambda_1 < 0 < lambda_2) the
equation -u_tt - u_yy = f(u) has a family of small solutions periodic in
the unbounded variable.  They are computed here as a boundary value problem
on a torus in tau with unknown period T: Fourier collocation in tau,
second-order differences in y, Newton's method on the whole grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .reaction import Reaction
from .shoot1d import alpha_grid, length_curve, profile_on_grid
from .spectra import eigen1d


class OrbitError(RuntimeError):
    pass


@dataclass
class CrossSection:
    reaction: Reaction
    alpha: float
    L: float
    n: int
    y: np.ndarray
    phi: np.ndarray  # interior nodes
    q: np.ndarray
    lambda1: float
    lambda2: float
    psi1: np.ndarray  # interior nodes, sup-normalised, positive

    @property
    def h(self) -> float:
        return self.L / self.n

    def operator(self) -> sparse.csr_matrix:
        """-D_yy - f'(phi) on the interior nodes."""
        n = self.n - 1
        h2 = self.h ** 2
        D = sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h2
        return (D - sparse.diags(self.q)).tocsr()


def _discrete_pair(q: np.ndarray, h: float):
    """Lowest two eigenpairs of the tridiagonal -D2 - q on the same grid as the orbit."""
    from scipy.linalg import eigh_tridiagonal

    n = q.size
    w, v = eigh_tridiagonal(2 / h ** 2 - q, -np.ones(n - 1) / h ** 2, select="i", select_range=(0, 1))
    return w, v


def cross_section(r: Reaction, n: int = 128, alpha: float | None = None) -> CrossSection:
    """Interval solution phi_alpha with one negative and otherwise positive eigenvalues.

    Without an explicit alpha, the scan looks for the window (0, a1) on which
    L_alpha decreases and takes alpha = a1 / 2.
    """
    if alpha is None:
        if not r.fsecond0 > 0:
            raise OrbitError("cross_section needs f''(0) > 0")
        curve = length_curve(r, alpha_grid(r, 30, 120))
        neg = curve.dlength < 0
        if not neg.any():
            raise OrbitError("no alpha with dL/dalpha < 0 in the scanned window")
        first = np.nonzero(neg)[0][0]
        end = first + np.argmax(~neg[first:]) if (~neg[first:]).any() else len(neg)
        a1 = curve.alpha[end - 1] if end < len(neg) else curve.alpha[-1]
        if first == 0:
            alpha = 0.5 * a1
        else:
            alpha = 0.5 * (curve.alpha[first] + a1)
    x, phi = profile_on_grid(r, alpha, n)
    L = float(x[-1])
    h = L / n
    q = r.df(phi[1:-1])
    w, v = _discrete_pair(q, h)
    # certificate also on the extrapolated spectrum
    xs, ph2 = profile_on_grid(r, alpha, 2048, L)
    ex = eigen1d(r.df(ph2), L, 2)
    if not (ex.values[0] < 0 < ex.values[1] and w[0] < 0 < w[1]):
        raise OrbitError(f"spectral structure fails at alpha={alpha:.6g}: {ex.values}")
    psi = v[:, 0] / np.max(np.abs(v[:, 0]))
    if psi.sum() < 0:
        psi = -psi
    return CrossSection(r, float(alpha), L, n, x, phi[1:-1], q, float(w[0]), float(w[1]), psi)


def fourier_diff(N: int):
    """First and second spectral differentiation matrices on [0, 1) with N (even) nodes."""
    if N % 2:
        raise ValueError("N must be even")
    k = np.fft.fftfreq(N, d=1.0 / N) * 2 * np.pi
    k1 = k.copy()
    k1[N // 2] = 0.0
    I = np.eye(N)
    D1 = np.real(np.fft.ifft(1j * k1[:, None] * np.fft.fft(I, axis=0), axis=0))
    D2 = np.real(np.fft.ifft(-(k ** 2)[:, None] * np.fft.fft(I, axis=0), axis=0))
    return D1, D2


@dataclass
class PeriodicOrbit:
    period: float
    field: np.ndarray  # (N_tau, n_y) interior values
    amplitude: float
    residual: float
    epsilon: float
    lambda1: float
    iterations: int
    unfolding: float
    cs: CrossSection = field(repr=False)

    @property
    def tau(self) -> np.ndarray:
        return self.period * np.arange(self.field.shape[0]) / self.field.shape[0]

    def to_csv(self) -> str:
        rows = ["tau,y,u"]
        y = self.cs.y[1:-1]
        for t, row in zip(self.tau, self.field):
            for yy, u in zip(y, row):
                rows.append(f"{t:.17g},{yy:.17g},{u:.17g}")
        return "\n".join(rows) + "\n"

    def header(self) -> str:
        return json.dumps({"T": self.period, "epsilon": self.epsilon, "lambda1": self.lambda1,
                           "residual": self.residual}, sort_keys=True)


def orbit_residual(U: np.ndarray, T: float, cs: CrossSection) -> np.ndarray:
    N = U.shape[0]
    _, D2 = fourier_diff(N)
    Uy = cs.operator() @ U.T  # -D_yy U - q U
    qU = cs.q[:, None] * U.T
    return -(D2 @ U) / T ** 2 + (Uy + qU).T - cs.reaction.f(U)


def orbit_search(cs: CrossSection, epsilon: float, n_tau: int = 32, max_iter: int = 30,
                 tol: float = 1e-8) -> PeriodicOrbit:
    """Newton's method for (u, T) with amplitude and phase pinned at tau = 0."""
    if not 1e-3 <= epsilon <= 5e-2:
        raise OrbitError("epsilon must lie in [1e-3, 5e-2]")
    r = cs.reaction
    n = cs.n - 1
    N = n_tau
    h = cs.h
    D1, D2 = fourier_diff(N)
    Ay = cs.operator() + sparse.diags(cs.q)  # -D_yy alone
    psi, phi = cs.psi1, cs.phi
    pp = h * float(psi @ psi)
    T = 2 * math.pi / math.sqrt(-cs.lambda1)
    sig = np.arange(N) / N
    U = phi[None, :] + epsilon * np.cos(2 * np.pi * sig)[:, None] * psi[None, :]
    gamma = 0.0
    In = sparse.identity(n, format="csr")
    IN = sparse.identity(N, format="csr")
    K2 = sparse.kron(sparse.csr_matrix(D2), In, format="csr")
    K1 = sparse.kron(sparse.csr_matrix(D1), In, format="csr")
    Ky = sparse.kron(IN, Ay, format="csr")
    amp_row = np.zeros(N * n)
    amp_row[:n] = h * psi
    ph_row = np.kron(D1[0], h * psi)

    def F(U, T, gamma):
        u = U.ravel()
        R = -(K2 @ u) / T ** 2 + Ky @ u - r.f(u) + gamma * (K1 @ u)
        a = amp_row @ (u - np.tile(phi, N)) - epsilon * pp
        p = ph_row @ u
        return np.concatenate([R, [a, p]])

    it = 0
    for it in range(1, max_iter + 1):
        Fv = F(U, T, gamma)
        if np.max(np.abs(Fv)) < 1e-12:
            break
        u = U.ravel()
        J = -K2 / T ** 2 + Ky - sparse.diags(r.df(u)) + gamma * K1
        colT = 2.0 * (K2 @ u) / T ** 3
        colg = K1 @ u
        top = sparse.hstack([J, sparse.csr_matrix(colT[:, None]), sparse.csr_matrix(colg[:, None])])
        bot = sparse.csr_matrix(np.vstack([np.concatenate([amp_row, [0.0, 0.0]]),
                                           np.concatenate([ph_row, [0.0, 0.0]])]))
        Jf = sparse.vstack([top, bot]).tocsc()
        try:
            d = spla.spsolve(Jf, -Fv)
        except RuntimeError as exc:
            raise OrbitError(f"singular Newton system: {exc}") from exc
        if not np.all(np.isfinite(d)):
            raise OrbitError(f"newton-divergence (residual {np.max(np.abs(Fv)):.3g})")
        U = U + d[: N * n].reshape(N, n)
        T = T + d[N * n]
        gamma = gamma + d[N * n + 1]
        if T <= 0:
            raise OrbitError("newton-divergence: period became nonpositive")
    else:
        raise OrbitError(f"newton-divergence (residual {np.max(np.abs(F(U, T, gamma))):.3g})")
    res = float(np.max(np.abs(orbit_residual(U, T, cs))))
    amp = float(np.max(np.abs(U - phi[None, :])))
    if amp < 1e-4:
        raise OrbitError("amplitude-collapse")
    if res > tol:
        raise OrbitError(f"orbit residual {res:.3g} above {tol:g}")
    return PeriodicOrbit(float(T), U, amp, res, float(epsilon), cs.lambda1, it, float(gamma), cs)


def spatial_energy(U: np.ndarray, T: float, r: Reaction, h: float) -> np.ndarray:
    """H(tau) = sum_y [u_t^2/2 - u_y^2/2 + F(u)] h on the torus grid.

    u_t is spectral in tau; u_y uses one-sided differences on the edges,
    including the two Dirichlet ends.
    """
    N = U.shape[0]
    D1, _ = fourier_diff(N)
    Ut = (D1 @ U) / T
    Z = np.pad(U, ((0, 0), (1, 1)))
    Uy = np.diff(Z, axis=1) / h
    return h * (0.5 * (Ut ** 2).sum(axis=1) - 0.5 * (Uy ** 2).sum(axis=1) + r.F(U).sum(axis=1))


def floquet_exponents(cs: CrossSection, k: int = 4) -> np.ndarray:
    """Smallest-magnitude eigenvalues mu of B = [[0, I], [M, 0]], M = -D_yy - f'(phi)."""
    M = cs.operator().toarray()
    n = M.shape[0]
    B = np.block([[np.zeros((n, n)), np.eye(n)], [M, np.zeros((n, n))]])
    mu = np.linalg.eigvals(B)
    return mu[np.argsort(np.abs(mu))][:k]
