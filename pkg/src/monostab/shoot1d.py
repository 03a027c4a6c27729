"""One-dimensional shooting for -phi'' = f(phi), phi(0) = 0, phi'(0) = alpha.

For 0 < alpha < alpha* = sqrt(2 F(1)) the trajectory rises to
s_alpha (2 F(s_alpha) = alpha^2) and returns to zero at x = L_alpha, which
gives the positive solution on the interval (0, L_alpha).  L_alpha is
computed two ways: by RK4 shooting and by quadrature of the first integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .reaction import Reaction

STEP_FACTOR = 1e-3
CAP_FACTOR = 200.0
ROOT_TOL = 1e-12


class ShootError(RuntimeError):
    pass


def alpha_star(r: Reaction) -> float:
    return math.sqrt(2.0 * r.F1)


def length_scale(r: Reaction) -> float:
    """m^(-1/2) with m = f'(0)."""
    return 1.0 / math.sqrt(r.fprime0)


def _horner(coef):
    c = [float(x) for x in coef[::-1]]

    def ev(s):
        acc = 0.0
        for a in c:
            acc = acc * s + a
        return acc

    return ev


def s_max(r: Reaction, alpha: float) -> float:
    """Turning point: the root of 2 F(s) = alpha^2 in (0, 1)."""
    a_s = alpha_star(r)
    if not 0.0 < alpha < a_s:
        raise ShootError(f"alpha={alpha!r} outside (0, alpha*={a_s:.12g})")
    Fc = r.F_coef
    g = lambda s: 2.0 * np.polynomial.polynomial.polyval(s, Fc) - alpha * alpha
    return optimize.brentq(g, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass
class ShootRecord:
    alpha: float
    length: float
    s_max: float
    energy_residual: float
    n_steps: int
    step: float
    x: np.ndarray = field(default=None, repr=False)
    phi: np.ndarray = field(default=None, repr=False)
    dphi: np.ndarray = field(default=None, repr=False)


def shoot(r: Reaction, alpha: float, step: float | None = None, keep_profile: bool = False) -> ShootRecord:
    """Integrate -phi'' = f(phi) by classical RK4 up to the first return to zero.

    The crossing inside the last step is located by bisection on a partial
    RK4 step, to ROOT_TOL in x.  Raises ShootError when alpha >= alpha* or when
    no return happens before x = 200 m^(-1/2).
    """
    a_s = alpha_star(r)
    if not 0.0 < alpha < a_s:
        raise ShootError(f"alpha={alpha!r} outside (0, alpha*={a_s:.12g})")
    ell = length_scale(r)
    h = STEP_FACTOR * ell if step is None else float(step)
    x_cap = CAP_FACTOR * ell
    f = _horner(r.coef)
    F = _horner(r.F_coef)
    a2 = alpha * alpha

    def rk4(p, q, dt):
        k1p, k1q = q, -f(p)
        k2p, k2q = q + 0.5 * dt * k1q, -f(p + 0.5 * dt * k1p)
        k3p, k3q = q + 0.5 * dt * k2q, -f(p + 0.5 * dt * k2p)
        k4p, k4q = q + dt * k3q, -f(p + dt * k3p)
        return (p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p),
                q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q))

    p, q, x = 0.0, alpha, 0.0
    xs, ps, qs = ([0.0], [0.0], [alpha]) if keep_profile else (None, None, None)
    eres = 0.0
    pmax = 0.0
    n = 0
    while True:
        pn, qn = rk4(p, q, h)
        n += 1
        if pn <= 0.0 and n > 1:
            break
        p, q, x = pn, qn, x + h
        pmax = max(pmax, p)
        e = abs(q * q + 2.0 * F(p) - a2)
        if e > eres:
            eres = e
        if keep_profile:
            xs.append(x)
            ps.append(p)
            qs.append(q)
        if x > x_cap:
            raise ShootError(f"no return to zero before x={x_cap:.6g}")

    lo, hi = 0.0, h
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if rk4(p, q, mid)[0] > 0.0:
            lo = mid
        else:
            hi = mid
    dt = 0.5 * (lo + hi)
    pe, qe = rk4(p, q, dt)
    L = x + dt
    eres = max(eres, abs(qe * qe + 2.0 * F(max(pe, 0.0)) - a2))
    rec = ShootRecord(alpha, L, s_max(r, alpha), eres, n, h)
    if keep_profile:
        xs.append(L)
        ps.append(0.0)
        qs.append(qe)
        rec.x, rec.phi, rec.dphi = np.array(xs), np.array(ps), np.array(qs)
    return rec


def profile_on_grid(r: Reaction, alpha: float, n: int, length: float | None = None):
    """phi_alpha on n + 1 equispaced nodes of [0, L_alpha] (RK4 with step L/n)."""
    L = length_by_quadrature(r, alpha) if length is None else length
    h = L / n
    f = r.f
    y = np.empty(n + 1)
    p, q = 0.0, alpha
    y[0] = 0.0
    for i in range(1, n + 1):
        k1p, k1q = q, -f(p)
        k2p, k2q = q + 0.5 * h * k1q, -f(p + 0.5 * h * k1p)
        k3p, k3q = q + 0.5 * h * k2q, -f(p + 0.5 * h * k2p)
        k4p, k4q = q + h * k3q, -f(p + h * k3p)
        p, q = (p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p),
                q + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q))
        y[i] = p
    y[-1] = 0.0
    x = np.linspace(0.0, L, n + 1)
    return x, y


def length_by_quadrature(r: Reaction, alpha: float) -> float:
    """L_alpha = 2 int_0^s dz / sqrt(alpha^2 - 2F(s - z)) with z = t^2.

    With Q(s, z) = (F(s) - F(s - z)) / z the integrand becomes
    2 / sqrt(2 Q(s, t^2)), which is smooth because Q(s, 0) = f(s) > 0.
    """
    s = s_max(r, alpha)
    Fc = r.F_coef
    # Q(s, z) as a polynomial in z
    qc = []
    fact = 1.0
    for k in range(1, len(Fc)):
        fact *= k
        dk = np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(Fc, k))
        qc.append((-1) ** (k + 1) * dk / fact)
    Q = _horner(np.array(qc))

    def integrand(t):
        return 2.0 / math.sqrt(2.0 * Q(t * t))

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(s), epsabs=1e-14, epsrel=1e-13, limit=500)
    return 2.0 * val


def dlength(r: Reaction, alpha: float, h: float | None = None) -> float:
    """d L_alpha / d alpha by centred differences with h = 1e-4 alpha*."""
    a_s = alpha_star(r)
    h = 1e-4 * a_s if h is None else h
    lo, hi = alpha - h, alpha + h
    if lo <= 0.0:
        lo = alpha
    if hi >= a_s:
        hi = alpha
    if hi == lo:
        raise ShootError("alpha too close to the ends of (0, alpha*) for a difference quotient")
    return (length_by_quadrature(r, hi) - length_by_quadrature(r, lo)) / (hi - lo)


@dataclass
class LengthCurve:
    alpha: np.ndarray
    length: np.ndarray
    dlength: np.ndarray
    s_max: np.ndarray
    nonmonotone: bool
    sign_changes: list

    def to_csv(self) -> str:
        rows = ["alpha,L,dL,s_max"]
        for a, L, dL, s in zip(self.alpha, self.length, self.dlength, self.s_max):
            rows.append(f"{a:.17g},{L:.17g},{dL:.17g},{s:.17g}")
        return "\n".join(rows) + "\n"


def alpha_grid(r: Reaction, n_geo: int = 40, n_uni: int = 160, lo: float = 1e-3, hi: float = 0.999) -> np.ndarray:
    """Geometric spacing near 0, then uniform spacing up to hi * alpha*."""
    a_s = alpha_star(r)
    split = 0.05
    geo = np.geomspace(lo, split, n_geo, endpoint=False)
    uni = np.linspace(split, hi, n_uni)
    return a_s * np.concatenate([geo, uni])


def length_curve(r: Reaction, alphas) -> LengthCurve:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size < 2 or np.any(np.diff(alphas) <= 0):
        raise ValueError("alphas must be strictly increasing")
    L = np.array([length_by_quadrature(r, a) for a in alphas])
    dL = np.array([dlength(r, a) for a in alphas])
    s = np.array([s_max(r, a) for a in alphas])
    sgn = np.sign(dL)
    changes = [(float(alphas[i]), float(alphas[i + 1])) for i in range(len(sgn) - 1) if sgn[i] != sgn[i + 1]]
    return LengthCurve(alphas, L, dL, s, bool(np.any(dL < 0)), changes)


@dataclass
class HalfLineProfile:
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    w: np.ndarray

    def __call__(self, d):
        """phi at distances d >= 0; beyond the sampled range the exponential tail is used."""
        d = np.asarray(d, dtype=float)
        out = np.interp(d, self.x, self.phi)
        far = d > self.x[-1]
        if np.any(far):
            k = self._rate
            out = np.where(far, 1.0 - self.w[-1] * np.exp(-k * (d - self.x[-1])), out)
        return out

    _rate: float = 1.0


def halfline_profile(r: Reaction, x_max: float | None = None, dx: float | None = None) -> HalfLineProfile:
    """The increasing solution on (0, inf) with phi(0) = 0 and phi -> 1.

    Integrates w = 1 - phi from w' = -w sqrt(2 R(w)), where
    R(w) = (F(1) - F(1 - w)) / w^2 is a polynomial (f(1) = 0), so the
    exponential approach to 1 is resolved to full relative precision.
    """
    ell = length_scale(r)
    x_max = 40.0 * ell if x_max is None else x_max
    dx = 1e-3 * ell if dx is None else dx
    n = int(math.ceil(x_max / dx))
    dx = x_max / n
    Fc = r.F_coef
    P = np.polynomial.polynomial
    rc = []
    fact = 1.0
    for k in range(1, len(Fc)):
        fact *= k
        dk = P.polyval(1.0, P.polyder(Fc, k))
        rc.append((-1) ** (k + 1) * dk / fact)
    # rc[0] = f(1) = 0 exactly; divide by w once more
    R = _horner(np.array(rc[1:]))

    def rhs(w):
        return -w * math.sqrt(max(2.0 * R(w), 0.0))

    w = np.empty(n + 1)
    w[0] = 1.0
    cur = 1.0
    for i in range(1, n + 1):
        k1 = rhs(cur)
        k2 = rhs(cur + 0.5 * dx * k1)
        k3 = rhs(cur + 0.5 * dx * k2)
        k4 = rhs(cur + dx * k3)
        cur = cur + dx / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        w[i] = cur
    x = np.linspace(0.0, x_max, n + 1)
    dphi = np.array([-rhs(v) for v in w])
    prof = HalfLineProfile(x, 1.0 - w, dphi, w)
    prof._rate = math.sqrt(-r.fprime1)
    return prof


@dataclass
class RadialProfile:
    rho: np.ndarray
    u: np.ndarray
    w: np.ndarray
    slope: float
    d: int
    R0: float
    splice_rho: float
    splice_mismatch: float

    def __call__(self, rho):
        return np.interp(rho, self.rho, self.u)


def radial_exterior(r: Reaction, d: int, R0: float, r_max: float, drho: float | None = None,
                    n_try: int = 33, max_rounds: int = 40) -> RadialProfile:
    """Positive radial solution of u'' + (d-1)/rho u' + f(u) = 0 on (R0, r_max).

    u(R0) = 0 and u -> 1.  The slope u'(R0) is bracketed between trajectories
    that overshoot 1 and ones that turn back, starting from [1e-6, 2 alpha*],
    and the bracket is shrunk to rounding level.  Past the point where the two
    bracketing trajectories separate, the profile is continued by the decaying
    solution of the linearization at u = 1, rho^-nu K_nu(k rho) with
    nu = (d - 2)/2 and k = sqrt(-f'(1)).  The unknown is w = 1 - u.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    ell = length_scale(r)
    if not r_max > R0:
        raise ValueError("need r_max > R0")
    drho = 5e-3 * ell if drho is None else drho
    k = math.sqrt(-r.fprime1)
    span = min(r_max - R0, 60.0 / k)
    n = int(math.ceil(span / drho))
    drho = span / n
    coef = r.coef
    P = np.polynomial.polynomial

    def f(u):
        return P.polyval(u, coef)

    def run(slopes, record=False):
        """Integrate all slopes; returns classification (+1 overshoot, -1 turn back, 0 none)."""
        w = np.ones_like(slopes)
        v = -slopes.copy()
        cls = np.zeros(slopes.shape, dtype=int)
        rho = R0
        hist = [w.copy()] if record else None

        def acc(rr, ww, vv):
            return -(d - 1) / rr * vv + f(1.0 - ww)

        for _ in range(n):
            k1w, k1v = v, acc(rho, w, v)
            k2w, k2v = v + 0.5 * drho * k1v, acc(rho + 0.5 * drho, w + 0.5 * drho * k1w, v + 0.5 * drho * k1v)
            k3w, k3v = v + 0.5 * drho * k2v, acc(rho + 0.5 * drho, w + 0.5 * drho * k2w, v + 0.5 * drho * k2v)
            k4w, k4v = v + drho * k3v, acc(rho + drho, w + drho * k3w, v + drho * k3v)
            w = w + drho / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
            v = v + drho / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            rho += drho
            live = cls == 0
            cls[live & (w < 0.0)] = 1
            cls[live & (w >= 0.0) & (v > 0.0)] = -1
            # keep finished trajectories bounded
            w = np.clip(w, -1.0, 2.0)
            v = np.clip(v, -1e3, 1e3)
            if record:
                hist.append(w.copy())
            elif np.all(cls != 0):
                break
        return cls, (np.array(hist) if record else None)

    lo, hi = 1e-6, 2.0 * alpha_star(r)
    c_ends, _ = run(np.array([lo, hi]))
    # friction (d-1)/rho can hold back steep starts; widen until one overshoots
    for _ in range(30):
        if c_ends[1] == 1:
            break
        hi *= 2.0
        c_ends, _ = run(np.array([lo, hi]))
    if not (c_ends[0] == -1 and c_ends[1] == 1):
        raise ShootError(f"no bracket for the exterior slope (classes {c_ends.tolist()})")
    for _ in range(max_rounds):
        trial = np.linspace(lo, hi, n_try)
        cls, _ = run(trial)
        under = np.nonzero(cls == -1)[0]
        over = np.nonzero(cls == 1)[0]
        new_lo = trial[under[-1]] if under.size else lo
        new_hi = trial[over[0]] if over.size else hi
        if new_hi <= new_lo:
            raise ShootError("inconsistent bracket classification")
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
        if hi - lo <= 8 * np.spacing(hi):
            break

    _, hist = run(np.array([lo, hi]), record=True)
    w_lo, w_hi = hist[:, 0], hist[:, 1]
    rho = R0 + drho * np.arange(n + 1)
    sep = np.abs(w_hi - w_lo) > 1e-4 * np.abs(w_lo) + 1e-300
    bad = np.nonzero(sep)[0]
    j_sep = bad[0] if bad.size else n
    # splice where w is small but the trajectories still agree
    small = np.nonzero(w_lo[:j_sep] < 1e-6)[0]
    j = small[0] if small.size else j_sep - 1
    if w_lo[j] > 1e-3:
        raise ShootError(f"bracketing trajectories separate too early (w={w_lo[j]:.3g})")

    nu = (d - 2) / 2.0

    def tail(rr):
        rr = np.asarray(rr, dtype=float)
        rj = rho[j]
        ratio = (rj / rr) ** nu * special.kve(nu, k * rr) / special.kve(nu, k * rj)
        return w_lo[j] * ratio * np.exp(-k * (rr - rj))

    n_out = int(math.ceil((r_max - R0) / drho))
    rho_out = np.linspace(R0, r_max, n_out + 1)
    w_out = np.where(rho_out <= rho[j], np.interp(rho_out, rho[: j + 1], w_lo[: j + 1]), tail(rho_out))
    # slope mismatch across the splice, relative
    dw_num = (w_lo[j] - w_lo[j - 1]) / drho
    dw_tail = (tail(rho[j] + 1e-6 * ell) - w_lo[j]) / (1e-6 * ell)
    mism = abs(dw_num - dw_tail) / abs(dw_tail)
    return RadialProfile(rho_out, 1.0 - w_out, w_out, 0.5 * (lo + hi), d, R0, float(rho[j]), float(mism))
