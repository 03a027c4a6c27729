"""Positive reaction terms f on [0, 1].

Every family in the catalog is a polynomial in s, so values, derivatives and
the antiderivative F(s) = int_0^s f are evaluated exactly from coefficient
arrays.  The classifier decides the KPP-type predicates on a uniform grid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P

DOMAIN = (0.0, 1.5)
CLASSIFY_TOL = 1e-12
CLASSIFY_POINTS = 10_000

FAMILIES = ("Logistic", "Cubic", "DoubleHump", "Interpolated")


class ReactionDomainError(ValueError):
    pass


@dataclass(frozen=True)
class KppClass:
    """Outcome of :meth:`Reaction.classify`.

    ``None`` means the grid test came within tolerance of the boundary and the
    predicate is reported as indeterminate.
    """

    is_positive: Optional[bool]
    is_weak_kpp: Optional[bool]
    is_strong_kpp: Optional[bool]
    lipschitz: float
    fprime0: float
    fprime1: float
    fsecond0: float

    @property
    def indeterminate(self) -> tuple:
        names = ("is_positive", "is_weak_kpp", "is_strong_kpp")
        return tuple(n for n in names if getattr(self, n) is None)


@dataclass(frozen=True)
class Reaction:
    family: str
    params: dict = field(hash=False)
    coef: np.ndarray = field(repr=False, compare=False, hash=False)

    # construction

    @staticmethod
    def logistic(m: float = 1.0) -> "Reaction":
        _check_positive("m", m)
        # m s (1 - s)
        coef = np.array([0.0, m, -m])
        return Reaction("Logistic", {"m": float(m)}, coef)

    @staticmethod
    def cubic(m: float = 1.0, c: float = 0.0) -> "Reaction":
        _check_positive("m", m)
        if not c > -1.0:
            raise ValueError("Cubic needs c > -1 so that f > 0 on (0, 1)")
        # m s (1 - s)(1 + c s)
        coef = m * np.array([0.0, 1.0, c - 1.0, -c])
        return Reaction("Cubic", {"m": float(m), "c": float(c)}, coef)

    @staticmethod
    def double_hump(m: float, theta: float, eps: float) -> "Reaction":
        """A s (1 - s) ((s - theta)^2 + eps), scaled so that f'(0) = m."""
        _check_positive("m", m)
        _check_positive("eps", eps)
        if not 0.0 < theta < 1.0:
            raise ValueError("DoubleHump needs 0 < theta < 1")
        c0 = theta * theta + eps
        a = m / c0
        coef = a * np.array([0.0, c0, -(2 * theta + c0), 1 + 2 * theta, -1.0])
        return Reaction("DoubleHump", {"m": float(m), "theta": float(theta), "eps": float(eps)}, coef)

    @staticmethod
    def interpolated(tau: float, base0: "Reaction", base1: "Reaction") -> "Reaction":
        """(1 - tau) f0 + tau f1."""
        if not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        n = max(len(base0.coef), len(base1.coef))
        c = (1 - tau) * _pad(base0.coef, n) + tau * _pad(base1.coef, n)
        return Reaction("Interpolated", {"tau": float(tau), "base0": base0, "base1": base1}, c)

    # evaluation

    def eval(self, s, order: int = 0):
        """f, f' or f'' at s in [0, 1.5]."""
        arr = np.asarray(s, dtype=float)
        if np.any(~(arr >= DOMAIN[0])) or np.any(~(arr <= DOMAIN[1])):
            raise ReactionDomainError(f"s outside {DOMAIN}")
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        c = self.coef if order == 0 else P.polyder(self.coef, order)
        out = P.polyval(arr, c)
        return float(out) if np.ndim(out) == 0 else out

    def antiderivative(self, s):
        """F(s) = int_0^s f."""
        arr = np.asarray(s, dtype=float)
        if np.any(~(arr >= DOMAIN[0])) or np.any(~(arr <= DOMAIN[1])):
            raise ReactionDomainError(f"s outside {DOMAIN}")
        out = P.polyval(arr, self.F_coef)
        return float(out) if np.ndim(out) == 0 else out

    # unchecked fast paths used by the solvers
    @property
    def F_coef(self) -> np.ndarray:
        return P.polyint(self.coef)

    def f(self, s):
        return P.polyval(s, self.coef)

    def df(self, s):
        return P.polyval(s, P.polyder(self.coef))

    def d2f(self, s):
        return P.polyval(s, P.polyder(self.coef, 2))

    def F(self, s):
        return P.polyval(s, self.F_coef)

    def F_drop(self, s, z):
        """(F(s) - F(s - z)) / z without cancellation.

        Expands F around s: the quotient equals sum_k (-1)^(k+1) F^(k)(s) z^(k-1) / k!.
        """
        s = np.asarray(s, dtype=float)
        z = np.asarray(z, dtype=float)
        Fc = self.F_coef
        out = np.zeros(np.broadcast(s, z).shape)
        fact = 1.0
        zk = np.ones_like(out)
        for k in range(1, len(Fc)):
            fact *= k
            dk = P.polyval(s, P.polyder(Fc, k))
            out = out + ((-1) ** (k + 1)) * dk * zk / fact
            zk = zk * z
        return out

    @property
    def fprime0(self) -> float:
        return float(self.coef[1])

    @property
    def fprime1(self) -> float:
        return float(P.polyval(1.0, P.polyder(self.coef)))

    @property
    def fsecond0(self) -> float:
        return float(2.0 * self.coef[2]) if len(self.coef) > 2 else 0.0

    @property
    def F1(self) -> float:
        return float(P.polyval(1.0, self.F_coef))

    def lipschitz(self) -> float:
        """sup |f'| over [0, 1]."""
        d1 = P.polyder(self.coef)
        cand = [0.0, 1.0]
        if len(d1) > 1:
            for r in P.polyroots(P.polyder(d1)):
                if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0:
                    cand.append(r.real)
        return float(np.max(np.abs(P.polyval(np.array(cand), d1))))

    # classification

    def classify(self, n: int = CLASSIFY_POINTS, tol: float = CLASSIFY_TOL) -> KppClass:
        s = np.arange(1, n + 1) / n
        fs = P.polyval(s, self.coef)
        # f(s)/s as a polynomial, exact since f(0) = 0
        g = P.polyval(s, self.coef[1:])
        fp0, fp1 = self.fprime0, self.fprime1

        inner = fs[:-1]
        if fp0 <= 0 or fp1 >= 0 or np.any(inner < -tol):
            positive = False
        elif np.any(inner <= tol):
            positive = None
        else:
            positive = True

        # weak: f(s) <= f'(0) s, i.e. g <= f'(0)
        excess = g - fp0
        if np.any(excess > tol):
            weak = False
        else:
            weak = True

        dg = np.diff(np.concatenate(([fp0], g)))
        if np.any(dg > tol):
            strong = False
        elif np.any(dg >= -tol):
            strong = None
        else:
            strong = True

        # the predicates are nested: strong => weak => positive
        weak = _and(positive, weak)
        strong = _and(weak, strong)
        return KppClass(positive, weak, strong, self.lipschitz(), fp0, fp1, self.fsecond0)

    # serialization

    def to_dict(self) -> dict:
        if self.family == "Interpolated":
            p = self.params
            params = {"tau": p["tau"], "base0": p["base0"].to_dict(), "base1": p["base1"].to_dict()}
        else:
            params = dict(self.params)
        return {"family": self.family, "params": params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> "Reaction":
        fam = d.get("family")
        p = d.get("params", {})
        if fam == "Logistic":
            return Reaction.logistic(**p)
        if fam == "Cubic":
            return Reaction.cubic(**p)
        if fam == "DoubleHump":
            return Reaction.double_hump(**p)
        if fam == "Interpolated":
            return Reaction.interpolated(
                p["tau"], Reaction.from_dict(p["base0"]), Reaction.from_dict(p["base1"])
            )
        raise ValueError(f"unknown reaction family {fam!r}")

    @staticmethod
    def from_json(text: str) -> "Reaction":
        return Reaction.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        return isinstance(other, Reaction) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(self.to_json())

    def describe(self) -> str:
        if self.family == "Interpolated":
            p = self.params
            return f"Interpolated(tau={p['tau']:g}, {p['base0'].describe()}, {p['base1'].describe()})"
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({args})"


def _and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[: len(c)] = c
    return out


def _check_positive(name: str, v: float) -> None:
    if not (np.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be positive, got {v!r}")


Logistic = Reaction.logistic
Cubic = Reaction.cubic
DoubleHump = Reaction.double_hump
Interpolated = Reaction.interpolated
