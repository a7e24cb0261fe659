"""
The fixed-size limiting matrices T_m' (m x m) and T_{m-1} ((m-1) x (m-1)),
their determinants, and the three routes that bound ||I - T_{m-1}|| below 1:

* ``crude``   : a single closed-form bound L(m) on |I~(q)|, valid for m = 2..51
* ``refined`` : entrywise min(L(m), 4 sqrt(m+1/2)/(q pi)), valid for m = 2..99
* ``large_m`` : the C_1(m)/C_2(m) estimates, valid for m >= 38

The bound routes use closed forms only, no quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np

from .asymptotics import IQTable, iq_table

__all__ = [
    "TMatrices",
    "BoundReport",
    "gamma_m",
    "central_term",
    "build_T",
    "det_report",
    "L_crude",
    "crude_bound",
    "refined_bound",
    "large_m_bound",
    "c2_summands",
    "ROUTES",
    "routes_for",
    "certify",
]


def gamma_m(m: int) -> Fraction:
    """2 (m!)^2 / (m (2m)!)."""
    return Fraction(2 * factorial(m) ** 2, m * factorial(2 * m))


def central_term(m: int) -> Fraction:
    """1/2 - (m!)^2 2^(2m-2) / (m (2m)!), the row-sum factor of gamma_m Y."""
    return Fraction(1, 2) - Fraction(factorial(m) ** 2 * 2 ** (2 * m - 2), m * factorial(2 * m))


@dataclass
class TMatrices:
    m: int
    Tm_prime: np.ndarray
    Tm_minus1: np.ndarray
    gamma: Fraction
    X: np.ndarray
    Y: np.ndarray
    Xp: np.ndarray = field(repr=False, default=None)
    Yp: np.ndarray = field(repr=False, default=None)


def _binom_upper(size: int, n: int) -> np.ndarray:
    Y = np.zeros((size, size), dtype=object)
    for j in range(size):
        for k in range(j, size):
            Y[j, k] = comb(n, k - j)
    return Y


def build_T(m: int, iq: IQTable | None = None) -> TMatrices:
    """Assemble T_m' = I - gamma_m X' Y' and T_{m-1} = I - gamma_m X Y.

    X(j,k) = 1 + I~(2(k-j) + n) and X'(j,k) = I~(2(k-j) + n), Y(j,k) = binom(n, k-j).
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    n = 2 * m - 1
    if iq is None:
        iq = iq_table(m)

    def it(q):
        try:
            return iq.Itilde(q)
        except KeyError:
            raise KeyError(f"I~({q}) missing from the table for m={m}") from None

    g = gamma_m(m)
    Xp = np.array([[it(n + 2 * (k - j)) for k in range(m)] for j in range(m)])
    X = np.array([[1 + it(n + 2 * (k - j)) for k in range(m - 1)] for j in range(m - 1)])
    Yp = _binom_upper(m, n).astype(float)
    Y = _binom_upper(m - 1, n).astype(float)
    gf = float(g)
    Tp = np.eye(m) - gf * Xp @ Yp
    T1 = np.eye(m - 1) - gf * X @ Y
    return TMatrices(m, Tp, T1, g, X, Y, Xp, Yp)


def _det_ext(a: np.ndarray, dps: int = 40):
    with mpmath.workdps(dps):
        return float(mpmath.det(mpmath.matrix(a.tolist())))


def det_report(m: int, t: TMatrices | None = None) -> dict:
    """Determinants of T_m' and T_{m-1} (LU in extended precision), their gap and conditioning."""
    if t is None:
        t = build_T(m)
    dp = _det_ext(t.Tm_prime)
    d1 = _det_ext(t.Tm_minus1)
    return {
        "m": m,
        "det_Tm_prime": dp,
        "det_Tm_minus1": d1,
        "det_numpy": float(np.linalg.det(t.Tm_minus1)),
        "relative_gap": abs(dp - d1) / abs(d1),
        "abs_det": abs(d1),
        "distance_to_inv_sqrt2": abs(abs(d1) - 1 / math.sqrt(2)),
        "cond_Tm_minus1": float(np.linalg.cond(t.Tm_minus1)),
        "cond_Tm_prime": float(np.linalg.cond(t.Tm_prime)),
    }


@dataclass
class BoundReport:
    m: int
    route: str
    bound_value: float
    passes: bool
    components: dict = field(default_factory=dict)
    criterion: str = "< 1"


def L_crude(m: int) -> float:
    """Closed-form bound L(m) on |I~(q)|, with t = sqrt((2m-1)/(2m-2))."""
    t = math.sqrt((2 * m - 1) / (2 * m - 2))
    val = (math.log(2 * m - 1) - 2 + (t + 1) * math.log1p(1 / t) - (t - 1) * math.log1p(-1 / t))
    return val / math.pi


def crude_bound(m: int) -> BoundReport:
    """(1 + L(m)) (1/2 - (m!)^2 2^(2m-2)/(m(2m)!)) < 1."""
    if m < 2:
        raise ValueError("m >= 2 required")
    L = L_crude(m)
    ct = float(central_term(m))
    val = (1 + L) * ct
    return BoundReport(m, "crude", val, val < 1, {"L": L, "central_term": ct})


def refined_bound(m: int, iq=None) -> BoundReport:
    """gamma_m * max row sum of X~ Y with X~(j,k) = 1 + min(L(m), 4 sqrt(m+1/2)/(q pi)).

    ``iq`` is accepted for interface symmetry; the bound itself uses closed forms.
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    n = 2 * m - 1
    L = L_crude(m)
    qcap = 4 * math.sqrt(m + 0.5) / math.pi
    Xt = np.array([[1 + min(L, qcap / abs(n + 2 * (k - j))) for k in range(m - 1)] for j in range(m - 1)])
    Y = _binom_upper(m - 1, n).astype(float)
    g = float(gamma_m(m))
    rows = g * (Xt @ Y).sum(axis=1)
    crude_rows = g * ((1 + L) * np.ones_like(Xt) @ Y).sum(axis=1)
    val = float(rows.max())
    return BoundReport(m, "refined", val, val < 1,
                       {"L": L, "q_cap": qcap, "crude_equivalent": float(crude_rows.max())})


def _abcd(m: int) -> dict:
    sm = math.sqrt(m)
    r2 = math.sqrt(2)
    A = 7 / (math.pi * r2) * (m - 1) * sm / ((m - 0.5) * (m - 2.5))
    B = 3 / (math.pi * r2) * (0.5 * math.log(m) * (1 + 1 / (2 * sm)) ** (-(m - 1.5)) + (2 / 3) ** (m - 0.5))
    C = 3 / (r2 - 1) / math.pi * (1 + (r2 - 1) / r2 / sm) ** (-m)
    denom = (m - 1.5) / (m - 0.5) * (1 - math.exp(-sm * (1 - 1 / (2 * m)) / (1 + 1 / sm)))
    return {"A": A, "B": B, "C": C, "Denom": denom}


def c2_summands(m: int) -> dict:
    """The four additive pieces of C_2(m)."""
    d = _abcd(m)
    return {
        "main": (d["A"] + d["B"] + d["C"]) / d["Denom"],
        "E2": 6 / (math.pi * math.sqrt(m)),
        "E1": 1 / (2 * (m - 1.5)),
        "E3": 4 / math.pi * (2.8 / math.pi + 4 / math.pi * (m - 1) / (m - 1.5) * m ** -0.75),
    }


def large_m_bound(m: int) -> BoundReport:
    """C(m) = max(C_1, C_2); criterion C < 2 for m >= 58, C * central_term < 1 for 38 <= m <= 57."""
    if m < 38:
        raise ValueError("large-m route requires m >= 38")
    comps = _abcd(m)
    parts = c2_summands(m)
    C2 = sum(parts.values())
    w = 4 / math.pi * math.sqrt(m + 0.5)
    C1 = 1 + w / (math.floor(w) + 1)
    Cm = max(C1, C2)
    ct = float(central_term(m))
    comps.update(parts)
    comps.update({"C1": C1, "C2": C2, "C": Cm, "central_term": ct, "C2_times_central": C2 * ct})
    if m >= 58:
        return BoundReport(m, "large_m", Cm, Cm < 2, comps, criterion="C(m) < 2")
    val = Cm * ct
    return BoundReport(m, "large_m", val, val < 1, comps, criterion="C(m) * central_term < 1")


# routing table: m-range each route is claimed for
ROUTES = {
    "crude": (2, 51),
    "refined": (2, 99),
    "large_m": (38, None),
}


def routes_for(m: int) -> list:
    out = []
    for name, (lo, hi) in ROUTES.items():
        if m >= lo and (hi is None or m <= hi):
            out.append(name)
    return out


def certify(m: int) -> list:
    """Run every route that applies to m."""
    fns = {"crude": crude_bound, "refined": refined_bound, "large_m": large_m_bound}
    return [fns[r](m) for r in routes_for(m)]
