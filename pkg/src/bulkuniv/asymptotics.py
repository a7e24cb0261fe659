"""
Closed-form limiting objects of the bulk analysis.

Contents: the leading Mhaskar-Rakhmanov-Saff scales c_N and d_N, the
equilibrium polynomial h(x), the angle function theta(x), the odd-frequency
integrals I(q) and their centered form I~(q) = m I(q) - 1/2, and the banded
limits predicted for the finite-N D and epsilon matrices.

Polynomial coefficients, binomials and scale constants are exact rationals.
Floats only enter at quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np
from numpy.polynomial import legendre

__all__ = [
    "HFunction",
    "MRSLeading",
    "IQTable",
    "h_coeffs",
    "h_eval",
    "h_deriv",
    "h_structure_check",
    "theta_eval",
    "theta_ode_check",
    "density_normalization",
    "mrs_leading",
    "i_q",
    "iq_table",
    "thm1_limit",
    "thm2_limit",
    "ba_limits",
    "scale_constant",
    "d_entry_prediction",
    "eps_entry_prediction",
]


# ----------------------------------------------------------------------------
# the equilibrium polynomial h
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def h_coeffs(m: int) -> tuple:
    """Exact coefficients beta_0..beta_{m-1} of h(x) = sum beta_k x^(2k).

    beta_k = 2 prod_{i<=k} 2(m-i) / (2(m-i)-1).
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    out = []
    ratio = Fraction(1)
    for k in range(m):
        ratio *= Fraction(2 * (m - k), 2 * (m - k) - 1)
        out.append(2 * ratio)
    return tuple(out)


def _even_horner(coeffs, x):
    # sum c_k x^(2k) evaluated in x^2; works for Fraction, float and ndarray
    x2 = x * x
    acc = 0 * x2 + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x2 + c
    return acc


@lru_cache(maxsize=None)
def _h_float(m: int) -> np.ndarray:
    return np.array([float(c) for c in h_coeffs(m)])


def h_eval(m: int, x):
    """h(x) for degree-2m potentials.

    Rational input gives an exact Fraction; float or array input uses float
    coefficients.
    """
    if isinstance(x, Fraction) or isinstance(x, int) and not isinstance(x, bool):
        return _even_horner(h_coeffs(m), Fraction(x))
    return _even_horner(_h_float(m), np.asarray(x, dtype=float))


def h_deriv(m: int, x):
    """h'(x)."""
    beta = h_coeffs(m)
    if len(beta) == 1:
        return 0 * x
    dcoef = [2 * k * beta[k] for k in range(1, len(beta))]
    # h'(x) = x * sum_{k>=1} 2k beta_k x^(2k-2)
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return Fraction(x) * _even_horner(dcoef, Fraction(x))
    x = np.asarray(x, dtype=float)
    return x * _even_horner(np.array([float(c) for c in dcoef]), x)


@dataclass(frozen=True)
class HFunction:
    """The polynomial h for a given half-degree m."""

    m: int
    beta_coeffs: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta_coeffs", h_coeffs(self.m))

    def __call__(self, x):
        return h_eval(self.m, x)

    def derivative(self, x):
        return h_deriv(self.m, x)

    def poly(self) -> list:
        """Full coefficient list (ascending powers, exact)."""
        out = [Fraction(0)] * (2 * self.m - 1)
        for k, b in enumerate(self.beta_coeffs):
            out[2 * k] = b
        return out


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _poly_deriv(p):
    return [k * p[k] for k in range(1, len(p))] or [Fraction(0)]


def h_structure_check(m: int, grid=None) -> dict:
    """Residuals of the identities satisfied by h.

    (i) the first order ODE x(x^2-1)h' + ((2m-1) - 2(m-1)x^2)h = 4m, both as
    an exact polynomial identity and on the float grid; (ii) the integral
    representation; (iii) the recursion in m; (iv) monotonicity on [0, 1].
    """
    from scipy.integrate import quad

    if grid is None:
        grid = np.linspace(0.01, 0.99, 99)
    grid = np.asarray(grid, dtype=float)
    hp = HFunction(m).poly()

    # (i) exact: x(x^2-1)h' + ((2m-1) - 2(m-1)x^2)h - 4m as a polynomial
    lhs = _poly_add(
        _poly_mul([0, -1, 0, 1], _poly_deriv(hp)),
        _poly_mul([2 * m - 1, 0, -2 * (m - 1)], hp),
    )
    lhs = _poly_add(lhs, [-4 * m])
    ode_exact = max(abs(c) for c in lhs)
    x = grid
    ode_float = np.max(np.abs(
        x * (x * x - 1) * h_deriv(m, x) + ((2 * m - 1) - 2 * (m - 1) * x * x) * h_eval(m, x) - 4 * m
    ))

    # (ii) h(x) = 4m/(x sqrt(1-x^2)) int_x^1 (x/t)^(2m) dt/sqrt(1-t^2), with t = sin(phi)
    def integral_form(xv):
        val, _ = quad(lambda p: (xv / math.sin(p)) ** (2 * m), math.asin(xv), math.pi / 2,
                      epsabs=0, epsrel=1e-13, limit=200)
        return 4 * m * val / (xv * math.sqrt(1 - xv * xv))

    integral_res = max(abs(integral_form(float(v)) - float(h_eval(m, float(v)))) for v in grid)

    # (iii) h_m - (2m/(2m-1))(2 + x^2 h_{m-1})
    if m >= 2:
        prev = HFunction(m - 1).poly()
        rhs = _poly_add([2], _poly_mul([0, 0, 1], prev))
        rhs = [Fraction(2 * m, 2 * m - 1) * c for c in rhs]
        diff = _poly_add(hp, [-c for c in rhs])
        recursion_exact = max(abs(c) for c in diff)
    else:
        recursion_exact = None

    # (iv) h' >= 0 on [0, 1]: all coefficients of h are positive, grid check too
    mono_grid = np.linspace(0.0, 1.0, 201)
    monotone = bool(np.all(h_deriv(m, mono_grid) >= 0))

    return {
        "m": m,
        "ode_residual_exact": ode_exact,
        "ode_residual_float": float(ode_float),
        "integral_residual": float(integral_res),
        "recursion_residual_exact": recursion_exact,
        "monotone": monotone,
    }


def density_normalization(m: int) -> float:
    """(1/2pi) int_{-1}^1 sqrt(1-x^2) h(x) dx, which should equal 1."""
    return 4 * theta_eval(m, 1.0) / (2 * math.pi)


# ----------------------------------------------------------------------------
# theta
# ----------------------------------------------------------------------------

def _gl(n):
    return legendre.leggauss(n)


def theta_eval(m: int, x):
    """theta(x) = 1/2 int_0^x sqrt(1-t^2) h(t) dt, for x in [0, 1].

    Evaluated in the angle t = sin(phi), where the integrand
    cos(phi)^2 h(sin phi) is a trigonometric polynomial.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0) | (xs > 1)):
        raise ValueError("theta is defined on [0, 1]")
    nodes, weights = _gl(40 + 4 * m)
    out = np.empty_like(xs)
    for i, xv in enumerate(xs):
        top = math.asin(xv)
        phi = 0.5 * top * (nodes + 1)
        vals = np.cos(phi) ** 2 * h_eval(m, np.sin(phi))
        out[i] = 0.25 * top * np.dot(weights, vals)
    return out if np.ndim(x) else float(out[0])


def theta_ode_check(m: int, grid=None) -> dict:
    """Residual of theta - x theta'/(2m) - arcsin(x) on a grid in (0, 1)."""
    if grid is None:
        grid = np.linspace(0.05, 0.95, 91)
    x = np.asarray(grid, dtype=float)
    th = theta_eval(m, x)
    dth = 0.5 * np.sqrt(1 - x * x) * h_eval(m, x)
    res = th - x * dth / (2 * m) - np.arcsin(x)
    return {"m": m, "max_residual": float(np.max(np.abs(res))), "theta_at_1": theta_eval(m, 1.0)}


# ----------------------------------------------------------------------------
# MRS numbers (leading order)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MRSLeading:
    """Leading-order MRS scale and center for a potential of degree 2m."""

    m: int
    kappa: float
    kappa_sub: float

    @property
    def c_const(self) -> float:
        # (2m)!!/(2m-1)!! = 4^m (m!)^2 / (2m)!
        ratio = Fraction(4 ** self.m * factorial(self.m) ** 2, factorial(2 * self.m) * self.m)
        return (float(ratio) / self.kappa) ** (1.0 / (2 * self.m))

    def c_fn(self, N):
        return self.c_const * np.asarray(N, dtype=float) ** (1.0 / (2 * self.m))

    def d_fn(self, N):
        return -self.kappa_sub / (2 * self.m * self.kappa) + 0.0 * np.asarray(N, dtype=float)


def mrs_leading(V, N):
    """(c_N, d_N) at leading order for the potential V.

    Parameters
    ----------
    V : Potential
        Needs attributes ``m`` and ``coeffs`` (kappa_0..kappa_2m).
    N : int or array
    """
    if np.any(np.asarray(N) < 1):
        raise ValueError("N must be >= 1")
    mrs = MRSLeading(V.m, float(V.coeffs[-1]), float(V.coeffs[-2]))
    c, d = mrs.c_fn(N), mrs.d_fn(N)
    if np.ndim(N) == 0:
        return float(c), float(d)
    return c, d


# ----------------------------------------------------------------------------
# I(q)
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cos_coefficients(m: int, npts: int) -> np.ndarray:
    """int_{-pi}^{pi} cos(q th) y_m(th) dth for q = 0..npts/2, periodic trapezoid rule."""
    from .riccati_bounds import YmEvaluator

    th = 2 * math.pi * np.arange(npts) / npts
    vals = YmEvaluator(m).periodic(th)
    return (2 * math.pi / npts) * np.fft.rfft(vals).real


def _theta_integral(m: int, q: int) -> float:
    """int_{-pi/2}^{pi/2} cos(q th) y_m(th) dth for odd q > 0.

    y_m(pi - th) = -y_m(th) and cos(q(pi - th)) = -cos(q th) for odd q, so the
    integrand is symmetric about pi/2 and the integral is half the full-period
    one. The periodic trapezoid rule converges geometrically; the node count
    is doubled until two successive values agree.
    """
    npts = 1 << max(8, (4 * (q + 8 * m)).bit_length())
    prev = _cos_coefficients(m, npts)[q]
    for _ in range(8):
        npts *= 2
        cur = _cos_coefficients(m, npts)[q]
        if abs(cur - prev) <= 1e-15 * max(1.0, abs(cur)) + 1e-16:
            return 0.5 * float(cur)
        prev = cur
    raise RuntimeError(f"I({q}) trapezoid sums did not settle for m={m}")


@lru_cache(maxsize=None)
def i_q(m: int, q: int) -> tuple:
    """I(q) and I~(q) = m I(q) - 1/2 for odd q.

    In the angle variable x = sin(theta),
    1/(h cos) = y_m/m + 1/(4m cos) + cos/2, which gives

        I(q) = sgn(q)/(2m) + (2/(m pi)) sin(q pi/2) int cos(q th) y_m dth
               + [|q| = 1] sgn(q)/2.

    The last term vanishes for |q| >= 3.
    """
    if q % 2 == 0:
        raise ValueError("I(q) is defined for odd q only")
    aq = abs(q)
    sgn = 1 if q > 0 else -1
    cur = _theta_integral(m, aq)
    s = math.sin(aq * math.pi / 2)  # exactly +-1 up to rounding
    s = 1.0 if s > 0 else -1.0
    val = 1.0 / (2 * m) + 2.0 / (m * math.pi) * s * cur
    if aq == 1:
        val += 0.5
    val *= sgn
    val = float(val)
    return val, m * val - 0.5


@dataclass
class IQTable:
    """I(q), I~(q) for odd q in [-qmax, qmax]."""

    m: int
    values: dict
    meta: dict = field(default_factory=dict)

    def I(self, q):
        if q not in self.values:
            raise KeyError(f"I({q}) not tabulated for m={self.m}")
        return self.values[q][0]

    def Itilde(self, q):
        if q not in self.values:
            raise KeyError(f"I~({q}) not tabulated for m={self.m}")
        return self.values[q][1]


def iq_table(m: int, qmax: int | None = None) -> IQTable:
    """Table of I(q) over odd q with |q| <= qmax (default 4m-3)."""
    if qmax is None:
        qmax = 4 * m - 3
    vals = {}
    for q in range(1, qmax + 1, 2):
        a, b = i_q(m, q)
        vals[q] = (a, b)
        vals[-q] = (-a, -m * a - 0.5)
    return IQTable(m, vals, {"qmax": qmax, "method": "angle-variable periodic trapezoid, doubled to 1e-15"})


# ----------------------------------------------------------------------------
# banded limits of D and epsilon
# ----------------------------------------------------------------------------

def thm1_limit(m: int, j: int, k: int) -> int:
    """Limit of (D phi_{N+j}, phi_{N+k}) / (m kappa b_N^n)."""
    n = 2 * m - 1
    d = j - k
    if d % 2 == 0 or abs(d) > n:
        return 0
    return (1 if d > 0 else -1) * comb(n, (n - abs(d)) // 2)


def thm2_limit(m: int, parity: int, j: int, k: int) -> float:
    """Limit of (eps phi_{N+j}, phi_{N+k}) / (c_{N+j}/(N+j)); parity is N mod 2."""
    d = j - k
    if d % 2 == 0:
        return 0.0
    return (-1) ** ((parity + j) % 2) / (2 * m) - i_q(m, d)[0]


def scale_constant(m: int) -> Fraction:
    """2 (m!)^2 / (2m)!: the product of the two limiting scales."""
    return Fraction(2 * factorial(m) ** 2, factorial(2 * m))


@dataclass(frozen=True)
class BALimits:
    b12: np.ndarray
    a21: np.ndarray
    scale: Fraction


def ba_limits(m: int) -> BALimits:
    """Limiting n x n blocks for B_12 (scaled by N/c_N) and A_21 (scaled by 1/(m kappa b_N^n)).

    Rows of B_12 are offsets j = -n..-1, columns k = 0..n-1 (N even).
    A_21 = -D_21 with rows j = 0..n-1 and columns k = -n..-1.
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    n = 2 * m - 1
    b12 = np.array([[thm2_limit(m, 0, j, k) for k in range(n)] for j in range(-n, 0)])
    a21 = np.array([[-thm1_limit(m, j, k) for k in range(-n, 0)] for j in range(n)], dtype=float)
    return BALimits(b12, a21, scale_constant(m))


def d_entry_prediction(V, b, N: int, j: int, k: int) -> float:
    """Leading prediction m kappa b_{N+j}^n times the D band limit for (D phi_{N+j}, phi_{N+k})."""
    n = 2 * V.m - 1
    return V.m * float(V.coeffs[-1]) * float(b[N + j]) ** n * thm1_limit(V.m, j, k)


def eps_entry_prediction(V, N: int, j: int, k: int) -> float:
    """Leading prediction (c_{N+j}/(N+j)) times the eps band limit for (eps phi_{N+j}, phi_{N+k})."""
    c, _ = mrs_leading(V, N + j)
    return c / (N + j) * thm2_limit(V.m, N % 2, j, k)
