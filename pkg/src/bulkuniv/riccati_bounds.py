"""
The function y_m(theta), its Riccati equation and unimodal profile, the
ratio functions G and G_a, and error-controlled evaluations of the two
auxiliary integrals L(s) and H(s) together with their bound ledgers.

Ledger arithmetic is done on float enclosures ``[lo, hi]`` that are widened
outward by one ulp after every operation. Long sums are accumulated
sequentially and every partial sum contributes one ulp to the radius, so a
ledger is a deterministic function of its mesh.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize, special

from .asymptotics import h_coeffs, h_eval

__all__ = [
    "YmEvaluator",
    "GRatio",
    "BoundLedger",
    "y_m_eval",
    "y_from_g",
    "riccati_rhs",
    "riccati_residual",
    "y_m_profile",
    "g_funcs",
    "delta_k",
    "int_x",
    "int_x_bounds",
    "appendix_L",
    "appendix_H",
    "verify_L_bound",
    "verify_H_integral",
    "h_positivity_certificate",
    "h_tail_bound",
]

_EPS = float(np.finfo(float).eps)
R0_DEFAULT = 0.855


# ----------------------------------------------------------------------------
# y_m
# ----------------------------------------------------------------------------

class YmEvaluator:
    """y_m(theta) = (m/cos) (1/h(sin) - 1/(4m) - cos^2/2).

    The bracket vanishes like cos^2 at +-pi/2. Writing 4m - h(x) = (1-x^2) P(x)
    gives the cancellation-free form y_m = cos * (P(sin)/(4h(sin)) - m/2),
    which is used everywhere; the literal formula is available as ``direct``
    and is only trustworthy outside ``radius`` of the endpoints.
    """

    def __init__(self, m: int, radius: float = 1e-3):
        if m < 1:
            raise ValueError("m >= 1 required")
        self.m = m
        self.radius = radius
        beta = h_coeffs(m)
        # P(x) = sum_k beta_k (1 + x^2 + ... + x^(2k-2)); coeff of x^(2i) is sum_{k>i} beta_k
        pc = [sum(beta[i + 1:], Fraction(0)) for i in range(m - 1)] or [Fraction(0)]
        self._p = np.array([float(c) for c in pc])
        self.y0 = -0.5
        self.y_end = 0.0

    def _p_eval(self, x):
        x2 = x * x
        acc = np.full_like(x, self._p[-1])
        for c in self._p[-2::-1]:
            acc = acc * x2 + c
        return acc

    @staticmethod
    def _theta(theta):
        th = np.asarray(theta, dtype=float)
        if np.any(np.abs(th) > math.pi / 2 + 1e-15):
            raise ValueError("theta must lie in [-pi/2, pi/2]")
        return th

    def __call__(self, theta):
        th = self._theta(theta)
        x = np.sin(th)
        out = np.cos(th) * (self._p_eval(x) / (4 * h_eval(self.m, x)) - self.m / 2)
        return float(out) if out.ndim == 0 else out

    def periodic(self, theta):
        """cos(theta) F(sin theta) for any real theta (the natural 2pi-periodic extension)."""
        th = np.asarray(theta, dtype=float)
        x = np.sin(th)
        return np.cos(th) * (self._p_eval(x) / (4 * h_eval(self.m, x)) - self.m / 2)

    def direct(self, theta):
        """Literal formula; raises inside ``radius`` of +-pi/2."""
        th = self._theta(theta)
        c = np.cos(th)
        if np.any(np.abs(c) < self.radius):
            raise ValueError("direct formula is singular near +-pi/2")
        out = self.m / c * (1 / h_eval(self.m, np.sin(th)) - 1 / (4 * self.m) - c * c / 2)
        return float(out) if out.ndim == 0 else out


_YM_CACHE: dict = {}


def y_m_eval(m: int, theta):
    """Evaluate y_m at theta (scalar or array) in [-pi/2, pi/2]."""
    ev = _YM_CACHE.get(m)
    if ev is None:
        ev = _YM_CACHE[m] = YmEvaluator(m)
    return ev(theta)


def riccati_rhs(m: int, theta, y):
    """(4/sin)(y + (2m+1)cos/4)(y + 1/(2cos))."""
    s, c = np.sin(theta), np.cos(theta)
    return 4 / s * (y + (2 * m + 1) * c / 4) * (y + 1 / (2 * c))


def _fd4(f, x, step):
    return (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (12 * step)


def riccati_residual(m: int, grid=None, step: float = 1e-3) -> dict:
    """Max |y' - Riccati right side| with y' by a fourth-order central difference."""
    if grid is None:
        grid = np.linspace(0.02, math.pi / 2 - 0.02, 201)
    th = np.asarray(grid, dtype=float)
    if th.min() - 2 * step < 0 or th.max() + 2 * step > math.pi / 2:
        raise ValueError("grid plus stencil must stay inside (0, pi/2)")
    dy = _fd4(lambda t: y_m_eval(m, t), th, step)
    res = np.abs(dy - riccati_rhs(m, th, y_m_eval(m, th)))
    return {"m": m, "step": step, "max_residual": float(res.max()),
            "argmax": float(th[int(res.argmax())])}


def y_m_profile(m: int, npts: int = 2001):
    """(theta_min, y_min, unimodal) on [0, pi/2].

    Unimodality means the finite-difference derivative changes sign exactly
    once, from negative to positive.
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    th = np.linspace(0, math.pi / 2, npts)
    y = y_m_eval(m, th)
    d = np.diff(y)
    signs = np.sign(d[d != 0])
    changes = np.nonzero(np.diff(signs))[0]
    unimodal = len(changes) == 1 and signs[0] < 0 and signs[-1] > 0
    i = int(np.argmin(y))
    lo, hi = th[max(i - 1, 0)], th[min(i + 1, npts - 1)]
    res = optimize.minimize_scalar(lambda t: float(y_m_eval(m, t)), bracket=(lo, th[i], hi),
                                   method="golden", tol=1e-10)
    return float(res.x), float(res.fun), bool(unimodal)


# ----------------------------------------------------------------------------
# G and G_a
# ----------------------------------------------------------------------------

def _v_ratio(logweight, npower=1):
    """int w(v) v^p dv/sqrt(1-v) / int w(v) dv/sqrt(1-v), with v = 1 - t^2."""

    def integrand(t, p):
        v = 1 - t * t
        return math.exp(logweight(v)) * v ** p

    num, _ = integrate.quad(integrand, 0, 1, args=(npower,), epsabs=0, epsrel=1e-12, limit=400)
    den, _ = integrate.quad(integrand, 0, 1, args=(0,), epsabs=0, epsrel=1e-12, limit=400)
    return num / den


@dataclass(frozen=True)
class GRatio:
    """G(rho) with the weight (1+rho v)^-k and G_a(rho) with e^(-rho k v), k = m + 1/2."""

    m: int

    @property
    def k(self) -> float:
        return self.m + 0.5

    def G(self, rho: float) -> float:
        k = self.k
        return _v_ratio(lambda v: -k * math.log1p(rho * v))

    def Ga(self, rho: float) -> float:
        k = self.k
        return _v_ratio(lambda v: -rho * k * v)


def g_funcs(m: int, rho: float):
    """(G, G_a, G - G_a) at rho >= 0."""
    if rho < 0:
        raise ValueError("rho >= 0 required")
    g = GRatio(m)
    a, b = g.G(rho), g.Ga(rho)
    return a, b, a - b


def delta_k(m: int, s: float) -> float:
    """s^2 int e^(-s v R) v^2 dv/sqrt(1-v) / int e^(-s v) dv/sqrt(1-v), R = 1/(1+m^-1/2)."""
    R = 1 / (1 + 1 / math.sqrt(m))
    return appendix_L(s, R)


def y_from_g(m: int, theta: float) -> float:
    """y_m through the G representation (independent of the h formula)."""
    x = math.sin(theta)
    rho = 1 / (x * x) - 1
    c = math.sqrt(1 - x * x)
    return -c / 2 - (m - 1) / 2 * c * GRatio(m).G(rho)


# ----------------------------------------------------------------------------
# INT(x), L(s), H(s)
# ----------------------------------------------------------------------------

def int_x(x: float) -> float:
    """INT(x) = int_0^1 e^(-x v) (1-v)^-1/2 dv = 2 D(sqrt x)/sqrt x (Dawson D)."""
    if x == 0:
        return 2.0
    r = math.sqrt(x)
    return 2 * special.dawsn(r) / r


def int_x_bounds(x: float, a: float):
    """Enclosure (lower, upper) of INT(x) from integration by parts on [0, a] and [a, 1]."""
    if x <= 0 or not 0 < a < 1:
        raise ValueError("x > 0 and 0 < a < 1 required")
    coefs = (1.0, 0.5, 0.75, 15 / 8)
    upper = (1 / x + 1 / (2 * x ** 2) + 3 / (4 * x ** 3)
             + 15 * (1 - a) ** -3.5 / (8 * x ** 4) + 2 * math.sqrt(1 - a) * math.exp(-a * x))
    series = sum(c / x ** (k + 1) * (1 - math.exp(-a * x) * (1 - a) ** (-(2 * k + 1) / 2))
                 for k, c in enumerate(coefs))
    lower = max((1 - math.exp(-x)) / x, series)
    if lower > upper:
        raise ArithmeticError(f"empty INT enclosure at x={x}, a={a}")
    return lower, upper


def _t_integral(f):
    val, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=400)
    return val


def appendix_L(s: float, R0: float = R0_DEFAULT) -> float:
    """L(s) = s^2 int e^(-s R0 v) v^2/sqrt(1-v) / int e^(-s v)/sqrt(1-v), v = 1 - t^2."""
    if s < 0:
        raise ValueError("s >= 0 required")
    if s == 0:
        return 0.0
    num = _t_integral(lambda t: math.exp(-s * R0 * (1 - t * t)) * (1 - t * t) ** 2)
    den = _t_integral(lambda t: math.exp(-s * (1 - t * t)))
    return s * s * num / den


def appendix_H(s):
    """H(s) = 2s^2 - 1 - 1/int_0^1 e^(s^2(u^2-1)) du, the integral being D(s)/s."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        j = np.where(s == 0, 1.0, special.dawsn(s) / np.where(s == 0, 1.0, s))
    out = 2 * s * s - 1 - 1 / j
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# outward-rounded enclosures
# ----------------------------------------------------------------------------

class _Iv:
    """Float enclosure [lo, hi]; each operation rounds outward by one ulp."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(lo if hi is None else hi, dtype=float)

    @staticmethod
    def const(q) -> "_Iv":
        # tight enclosure of a rational or decimal-string constant
        q = Fraction(q)
        f = float(q)
        return _Iv(np.nextafter(f, -np.inf) if Fraction(f) > q else f,
                   np.nextafter(f, np.inf) if Fraction(f) < q else f)

    @staticmethod
    def _w(lo, hi):
        return _Iv(np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf))

    @staticmethod
    def _c(o):
        return o if isinstance(o, _Iv) else _Iv(o)

    def __add__(self, o):
        o = self._c(o)
        return self._w(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return _Iv(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return self._c(o) - self

    def __mul__(self, o):
        o = self._c(o)
        p = np.stack([self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi])
        return self._w(p.min(axis=0), p.max(axis=0))

    __rmul__ = __mul__

    def recip(self):
        if np.any(self.lo <= 0) and np.any(self.hi >= 0):
            raise ZeroDivisionError("enclosure contains 0")
        return self._w(1 / self.hi, 1 / self.lo)

    def __truediv__(self, o):
        return self * self._c(o).recip()

    def __rtruediv__(self, o):
        return self._c(o) * self.recip()

    def exp(self):
        # libm exp is faithful; one extra ulp on each side
        return self._w(np.nextafter(np.exp(self.lo), -np.inf), np.nextafter(np.exp(self.hi), np.inf))

    def max_hi(self) -> float:
        return float(np.max(self.hi))

    def mid(self):
        return 0.5 * (self.lo + self.hi)


def _exp_sum(x, u2, rows_per_chunk=128):
    """Enclosures of sum_k exp(x_i (u2_k - 1)) for each x_i, summed in index order.

    Returns (lo, hi) arrays. Every term carries a relative radius for the
    argument rounding and the libm error; every partial sum of the
    sequential accumulation contributes one ulp.
    """
    x = np.asarray(x, dtype=float)
    lo = np.empty_like(x)
    hi = np.empty_like(x)
    um1 = u2 - 1.0
    for i0 in range(0, x.size, rows_per_chunk):
        xs = x[i0:i0 + rows_per_chunk, None]
        arg = xs * um1
        t = np.exp(arg)
        # arg has <= 3 roundings relative to |x|; exp adds <= 1 ulp
        trad = t * (2 * _EPS + 4 * _EPS * (np.abs(xs) + np.abs(arg)))
        cs = np.cumsum(t, axis=1)
        rad = np.sum(np.spacing(cs), axis=1) + np.sum(trad, axis=1)
        lo[i0:i0 + rows_per_chunk] = cs[:, -1] - rad
        hi[i0:i0 + rows_per_chunk] = cs[:, -1] + rad
    return np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)


def _u_squared(n: int, right: bool):
    k = np.arange(1, n + 1) if right else np.arange(0, n)
    return (k / n) ** 2


# ----------------------------------------------------------------------------
# ledgers
# ----------------------------------------------------------------------------

@dataclass
class BoundLedger:
    """Computed value with a guaranteed radius and the target it must clear."""

    quantity: str
    value: float
    radius: float
    mesh: dict
    target: float
    direction: str = "<="
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.direction == "<=":
            return self.value + self.radius <= self.target
        return self.value - self.radius >= self.target

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def _check_mesh(name, given, default):
    if given < default:
        raise ValueError(f"{name}={given} is below the default {default}; meshes may only be refined")


def _int_up_enclosure(x, n_inner):
    """Upper bound 2/N sum_{k=1}^{N} e^{x((k/N)^2 - 1)} of INT(x) (integrand increasing in t)."""
    _, hi = _exp_sum(x, _u_squared(n_inner, right=True))
    return (_Iv(hi) * _Iv.const(Fraction(2, n_inner))).hi


def _n_up(x: np.ndarray, n_inner: int) -> _Iv:
    """Upper enclosure of N(x) = int e^{-xv} v^2 dv/sqrt(1-v) via INT upper sums."""
    X = _Iv(x)
    iu = _Iv(_int_up_enclosure(x, n_inner))
    inv = X.recip()
    return -inv - _Iv.const("1.5") * inv * inv + (1 + inv + _Iv.const("0.75") * inv * inv) * iu


def verify_L_bound(Ne: int = 8000, Ni: int = 12000, R0: float = R0_DEFAULT,
                   lipschitz: float = 75.0, target: float = 6.0,
                   interior_target: float = 5.185, lipschitz_cells: int = 2300):
    """Three-segment certificate of max_{s>=0} L(s) <= 6.

    Returns ``(summary, segments)``; ``segments`` maps names to BoundLedger.
    """
    _check_mesh("Ne", Ne, 8000)
    _check_mesh("Ni", Ni, 12000)
    R0i = _Iv.const(str(R0))
    seg = {}

    # [0, 2]: L(s) <= s^2 e^{s(1-R0)}, increasing in s
    two = _Iv(2.0)
    b0 = two * two * (two * (1 - R0i)).exp()
    seg["L[0,2]"] = BoundLedger("L on [0,2]", float(b0.mid()), float(b0.hi - b0.mid()),
                                {}, target, details={"bound": "s^2 exp(s(1-R0)) at s=2"})

    # [2, 25]: L <= L2/(1-e^{-s}); L2(s) = s^3 N(R0 s), N decreasing in x
    j = np.arange(0, Ne + 1)
    s = 2.0 + 23.0 * j / Ne
    x_lo = (R0i * _Iv(s)).lo
    S = _Iv(s)
    l2 = S * S * S * _n_up(x_lo, Ni)
    hmax = float(np.max(np.diff(s)))
    step = _Iv(lipschitz) * _Iv(np.nextafter(hmax, np.inf))
    interior = _Iv(l2.max_hi()) + step
    pref = (1 - (-two).exp()).recip()
    seg["L2 mesh"] = BoundLedger(
        "max L2 on [2,25] + Lipschitz budget", float(interior.hi), 0.0,
        {"Ne": Ne, "Ni": Ni}, interior_target,
        details={"mesh_max_L2_upper": l2.max_hi(), "argmax_s": float(s[int(np.argmax(l2.hi))]),
                 "lipschitz": lipschitz, "h": hmax,
                 "prefactor_upper": float(pref.hi)})
    seg["prefactor"] = BoundLedger("1/(1-e^-2)", float(pref.mid()), float(pref.hi - pref.mid()),
                                   {}, 1.157)
    prod = pref * interior
    seg["L[2,25]"] = BoundLedger("L on [2,25]", float(prod.hi), 0.0, {"Ne": Ne, "Ni": Ni}, target)

    # Lipschitz certificate: |L2'| <= max(3, R0 s) s^2 N(R0 s_{j-1}) on [s_{j-1}, s_j]
    sc = 2.0 + 23.0 * np.arange(0, lipschitz_cells + 1) / lipschitz_cells
    left, right = sc[:-1], sc[1:]
    nl = _n_up((R0i * _Iv(left)).lo, 4000)
    R = _Iv(right)
    fac = _Iv(np.maximum(3.0, (R0i * R).hi))
    lip = fac * R * R * nl
    seg["Lipschitz"] = BoundLedger("sup |L2'| on [2,25]", lip.max_hi(), 0.0,
                                   {"cells": lipschitz_cells, "Ni": 4000}, lipschitz)

    # [25, inf): s^3 N_up(R0 s)/(1-e^{-s}), every term non-increasing for s >= 25
    s25 = _Iv(25.0)
    X = R0i * s25
    X = _Iv(X.lo)
    c = _Iv.const(15) * _sqrt2_pow7() / _Iv.const(8)
    p = [_Iv(2.0), c + _Iv.const("1.125"), c + _Iv.const("0.5625"), _Iv.const("0.75") * c]
    inv = X.recip()
    poly = _Iv(0.0)
    pw = inv * inv * inv
    for pk in p:
        poly = poly + pk * pw
        pw = pw * inv
    tail = (1 + inv + _Iv.const("0.75") * inv * inv) * _Iv(2.0) * _sqrt_half() * (-(X * _Iv(0.5))).exp()
    nup = poly + tail
    val = s25 * s25 * s25 * nup / (1 - (-s25).exp())
    seg["L[25,inf)"] = BoundLedger("L on [25,inf)", float(val.hi), 0.0, {}, target,
                                   details={"bound": "monotone termwise bound evaluated at s=25"})

    overall = max(seg["L[0,2]"].value + seg["L[0,2]"].radius, seg["L[2,25]"].value,
                  seg["L[25,inf)"].value)
    all_ok = all(seg[k].passed for k in ("L[0,2]", "L[2,25]", "L[25,inf)", "Lipschitz", "prefactor"))
    summary = BoundLedger("max L(s)", overall, 0.0, {"Ne": Ne, "Ni": Ni}, target,
                          details={"segments_pass": all_ok})
    if not all_ok:
        summary.details["violations"] = [k for k, v in seg.items() if not v.passed]
    return summary, seg


def _sqrt2_pow7() -> _Iv:
    # 2^(7/2) = 8 sqrt 2
    r = math.sqrt(2.0)
    return _Iv(8.0) * _Iv(np.nextafter(r, -np.inf), np.nextafter(r, np.inf))


def _sqrt_half() -> _Iv:
    r = math.sqrt(0.5)
    return _Iv(np.nextafter(r, -np.inf), np.nextafter(r, np.inf))


def h_positivity_certificate(x0: float = 9.0) -> dict:
    """Certificate that H(sqrt x) > 0 for x >= x0 (a = 4/5 in the INT lower bound).

    With DENOM_a(x) > 0 the bound H >= NUMER/DENOM holds and
    x^2 NUMER(x) >= 1 + 3/x - 15/(8x^2) - 2 sqrt5 x^2 e^{-4x/5} Q(x),
    Q(x) = 1 + 5/(2x) + 75/(4x^2) + 1875/(8x^3) decreasing.
    """
    xq = Fraction(x0)
    Q = 1 + Fraction(5, 2) / xq + Fraction(75, 4) / xq ** 2 + Fraction(1875, 8) / xq ** 3
    const = 1 - Fraction(15, 8) / xq ** 2  # 1 + 3/x - 15/(8x^2) >= 1 - 15/(8 x0^2) for x >= x0
    coef = 2 * Q
    X = _Iv(x0)
    sqrt5 = _Iv(np.nextafter(math.sqrt(5), -np.inf), np.nextafter(math.sqrt(5), np.inf))
    decay = X * X * (-(X * _Iv.const("0.8"))).exp()  # x^2 e^{-4x/5} decreasing for x > 5/2
    rhs = _Iv.const(const) - _Iv.const(coef) * sqrt5 * decay
    # DENOM_a(x) >= (1/x)(1 - sqrt5 Q(x) e^{-4x/5})
    denom_factor = 1 - _Iv.const(Q) * sqrt5 * (-(X * _Iv.const("0.8"))).exp()
    return {
        "x0": x0,
        "numer_constant": const,
        "exp_coefficient": coef,
        "numer_lower": float(rhs.lo),
        "denom_factor_lower": float(denom_factor.lo),
        "positive": bool(rhs.lo > 0 and denom_factor.lo > 0),
    }


def h_tail_bound(s):
    """1/s^2 + 30 sqrt2/s^4 + 2 sqrt2 s^4 e^{-s^2/2}, an upper bound for H on [6, inf)."""
    s = np.asarray(s, dtype=float)
    return 1 / s ** 2 + 30 * math.sqrt(2) / s ** 4 + 2 * math.sqrt(2) * s ** 4 * np.exp(-s * s / 2)


def _h_tail_integral() -> _Iv:
    # int_6^inf of h_tail_bound in closed form
    r2 = _Iv(np.nextafter(math.sqrt(2), -np.inf), np.nextafter(math.sqrt(2), np.inf))
    first = _Iv.const(Fraction(1, 6)) + _Iv(10.0) * r2 / _Iv(216.0)
    e18 = (-_Iv(18.0)).exp()
    erfc_v = special.erfc(6 / math.sqrt(2))
    erfc_i = _Iv(erfc_v * (1 - 8 * _EPS), erfc_v * (1 + 8 * _EPS))
    spi2 = math.sqrt(math.pi / 2)
    spi2_i = _Iv(spi2 * (1 - 4 * _EPS), spi2 * (1 + 4 * _EPS))
    rest = _Iv(2.0) * r2 * (e18 * _Iv(234.0) + _Iv(3.0) * spi2_i * erfc_i)
    return first + rest


def verify_H_integral(Ne0: int = 3000, Ni0: int = 3000, Ne1: int = 1197,
                      inner_factor: int = 323, j_floor: float = 0.01388):
    """Certificate of int_0^inf |H(s)| ds <= 2.8 in three segments.

    Returns ``(summary, segments)``.
    """
    _check_mesh("Ne0", Ne0, 3000)
    _check_mesh("Ni0", Ni0, 3000)
    _check_mesh("Ne1", Ne1, 1197)
    seg = {}

    # [0, 3]: on [s_j, s_{j+1}] the inner integral J(s) is decreasing, so
    # H^- = 2s_j^2 - 1 - 1/left(s_{j+1}),  H^+ = 2s_{j+1}^2 - 1 - 1/right(s_j)
    s = 3.0 * np.arange(0, Ne0 + 1) / Ne0
    X = _Iv(s) * _Iv(s)
    ni = _Iv.const(Fraction(1, Ni0))
    llo, lhi = _exp_sum(X.hi, _u_squared(Ni0, right=False))  # larger x lowers the sum
    left = _Iv(llo) * ni
    rlo, rhi = _exp_sum(X.lo, _u_squared(Ni0, right=True))
    right = _Iv(rhi) * ni
    S2 = X * 2
    hminus = _Iv(S2.lo[:-1]) - 1 - _Iv(left.lo[1:]).recip()
    hplus = _Iv(S2.hi[1:]) - 1 - _Iv(right.hi[:-1]).recip()
    absmax = np.maximum(np.maximum(np.abs(hminus.lo), np.abs(hminus.hi)),
                        np.maximum(np.abs(hplus.lo), np.abs(hplus.hi)))
    cs = np.cumsum(absmax)
    tot = cs[-1] + np.sum(np.spacing(cs))
    seg0 = _Iv(tot) * _Iv.const(Fraction(3, Ne0))
    seg["H[0,3]"] = BoundLedger("int_0^3 |H|", float(seg0.hi), 0.0, {"Ne": Ne0, "Ni": Ni0}, 2.247)

    # [3, 6]: outer trapezoid with |H''| <= 24s^4 + 20s^2 + 4, inner trapezoid with
    # N_i(s) = ceil(323 sqrt(s^4 + s^2/2)) and |f''| <= 4s^4 + 2s^2
    s1 = 3.0 + 3.0 * np.arange(0, Ne1 + 1) / Ne1
    jvals = np.empty_like(s1)
    jrad = np.empty_like(s1)
    ni_used = np.empty(s1.size, dtype=int)
    inner_err = np.empty_like(s1)
    for i, sv in enumerate(s1):
        n_i = math.ceil(inner_factor * math.sqrt(sv ** 4 + sv * sv / 2))
        ni_used[i] = n_i
        u = np.arange(0, n_i + 1) / n_i
        f = np.exp(sv * sv * (u * u - 1))
        w = np.full(n_i + 1, 1.0)
        w[0] = w[-1] = 0.5
        terms = w * f
        cs = np.cumsum(terms)
        jvals[i] = cs[-1] / n_i
        jrad[i] = (np.sum(np.spacing(cs)) + np.sum(terms) * 6 * _EPS * (1 + sv * sv)) / n_i
        inner_err[i] = (4 * sv ** 4 + 2 * sv ** 2) / (12.0 * n_i * n_i)
    if np.min(jvals - jrad) < j_floor:
        raise ArithmeticError("inner integral fell below the assumed floor")
    jenc = _Iv(jvals - jrad, jvals + jrad)
    Hs = _Iv(s1) * _Iv(s1) * 2 - 1 - jenc.recip()
    hw = np.full(s1.size, 1.0)
    hw[0] = hw[-1] = 0.5
    trap_terms = hw * Hs.mid()
    cs = np.cumsum(trap_terms)
    trap = cs[-1] * (3.0 / Ne1)
    trap_float = (np.sum(np.spacing(cs)) + np.sum(hw * (Hs.hi - Hs.lo) / 2)) * (3.0 / Ne1) + 4 * _EPS * abs(trap)
    h = 3.0 / Ne1
    err_e = 3 * h * h / 12 * (24 * 6.0 ** 4 + 20 * 6.0 ** 2 + 4)
    err_i = 3 * float(np.max(inner_err)) / j_floor ** 2
    rad = (err_e + err_i + trap_float) * (1 + 8 * _EPS)
    seg["H[3,6]"] = BoundLedger("int_3^6 H", float(trap), float(rad), {"Ne": Ne1, "Ni_min": int(ni_used.min()),
                                                                     "Ni_max": int(ni_used.max())}, 0.309,
                                details={"ERR_e": err_e, "ERR_i": err_i, "float": trap_float,
                                         "min_inner": float(np.min(jvals)), "inner_floor": j_floor})

    # [6, inf): H > 0 there and H <= h_tail_bound; closed-form integral
    tail = _h_tail_integral()
    cert = h_positivity_certificate(9.0)
    seg["H[6,inf)"] = BoundLedger("int_6^inf |H|", float(tail.hi), 0.0, {}, 0.233,
                                  details={"positivity_certificate": cert["positive"]})

    total = seg["H[0,3]"].value + seg["H[3,6]"].value + seg["H[3,6]"].radius + seg["H[6,inf)"].value
    total = float(np.nextafter(np.nextafter(total, np.inf), np.inf))
    ok = all(v.passed for v in seg.values()) and cert["positive"]
    summary = BoundLedger("int_0^inf |H|", total, 0.0, {"Ne0": Ne0, "Ni0": Ni0, "Ne1": Ne1}, 2.8,
                          details={"segments_pass": ok})
    if not ok:
        summary.details["violations"] = [k for k, v in seg.items() if not v.passed]
    return summary, seg
