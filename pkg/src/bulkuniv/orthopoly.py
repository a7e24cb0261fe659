"""
Orthonormal polynomials for weights e^{-V(x)} with V a polynomial of even
degree 2m and positive leading coefficient.

The recurrence x p_j = b_{j-1} p_{j-1} + a_j p_j + b_j p_{j+1} is computed by
the discretized Stieltjes procedure in extended precision (gmpy2 mpfr) on a
composite Gauss-Legendre rule over a truncated window [-T, T]. Everything
downstream (wave functions phi_j = p_j e^{-V/2}, their derivatives and
epsilon transforms) runs in float64 on the same panels.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path

import gmpy2
import numpy as np
from gmpy2 import mpfr
from numpy.polynomial import legendre

__all__ = [
    "Potential",
    "Quadrature",
    "RecurrenceTable",
    "PhiValue",
    "QuadratureError",
    "build_quadrature",
    "recurrence_table",
    "eval_phi",
    "eval_phi_derivative",
    "epsilon_phi",
    "total_integral_phi",
    "phi_all",
    "phi_and_derivative_all",
    "eps_phi_all",
    "phi_value",
    "gram_matrix",
    "jacobi_matrix",
    "xq_expansion_check",
    "default_cache_dir",
]


class QuadratureError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# potential
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """V(x) = sum_q kappa_q x^q with kappa stored as exact rationals.

    Parameters
    ----------
    coeffs : sequence
        kappa_0..kappa_{2m}. Strings, ints, floats and Fractions are accepted
        (floats are converted exactly, so prefer strings like "0.3").
    """

    coeffs: tuple

    def __post_init__(self):
        c = tuple(Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if len(c) < 3 or len(c) % 2 == 0:
            raise ValueError("V must have even degree 2m >= 2")
        if c[-1] <= 0:
            raise ValueError("leading coefficient must be positive")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def parse(cls, spec: str) -> "Potential":
        """Parse ``"k4=1,k2=-0.5"`` style specifications."""
        terms = {}
        for part in spec.replace(" ", "").split(","):
            if not part:
                continue
            key, _, val = part.partition("=")
            if not key.startswith("k") or not val:
                raise ValueError(f"bad potential term {part!r}")
            terms[int(key[1:])] = Fraction(val)
        if not terms:
            raise ValueError("empty potential")
        deg = max(terms)
        return cls(tuple(terms.get(q, Fraction(0)) for q in range(deg + 1)))

    @classmethod
    def monomial(cls, degree: int, kappa=1) -> "Potential":
        return cls(tuple([0] * degree + [kappa]))

    @property
    def m(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def n(self) -> int:
        return 2 * self.m - 1

    @property
    def kappa(self) -> Fraction:
        return self.coeffs[-1]

    @property
    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def spec(self) -> str:
        return ",".join(f"k{q}={c}" for q, c in enumerate(self.coeffs) if c != 0)

    def key(self) -> str:
        return "|".join(str(c) for c in self.coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, [float(c) for c in self.coeffs])

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        d = [q * float(c) for q, c in enumerate(self.coeffs)][1:]
        return np.polynomial.polynomial.polyval(x, d)


# ----------------------------------------------------------------------------
# quadrature
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gl_mpfr(n: int, bits: int):
    """Gauss-Legendre nodes/weights on [-1, 1] at ``bits`` precision (Newton from float guesses)."""
    ctx = gmpy2.get_context().copy()
    ctx.precision = bits + 32
    x0, _ = legendre.leggauss(n)
    nodes, weights = [], []
    with ctx:
        tol = mpfr(2) ** (-(bits + 16))
        for g in x0:
            x = mpfr(float(g))
            for _ in range(100):
                p0, p1 = mpfr(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            p0, p1 = mpfr(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    out = gmpy2.get_context().copy()
    out.precision = bits
    with out:
        return tuple(+v for v in nodes), tuple(+v for v in weights)


@lru_cache(maxsize=None)
def _integration_matrix(n: int) -> np.ndarray:
    """S with (S f)_i = int_{-1}^{x_i} f for f sampled at the n Gauss-Legendre nodes."""
    x, w = legendre.leggauss(n)
    V = legendre.legvander(x, n - 1)
    Q = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1
        Q[:, k] = legendre.legval(x, legendre.legint(e, lbnd=-1))
    return Q @ (np.diag((2 * np.arange(n) + 1) / 2) @ V.T @ np.diag(w))


@dataclass
class Quadrature:
    """Composite Gauss-Legendre rule on [-T, T].

    ``panels`` holds the panel edges; node and weight arrays are kept both as
    mpfr (``x_mp``, ``w_mp``) and as float64 (``x``, ``w``).
    """

    T: float
    edges: np.ndarray
    nodes_per_panel: int
    precision_bits: int
    x_mp: list = field(repr=False)
    w_mp: list = field(repr=False)
    x: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    max_moment: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def panels(self):
        n = self.nodes_per_panel
        return [((self.edges[i], self.edges[i + 1]), self.x[i * n:(i + 1) * n], self.w[i * n:(i + 1) * n])
                for i in range(len(self.edges) - 1)]

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1


def _truncation(V: Potential, bits: int, max_moment: int, guard: int = 10) -> float:
    """Smallest T on a 1/64 grid with V_low(t) - k log t >= (bits+guard) log 2, past the peak.

    V_low(t) = kappa t^(2m) - sum_{q<2m} |kappa_q| t^q <= V(t) for t >= 0, so
    t^k e^{-V(t)} <= e^{-(V_low - k log t)} and the tail is certified analytically.
    """
    kap = float(V.kappa)
    lower = [abs(float(c)) for c in V.coeffs[:-1]]
    deg = len(V.coeffs) - 1
    target = (bits + guard) * math.log(2)

    def g(t):
        return kap * t ** deg - sum(c * t ** q for q, c in enumerate(lower)) - max_moment * math.log(t) - target

    def tg_prime(t):
        return deg * kap * t ** deg - sum(q * c * t ** q for q, c in enumerate(lower)) - max_moment

    t = 1.0
    while not (g(t) >= 0 and tg_prime(t) > 1):
        t += 1 / 64
        if t > 1e4:
            raise QuadratureError("could not find a truncation point")
    return t


def build_quadrature(V: Potential, precision_bits: int = 256, panel_hint: int | None = None,
                     max_moment: int = 0, panel_width: float = 0.25, check_moments: bool = True,
                     max_doublings: int = 3) -> Quadrature:
    """Composite Gauss-Legendre rule for the weight e^{-V} on [-T, T].

    Parameters
    ----------
    panel_hint : int, optional
        Nodes per panel; default ``precision_bits // 8``.
    max_moment : int
        Highest moment x^k the rule must resolve; enters T and the check.
    check_moments : bool
        Compare moments against the rule with every panel split in two, at
        relative tolerance 2^(-precision_bits/2); panels are doubled up to
        ``max_doublings`` times before failing.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    nq = panel_hint or max(16, precision_bits // 8)
    T = _truncation(V, precision_bits, max_moment)
    npan = max(2, 2 * math.ceil(T / panel_width))
    for attempt in range(max_doublings + 1):
        quad = _assemble(V, T, npan, nq, precision_bits, max_moment)
        if not check_moments:
            return quad
        bad = _moment_check(V, quad, 2 * npan, nq, precision_bits, max_moment)
        if bad is None:
            quad.meta["moment_check"] = f"k <= {max_moment} resolved at 2^-{precision_bits // 2}"
            return quad
        npan *= 2
    raise QuadratureError(f"moment x^{bad} not resolved after {max_doublings} panel doublings")


def _assemble(V, T, npan, nq, bits, max_moment):
    ctx = gmpy2.get_context().copy()
    ctx.precision = bits
    gx, gw = _gl_mpfr(nq, bits)
    Tq = Fraction(T)
    edges_q = [-Tq + 2 * Tq * i / npan for i in range(npan + 1)]
    xs, ws = [], []
    with ctx:
        for i in range(npan):
            a = mpfr(edges_q[i].numerator) / edges_q[i].denominator
            b = mpfr(edges_q[i + 1].numerator) / edges_q[i + 1].denominator
            hw, mid = (b - a) / 2, (a + b) / 2
            for xn, wn in zip(gx, gw):
                xs.append(mid + hw * xn)
                ws.append(hw * wn)
    edges = np.array([float(e) for e in edges_q])
    return Quadrature(T, edges, nq, bits, xs, ws, np.array([float(v) for v in xs]),
                      np.array([float(v) for v in ws]), max_moment)


def _vpoly_mp(V, x):
    acc = mpfr(0)
    for c in reversed(V.coeffs):
        acc = acc * x + mpfr(c.numerator) / c.denominator
    return acc


def _moments(V, quad, kmax):
    ctx = gmpy2.get_context().copy()
    ctx.precision = quad.precision_bits
    with ctx:
        mom = [mpfr(0)] * (kmax + 1)
        absmom = [mpfr(0)] * (kmax + 1)
        cols = []
        for x, w in zip(quad.x_mp, quad.w_mp):
            t = w * gmpy2.exp(-_vpoly_mp(V, x))
            cols.append((x, t))
        for k in range(kmax + 1):
            terms = []
            aterms = []
            nxt = []
            for x, t in cols:
                terms.append(t)
                aterms.append(abs(t))
                nxt.append((x, t * x))
            mom[k] = gmpy2.fsum(terms)
            absmom[k] = gmpy2.fsum(aterms)
            cols = nxt
    return mom, absmom


def _moment_check(V, quad, npan2, nq, bits, kmax):
    fine = _assemble(V, quad.T, npan2, nq, bits, kmax)
    m1, a1 = _moments(V, quad, kmax)
    m2, _ = _moments(V, fine, kmax)
    tol = mpfr(2) ** (-(bits // 2))
    for k in range(kmax + 1):
        if abs(m1[k] - m2[k]) > tol * a1[k]:
            return k
    quad.meta["mu0"] = m1[0]
    return None


# ----------------------------------------------------------------------------
# recurrence table
# ----------------------------------------------------------------------------

@dataclass
class RecurrenceTable:
    """a_j, b_j for j = 0..Jmax plus the quadrature they were built on.

    ``a_str``/``b_str`` keep the extended-precision values as decimal strings;
    ``a``/``b`` are float views.
    """

    V: Potential
    Jmax: int
    precision_bits: int
    a_str: list = field(repr=False)
    b_str: list = field(repr=False)
    mu0_str: str = field(repr=False)
    quad: Quadrature | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.a = np.array([float(s) for s in self.a_str])
        self.b = np.array([float(s) for s in self.b_str])
        if np.any(self.b <= 0):
            raise ValueError("b_j must be positive")
        self.mu0 = float(self.mu0_str)

    @property
    def m(self):
        return self.V.m

    def cache_key(self) -> str:
        return _cache_key(self.V, self.Jmax, self.precision_bits)

    def to_json(self) -> dict:
        return {"coeffs": [str(c) for c in self.V.coeffs], "Jmax": self.Jmax,
                "precision_bits": self.precision_bits, "a": self.a_str, "b": self.b_str, "mu0": self.mu0_str}

    @classmethod
    def from_json(cls, d: dict, quad: Quadrature | None = None) -> "RecurrenceTable":
        V = Potential(tuple(Fraction(c) for c in d["coeffs"]))
        return cls(V, d["Jmax"], d["precision_bits"], list(d["a"]), list(d["b"]), d["mu0"], quad)

    def quadrature(self) -> Quadrature:
        if self.quad is None:
            self.quad = build_quadrature(self.V, self.precision_bits, max_moment=4 * self.Jmax,
                                         check_moments=False)
        return self.quad


def default_cache_dir() -> Path:
    return Path(os.environ.get("BULKUNIV_CACHE", Path.home() / ".cache" / "bulkuniv"))


def _cache_key(V, Jmax, bits) -> str:
    raw = json.dumps({"coeffs": [str(c) for c in V.coeffs], "Jmax": Jmax, "bits": bits}, sort_keys=True)
    return hashlib.sha256(raw.encode()).hexdigest()[:20]


def _stieltjes(V: Potential, Jmax: int, quad: Quadrature):
    bits = quad.precision_bits
    ctx = gmpy2.get_context().copy()
    ctx.precision = bits
    with ctx:
        xs = quad.x_mp
        wts = [w * gmpy2.exp(-_vpoly_mp(V, x)) for x, w in zip(xs, quad.w_mp)]
        mu0 = gmpy2.fsum(wts)
        sq = [gmpy2.sqrt(w) for w in wts]
        # q_j(x_i) = p_j(x_i) sqrt(weight_i)
        inv = 1 / gmpy2.sqrt(mu0)
        q_prev = [mpfr(0)] * len(xs)
        q_cur = [s * inv for s in sq]
        a_list, b_list = [], []
        b_prev = mpfr(0)
        for j in range(Jmax + 1):
            xq = [x * q for x, q in zip(xs, q_cur)]
            a_j = gmpy2.fsum([u * q for u, q in zip(xq, q_cur)])
            r = [u - a_j * q - b_prev * p for u, q, p in zip(xq, q_cur, q_prev)]
            # one step of reorthogonalization against the two previous vectors
            c1 = gmpy2.fsum([u * q for u, q in zip(r, q_cur)])
            c0 = gmpy2.fsum([u * p for u, p in zip(r, q_prev)])
            r = [u - c1 * q - c0 * p for u, q, p in zip(r, q_cur, q_prev)]
            a_j += c1
            b2 = gmpy2.fsum([u * u for u in r])
            if not b2 > 0:
                raise QuadratureError(f"b_{j}^2 lost positivity; increase precision_bits")
            b_j = gmpy2.sqrt(b2)
            a_list.append(a_j)
            b_list.append(b_j)
            q_prev, q_cur = q_cur, [u / b_j for u in r]
            b_prev = b_j
        # str() of an mpfr carries enough digits to round-trip at this precision
        return [str(v) for v in a_list], [str(v) for v in b_list], str(mu0)


def recurrence_table(V: Potential, Jmax: int = 64, quad: Quadrature | None = None,
                     precision_bits: int = 256, cache_dir=None, use_cache: bool = True) -> RecurrenceTable:
    """Recurrence coefficients a_j, b_j (j <= Jmax) by the discretized Stieltjes procedure.

    Tables are cached as JSON with decimal-string coefficients, keyed by
    (coeffs, Jmax, precision_bits).
    """
    if Jmax < 1:
        raise ValueError("Jmax >= 1 required")
    bits = quad.precision_bits if quad is not None else precision_bits
    path = None
    if use_cache:
        cdir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        path = cdir / f"{_cache_key(V, Jmax, bits)}.json"
        if path.exists():
            try:
                tab = RecurrenceTable.from_json(json.loads(path.read_text()), quad)
                if tab.V == V and tab.Jmax == Jmax and tab.precision_bits == bits:
                    return tab
            except (ValueError, KeyError, json.JSONDecodeError):
                pass
    if quad is None:
        quad = build_quadrature(V, bits, max_moment=4 * Jmax)
    a, b, mu0 = _stieltjes(V, Jmax, quad)
    tab = RecurrenceTable(V, Jmax, bits, a, b, mu0, quad)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(tab.to_json(), indent=1))
        tmp.replace(path)
    return tab


# ----------------------------------------------------------------------------
# float evaluation
# ----------------------------------------------------------------------------

_RESCALE = 1e150


def _check_j(table, j):
    if j < 0 or j > table.Jmax:
        raise IndexError(f"j={j} outside 0..{table.Jmax}")


def phi_and_derivative_all(table: RecurrenceTable, x, J: int | None = None, deriv: bool = True):
    """phi_j(x) and phi_j'(x) for j = 0..J, arrays of shape (J+1,) + x.shape.

    The forward recurrence for p_j and p_j' runs on rescaled values; the
    running log-scale is folded into e^{-V/2} at the end.
    """
    if J is None:
        J = table.Jmax
    _check_j(table, J)
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    a, b = table.a, table.b
    logs = np.zeros_like(x)
    p_prev = np.zeros_like(x)
    p_cur = np.full_like(x, 1 / math.sqrt(table.mu0))
    d_prev = np.zeros_like(x)
    d_cur = np.zeros_like(x)
    P = np.empty((J + 1, x.size))
    D = np.empty((J + 1, x.size)) if deriv else None
    L = np.empty((J + 1, x.size))
    for j in range(J + 1):
        P[j] = p_cur
        L[j] = logs
        if deriv:
            D[j] = d_cur
        if j == J:
            break
        bp = b[j - 1] if j > 0 else 0.0
        p_next = ((x - a[j]) * p_cur - bp * p_prev) / b[j]
        if deriv:
            d_next = ((x - a[j]) * d_cur + p_cur - bp * d_prev) / b[j]
            d_prev, d_cur = d_cur, d_next
        p_prev, p_cur = p_cur, p_next
        big = np.maximum(np.abs(p_cur), np.abs(p_prev))
        if deriv:
            big = np.maximum(big, np.maximum(np.abs(d_cur), np.abs(d_prev)))
        sel = big > _RESCALE
        if np.any(sel):
            s = big[sel]
            p_cur[sel] /= s
            p_prev[sel] /= s
            if deriv:
                d_cur[sel] /= s
                d_prev[sel] /= s
            logs[sel] += np.log(s)
    half_v = 0.5 * table.V(x)
    fac = np.exp(L - half_v)
    phi = P * fac
    if not deriv:
        return phi.reshape((J + 1,) + shape), None
    dphi = (D - 0.5 * table.V.derivative(x) * P) * fac
    return phi.reshape((J + 1,) + shape), dphi.reshape((J + 1,) + shape)


def phi_all(table: RecurrenceTable, x, J: int | None = None):
    return phi_and_derivative_all(table, x, J, deriv=False)[0]


def eval_phi(table: RecurrenceTable, j: int, x):
    """phi_j(x) = p_j(x) e^{-V(x)/2}."""
    _check_j(table, j)
    return phi_all(table, x, j)[j]


def eval_phi_derivative(table: RecurrenceTable, j: int, x):
    """phi_j'(x) = (p_j' - V' p_j / 2) e^{-V/2}."""
    _check_j(table, j)
    return phi_and_derivative_all(table, x, j)[1][j]


def _node_phi(table, J):
    key = ("node_phi", J)
    if key not in table._cache:
        q = table.quadrature()
        table._cache[key] = phi_all(table, q.x, J)
    return table._cache[key]


def _panel_integrals(table, J):
    key = ("panel_int", J)
    if key not in table._cache:
        q = table.quadrature()
        ph = _node_phi(table, J) * q.w
        table._cache[key] = ph.reshape(J + 1, q.n_panels, q.nodes_per_panel).sum(axis=2)
    return table._cache[key]


def total_integral_phi(table: RecurrenceTable, j: int | None = None):
    """int phi_j over the window (all j when ``j`` is None)."""
    J = table.Jmax if j is None else j
    _check_j(table, J)
    tot = _panel_integrals(table, table.Jmax).sum(axis=1)
    return tot if j is None else float(tot[j])


def eps_at_nodes(table: RecurrenceTable, J: int | None = None):
    """eps phi_j at every quadrature node, shape (J+1, nodes), via panel integration matrices."""
    J = table.Jmax if J is None else J
    key = ("eps_nodes", J)
    if key not in table._cache:
        q = table.quadrature()
        nq, P = q.nodes_per_panel, q.n_panels
        S = _integration_matrix(nq)
        hw = 0.5 * np.diff(q.edges)
        ph = _node_phi(table, table.Jmax)[:J + 1].reshape(J + 1, P, nq)
        inside = np.einsum("il,jpl->jpi", S, ph) * hw[None, :, None]
        pint = _panel_integrals(table, table.Jmax)[:J + 1]
        before = np.concatenate([np.zeros((J + 1, 1)), np.cumsum(pint, axis=1)[:, :-1]], axis=1)
        total = pint.sum(axis=1)
        eps = -0.5 * total[:, None, None] + before[:, :, None] + inside
        table._cache[key] = eps.reshape(J + 1, P * nq)
    return table._cache[key]


def eps_phi_all(table: RecurrenceTable, x, J: int | None = None):
    """eps phi_j(x) = -1/2 int phi_j + int_{-T}^x phi_j for j = 0..J.

    Returns ``(values, outside)`` where ``outside`` flags points beyond the
    window (there the constant tail values +-1/2 int phi_j are used).
    """
    J = table.Jmax if J is None else J
    _check_j(table, J)
    q = table.quadrature()
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.ravel()
    pint = _panel_integrals(table, table.Jmax)[:J + 1]
    cum = np.concatenate([np.zeros((J + 1, 1)), np.cumsum(pint, axis=1)], axis=1)
    total = cum[:, -1]
    xc = np.clip(xf, -q.T, q.T)
    pidx = np.clip(np.searchsorted(q.edges, xc, side="right") - 1, 0, q.n_panels - 1)
    a = q.edges[pidx]
    gx, gw = legendre.leggauss(q.nodes_per_panel)
    hw = 0.5 * (xc - a)
    nodes = a[:, None] + hw[:, None] * (gx[None, :] + 1)
    ph = phi_all(table, nodes, J)  # (J+1, len, nq)
    partial = np.einsum("jkl,l->jk", ph, gw) * hw[None, :]
    vals = -0.5 * total[:, None] + cum[:, pidx] + partial
    outside = np.abs(xf) > q.T
    return vals.reshape((J + 1,) + shape), outside.reshape(shape)


def epsilon_phi(table: RecurrenceTable, j: int, x):
    """(eps phi_j)(x) = 1/2 int sgn(x-y) phi_j(y) dy."""
    _check_j(table, j)
    vals, _ = eps_phi_all(table, x, j)
    return vals[j]


@dataclass(frozen=True)
class PhiValue:
    j: int
    x: float
    value: float
    derivative: float
    eps_value: float
    outside_window: bool = False


def phi_value(table: RecurrenceTable, j: int, x: float) -> PhiValue:
    ph, dph = phi_and_derivative_all(table, np.array([x]), j)
    ev, out = eps_phi_all(table, np.array([x]), j)
    return PhiValue(j, float(x), float(ph[j, 0]), float(dph[j, 0]), float(ev[j, 0]), bool(out[0]))


def gram_matrix(table: RecurrenceTable, J: int):
    """((phi_j, phi_k)) for j, k <= J by the quadrature."""
    q = table.quadrature()
    ph = _node_phi(table, table.Jmax)[:J + 1]
    return (ph * q.w) @ ph.T


def jacobi_matrix(table: RecurrenceTable) -> np.ndarray:
    """Truncated (Jmax+1) x (Jmax+1) Jacobi matrix of multiplication by x."""
    J = np.diag(table.a)
    off = table.b[:-1]
    return J + np.diag(off, 1) + np.diag(off, -1)


def xq_expansion_check(table: RecurrenceTable, N: int, q: int) -> dict:
    """Ratios (x^q phi_N, phi_{N-q+2l}) / (b_N^q binom(q, l)) and the odd-offset coefficients.

    Inner products come from powers of the Jacobi matrix, which are exact
    while the walk from N stays inside the table.
    """
    if N - q < 0 or N + q > table.Jmax:
        raise ValueError("need 0 <= N-q and N+q <= Jmax")
    Jm = jacobi_matrix(table)
    row = np.zeros(table.Jmax + 1)
    row[N] = 1.0
    for _ in range(q):
        row = row @ Jm
    bq = table.b[N] ** q
    ratios = [float(row[N - q + 2 * l] / (bq * comb(q, l))) for l in range(q + 1)]
    odd = [float(row[N - q + 2 * l - 1] / bq) for l in range(1, q + 1)]
    return {"N": N, "q": q, "ratios": ratios, "odd_offsets": odd, "coefficients": row[N - q:N + q + 1].tolist()}
