"""
Bulk-scaling comparisons of finite-N kernels with their sine-kernel limits.

Finite kernels are rescaled around a center r by the one-point density
q_N = R_{N,1,beta}(r), conjugated by lambda = sqrt(q_N), and compared entrywise
with the limiting 2 x 2 kernels. Gap probabilities are computed as Fredholm
determinants by a Nystrom discretization on Gauss-Legendre nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from scipy.special import sici

from .orthopoly import RecurrenceTable, _integration_matrix
from .widom_kernels import (
    WidomBlocks,
    WidomKernel,
    _check_N,
    cd_kernel,
    cluster_function,
)

__all__ = [
    "LimitKernel",
    "ScalingSpec",
    "GapSpec",
    "GapError",
    "sine_kernel",
    "sine_kernel_derivative",
    "sine_kernel_integral",
    "limit_kernel_ref",
    "scaling_spec",
    "scaled_kernel",
    "scaled_kernel_error",
    "diagonal_ratio",
    "sgn_operator_matrix",
    "gap_probability",
    "nystrom_self_consistency",
    "cluster_limit_check",
]


class GapError(ArithmeticError):
    """Raised when a discretized Fredholm determinant comes out clearly negative."""


# ----------------------------------------------------------------------------
# sine kernel and limiting matrix kernels
# ----------------------------------------------------------------------------

def sine_kernel(t):
    """K_inf(t) = sin(pi t) / (pi t), with K_inf(0) = 1."""
    return np.sinc(np.asarray(t, dtype=float))


def sine_kernel_derivative(t):
    """d/dt K_inf(t); a Taylor series is used for |t| < 0.1 to avoid cancellation."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.1
    ts = np.where(small, 1.0, t)
    big = (np.cos(np.pi * ts) - np.sinc(ts)) / ts
    # sum_k (-1)^k 2k pi^{2k} t^{2k-1} / (2k+1)!, truncation error < 1e-17 on |t| < 0.1
    ser = sum((-1) ** k * 2 * k * np.pi ** (2 * k) / math.factorial(2 * k + 1) * t ** (2 * k - 1)
              for k in range(9, 0, -1))
    return np.where(small, ser, big)


def sine_kernel_integral(z):
    """int_0^z K_inf(t) dt = Si(pi z) / pi (odd in z)."""
    si, _ = sici(np.pi * np.asarray(z, dtype=float))
    return si / np.pi


@dataclass(frozen=True)
class LimitKernel:
    """Limiting bulk kernel for beta in {1, 2, 4}.

    ``doubling`` scales the argument of the sine kernel (2 for beta = 4).
    Turning it off for beta = 4 gives the beta = 1 first row.
    """

    beta: int
    doubling: float | None = None

    def __post_init__(self):
        if self.beta not in (1, 2, 4):
            raise ValueError("beta must be 1, 2 or 4")

    @property
    def scale(self) -> float:
        if self.doubling is not None:
            return float(self.doubling)
        return 2.0 if self.beta == 4 else 1.0

    def k(self, t):
        return sine_kernel(self.scale * np.asarray(t, dtype=float))

    def dk(self, t):
        """d/dxi of K_inf(scale (xi - eta)) at xi - eta = t."""
        return self.scale * sine_kernel_derivative(self.scale * np.asarray(t, dtype=float))

    def ik(self, t):
        """int_0^t K_inf(scale s) ds."""
        return sine_kernel_integral(self.scale * np.asarray(t, dtype=float)) / self.scale

    def smooth_entries(self, xi, eta) -> np.ndarray:
        """[..., 2, 2] entries without the -1/2 sgn term."""
        t = np.asarray(xi, dtype=float) - np.asarray(eta, dtype=float)
        out = np.empty(t.shape + (2, 2))
        out[..., 0, 0] = self.k(t)
        out[..., 0, 1] = self.dk(t)
        out[..., 1, 0] = self.ik(t)
        out[..., 1, 1] = self.k(-t)
        return out

    def entries(self, xi, eta) -> np.ndarray:
        """[..., 2, 2] entries of K^(beta)(xi, eta), sgn term included for beta = 1."""
        out = self.smooth_entries(xi, eta)
        if self.beta == 1:
            t = np.asarray(xi, dtype=float) - np.asarray(eta, dtype=float)
            out[..., 1, 0] -= 0.5 * np.sign(t)
        return out


def limit_kernel_ref(beta: int, xi, eta) -> np.ndarray:
    """The four entries of K^(1) or K^(4) at (xi, eta), shape [..., 2, 2]."""
    if beta not in (1, 4):
        raise ValueError("beta must be 1 or 4")
    return LimitKernel(beta).entries(xi, eta)


# ----------------------------------------------------------------------------
# scaling
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingSpec:
    """Center r and density scale q_N; lambda = sqrt(q_N)."""

    r: float
    q_N: float

    def __post_init__(self):
        if not self.q_N > 0:
            raise ValueError("q_N must be positive")

    @property
    def lam(self) -> float:
        return math.sqrt(self.q_N)

    def point(self, xi):
        return self.r + np.asarray(xi, dtype=float) / self.q_N


def scaling_spec(blocks: WidomBlocks | None, table: RecurrenceTable, N: int, beta: int,
                 r: float = 0.0) -> ScalingSpec:
    """q_N = K_N(r,r) (beta=2), S_{N,1}(r,r) (beta=1) or S_{N/2,4}(r,r)/2 (beta=4)."""
    if beta == 2:
        q = float(cd_kernel(table, N, np.array(r), np.array(r)))
    else:
        _check_N(blocks, N)
        s = float(WidomKernel(blocks, table, beta).scalar(np.array(r), np.array(r)))
        q = s if beta == 1 else 0.5 * s
    return ScalingSpec(float(r), q)


def scaled_kernel(kern: WidomKernel, sc: ScalingSpec, xi, eta) -> np.ndarray:
    """(1/lambda^2) times the lambda-conjugated matrix kernel at r + xi/q, r + eta/q."""
    xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
    K = kern.matrix(sc.point(xi), sc.point(eta)).entries()
    q = sc.q_N
    out = np.empty_like(K)
    out[..., 0, 0] = K[..., 0, 0] / q
    out[..., 0, 1] = K[..., 0, 1] / q ** 2
    out[..., 1, 0] = K[..., 1, 0]
    out[..., 1, 1] = K[..., 1, 1] / q
    return out


def scaled_kernel_error(blocks: WidomBlocks | None, table: RecurrenceTable, N: int, beta: int,
                        r: float = 0.0, grid=None) -> np.ndarray:
    """Sup over grid x grid of |scaled finite kernel - limit kernel|, entrywise.

    Returns a 2 x 2 array for beta in {1, 4} and a 1 x 1 array for beta = 2
    (the scalar kernel K_N against K_inf).
    """
    if N % 2:
        raise ValueError("N must be even")
    if grid is None:
        grid = np.linspace(-1.0, 1.0, 21)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) > 2):
        raise ValueError("grid must lie in [-2, 2]")
    XI, ETA = np.meshgrid(grid, grid, indexing="ij")
    sc = scaling_spec(blocks, table, N, beta, r)
    if beta == 2:
        vals = cd_kernel(table, N, sc.point(XI), sc.point(ETA)) / sc.q_N
        return np.array([[float(np.max(np.abs(vals - sine_kernel(XI - ETA))))]])
    kern = WidomKernel(blocks, table, beta)
    diff = np.abs(scaled_kernel(kern, sc, XI, ETA) - limit_kernel_ref(beta, XI, ETA))
    return diff.reshape(-1, 2, 2).max(axis=0)


def diagonal_ratio(blocks: WidomBlocks, table: RecurrenceTable, N: int, beta: int,
                   r: float = 0.0) -> float:
    """S_{N,1}(r,r)/K_N(r,r) or S_{N/2,4}(r,r)/K_N(r,r)."""
    _check_N(blocks, N)
    s = float(WidomKernel(blocks, table, beta).scalar(np.array(r), np.array(r)))
    return s / float(cd_kernel(table, N, np.array(r), np.array(r)))


# ----------------------------------------------------------------------------
# gap probabilities
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GapSpec:
    """Interval (-theta, theta) in scaled units, Nystrom order and beta."""

    theta: float
    nystrom_order: int = 40
    beta: int = 2

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.nystrom_order < 8:
            raise ValueError("nystrom_order must be >= 8")
        if self.beta not in (1, 2, 4):
            raise ValueError("beta must be 1, 2 or 4")


def sgn_operator_matrix(n: int, half_width: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes, weights and the matrix of f -> (1/2) int sgn(x - y) f(y) dy on (-a, a).

    The operator is f -> int_{-a}^x f - (1/2) int f; it is discretized by
    spectral product integration on n Gauss-Legendre nodes, which converges
    geometrically for smooth f, unlike pointwise sampling of the jump.
    """
    t, w = legendre.leggauss(n)
    x = half_width * t
    wx = half_width * w
    E = half_width * _integration_matrix(n) - 0.5 * np.outer(np.ones(n), wx)
    return x, wx, E


def _det_to_probability(det: float, sqrt: bool) -> float:
    if det < -1e-10:
        raise GapError(f"discretized determinant is negative ({det:.3e}); refine the discretization")
    det = max(det, 0.0)
    return math.sqrt(det) if sqrt else det


def _block_det(K11, K12, K21s, K22, wx, E, sgn_coeff):
    """det(I - K) for a 2 x 2 block kernel; K21 = K21s + sgn_coeff * (1/2) sgn."""
    n = len(wx)
    sw = np.sqrt(wx)
    Dl, Dr = sw[:, None], sw[None, :]
    M = np.empty((2 * n, 2 * n))
    M[:n, :n] = Dl * K11 * Dr
    M[:n, n:] = Dl * K12 * Dr
    M[n:, :n] = Dl * K21s * Dr + sgn_coeff * (Dl * E / Dr)
    M[n:, n:] = Dl * K22 * Dr
    return float(np.linalg.det(np.eye(2 * n) - M))


def gap_probability(spec: GapSpec, mode: str = "limit", blocks: WidomBlocks | None = None,
                    table: RecurrenceTable | None = None, N: int | None = None,
                    r: float = 0.0) -> float:
    """Probability of no eigenvalue in the scaled interval (-theta, theta).

    ``limit`` uses the sine-kernel operators; ``finite`` uses the kernels of
    the N-point ensemble on (r - theta/q_N, r + theta/q_N). beta = 2 returns
    det(I - K); beta = 1, 4 return sqrt(det(I - K)) of the 2 x 2 block operator.
    For beta = 1 the discretized sgn block has zero trace, so the regularized
    2-determinant coincides with the plain determinant of the discretization.
    """
    if mode not in ("limit", "finite"):
        raise ValueError("mode must be 'limit' or 'finite'")
    beta, n = spec.beta, spec.nystrom_order
    if mode == "limit":
        x, wx, E = sgn_operator_matrix(n, spec.theta)
        X, Y = np.meshgrid(x, x, indexing="ij")
        if beta == 2:
            sw = np.sqrt(wx)
            M = sw[:, None] * sine_kernel(X - Y) * sw[None, :]
            return _det_to_probability(float(np.linalg.det(np.eye(n) - M)), sqrt=False)
        K = LimitKernel(beta).smooth_entries(X, Y)
        sgn_coeff = -1.0 if beta == 1 else 0.0
        det = _block_det(K[..., 0, 0], K[..., 0, 1], K[..., 1, 0], K[..., 1, 1], wx, E, sgn_coeff)
        return _det_to_probability(det, sqrt=True)

    if table is None or N is None:
        raise ValueError("finite mode needs table and N")
    if N % 2:
        raise ValueError("N must be even")
    if beta != 2 and blocks is None:
        raise ValueError("finite mode for beta = 1, 4 needs blocks")
    sc = scaling_spec(blocks, table, N, beta, r)
    half = spec.theta / sc.q_N
    t, wx, E = sgn_operator_matrix(n, half)
    x = r + t
    X, Y = np.meshgrid(x, x, indexing="ij")
    if beta == 2:
        sw = np.sqrt(wx)
        M = sw[:, None] * cd_kernel(table, N, X, Y) * sw[None, :]
        return _det_to_probability(float(np.linalg.det(np.eye(n) - M)), sqrt=False)
    mk = WidomKernel(blocks, table, beta).matrix(X, Y)
    pref = 0.5 if beta == 4 else 1.0
    sgn_coeff = -1.0 if beta == 1 else 0.0
    det = _block_det(pref * mk.S, pref * mk.SD, pref * mk.ES, pref * mk.S_swap, wx, E, sgn_coeff)
    return _det_to_probability(det, sqrt=True)


def nystrom_self_consistency(spec: GapSpec, mode: str = "limit", **kw) -> dict:
    """Gap probability at the given order and at twice the order."""
    p1 = gap_probability(spec, mode, **kw)
    spec2 = GapSpec(spec.theta, 2 * spec.nystrom_order, spec.beta)
    p2 = gap_probability(spec2, mode, **kw)
    return {"order": spec.nystrom_order, "p": p1, "p_doubled": p2, "change": abs(p2 - p1)}


# ----------------------------------------------------------------------------
# cluster functions
# ----------------------------------------------------------------------------

def _conjugate(K: np.ndarray, lam: float) -> np.ndarray:
    out = K.copy()
    out[..., 0, 1] /= lam ** 2
    out[..., 1, 0] *= lam ** 2
    return out


def cluster_limit_check(blocks: WidomBlocks, table: RecurrenceTable, N: int, beta: int,
                        l: int, points, r: float = 0.0) -> dict:
    """Scaled finite cluster function T_{N,l,beta}/q^l against its sine-kernel limit.

    ``points`` are scaled coordinates xi_1..xi_l. The report includes the
    change of the finite value under conjugation of the kernel by lambda.
    """
    if l not in (2, 3):
        raise ValueError("l must be 2 or 3")
    pts = np.asarray(points, dtype=float)
    if pts.shape != (l,):
        raise ValueError(f"need exactly {l} points")
    _check_N(blocks, N)
    sc = scaling_spec(blocks, table, N, beta, r)
    kern = WidomKernel(blocks, table, beta)
    Xi, Eta = np.meshgrid(pts, pts, indexing="ij")
    K = kern.matrix(sc.point(Xi), sc.point(Eta)).entries()
    finite = cluster_function(K) / sc.q_N ** l
    conj = cluster_function(_conjugate(K, sc.lam)) / sc.q_N ** l
    limit = cluster_function(limit_kernel_ref(beta, Xi, Eta))
    return {
        "beta": beta,
        "l": l,
        "points": pts.tolist(),
        "q_N": sc.q_N,
        "finite": float(finite),
        "limit": float(limit),
        "relative_gap": abs(finite - limit) / abs(limit) if limit != 0 else float("inf"),
        "conjugation_change": abs(conj - finite) / max(abs(finite), 1e-300),
    }
