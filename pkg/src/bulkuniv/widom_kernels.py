"""
Finite-N kernels for the orthogonal (beta=1) and symplectic (beta=4) ensembles.

The scalar kernels are written as the unitary kernel K_N plus a correction
of rank <= 2n built from phi_{N+j}, j = -n..n-1, and the 2n x 2n blocks
B = ((eps phi_j, phi_k)) and A (built from the D entries). The matrix
kernels, one- and two-point correlation functions and cluster functions are
assembled from them.

D entries use (D phi_j, phi_k) = 1/2 sgn(j-k) (V' phi_j, phi_k), and the
right side is read off powers of the Jacobi matrix, so no derivatives of
phi are needed. The derivative route is kept for cross-checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .asymptotics import i_q, thm1_limit, scale_constant
from .orthopoly import (
    RecurrenceTable,
    _node_phi,
    eps_at_nodes,
    eps_phi_all,
    jacobi_matrix,
    phi_and_derivative_all,
)

__all__ = [
    "BandedD",
    "EpsSection",
    "WidomBlocks",
    "MatrixKernelValue",
    "KernelError",
    "d_matrix",
    "d_entry",
    "d_entry_derivative_route",
    "eps_matrix",
    "eps_entry",
    "banded_d",
    "eps_section",
    "build_blocks",
    "cd_kernel",
    "cd_kernel_sum",
    "WidomKernel",
    "s_beta1",
    "s_beta4",
    "matrix_kernel",
    "correlation",
    "cluster_function",
    "section_identity_check",
    "ba_reflection_defect",
    "toeplitz_inverse_crosscheck",
]


class KernelError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# D and epsilon entries
# ----------------------------------------------------------------------------

def d_matrix(table: RecurrenceTable):
    """Full matrix ((D phi_j, phi_k)) for j, k <= Jmax and its validity mask.

    (V' phi_j, phi_k) = sum_q q kappa_q (J^{q-1})_{jk}; an entry of the
    truncated power is exact when (j + k + q - 1)/2 <= Jmax.
    """
    key = "d_matrix"
    if key in table._cache:
        return table._cache[key]
    Jm = jacobi_matrix(table)
    size = table.Jmax + 1
    vp = np.zeros((size, size))
    pw = np.eye(size)
    deg = len(table.V.coeffs) - 1
    for q in range(1, deg + 1):
        kq = float(table.V.coeffs[q])
        if kq:
            vp += q * kq * pw
        pw = pw @ Jm
    j = np.arange(size)
    D = 0.5 * np.sign(j[:, None] - j[None, :]) * vp
    valid = (j[:, None] + j[None, :] + deg - 1) <= 2 * table.Jmax
    table._cache[key] = (D, valid)
    return D, valid


def d_entry(table: RecurrenceTable, quad, j: int, k: int) -> float:
    """(D phi_j, phi_k) = 1/2 sgn(j-k) (V' phi_j, phi_k)."""
    D, valid = d_matrix(table)
    if not valid[j, k]:
        raise IndexError(f"D entry ({j},{k}) needs a longer recurrence table")
    return float(D[j, k])


def _derivative_gram(table: RecurrenceTable):
    key = "dphi_gram"
    if key not in table._cache:
        q = table.quadrature()
        ph, dph = phi_and_derivative_all(table, q.x, table.Jmax)
        table._cache[key] = (dph * q.w) @ ph.T
    return table._cache[key]


def d_entry_derivative_route(table: RecurrenceTable, j: int, k: int) -> float:
    """(phi_j', phi_k) by direct quadrature (cross-check for ``d_entry``)."""
    return float(_derivative_gram(table)[j, k])


def eps_matrix(table: RecurrenceTable) -> np.ndarray:
    """((eps phi_j, phi_k)) for j, k <= Jmax by quadrature."""
    key = "eps_matrix"
    if key not in table._cache:
        q = table.quadrature()
        E = (eps_at_nodes(table) * q.w) @ _node_phi(table, table.Jmax).T
        table._cache[key] = E
    return table._cache[key]


def eps_entry(table: RecurrenceTable, quad, j: int, k: int) -> float:
    return float(eps_matrix(table)[j, k])


@dataclass
class BandedD:
    """N x N section of D_infinity; entries beyond the band are zeroed."""

    N: int
    n: int
    matrix: np.ndarray

    def entry(self, j, k):
        if abs(j - k) > self.n:
            return 0.0
        return float(self.matrix[j, k])

    @property
    def entries(self) -> dict:
        return {(j, k): float(self.matrix[j, k]) for j in range(self.N) for k in range(self.N)
                if abs(j - k) <= self.n}

    def skew_defect(self) -> float:
        return float(np.max(np.abs(self.matrix + self.matrix.T)))


@dataclass
class EpsSection:
    N: int
    dense: np.ndarray
    extra: np.ndarray | None = None

    def skew_defect(self) -> float:
        return float(np.max(np.abs(self.dense + self.dense.T)))


def banded_d(table: RecurrenceTable, N: int) -> BandedD:
    D, valid = d_matrix(table)
    n = table.V.n
    if not valid[N - 1, N - 1]:
        raise IndexError("table too short for this section")
    j = np.arange(N)
    band = np.abs(j[:, None] - j[None, :]) <= n
    return BandedD(N, n, np.where(band, D[:N, :N], 0.0))


def eps_section(table: RecurrenceTable, N: int, with_extra: bool = True) -> EpsSection:
    E = eps_matrix(table)
    n = table.V.n
    extra = E[N - n:N, N:N + n] if with_extra else None
    return EpsSection(N, E[:N, :N].copy(), extra)


# ----------------------------------------------------------------------------
# Widom blocks
# ----------------------------------------------------------------------------

@dataclass
class WidomBlocks:
    """2n x 2n matrices B, A and C = BA + diag(I_n, 0) for an even N."""

    N: int
    n: int
    B: np.ndarray
    A: np.ndarray
    C: np.ndarray
    D_block: np.ndarray = field(repr=False)

    def _q(self, M, r, c):
        n = self.n
        return M[r * n:(r + 1) * n, c * n:(c + 1) * n]

    @property
    def B11(self):
        return self._q(self.B, 0, 0)

    @property
    def B12(self):
        return self._q(self.B, 0, 1)

    @property
    def B21(self):
        return self._q(self.B, 1, 0)

    @property
    def B22(self):
        return self._q(self.B, 1, 1)

    @property
    def D12(self):
        return self._q(self.D_block, 0, 1)

    @property
    def D21(self):
        return self._q(self.D_block, 1, 0)

    @property
    def C11(self):
        return self._q(self.C, 0, 0)

    @property
    def indices(self):
        return np.arange(self.N - self.n, self.N + self.n)


def build_blocks(table: RecurrenceTable, quad=None, N: int = 20) -> WidomBlocks:
    """B = ((eps phi_j, phi_k)) and D over j, k = N-n..N+n-1; A = [[0, D12], [-D21, 0]]."""
    n = table.V.n
    if N % 2:
        raise ValueError("N must be even")
    if N <= n:
        raise ValueError("N must exceed n")
    D, valid = d_matrix(table)
    idx = np.arange(N - n, N + n)
    if idx[-1] > table.Jmax or not valid[idx[-1], idx[-1]]:
        raise IndexError(f"recurrence table (Jmax={table.Jmax}) too short for N={N}")
    B = eps_matrix(table)[np.ix_(idx, idx)].copy()
    Db = D[np.ix_(idx, idx)].copy()
    A = np.zeros_like(B)
    A[:n, n:] = Db[:n, n:]
    A[n:, :n] = -Db[n:, :n]
    # identity enters the 11 block only
    C = B @ A
    C[:n, :n] += np.eye(n)
    return WidomBlocks(N, n, B, A, C, Db)


# ----------------------------------------------------------------------------
# Christoffel-Darboux kernel
# ----------------------------------------------------------------------------

def cd_kernel(table: RecurrenceTable, N: int, x, y, switch: float = 1e-6):
    """K_N(x, y) = b_{N-1}(phi_N(x) phi_{N-1}(y) - phi_{N-1}(x) phi_N(y)) / (x - y).

    For |x - y| < switch (1 + max(|x|, |y|)) the diagonal form is evaluated at the
    midpoint (x+y)/2; by symmetry of K_N this is exact to first order.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    b = table.b[N - 1]
    px = phi_and_derivative_all(table, x, N, deriv=False)[0]
    py = phi_and_derivative_all(table, y, N, deriv=False)[0]
    diff = x - y
    near = np.abs(diff) < switch * (1 + np.maximum(np.abs(x), np.abs(y)))
    with np.errstate(divide="ignore", invalid="ignore"):
        off = b * (px[N] * py[N - 1] - px[N - 1] * py[N]) / diff
    if np.any(near):
        mid = 0.5 * (x + y)
        pm, dm = phi_and_derivative_all(table, mid, N)
        diag = b * (dm[N] * pm[N - 1] - dm[N - 1] * pm[N])
        off = np.where(near, diag, off)
    return off if off.ndim else float(off)


def cd_kernel_sum(table: RecurrenceTable, N: int, x, y):
    """sum_{k<N} phi_k(x) phi_k(y)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    px = phi_and_derivative_all(table, x, N - 1, deriv=False)[0]
    py = phi_and_derivative_all(table, y, N - 1, deriv=False)[0]
    out = np.sum(px * py, axis=0)
    return out if out.ndim else float(out)


# ----------------------------------------------------------------------------
# scalar and matrix kernels
# ----------------------------------------------------------------------------

@dataclass
class MatrixKernelValue:
    """Entries of the 2x2 kernel (before the overall 1/2 for beta=4).

    ``ES`` excludes the -1/2 sgn(x-y) term, which is stored in ``sgn_term``.
    """

    beta: int
    x: np.ndarray
    y: np.ndarray
    S: np.ndarray
    SD: np.ndarray
    ES: np.ndarray
    S_swap: np.ndarray
    sgn_term: np.ndarray

    def entries(self) -> np.ndarray:
        """Array [..., 2, 2] of the full matrix kernel entries."""
        pref = 0.5 if self.beta == 4 else 1.0
        out = np.empty(np.shape(self.S) + (2, 2))
        out[..., 0, 0] = pref * self.S
        out[..., 0, 1] = pref * self.SD
        out[..., 1, 0] = pref * self.ES + self.sgn_term
        out[..., 1, 1] = pref * self.S_swap
        return out


class WidomKernel:
    """S_{N,1} or S_{N/2,4} written as K_N(x,y) + f(x)^T G g(y).

    f = Phi_1 (beta=1) or Phi_2 (beta=4); g = (eps Phi_1, eps Phi_2).
    """

    def __init__(self, blocks: WidomBlocks, table: RecurrenceTable, beta: int):
        if beta not in (1, 4):
            raise ValueError("beta must be 1 or 4")
        self.blocks, self.table, self.beta = blocks, table, beta
        N, n = blocks.N, blocks.n
        self.N, self.n = N, n
        I2 = np.eye(2 * n)
        if beta == 1:
            AC = blocks.A @ blocks.C
            Mmat = I2 - blocks.B @ AC
            self.cond = float(np.linalg.cond(Mmat))
            if not np.isfinite(self.cond) or self.cond > 1e12:
                raise KernelError(f"I - BAC is numerically singular (cond={self.cond:.3e})")
            M = AC @ np.linalg.inv(Mmat)
            # -(u^T M^T w) with u = (Phi_1, 0): G[a, b] = -M[b, a], a < n
            self.G = -M[:, :n].T
            self.f_index = np.arange(N - n, N)
        else:
            C11 = blocks.C11
            self.cond = float(np.linalg.cond(C11))
            if not np.isfinite(self.cond) or self.cond > 1e12:
                raise KernelError(f"C_11 is numerically singular (cond={self.cond:.3e})")
            D21 = blocks.D21
            tail = D21 @ np.linalg.solve(C11, blocks.B11 @ blocks.D12)
            self.G = np.hstack([D21, tail])
            self.f_index = np.arange(N, N + n)
        self.g_index = np.arange(N - n, N + n)

    def _data(self, x):
        J = self.N + self.n - 1
        ph, dph = phi_and_derivative_all(self.table, x, J)
        eph, _ = eps_phi_all(self.table, x, J)
        return ph, dph, eph

    def correction(self, x, y, data_x=None, data_y=None):
        px = (data_x or self._data(x))[0]
        ey = (data_y or self._data(y))[2]
        f = px[self.f_index]
        g = ey[self.g_index]
        return np.einsum("a...,ab,b...->...", f, self.G, g)

    def scalar(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return cd_kernel(self.table, self.N, x, y) + self.correction(x, y)

    def matrix(self, x, y) -> MatrixKernelValue:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        N = self.N
        dx, dy = self._data(x), self._data(y)
        px, dpx, epx = dx
        py, dpy, epy = dy
        f_x, f_y = px[self.f_index], py[self.f_index]
        ef_x = epx[self.f_index]
        g_x, g_y = epx[self.g_index], epy[self.g_index]
        gd_y = py[self.g_index]  # d/dy of eps phi is phi
        S = cd_kernel(self.table, N, x, y) + np.einsum("a...,ab,b...->...", f_x, self.G, g_y)
        S_swap = cd_kernel(self.table, N, y, x) + np.einsum("a...,ab,b...->...", f_y, self.G, g_x)
        # (S D)(x, y) = -d/dy S(x, y)
        SD = -(np.sum(px[:N] * dpy[:N], axis=0) + np.einsum("a...,ab,b...->...", f_x, self.G, gd_y))
        # (eps S)(x, y): eps acting on the first variable
        ES = np.sum(epx[:N] * py[:N], axis=0) + np.einsum("a...,ab,b...->...", ef_x, self.G, g_y)
        sgn = -0.5 * np.sign(x - y) if self.beta == 1 else np.zeros_like(x)
        return MatrixKernelValue(self.beta, x, y, S, SD, ES, S_swap, sgn)


def s_beta1(blocks: WidomBlocks, table: RecurrenceTable, N: int, x, y):
    """S_{N,1}(x, y)."""
    _check_N(blocks, N)
    return WidomKernel(blocks, table, 1).scalar(x, y)


def s_beta4(blocks: WidomBlocks, table: RecurrenceTable, N: int, x, y):
    """S_{N/2,4}(x, y), paired with K_N at the same even N."""
    _check_N(blocks, N)
    return WidomKernel(blocks, table, 4).scalar(x, y)


def _check_N(blocks, N):
    if N % 2:
        raise ValueError("N must be even")
    if blocks.N != N:
        raise ValueError(f"blocks were built for N={blocks.N}, not {N}")


def matrix_kernel(blocks: WidomBlocks, table: RecurrenceTable, N: int, beta: int, x, y) -> MatrixKernelValue:
    _check_N(blocks, N)
    return WidomKernel(blocks, table, beta).matrix(x, y)


def _kernel_matrix_at(kern: WidomKernel, pts):
    """[l, l, 2, 2] array of K(pts_i, pts_j)."""
    pts = np.asarray(pts, dtype=float)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    return kern.matrix(X, Y).entries()


def correlation(blocks: WidomBlocks, table: RecurrenceTable, N: int, beta: int, points) -> float:
    """R_{N,l,beta} for l = 1 or 2 from the trace formulas of the matrix kernel."""
    pts = list(np.atleast_1d(points))
    if len(pts) not in (1, 2):
        raise ValueError("only l = 1 or 2 points supported")
    kern = WidomKernel(blocks, table, beta)
    K = _kernel_matrix_at(kern, pts)
    if len(pts) == 1:
        return 0.5 * float(np.trace(K[0, 0]))
    t0, t1 = np.trace(K[0, 0]), np.trace(K[1, 1])
    return float(0.25 * t0 * t1 - 0.5 * np.trace(K[0, 1] @ K[1, 0]))


def cluster_function(K: np.ndarray) -> float:
    """T_l = (1/(2l)) sum over cyclic permutations of tr(K(x_s1, x_s2) ... K(x_sl, x_s1)).

    ``K`` is the [l, l, 2, 2] array of kernel values. The sum runs over all
    permutations; every cycle of length l is counted l times.
    """
    l = K.shape[0]
    if l not in (1, 2, 3):
        raise ValueError("cluster functions supported for l <= 3")
    total = 0.0
    for perm in itertools.permutations(range(l)):
        P = np.eye(2)
        for i in range(l):
            P = P @ K[perm[i], perm[(i + 1) % l]]
        total += np.trace(P)
    return float(total / (2 * l))


# ----------------------------------------------------------------------------
# section identities and the Toeplitz cross-check
# ----------------------------------------------------------------------------

def section_identity_check(table: RecurrenceTable, quad=None, N: int = 20) -> dict:
    """Checks of D eps = I and of the block structure of eps_N D_N."""
    n = table.V.n
    blocks = build_blocks(table, quad, N)
    D, valid = d_matrix(table)
    E = eps_matrix(table)
    # (i) banded product D eps restricted to indices <= N-n
    K = N - n + 1
    width = min(table.Jmax + 1, K + n)
    if not valid[:K, :width].all():
        raise IndexError("table too short for the banded product")
    DE = D[:K, :width] @ E[:width, :K]
    ED = E[:K, :width] @ D[:width, :K]
    dev_i = float(max(np.max(np.abs(DE - np.eye(K))), np.max(np.abs(ED - np.eye(K)))))
    # (ii) eps_N D_N
    P = E[:N, :N] @ banded_d(table, N).matrix
    ul = P[:N - n, :N - n]
    ll = P[N - n:, :N - n]
    lr = P[N - n:, N - n:]
    C11 = np.eye(n) - blocks.B12 @ blocks.D21
    det_c11 = float(np.linalg.det(blocks.C11))
    det_prod = float(np.linalg.det(E[:N, :N]) * np.linalg.det(banded_d(table, N).matrix))
    return {
        "N": N,
        "n": n,
        "D_eps_identity_dev": dev_i,
        "upper_left_identity_dev": float(np.max(np.abs(ul - np.eye(N - n)))),
        "lower_left_max": float(np.max(np.abs(ll))),
        "lower_right_vs_C11_dev": float(np.max(np.abs(lr - C11))),
        "C11_definition_dev": float(np.max(np.abs(blocks.C11 - C11))),
        "det_C11": det_c11,
        "det_epsN_times_det_DN": det_prod,
        "det_relative_gap": abs(det_c11 - det_prod) / abs(det_c11),
        "BAC_11_max": float(np.max(np.abs(blocks._q(blocks.B @ blocks.A @ blocks.C, 0, 0)))),
        "BAC_12_max": float(np.max(np.abs(blocks._q(blocks.B @ blocks.A @ blocks.C, 0, 1)))),
    }


def ba_reflection_defect(blocks: WidomBlocks) -> float:
    """||(BA)_22 + R (BA)_11 R||_max with R the n x n reversal."""
    BA = blocks.B @ blocks.A
    R = np.eye(blocks.n)[::-1]
    return float(np.max(np.abs(blocks._q(BA, 1, 1) + R @ blocks._q(BA, 0, 0) @ R)))


def toeplitz_inverse_crosscheck(m: int, N: int, M: int | None = None) -> dict:
    """Invert the banded Toeplitz matrix with the binomial diagonals of D and compare a
    small off-diagonal block with the limiting epsilon prediction.

    The block sits at rows M-n..M-1, columns M..M+n-1 of D~_N^{-1}; the
    prediction entry is 2(m!)^2/(2m)! * ((-1)^j/(2m) - I(j-k)) for odd j-k.
    """
    n = 2 * m - 1
    if M is None:
        M = N // 2
    if N % 2 or M % 2 or not n < M < N - n:
        raise ValueError("need N, M even and n < M < N - n")
    Dt = np.array([[thm1_limit(m, j, k) for k in range(N)] for j in range(N)], dtype=float)
    lu = linalg.lu_factor(Dt)
    if np.min(np.abs(np.diag(lu[0]))) < 1e-13:
        raise KernelError("Toeplitz section is singular")
    inv = linalg.lu_solve(lu, np.eye(N))
    rows = np.arange(M - n, M)
    cols = np.arange(M, M + n)
    block = inv[np.ix_(rows, cols)]
    scale = float(scale_constant(m))
    pred = np.zeros_like(block)
    for a, j in enumerate(rows):
        for c, k in enumerate(cols):
            if (j - k) % 2:
                pred[a, c] = scale * ((-1) ** (j % 2) / (2 * m) - i_q(m, int(j - k))[0])
    nz = np.abs(pred) > 0
    rel = np.abs(block[nz] - pred[nz]) / np.abs(pred[nz])
    return {
        "m": m, "N": N, "M": M,
        "inverse_block": block,
        "prediction": pred,
        "max_relative_gap": float(rel.max()),
        "zero_pattern_max": float(np.max(np.abs(block[~nz]))) if np.any(~nz) else 0.0,
    }
