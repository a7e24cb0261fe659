import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from bulkuniv.asymptotics import mrs_leading
from bulkuniv.orthopoly import (Potential, build_quadrature, epsilon_phi, eval_phi, eval_phi_derivative,
                                gram_matrix, phi_value, recurrence_table, total_integral_phi,
                                xq_expansion_check)


# ----------------------------------------------------------------------------
# Potential
# ----------------------------------------------------------------------------

def test_potential_parse_roundtrip():
    V = Potential.parse("k4=1,k2=-0.5")
    assert V.m == 2 and V.n == 3
    assert V.coeffs == (0, 0, Fraction(-1, 2), 0, 1)
    assert Potential.parse(V.spec()) == V


@pytest.mark.parametrize("bad", ["k3=1", "k4=-1", "", "x4=1", "k4="])
def test_potential_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        Potential.parse(bad)


def test_potential_monomial():
    assert Potential.monomial(6).spec() == "k6=1"


# ----------------------------------------------------------------------------
# quadrature
# ----------------------------------------------------------------------------

def test_gaussian_tail_truncation_128_bits():
    q = build_quadrature(Potential.parse("k2=1"), 128)
    assert math.exp(-q.T ** 2) < 2.0 ** -138
    assert q.T <= 12
    assert np.all(q.w > 0)


def test_quartic_total_mass_matches_gamma_closed_form(quartic):
    # int e^{-x^4} dx = Gamma(1/4)/2
    mpmath.mp.dps = 80
    exact = mpmath.gamma(mpmath.mpf(1) / 4) / 2
    assert abs(mpmath.mpf(quartic.mu0_str) - exact) < 1e-30


def test_nonsymmetric_mass_matches_adaptive_quadrature():
    V = Potential.parse("k4=1,k1=0.3")
    tab = recurrence_table(V, 4, precision_bits=256, use_cache=False)
    mpmath.mp.dps = 40
    ref = mpmath.quad(lambda x: mpmath.exp(-(x ** 4 + mpmath.mpf(3) / 10 * x)), [-mpmath.inf, -1, 0, 1, mpmath.inf])
    assert abs(mpmath.mpf(tab.mu0_str) - ref) < 1e-25


def test_precision_below_64_rejected():
    with pytest.raises(ValueError):
        build_quadrature(Potential.parse("k2=1"), 32)


# ----------------------------------------------------------------------------
# recurrence coefficients
# ----------------------------------------------------------------------------

def _hankel_b(moments, jmax):
    """b_j from exact Hankel determinants of the moments (even weight)."""
    def hdet(k):
        if k == 0:
            return Fraction(1)
        M = [[moments[i + j] for j in range(k)] for i in range(k)]
        return _fraction_det(M)
    dets = [hdet(k) for k in range(jmax + 3)]
    # b_j^2 = H_{j+2} H_j / H_{j+1}^2
    return [math.sqrt(dets[j + 2] * dets[j] / dets[j + 1] ** 2) for j in range(jmax + 1)]


def _fraction_det(M):
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next(r for r in range(c, n) if M[r][c] != 0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


def test_hermite_coefficients_match_hankel_oracle(gaussian):
    # moments of e^{-x^2} divided by sqrt(pi): (2k-1)!!/2^k for even order
    mom = []
    for k in range(16):
        if k % 2:
            mom.append(Fraction(0))
        else:
            h = k // 2
            mom.append(Fraction(math.prod(range(1, 2 * h, 2)), 2 ** h))
    b_ref = _hankel_b(mom, 5)
    for j in range(6):
        assert abs(gaussian.b[j] - b_ref[j]) < 1e-14
        assert abs(gaussian.b[j] - math.sqrt((j + 1) / 2)) < 1e-14
    assert abs(gaussian.b[3] - math.sqrt(2)) < 1e-14
    assert np.max(np.abs(gaussian.a)) < 1e-20


def test_quartic_b_matches_half_mrs_number(quartic):
    c40 = mrs_leading(quartic.V, 40)[0]
    assert abs(quartic.b[40] / (c40 / 2) - 1) < 0.1


def test_even_potential_has_vanishing_a(quartic):
    assert np.max(np.abs(quartic.a)) < 1e-20


def test_b_positive_and_ratio_trend(quartic):
    assert np.all(quartic.b > 0)
    assert abs(quartic.b[-1] / quartic.b[-2] - 1) < 0.2
    dev = [abs(quartic.b[N] / quartic.b[N - 1] - 1) for N in (10, 20, 40)]
    assert dev[0] > dev[1] > dev[2]


def test_orthonormality(quartic):
    G = gram_matrix(quartic, 30)
    assert np.max(np.abs(G - np.eye(31))) < 1e-12


def test_cache_roundtrip_is_decimal_json(tmp_path):
    V = Potential.parse("k2=1")
    t1 = recurrence_table(V, 8, precision_bits=128, cache_dir=tmp_path)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    data = json.loads(files[0].read_text())
    assert all(isinstance(v, str) for v in data["b"])
    t2 = recurrence_table(V, 8, precision_bits=128, cache_dir=tmp_path)
    assert t2.b_str == t1.b_str


# ----------------------------------------------------------------------------
# phi, phi', eps phi
# ----------------------------------------------------------------------------

def test_hermite_phi0_and_phi1_derivative(gaussian):
    assert abs(eval_phi(gaussian, 0, 0.0) - math.pi ** -0.25) < 1e-14
    assert abs(eval_phi_derivative(gaussian, 0, 0.0)) < 1e-15
    assert abs(eval_phi_derivative(gaussian, 1, 0.0) - math.sqrt(2) * math.pi ** -0.25) < 1e-14


def test_odd_phi_vanishes_at_zero(quartic):
    assert abs(eval_phi(quartic, 1, 0.0)) < 1e-15


def test_phi_parity(quartic):
    x = np.linspace(-2, 2, 41)
    for j in (4, 7, 30):
        assert np.allclose(eval_phi(quartic, j, -x), (-1) ** j * eval_phi(quartic, j, x), atol=1e-13)


def test_derivative_matches_central_difference(quartic):
    x = np.linspace(-2.5, 2.5, 26)
    h = 1e-6
    for j in (0, 5, 20):
        fd = (eval_phi(quartic, j, x + h) - eval_phi(quartic, j, x - h)) / (2 * h)
        d = eval_phi_derivative(quartic, j, x)
        assert np.max(np.abs(fd - d)) <= 1e-8 * max(1.0, np.max(np.abs(d)))


def test_phi_index_error(quartic):
    with pytest.raises(IndexError):
        eval_phi(quartic, quartic.Jmax + 1, 0.0)


def test_eps_parity_even_index(quartic):
    x = np.linspace(0, 3, 13)
    for j in (0, 2, 10):
        assert np.max(np.abs(epsilon_phi(quartic, j, x) + epsilon_phi(quartic, j, -x))) < 1e-12


def test_eps_tails_vanish_for_odd_hermite(gaussian):
    for j in (1, 3, 7):
        v = phi_value(gaussian, j, 1e3)
        assert v.outside_window
        assert abs(v.eps_value) < 1e-12
        assert abs(epsilon_phi(gaussian, j, -1e3)) < 1e-12


def test_eps_derivative_is_phi(quartic):
    x = np.linspace(-2, 2, 9)
    h = 1e-5
    for j in (3, 12):
        fd = (epsilon_phi(quartic, j, x + h) - epsilon_phi(quartic, j, x - h)) / (2 * h)
        assert np.max(np.abs(fd - eval_phi(quartic, j, x))) < 1e-8


def test_eps_sup_norm_scaling(quartic):
    x = np.linspace(-6, 6, 4001)
    vals = []
    for N in (10, 20, 40):
        c = mrs_leading(quartic.V, N)[0]
        vals.append(np.max(np.abs(epsilon_phi(quartic, N, x))) * math.sqrt(N / c))
    assert max(vals) <= 5
    assert max(vals) / min(vals) < 3


def test_phi_sup_norm_scaling(quartic):
    vals = []
    for N in (10, 20, 40):
        c = mrs_leading(quartic.V, N)[0]
        x = np.linspace(-c / 4, c / 4, 2001)
        vals.append(np.max(np.abs(eval_phi(quartic, N, x))) * math.sqrt(c))
    assert max(vals) / min(vals) < 3


def test_total_integral_odd_vanishes(quartic):
    tot = total_integral_phi(quartic)
    assert np.max(np.abs(tot[1::2])) < 1e-12


def test_total_integral_asymptotic_factor(quartic):
    j = 40
    c = mrs_leading(quartic.V, j)[0]
    ratio = total_integral_phi(quartic, j) / (math.sqrt(c / j) / math.sqrt(4) * 2)
    assert 0.8 <= ratio <= 1.2


def test_total_integral_matches_trapezoid(gaussian):
    x = np.arange(-12, 12, 1e-3)
    ref = integrate.trapezoid(eval_phi(gaussian, 10, x), x)
    assert abs(total_integral_phi(gaussian, 10) - ref) < 1e-10


# ----------------------------------------------------------------------------
# x^q expansion
# ----------------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(N=st.integers(min_value=1, max_value=60))
def test_xq_q1_ratios_exact(quartic, N):
    r = xq_expansion_check(quartic, N, 1)
    assert r["ratios"][0] == pytest.approx(quartic.b[N - 1] / quartic.b[N], rel=1e-14)
    assert r["ratios"][1] == pytest.approx(1.0, rel=1e-14)


def test_xq_q3_even_offsets(quartic):
    r = xq_expansion_check(quartic, 40, 3)
    assert all(abs(v - 1) < 0.15 for v in r["ratios"])


def test_xq_q2_odd_offsets_small(quartic):
    r = xq_expansion_check(quartic, 40, 2)
    assert all(abs(v) < 0.1 for v in r["odd_offsets"])


def test_xq_range_error(quartic):
    with pytest.raises(ValueError):
        xq_expansion_check(quartic, 62, 3)


def test_precision_calibration(quartic, cache_dir):
    # the discretized Stieltjes build loses about 0.35 digits per degree
    mpmath.mp.dps = 60
    ref = recurrence_table(quartic.V, 64, precision_bits=384, cache_dir=cache_dir)
    low = recurrence_table(quartic.V, 64, precision_bits=128, cache_dir=cache_dir)

    def dev(tab, j):
        return abs(mpmath.mpf(tab.b_str[j]) / mpmath.mpf(ref.b_str[j]) - 1)

    assert max(dev(quartic, j) for j in range(65)) < 1e-40
    assert dev(low, 64) > 1e-16
