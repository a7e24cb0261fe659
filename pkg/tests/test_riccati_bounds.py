import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bulkuniv.riccati_bounds import (BoundLedger, GRatio, YmEvaluator, appendix_H, appendix_L, delta_k,
                                     g_funcs, h_positivity_certificate, h_tail_bound, int_x, int_x_bounds,
                                     riccati_residual, verify_H_integral, verify_L_bound, y_from_g,
                                     y_m_eval, y_m_profile)

# ----------------------------------------------------------------------------
# y_m
# ----------------------------------------------------------------------------


@pytest.mark.parametrize("m", range(2, 11))
def test_y_endpoints(m):
    assert abs(y_m_eval(m, 0.0) + 0.5) < 1e-12
    assert abs(y_m_eval(m, math.pi / 2)) < 1e-10


@pytest.mark.parametrize("m", range(3, 9))
def test_y_second_derivative_at_zero(m):
    h = 1e-3
    ypp = (2 * y_m_eval(m, h) - 2 * y_m_eval(m, 0.0)) / h ** 2
    assert abs(ypp + 0.5 * (2 * m - 1) / (2 * m - 3)) < 1e-4


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 12), t=st.floats(0, math.pi / 2))
def test_y_even(m, t):
    assert y_m_eval(m, -t) == pytest.approx(y_m_eval(m, t), abs=1e-15)


@pytest.mark.parametrize("m", [2, 5, 9])
def test_stable_form_matches_literal_formula(m):
    ev = YmEvaluator(m)
    th = np.linspace(0, math.pi / 2 - 0.05, 50)
    assert np.max(np.abs(ev(th) - ev.direct(th))) < 1e-12
    with pytest.raises(ValueError):
        ev.direct(math.pi / 2 - 1e-5)


@pytest.mark.parametrize("m", [2, 6])
def test_y_continuous_at_right_endpoint(m):
    d = np.logspace(-3, -9, 7)
    slope = y_m_eval(m, math.pi / 2 - d) / d
    # y vanishes linearly at pi/2 with no jump between the evaluation branches
    assert np.max(np.abs(slope / slope[-1] - 1)) < 1e-5
    assert abs(y_m_eval(m, math.pi / 2 - 1e-12)) < 1e-10


def test_y_rejects_outside_range():
    with pytest.raises(ValueError):
        y_m_eval(3, 2.0)


@pytest.mark.parametrize("m", range(2, 11))
def test_y_profile(m):
    th = np.linspace(0, math.pi / 2, 2001)
    y = y_m_eval(m, th)
    assert np.max(y) <= 1e-10
    tmin, ymin, uni = y_m_profile(m)
    assert uni
    assert ymin >= -0.5 * math.sqrt(m + 0.5)
    assert ymin <= np.min(y) + 1e-12


def test_y_min_m10_between_bounds():
    ymin = y_m_profile(10)[1]
    assert -0.5 * math.sqrt(10.5) < ymin < -0.5


@pytest.mark.parametrize("m", range(1, 9))
def test_riccati_residual(m):
    assert riccati_residual(m)["max_residual"] < 1e-6


def test_riccati_residual_fourth_order():
    coarse = riccati_residual(5, step=1e-2)["max_residual"]
    fine = riccati_residual(5, step=1e-3)["max_residual"]
    assert coarse / fine >= 100


def test_riccati_grid_guard():
    with pytest.raises(ValueError):
        riccati_residual(3, [0.0005, 0.5])


# ----------------------------------------------------------------------------
# G and G_a
# ----------------------------------------------------------------------------

def test_G_at_zero_beta_integral():
    G, Ga, gap = g_funcs(5, 0.0)
    assert G == pytest.approx(2 / 3, abs=1e-12)
    assert Ga == pytest.approx(2 / 3, abs=1e-12)


def test_G_gap_bound_m38():
    m = 38
    k = m + 0.5
    for rho in np.linspace(m ** -0.5, 5, 12):
        G, Ga, gap = g_funcs(m, rho)
        assert 0 <= gap <= delta_k(m, k * rho) / k
        assert delta_k(m, k * rho) <= 6
        assert 0 < Ga <= G < 1


@pytest.mark.parametrize("m,theta", [(4, 0.7)] + [(m, t) for m in (3, 5, 38) for t in (0.1, 0.6, 1.2, math.pi / 2 - 0.1)])
def test_y_from_G_matches_direct(m, theta):
    assert abs(y_from_g(m, theta) - y_m_eval(m, theta)) < 1e-8


def test_g_funcs_rejects_negative_rho():
    with pytest.raises(ValueError):
        g_funcs(3, -0.1)


def test_gratio_k():
    assert GRatio(7).k == 7.5


# ----------------------------------------------------------------------------
# INT, L, H
# ----------------------------------------------------------------------------

@pytest.mark.parametrize("x", [0.5, 4.0, 9.0, 25.0])
def test_int_x_matches_quadrature(x):
    ref = integrate.quad(lambda t: 2 * math.exp(x * (t * t - 1)), 0, 1, epsabs=0, epsrel=1e-13)[0]
    assert int_x(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("x", [4.0, 9.0, 25.0])
def test_int_x_inside_enclosure(x):
    lo, hi = int_x_bounds(x, 0.8)
    assert lo <= int_x(x) <= hi


def test_int_x_simple_lower_bound():
    assert int_x(1.0) >= (1 - math.exp(-1.0)) / 1.0


def test_int_x_enclosure_shrinks():
    w25 = np.subtract(*int_x_bounds(25.0, 0.8)[::-1])
    w50 = np.subtract(*int_x_bounds(50.0, 0.8)[::-1])
    assert w50 / w25 < 0.1


def test_int_x_bounds_rejects_bad_a():
    with pytest.raises(ValueError):
        int_x_bounds(4.0, 1.5)


def test_L_at_zero():
    assert appendix_L(0.0) == 0.0


def test_L_below_six_on_grid():
    s = np.concatenate([np.linspace(0.01, 30, 300), [60.0, 100.0]])
    assert max(appendix_L(v) for v in s) <= 6


def test_H_at_zero():
    assert appendix_H(0.0) == -2.0


def test_H_positive_3_to_40():
    s = np.linspace(3, 40, 7401)
    assert np.all(appendix_H(s) > 0)


def test_H_below_tail_bound():
    s = np.linspace(6, 30, 241)
    assert np.all(appendix_H(s) <= h_tail_bound(s))


def test_H_derivative_budgets():
    s = np.linspace(0.05, 6, 400)
    d = 1e-4
    d1 = (appendix_H(s + d) - appendix_H(s - d)) / (2 * d)
    d2 = (appendix_H(s + d) - 2 * appendix_H(s) + appendix_H(s - d)) / d ** 2
    assert np.all(np.abs(d1) <= 4 * s ** 3 + 4 * s)
    assert np.all(np.abs(d2) <= 24 * s ** 4 + 20 * s ** 2 + 4)


def test_positivity_certificate():
    cert = h_positivity_certificate(9.0)
    assert cert["positive"]
    assert cert["numer_lower"] > 0


# ----------------------------------------------------------------------------
# ledgers
# ----------------------------------------------------------------------------

def test_ledger_pass_rule():
    assert BoundLedger("q", 1.0, 0.1, {}, 1.2).passed
    assert not BoundLedger("q", 1.0, 0.3, {}, 1.2).passed
    assert BoundLedger("q", 1.0, 0.1, {}, 0.8, direction=">=").passed


@pytest.fixture(scope="module")
def L_ledger():
    return verify_L_bound()


@pytest.fixture(scope="module")
def H_ledger():
    return verify_H_integral()


def test_L_ledger_segments(L_ledger):
    summ, seg = L_ledger
    assert summ.passed and summ.details["segments_pass"]
    assert seg["L[0,2]"].passed and seg["L[25,inf)"].passed
    assert seg["L2 mesh"].value <= 5.185
    assert seg["prefactor"].value + seg["prefactor"].radius <= 1.157
    assert seg["Lipschitz"].value <= 75


def test_L_interior_mesh_max_is_an_upper_bound(L_ledger):
    _, seg = L_ledger
    det = seg["L2 mesh"].details
    s = det["argmax_s"]
    # the true L2 at the argmax lies below the rigorous mesh value
    true = s ** 3 * integrate.quad(lambda t: math.exp(-0.855 * s * (1 - t * t)) * (1 - t * t) ** 2 * 2,
                                   0, 1, epsabs=0, epsrel=1e-13)[0]
    assert true <= det["mesh_max_L2_upper"]


def test_H_ledger_segments(H_ledger):
    summ, seg = H_ledger
    assert seg["H[0,3]"].value <= 2.247
    assert seg["H[3,6]"].value + seg["H[3,6]"].radius <= 0.309
    assert seg["H[6,inf)"].value <= 0.233
    assert summ.value <= 2.8 and summ.passed


def test_paper_sum_of_targets():
    assert 0.233 + 2.247 + 0.309 == pytest.approx(2.789)
    assert 0.233 + 2.247 + 0.309 < 2.8


def test_ledgers_deterministic(L_ledger, H_ledger):
    a, b = verify_L_bound(), verify_H_integral()
    assert a[0].to_dict() == L_ledger[0].to_dict()
    assert {k: v.to_dict() for k, v in b[1].items()} == {k: v.to_dict() for k, v in H_ledger[1].items()}


@pytest.mark.parametrize("kw", [{"Ne": 100}, {"Ni": 5000}])
def test_meshes_may_not_be_coarsened(kw):
    with pytest.raises(ValueError):
        verify_L_bound(**kw)


def test_H_mesh_may_not_be_coarsened():
    with pytest.raises(ValueError):
        verify_H_integral(Ne1=500)
