"""Acceptance suite: ten numbered criteria at their stated tolerances.

Each test records one ``ACCEPTANCE k: PASS|FAIL ...`` line, which the
conftest hook prints in the terminal summary. Run directly with
``python tests/test_acceptance.py`` or through pytest.
"""

import math
import sys
import time

import numpy as np
import pytest

from bulkuniv.asymptotics import h_structure_check, i_q, iq_table, theta_ode_check
from bulkuniv.limit_determinants import (c2_summands, central_term, crude_bound, det_report,
                                         large_m_bound, refined_bound)
from bulkuniv.orthopoly import gram_matrix
from bulkuniv.riccati_bounds import (appendix_H, riccati_residual, verify_H_integral,
                                     verify_L_bound, y_m_eval, y_m_profile)
from bulkuniv.universality_harness import (GapSpec, gap_probability,
                                           nystrom_self_consistency, scaled_kernel,
                                           scaled_kernel_error, scaling_spec)
from bulkuniv.widom_kernels import (WidomKernel, ba_reflection_defect, build_blocks, cd_kernel, d_matrix,
                                    d_entry_derivative_route, section_identity_check,
                                    toeplitz_inverse_crosscheck)

PRINTED_INVERSE = np.array([[-0.01630, 0.0, 0.00435],
                            [0.0, 0.15078, 0.0],
                            [0.06113, 0.0, -0.01630]])
PRINTED_PREDICTION = np.array([[-0.01635, 0.0, 0.00438],
                               [0.0, 0.15032, 0.0],
                               [0.06100, 0.0, -0.01635]])


def _report(log, k, checks, elapsed, budget):
    """Record the verdict line for criterion k and return the failing check names."""
    checks = dict(checks)
    checks[f"runtime<{budget}s"] = elapsed < budget
    bad = [name for name, ok in checks.items() if not ok]
    status = "PASS" if not bad else "FAIL"
    detail = f"{len(checks) - len(bad)}/{len(checks)} checks" + (f"; failing: {', '.join(bad)}" if bad else "")
    line = f"ACCEPTANCE {k}: {status} ({detail}; {elapsed:.1f}s)"
    log.append(line)
    print(line)
    return bad


def test_criterion_01_toeplitz_inverse_m2_N20(acceptance_log):
    t0 = time.perf_counter()
    rep = toeplitz_inverse_crosscheck(2, 20, 10)
    block = rep["inverse_block"]
    # rounding to 5 decimals may move the last printed digit by one unit
    printed_match = float(np.max(np.abs(np.round(block, 5) - PRINTED_INVERSE))) <= 1e-5 + 1e-12
    pred_match = float(np.max(np.abs(np.round(rep["prediction"], 5) - PRINTED_PREDICTION))) <= 1e-5 + 1e-12
    checks = {
        "inverse block matches printed matrix": printed_match,
        "prediction matches printed matrix": pred_match,
        "relative gap <= 0.8%": rep["max_relative_gap"] <= 0.008,
    }
    bad = _report(acceptance_log, 1, checks, time.perf_counter() - t0, 60)
    assert not bad, bad


def test_criterion_02_toeplitz_inverse_N40(acceptance_log):
    t0 = time.perf_counter()
    limits = {2: 2e-5, 3: 5e-5, 4: 2e-4}
    gaps = {m: toeplitz_inverse_crosscheck(m, 40, 20)["max_relative_gap"] for m in limits}
    checks = {f"m={m} gap {gaps[m]:.3g} < {lim:g}": gaps[m] < lim for m, lim in limits.items()}
    bad = _report(acceptance_log, 2, checks, time.perf_counter() - t0, 300)
    assert not bad, bad


def test_criterion_03_determinant_equality(acceptance_log):
    t0 = time.perf_counter()
    gaps = {m: det_report(m)["relative_gap"] for m in range(2, 15)}
    checks = {f"m={m}": g < 1e-9 for m, g in gaps.items()}
    bad = _report(acceptance_log, 3, checks, time.perf_counter() - t0, 60)
    assert not bad, bad


def test_criterion_04_bound_chain(acceptance_log):
    t0 = time.perf_counter()
    checks = {
        "crude < 1 for m=2..51": all(crude_bound(m).bound_value < 1 for m in range(2, 52)),
        "refined < 1 for m=2..99": all(refined_bound(m).bound_value < 1 for m in range(2, 100)),
        "C2(58) < 1.997": large_m_bound(58).components["C2"] < 1.997,
        "C2 * central < 0.996 for m=38..57": all(
            large_m_bound(m).components["C2"] * float(central_term(m)) < 0.996 for m in range(38, 58)),
    }
    samples = [c2_summands(m) for m in (58, 100, 200)]
    for name in samples[0]:
        seq = [s[name] for s in samples]
        checks[f"C2 summand {name} decreasing"] = all(b < a for a, b in zip(seq, seq[1:]))
    bad = _report(acceptance_log, 4, checks, time.perf_counter() - t0, 60)
    assert not bad, bad


def test_criterion_05_appendix_ledgers(acceptance_log):
    t0 = time.perf_counter()
    Ls, Lseg = verify_L_bound()
    Hs, Hseg = verify_H_integral()
    h3 = Hseg["H[3,6]"]
    grid = np.linspace(3.0, 40.0, 3701)
    hvals = np.array([appendix_H(s) for s in grid])
    checks = {
        "max L <= 6 with all segments": Ls.passed and Ls.details["segments_pass"],
        "interior value <= 5.162": Lseg["L2 mesh"].value <= 5.162,
        "int_0^3 |H| <= 2.247": Hseg["H[0,3]"].passed,
        "int_3^6 H <= 0.309": h3.value + h3.radius <= 0.309,
        "int_6^inf |H| <= 0.233": Hseg["H[6,inf)"].passed,
        "total <= 2.8": Hs.passed and Hs.details["segments_pass"],
        "H(0) = -2": appendix_H(0.0) == -2.0,
        "H > 0 on [3, 40]": bool(np.all(hvals > 0)),
    }
    bad = _report(acceptance_log, 5, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


def test_criterion_06_ode_and_riccati(acceptance_log):
    t0 = time.perf_counter()
    checks = {}
    ms = range(2, 9)
    checks["h-ODE residual exactly 0"] = all(h_structure_check(m)["ode_residual_exact"] == 0 for m in ms)
    checks["theta-ODE residual < 1e-10"] = all(theta_ode_check(m)["max_residual"] < 1e-10 for m in ms)
    grid = np.linspace(0.02, math.pi / 2 - 0.02, 201)
    checks["Riccati residual < 1e-6"] = all(riccati_residual(m, grid)["max_residual"] < 1e-6 for m in ms)
    checks["y(0) = -1/2"] = all(abs(float(y_m_eval(m, 0.0)) + 0.5) < 1e-12 for m in ms)
    checks["y(pi/2) = 0"] = all(abs(float(y_m_eval(m, math.pi / 2))) < 1e-10 for m in ms)
    checks["y_min >= -sqrt(m+1/2)/2"] = all(y_m_profile(m)[1] >= -0.5 * math.sqrt(m + 0.5) for m in ms)
    h = 1e-3
    ypp_ok = True
    for m in range(3, 9):
        ypp = (y_m_eval(m, h) - 2 * y_m_eval(m, 0.0) + y_m_eval(m, -h)) / h ** 2
        ypp_ok &= abs(float(ypp) + 0.5 * (2 * m - 1) / (2 * m - 3)) < 1e-4
    checks["y''(0) law"] = ypp_ok
    bad = _report(acceptance_log, 6, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


def test_criterion_07_structure_identities(acceptance_log, quartic):
    t0 = time.perf_counter()
    N, n = 20, 3
    G = gram_matrix(quartic, 30)
    D, valid = d_matrix(quartic)
    route_gap = max(abs(D[j, k] - d_entry_derivative_route(quartic, j, k))
                  for j in range(31) for k in range(31) if j != k)
    band = max(abs(d_entry_derivative_route(quartic, j, k))
               for j in range(31) for k in range(31) if abs(j - k) > n)
    sec = section_identity_check(quartic, None, N)
    refl = ba_reflection_defect(build_blocks(quartic, None, N))
    checks = {
        "orthonormality < 1e-12": float(np.max(np.abs(G - np.eye(31)))) < 1e-12,
        "D by derivative route equality < 1e-8": route_gap < 1e-8,
        "bandedness beyond n < 1e-8": band < 1e-8,
        "eps_N D_N block structure < 1e-8": max(sec["upper_left_identity_dev"], sec["lower_left_max"],
                                                sec["lower_right_vs_C11_dev"], sec["D_eps_identity_dev"]) < 1e-8,
        "(BAC)_11, (BAC)_12 < 1e-8": max(sec["BAC_11_max"], sec["BAC_12_max"]) < 1e-8,
        "reflection defect < 0.1": refl < 0.1,
    }
    bad = _report(acceptance_log, 7, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


def test_criterion_08_universality(acceptance_log, quartic, gaussian):
    t0 = time.perf_counter()
    checks = {}
    for m, tab in ((1, gaussian), (2, quartic)):
        errs, ratio_ok, diag_ok = {}, True, True
        for N in (20, 40):
            bl = build_blocks(tab, None, N)
            kr = cd_kernel(tab, N, np.array(0.0), np.array(0.0))
            for beta in (1, 4):
                errs[(beta, N)] = scaled_kernel_error(bl, tab, N, beta)
                kern = WidomKernel(bl, tab, beta)
                sc = scaling_spec(bl, tab, N, beta)
                diag_ok &= abs(scaled_kernel(kern, sc, 0.0, 0.0)[0, 0] - 1) < 0.05
                s = float(kern.scalar(np.array(0.0), np.array(0.0)))
                ratio_ok &= abs(s / float(kr) - 1) <= 3 / math.sqrt(N)
            if N == 40:
                e2 = scaled_kernel_error(None, tab, N, 2)[0, 0]
                checks[f"m={m} beta=2 sup error {e2:.3g} < 0.05"] = e2 < 0.05
        for beta in (1, 4):
            checks[f"m={m} beta={beta} entries decrease 20->40"] = bool(np.all(errs[(beta, 40)] < errs[(beta, 20)]))
        checks[f"m={m} diagonal normalization"] = diag_ok
        checks[f"m={m} S/K within 3/sqrt(N)"] = ratio_ok
    bad = _report(acceptance_log, 8, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


def test_criterion_09_gap_probabilities(acceptance_log, quartic):
    t0 = time.perf_counter()
    small = {b: gap_probability(GapSpec(1e-3, 40, b), "limit") for b in (1, 2, 4)}
    p01 = gap_probability(GapSpec(0.1, 40, 2), "limit")
    bl = build_blocks(quartic, None, 40)
    spec = GapSpec(0.5, 40, 2)
    fin = gap_probability(spec, "finite", bl, quartic, 40, 0.0)
    lim = gap_probability(spec, "limit")
    changes = [nystrom_self_consistency(GapSpec(0.5, 40, b), "limit")["change"] for b in (1, 2, 4)]
    changes += [nystrom_self_consistency(GapSpec(0.5, 40, b), "finite", blocks=bl, table=quartic, N=40)["change"]
                for b in (1, 2, 4)]
    checks = {
        "theta=1e-3 limit >= 0.995": all(p >= 0.995 for p in small.values()),
        "beta=2 theta=0.1 within 2e-3 of 0.8": abs(p01 - 0.8) < 2e-3,
        "finite vs limit beta=2 within 5e-2": abs(fin - lim) < 5e-2,
        "Nystrom doubling change < 1e-4": max(changes) < 1e-4,
    }
    bad = _report(acceptance_log, 9, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


def test_criterion_10_iq_sanity(acceptance_log):
    t0 = time.perf_counter()
    m1 = all(abs(i_q(1, q)[0] - math.copysign(0.5, q)) < 1e-10 for q in (1, -1, 3, -3))
    bound = True
    for m in (3, 5, 10):
        tab = iq_table(m)
        cap = 4 * math.sqrt(m + 0.5) / math.pi
        bound &= all(abs(tab.Itilde(q)) <= cap / q for q in range(3, 4 * m - 4, 2))
    it50 = i_q(50, 3)[1]
    checks = {
        "m=1 I(q) = sgn(q)/2": m1,
        "|I~(q)| <= 4 sqrt(m+1/2)/(q pi)": bound,
        f"I~(3) at m=50 ({it50:.4f}) within 0.15 of -1/2": abs(it50 + 0.5) <= 0.15,
    }
    bad = _report(acceptance_log, 10, checks, time.perf_counter() - t0, 600)
    assert not bad, bad


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
