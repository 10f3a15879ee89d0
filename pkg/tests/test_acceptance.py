"""Acceptance criteria, one test each, printing a PASS/FAIL line.

Runtime budgets are part of a criterion where one is stated.
"""

import math
import time

import pytest

from stablehit.mellin import StableParams, tau_strip
from stablehit.report import CheckPoint, VerificationReport
from stablehit.verify import (
    check_alpha2_density,
    check_alpha2_ks,
    check_clay_convexity,
    check_closed_form,
    check_density_routes,
    check_laplace_chain,
    check_moments_mc,
    check_rejection_rate,
    check_selfdecomp,
    check_shape_claims,
    mid_strip_rhos,
)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, reports, seconds=None, budget=None):
        ok = all(r.passed for r in reports)
        worst = max((r.max_deviation / r.tolerance if r.tolerance else r.max_deviation) for r in reports)
        timing = ""
        if seconds is not None:
            timing = f" in {seconds:.1f}s"
            if budget is not None:
                timing += f" (budget {budget:g}s)"
                ok = ok and seconds < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}; "
                  f"worst deviation/tolerance {worst:.3g}{timing}")
            for r in reports:
                if not r.passed:
                    print(r.to_text(max_points=12))
        return ok

    return emit


def test_criterion_1_closed_form(verdict):
    t0 = time.time()
    plist = [StableParams(a, 0.5) for a in (1.2, 1.5, 1.8, 2.0)] + [StableParams(1.5, 1 / 3), StableParams(1.3, 0.7)]
    reports = [check_closed_form(p, tolerance=1e-9) for p in plist]
    ok = verdict(1, "closed form vs RK, RK vs FINAL, RK vs YANO at rho=1/2", reports, time.time() - t0, 1.0)
    assert ok, "criterion failed; the report is printed above"


def test_criterion_2_laplace_chain(verdict):
    t0 = time.time()
    plist = [StableParams(a, r) for a in (1.2, 1.5) for r in mid_strip_rhos(a)]
    plist += [StableParams(1.5, 1 / 3), StableParams(2.0, 0.5), StableParams(1.8, 0.5)]
    reports = [check_laplace_chain(p, tolerance=1e-10, n=20) for p in plist]
    kappas = {(r.metadata["alpha"], round(r.metadata["rho"], 12)): r.metadata["kappa"] for r in reports}
    kpts = [
        CheckPoint("kappa(2, 1/2)", 2.0, kappas[(2.0, 0.5)], abs(kappas[(2.0, 0.5)] / 2.0 - 1)),
        CheckPoint("kappa(1.5, 1/3)", 1.5, kappas[(1.5, round(1 / 3, 12))], abs(kappas[(1.5, round(1 / 3, 12))] / 1.5 - 1)),
    ]
    reports.append(VerificationReport("kappa", kpts, 1e-10))
    assert len(plist) == 9
    ok = verdict(2, "Laplace-transform chain on 9 (alpha, rho) pairs", reports, time.time() - t0, 1.0)
    assert ok, "criterion failed; the report is printed above"


@pytest.mark.slow
def test_criterion_3_monte_carlo_moments(verdict):
    t0 = time.time()
    s_all = (-0.5, -0.25, 0.25)
    reports = []
    for k, a in enumerate((1.2, 1.5, 1.9)):
        for j, r in enumerate(mid_strip_rhos(a)):
            p = StableParams(a, r)
            st = tau_strip(p)
            inside = [s for s in s_all if st.contains(s)]
            rep = check_moments_mc(p, inside, N=10**6, seed=1000 + 10 * k + j, workers=4)
            # beyond the strip E[tau^s] is infinite and no finite mean can match it
            for s in s_all:
                if s not in inside:
                    rep.points.append(CheckPoint(s, math.inf, math.nan, math.inf))
                    rep.notes.append(f"s={s:g} lies outside the moment strip {st}; E[tau^s] = inf")
            reports.append(rep)
    ok = verdict(3, "Monte Carlo moments within 4 SE, N=1e6, 4 workers", reports, time.time() - t0, 120.0)
    assert ok, "criterion failed; the report is printed above"


def test_criterion_4_alpha2(verdict):
    reports = [check_alpha2_ks(N=10**5, level=0.01, seeds=10, min_pass=8),
               check_alpha2_density(0.1, 10.0, 2000, 1e-6)]
    ok = verdict(4, "alpha=2 reduction (KS 8/10 seeds, density sup error 1e-6)", reports)
    assert ok, "criterion failed; the report is printed above"


def test_criterion_5_unimodality(verdict):
    reports = [check_density_routes(sup_tol=1e-4, smoothing_tolerance=1e-3)]
    ok = verdict(5, "unimodality by both density routes on a 3x3 grid, routes within 1e-4", reports)
    assert ok, "criterion failed; the report is printed above"


def test_criterion_6_shape_and_convexity(verdict):
    t0 = time.time()
    reports = [check_selfdecomp(), check_clay_convexity((0.25, 0.5, 0.75, 1 - 1e-9))]
    reports += [check_shape_claims(StableParams(a, 0.5)) for a in (1.2, 1.5, 1.8)]
    reports += [check_shape_claims(StableParams(1.6, 0.45), kasym_grid=[])]
    ok = verdict(6, "self-decomposability, convexity and shape claims", reports, time.time() - t0, 300.0)
    assert ok, "criterion failed; the report is printed above"


def test_criterion_7_rejection_rate(verdict):
    reports = [check_rejection_rate((0.5, 0.75), (0.5, 2 / 3), N=10**6, n_se=3.0)]
    ok = verdict(7, "rejection acceptance rate within 3 SE of E[K_c^t]", reports)
    assert ok, "criterion failed; the report is printed above"
