import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablehit.specfun import (
    GammaRatioSpec,
    PoleError,
    gamma_ratio,
    gamma_sign,
    kanter_b,
    kappa_const,
    log_gamma,
    log_gamma_ratio,
    log_kanter_b,
    spectral_phi,
)

# mpmath values at 30 digits
LOG_GAMMA = {
    0.5: 0.57236494292470008707,
    3.7: 1.4280723266653881292,
    -2.5: -0.056243716497674050673,
    150.2: 601.01106392589216349,
}


@pytest.mark.parametrize("x,expected", LOG_GAMMA.items())
def test_log_gamma_frozen(x, expected):
    assert log_gamma(x) == pytest.approx(expected, rel=1e-14, abs=1e-15)


@given(st.floats(min_value=-30.0, max_value=170.0).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
@settings(max_examples=200, deadline=None)
def test_log_gamma_matches_mpmath(x):
    exact = float(mp.log(abs(mp.gamma(x))))
    assert log_gamma(x) == pytest.approx(exact, rel=1e-12, abs=1e-12)
    assert gamma_sign(x) == (1.0 if mp.gamma(x) > 0 else -1.0)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_log_gamma_poles(x):
    with pytest.raises(PoleError):
        log_gamma(x)


def test_log_gamma_overflow_and_ratio_overflow():
    with pytest.raises(OverflowError):
        log_gamma(1e308)
    with pytest.raises(OverflowError):
        gamma_ratio(GammaRatioSpec((200.0,), (1.0,)))


def test_gamma_ratio_spec():
    assert gamma_ratio(GammaRatioSpec((2.0,), (1.5,))) == pytest.approx(1.1283791670955126, rel=1e-14)
    # Gamma(-0.5) / Gamma(0.5) = -2
    assert gamma_ratio(GammaRatioSpec((-0.5,), (0.5,))) == pytest.approx(-2.0, rel=1e-14)
    with pytest.raises(PoleError):
        GammaRatioSpec((1.0,), (-2.0,))
    lv, sg = log_gamma_ratio([np.array([3.0, 4.0])], [np.array([1.0, 2.0])])
    np.testing.assert_allclose(sg * np.exp(lv), [2.0, 6.0], rtol=1e-14)


def test_kappa_and_kanter_endpoints():
    assert kappa_const(0.5) == pytest.approx(2.0, rel=1e-15)
    # b_c decreases from kappa_c to 0
    assert kanter_b(0.3, 1e-12) == pytest.approx(kappa_const(0.3), rel=1e-12)
    assert kanter_b(0.3, 1e-5) == pytest.approx(kappa_const(0.3), rel=1e-8)
    assert kanter_b(0.3, v=1e-12) < 1e-10
    u = np.linspace(1e-6, 1 - 1e-6, 5001)
    for c in (0.1, 0.5, 0.9):
        assert np.all(np.diff(kanter_b(c, u)) < 0)


@pytest.mark.parametrize(
    "c,u,expected",
    [(0.5, 0.5, 0.34657359027997265471), (0.3, 0.1, 0.60045601453632786522), (0.75, 0.9, -0.9468876465523141248)],
)
def test_log_kanter_frozen(c, u, expected):
    assert log_kanter_b(c, u) == pytest.approx(expected, rel=1e-13)
    assert log_kanter_b(c, v=1 - u) == pytest.approx(expected, rel=1e-12)


def test_kanter_v_side_accuracy():
    # near u = 1 the v-form keeps relative accuracy: b(1 - v) ~ m0 v
    c = 0.4
    m0 = math.pi / (math.sin(math.pi * c) ** c * math.sin(math.pi * (1 - c)) ** (1 - c))
    for v in (1e-9, 1e-12, 1e-15):
        assert kanter_b(c, v=v) / (m0 * v) == pytest.approx(1.0, rel=1e-6)


def test_kanter_rejects_bad_input():
    with pytest.raises(ValueError):
        kanter_b(1.0, 0.5)
    with pytest.raises(ValueError):
        kanter_b(0.5, 1.0)


PHI = {
    (0.5, 1e-3): 0.49975000002083333124,
    (0.3, 0.5): 0.34961383859827882565,
    (0.3, 2.0): 0.094311277348842014823,
    (0.6, 10.0): 0.000045344199633211473822,
}


@pytest.mark.parametrize("args,expected", PHI.items())
def test_spectral_phi_frozen(args, expected):
    assert spectral_phi(*args) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.01, 0.99), st.floats(1e-8, 60.0))
@settings(max_examples=200, deadline=None)
def test_spectral_phi_properties(beta, x):
    f = spectral_phi(beta, x)
    assert 0 <= f <= 0.5 + 1e-15
    # 1 - (1 - beta) may differ from beta in the last bit
    assert abs(f - spectral_phi(1 - beta, x)) <= 1e-14
    assert spectral_phi(beta, x * 1.01) <= f + 1e-15


def test_spectral_phi_limit_and_branch_continuity():
    for b in (0.2, 0.5, 0.7):
        assert abs(spectral_phi(b, 1e-9) - 0.5) < 1e-8
        lo, hi = spectral_phi(b, 1 - 1e-15), spectral_phi(b, 1 + 1e-15)
        assert abs(lo - hi) < 1e-14


@given(st.floats(0.02, 0.98), st.floats(1e-7, 40.0))
@settings(max_examples=150, deadline=None)
def test_spectral_phi_matches_mpmath(beta, x):
    with mp.workdps(40):
        b, xx = mp.mpf(beta), mp.mpf(x)
        exact = float(1 / mp.expm1(xx) - 1 / mp.expm1(xx / b) - 1 / mp.expm1(xx / (1 - b)))
    assert abs(spectral_phi(beta, x) - exact) <= 1e-13 * max(1.0, abs(exact))
