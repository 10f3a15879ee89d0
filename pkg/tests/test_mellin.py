import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from stablehit.mellin import (
    AdmissibilityError,
    BetaRV,
    Const,
    ExpL,
    Form,
    GammaRV,
    KanterRV,
    MellinStrip,
    Power,
    Product,
    SizeBias,
    StableParams,
    StablePos,
    StripError,
    closed_form_tau,
    default_s_grid,
    expr_from_json,
    expr_to_json,
    identity_check,
    mellin_eval,
    moments_tau,
    strip_of,
    tau_expr,
    tau_strip,
)

# E[tau^s] at 30 digits from the sine/Gamma formula
TAU_MOMENTS = [
    (1.5, 0.5, -0.5, 0.68738556240448408124),
    (1.5, 0.5, -0.25, 0.73109142028546645331),
    (1.5, 0.5, 0.25, 3.256891165599288353),
    (1.5, 1 / 3, 0.2, 2.681301310733559996),
    (1.2, 0.5, -0.5, 0.34214888945367356624),
    (1.9, 0.5, 0.3, 1.9059462563237010586),
    (1.7, 0.45, -1.2, 1.9440663054002990067),
    (2.0, 0.5, -0.5, 1.1283791670955125739),
]


@pytest.mark.parametrize("a,r,s,expected", TAU_MOMENTS)
def test_moments_tau_frozen(a, r, s, expected):
    assert moments_tau(StableParams(a, r), s) == pytest.approx(expected, rel=1e-13)


@st.composite
def admissible(draw):
    a = draw(st.floats(1.01, 2.0))
    f = draw(st.floats(0.0, 1.0))
    lo, hi = 1 - 1 / a, 1 / a
    return StableParams(a, min(max(lo + f * (hi - lo), lo), hi))


@given(admissible(), st.floats(0.02, 0.98))
@settings(max_examples=150, deadline=None)
def test_moments_tau_matches_mpmath(p, frac):
    stp = tau_strip(p)
    lo = max(stp.lo, -4.0)
    s = lo + frac * (stp.hi - lo)
    assume(abs(s) > 1e-6 and abs(s + 1 / p.alpha) > 1e-6)
    assume(not p.spectrally_negative and p.alpha < 2)
    with mp.workdps(30):
        a, r, ss = mp.mpf(p.alpha), mp.mpf(p.rho), mp.mpf(s)
        num = mp.sin(mp.pi / a) * mp.sin(mp.pi * r * a * (ss + 1 / a))
        den = mp.sin(mp.pi * r) * mp.sin(mp.pi * (ss + 1 / a))
        exact = float(num / den * mp.gamma(1 - a * ss) / mp.gamma(1 - ss))
    assert moments_tau(p, s) == pytest.approx(exact, rel=1e-10)


def test_moment_at_zero_is_one():
    for a, r in [(1.3, 0.3), (2.0, 0.5), (1.5, 2 / 3)]:
        assert moments_tau(StableParams(a, r), 0.0) == pytest.approx(1.0, abs=1e-15)


def test_admissibility():
    with pytest.raises(AdmissibilityError):
        StableParams(1.8, 0.3)
    with pytest.raises(AdmissibilityError):
        StableParams(1.0, 0.5)
    with pytest.raises(AdmissibilityError):
        StableParams(2.1, 0.5)
    p = StableParams(1.5, 2 / 3 + 1e-14)  # snapped onto the boundary
    assert p.spectrally_negative
    assert StableParams(1.5, 1 / 3).spectrally_positive
    assert StableParams(2.0, 0.5).local_time_kappa == pytest.approx(2.0, rel=1e-15)
    assert StableParams(1.5, 1 / 3).local_time_kappa == pytest.approx(1.5, rel=1e-14)


def test_strips():
    p = StableParams(1.5, 0.5)
    stp = tau_strip(p)
    assert (stp.lo, stp.hi) == pytest.approx((-1 - 1 / 1.5, 1 - 1 / 1.5))
    assert tau_strip(StableParams(1.5, 2 / 3)).lo == -math.inf
    with pytest.raises(StripError):
        moments_tau(p, 0.5)
    with pytest.raises(StripError):
        MellinStrip(1.0, 0.0)
    assert strip_of(SizeBias(ExpL(), 0.5)).lo == pytest.approx(-1.5)
    assert strip_of(Power(ExpL(), -2.0)).hi == pytest.approx(0.5)


def test_atom_moments():
    assert mellin_eval(KanterRV(0.5), 1.0) == pytest.approx(2 / math.pi, rel=1e-14)
    assert mellin_eval(StablePos(0.5), -1.0) == pytest.approx(2.0, rel=1e-14)
    assert mellin_eval(GammaRV(2.5), 1.0) == pytest.approx(2.5, rel=1e-14)
    assert mellin_eval(BetaRV(2.0, 3.0), 1.0) == pytest.approx(0.4, rel=1e-14)
    assert mellin_eval(ExpL(), 2.0) == pytest.approx(2.0, rel=1e-14)
    assert mellin_eval(StablePos(1.0), 0.7) == 1.0
    # size-bias rule E[(X^(t))^s] = E[X^(s+t)] / E[X^t]
    x = KanterRV(0.3)
    assert mellin_eval(SizeBias(x, 0.4), 1.1) == pytest.approx(
        mellin_eval(x, 1.5) / mellin_eval(x, 0.4), rel=1e-13
    )
    with pytest.raises(StripError):
        SizeBias(ExpL(), -1.5)


@pytest.mark.parametrize("c,t", [(0.3, 0.7), (0.5, 2.0), (0.75, -0.6), (0.9, 1.3)])
def test_kanter_moment_mpmath(c, t, mp_kanter_moment):
    assert mellin_eval(KanterRV(c), t) == pytest.approx(mp_kanter_moment(c, t), rel=1e-10)


@pytest.mark.parametrize("a,r", [(1.5, 0.5), (1.2, 0.2), (1.8, 0.5), (1.5, 1 / 3), (1.7, 0.45), (1.5, 2 / 3), (2.0, 0.5)])
def test_forms_agree_with_closed_form(a, r):
    p = StableParams(a, r)
    for form in [Form.RK, Form.FINAL] + ([Form.YANO] if p.symmetric else []):
        rep = identity_check(closed_form_tau(p), tau_expr(p, form))
        assert rep.passed, rep.to_text()
        assert rep.max_deviation < 1e-12


def test_yano_requires_symmetry():
    with pytest.raises(AdmissibilityError):
        tau_expr(StableParams(1.5, 0.4), Form.YANO)


def test_form_parse():
    assert Form.parse("rk") is Form.RK
    with pytest.raises(ValueError):
        Form.parse("nope")


def test_json_roundtrip():
    e = tau_expr(StableParams(1.7, 0.45), Form.FINAL)
    back = expr_from_json(expr_to_json(e))
    assert back == e
    s = default_s_grid(strip_of(e))
    np.testing.assert_array_equal(mellin_eval(back, s), mellin_eval(e, s))


def test_default_grid_inside_strip():
    s = default_s_grid(MellinStrip(-math.inf, 0.5), n=50)
    assert s.size == 50 and s.max() < 0.5 and np.isfinite(s).all()


def test_identity_check_detects_difference():
    p1, p2 = StableParams(1.7, 0.42), StableParams(1.7, 0.5)
    rep = identity_check(tau_expr(p1), tau_expr(p2))
    assert not rep.passed


@given(admissible())
@settings(max_examples=60, deadline=None)
def test_rk_final_identity_property(p):
    rep = identity_check(tau_expr(p, Form.RK), tau_expr(p, Form.FINAL), tolerance=1e-9)
    assert rep.passed, rep.to_text()


def test_product_power_algebra():
    x = Product((Const(3.0), Power(ExpL(), 2.0)))
    assert mellin_eval(x, 1.0) == pytest.approx(3.0 * 2.0, rel=1e-14)
