import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from stablehit.density import (
    DensityGrid,
    GridSpec,
    KanterBiasTable,
    auto_grid,
    density_first_factor,
    log_density_first_factor,
    density_kanter,
    density_stable_pos,
    density_tau_convolution,
    density_tau_mellin,
    find_mode,
    kanter_inverse,
    ksym_product_law,
    log_x_alpha_factors,
)
from stablehit.mellin import AdmissibilityError, Form, KanterRV, StableParams, mellin_eval, moments_tau
from stablehit.sampler import sample_tau_chunked
from stablehit.specfun import kanter_b, kappa_const


def levy_half(x):
    """Density of Z_{1/2}, the alpha = 2 hitting time."""
    return np.exp(-1 / (4 * x)) / (2 * math.sqrt(math.pi) * x**1.5)


def test_first_factor_example():
    p = StableParams(1.5, 1 / 3)
    t = np.array([0.1, 1.0, 7.0])
    # rho * alpha = 1/2 so the cosine term vanishes
    expected = math.sin(math.pi / 2) * math.sin(2 * math.pi / 3) * t ** (2 / 3) / (
        math.pi * math.sin(math.pi / 3) * (t**2 + 1))
    np.testing.assert_allclose(density_first_factor(p, t), expected, rtol=1e-14)
    # the same density written with -sin(pi a) and cos(pi a) = -cos(pi rho a)
    a = 1.5
    u_alpha = -math.sin(math.pi * a) * t ** (1 / a) / (math.pi * (t**2 - 2 * t * math.cos(math.pi * a) + 1))
    np.testing.assert_allclose(density_first_factor(p, t), u_alpha, rtol=1e-14)


@pytest.mark.parametrize("alpha,rho", [(1.5, 1 / 3), (1.2, 0.5), (1.9, 0.5), (1.7, 0.55)])
def test_first_factor_normalized(alpha, rho):
    p = StableParams(alpha, rho)
    f = lambda y: math.exp(log_density_first_factor(p, y))
    mass = integrate.quad(f, -np.inf, 0, epsabs=1e-13)[0] + integrate.quad(f, 0, np.inf, epsabs=1e-13)[0]
    assert abs(mass - 1) < 1e-8


def test_first_factor_needs_two_sided_quotient():
    with pytest.raises(AdmissibilityError):
        density_first_factor(StableParams(1.5, 2 / 3), 1.0)


def test_stable_half_closed_form():
    x = np.geomspace(0.05, 20, 50)
    np.testing.assert_allclose(density_stable_pos(0.5, x), levy_half(x), rtol=1e-8, atol=1e-12)


def test_stable_pos_moments_and_decay():
    c = 0.7
    f = lambda x: float(density_stable_pos(c, x))
    inv_mean = integrate.quad(lambda x: f(x) / x, 0, 1)[0] + integrate.quad(lambda x: f(x) / x, 1, np.inf)[0]
    assert inv_mean == pytest.approx(float(mellin_eval(KanterRV(c), 0.0)) * math.gamma(1 + 1 / c), rel=1e-7)
    # faster than any power at 0
    assert density_stable_pos(c, 0.01) < 1e-10


def test_mellin_density_mass_and_alpha2():
    g = density_tau_mellin(StableParams(2.0, 0.5), GridSpec.from_x(0.1, 10, 2000))
    np.testing.assert_allclose(g.values, levy_half(g.abscissae), rtol=1e-6, atol=1e-12)
    full = density_tau_mellin(StableParams(1.6, 0.45))
    assert abs(full.mass - 1) < 1e-8


def test_moment_roundtrip():
    p = StableParams(1.5, 0.5)
    g = density_tau_mellin(p, auto_grid(p, moment_order=0.2))
    assert g.moment(0.2) == pytest.approx(float(moments_tau(p, 0.2)), rel=1e-8)


@pytest.mark.parametrize("alpha,rho", [(1.5, 0.5), (1.2, 0.5), (1.8, 0.5), (1.5, 0.4)])
def test_routes_agree(alpha, rho):
    p = StableParams(alpha, rho)
    spec = GridSpec.from_x(0.05, 20, 800)
    a = density_tau_mellin(p, spec)
    b = density_tau_convolution(p, spec)
    assert np.max(np.abs(a.values - b.values)) < 1e-4


@pytest.mark.slow
def test_density_matches_samples():
    p = StableParams(1.5, 0.5)
    g = density_tau_mellin(p)
    x = np.sort(sample_tau_chunked(p, Form.RK, 10**6, seed=5))
    cdf = np.interp(x, g.abscissae, g.cdf())
    ecdf = np.arange(1, x.size + 1) / x.size
    assert np.max(np.abs(cdf - ecdf)) < 0.003


def test_kanter_density():
    c = 0.5
    f = lambda x: float(density_kanter(c, x))
    assert integrate.quad(f, 0, 1, limit=200)[0] == pytest.approx(1, abs=1e-8)
    assert integrate.quad(lambda x: x * f(x), 0, 1, limit=200)[0] == pytest.approx(2 / math.pi, abs=1e-8)
    x = np.linspace(1e-3, 1 - 1e-6, 2000)
    assert np.all(np.diff(density_kanter(c, x, 1 / 1.5)) >= 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1e-6, 1 - 1e-6))
def test_kanter_inverse_roundtrip(c, x):
    u, v = kanter_inverse(c, x)
    assert float(kanter_b(c, u, v) / kappa_const(c)) == pytest.approx(x, rel=1e-10)
    assert abs(u + v - 1) < 1e-15


@pytest.mark.parametrize("c,t", [(0.5, 0.5), (0.3, -0.5), (0.75, 2.0)])
def test_bias_table_cdf(c, t):
    table = KanterBiasTable(c, t)
    assert table.cdf_error < 1e-6
    for x in (0.2, 0.6, 0.95):
        exact = integrate.quad(lambda u: float(density_kanter(c, u, t)), 0, x, limit=200)[0]
        assert table.cdf(np.array([x]))[0] == pytest.approx(exact, abs=1e-6)


def test_mode_examples():
    g = density_tau_mellin(StableParams(2.0, 0.5), GridSpec.from_x(0.01, 10, 4000))
    m = find_mode(g)
    assert m.unimodal and abs(m.mode_location - 1 / 6) < 2e-3
    x = np.linspace(1, 2, 50)
    mono = DensityGrid(x, 1 / x, np.full(50, 1 / 50), 1e-6)
    assert find_mode(mono).mode_location == 1.0 and find_mode(mono).unimodal


def test_ksym_mode_at_one():
    law = ksym_product_law(1.5)
    assert abs(law.total - 1) < 1e-8
    m = find_mode(law.to_density_grid())
    assert abs(math.log(m.mode_location)) <= law.step + 1e-12


def test_log_factors_are_log_concave():
    y = np.linspace(-8, 8, 1601)
    for f in log_x_alpha_factors(1.5, y):
        d2 = np.diff(f, 2)
        # nearly linear tails: second differences vanish up to round-off
        assert np.all(d2 <= 1e-12 * np.abs(f[1:-1]).max())
        assert np.any(d2 < 0)
    assert log_x_alpha_factors(2.0, y)[1] is None


def test_grid_serialization():
    g = density_tau_mellin(StableParams(1.5, 0.5), GridSpec.from_x(0.1, 5, 50))
    back = DensityGrid.from_json(g.to_json())
    np.testing.assert_array_equal(back.values, g.values)
    assert back.metadata == g.metadata
    lines = g.to_csv().splitlines()
    assert lines[0].startswith("#") and "x,f,weight" in lines
    with pytest.raises(ValueError):
        GridSpec(1.0, 0.0, 10)
