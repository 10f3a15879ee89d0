"""Executable checks of the analytic claims about tau and its factors.

Every check returns a VerificationReport.  Single-metric checks report the
metric itself (standard errors, relative error, failed seeds).  Checks that
combine several inequality claims normalize each point by its own declared
threshold, so that the report tolerance is 1 and a deviation above 1 is a
violation; the thresholds are listed in the metadata.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import special, stats

from .density import (
    GridSpec,
    density_kanter,
    density_stable_pos,
    density_tau_convolution,
    density_tau_mellin,
    find_mode,
    inverse_beta_density,
    kasym_product_law,
    ksym_product_law,
    log_x_alpha_factors,
)
from .mellin import (
    Form,
    KanterRV,
    StableParams,
    StripError,
    identity_check,
    mellin_eval,
    moments_tau,
    tau_expr,
    tau_strip,
    closed_form_tau,
)
from .report import CheckPoint, VerificationReport
from .sampler import RandomStream, RejectionStats, sample_kanter_rejection, sample_stable_pos, sample_tau_chunked
from .specfun import spectral_phi

__all__ = [
    "check_moments_mc",
    "check_laplace_chain",
    "check_selfdecomp",
    "check_clay_convexity",
    "check_shape_claims",
    "check_identity_ks",
    "check_alpha2_ks",
    "check_alpha2_density",
    "check_density_routes",
    "check_rejection_rate",
    "check_closed_form",
    "laplace_chain_moment",
    "mid_strip_rhos",
    "CHECKS",
    "run_suite",
]

_EPS = np.finfo(float).eps

# Kasym densities are compared from this many log-cells past x = 1; the
# cell-mass convolution blurs the support edge over about five cells
KASYM_EDGE_CELLS = 10
KASYM_GRID = [(r, s, b, g, 0.5) for r in (0.5, 1.0) for s in (0.5, 1.0) for b in (0.3, 0.6) for g in (0.3, 0.6)]


def mid_strip_rhos(alpha):
    """Quarter, middle and three-quarter points of the admissible rho range."""
    lo, hi = 1 - 1 / alpha, 1 / alpha
    return [lo + f * (hi - lo) for f in (0.25, 0.5, 0.75)]


def _pdict(params: StableParams):
    return {"alpha": params.alpha, "rho": params.rho}


def _derived_seed(seed, *key):
    ss = np.random.SeedSequence(int(seed) % (1 << 64), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def check_closed_form(params: StableParams, tolerance=1e-9):
    """Closed-form moments against the RK tree, RK against FINAL, and RK against
    YANO when rho = 1/2, each on a 50-point grid inside the common strip."""
    reps = [
        identity_check(closed_form_tau(params), tau_expr(params, Form.RK), tolerance=tolerance,
                       name="closed vs RK"),
        identity_check(tau_expr(params, Form.RK), tau_expr(params, Form.FINAL), tolerance=tolerance,
                       name="RK vs FINAL"),
    ]
    if params.symmetric:
        reps.append(identity_check(tau_expr(params, Form.RK), tau_expr(params, Form.YANO),
                                   tolerance=tolerance, name="RK vs YANO"))
    points = []
    for r in reps:
        points += [CheckPoint((r.check_name, p.input), p.expected, p.actual, p.deviation) for p in r.points]
    return VerificationReport("closed_form", points, tolerance, _pdict(params))


def check_moments_mc(params: StableParams, s_list, N=10**6, seed=0, workers=1, form=Form.RK, n_se=4.0):
    """Monte Carlo means of tau^s against the closed form, in standard errors.

    Raises StripError if some s lies outside the moment strip.
    """
    if N < 10**4:
        raise ValueError("N must be at least 10^4")
    st = tau_strip(params)
    for s in s_list:
        if not st.contains(s):
            raise StripError(f"s={s:g} outside the moment strip {st} of tau")
    t0 = time.time()
    y = sample_tau_chunked(params, form, N, seed=seed, workers=workers, log=True)
    points = []
    for s in s_list:
        exact = float(moments_tau(params, s))
        if s == 0:
            points.append(CheckPoint(s, 1.0, 1.0, 0.0))
            continue
        x = np.exp(s * y)
        mean = float(x.mean())
        se = float(x.std(ddof=1)) / math.sqrt(N)
        points.append(CheckPoint(s, exact, mean, abs(mean - exact) / se))
    meta = {**_pdict(params), "N": N, "seed": seed, "form": Form.parse(form).value, "seconds": time.time() - t0}
    notes = []
    heavy = [s for s in s_list if 2 * s >= st.hi]
    if heavy:
        notes.append(f"tau^s has infinite variance for s={heavy}; standard errors are empirical only")
    return VerificationReport("moments_mc", points, n_se, meta, notes)


def laplace_chain_moment(params: StableParams, s):
    """E[tau^{-s}] rebuilt from the Laplace transform route.

    kappa~ Gamma(alpha s) Gamma(1 - 1/alpha + s) Gamma(1 + 1/alpha - s)
      / (Gamma(s) Gamma(1 - rho + rho alpha s) Gamma(1 + rho - rho alpha s)),
    kappa~ = alpha rho kappa, kappa = alpha sin(pi/alpha) / sin(pi rho).
    """
    a, r = params.alpha, params.rho
    s = np.asarray(s, dtype=float)
    kappa = params.local_time_kappa
    lg = special.gammaln
    v = (
        lg(a * s) + lg(1 - 1 / a + s) + lg(1 + 1 / a - s)
        - lg(s) - lg(1 - r + r * a * s) - lg(1 + r - r * a * s)
    )
    return a * r * kappa * np.exp(v)


def check_laplace_chain(params: StableParams, s_grid=None, tolerance=1e-10, n=20):
    """Sampling-free check of the Laplace-transform route to E[tau^{-s}], s in (0, 1)."""
    if s_grid is None:
        s_grid = np.linspace(0.0, 1.0, n + 2)[1:-1]
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any((s_grid <= 0) | (s_grid >= 1)):
        raise ValueError("s_grid must lie in (0, 1)")
    a, r = params.alpha, params.rho
    # arguments of the Gamma functions in the chain must stay off the poles
    args = np.concatenate([a * s_grid, 1 - r + r * a * s_grid, 1 + r - r * a * s_grid])
    if np.any(args < 1e-8):
        raise ValueError("s_grid comes within 1e-8 of a Gamma pole")
    chain = laplace_chain_moment(params, s_grid)
    closed = moments_tau(params, -s_grid)
    points = [
        CheckPoint(float(s), float(c), float(v), abs(v / c - 1))
        for s, c, v in zip(s_grid, closed, chain)
    ]
    meta = {
        **_pdict(params),
        "kappa": params.local_time_kappa,
        "kappa_tilde": a * r * params.local_time_kappa,
    }
    return VerificationReport("laplace_chain", points, tolerance, meta)


def check_selfdecomp(beta_list=(0.25, 0.5, 0.75), x_grid=None, limit_tol=1e-5, floor=1e-14):
    """phi_beta >= 0, non-increasing on the grid, and phi_beta(0+) = 1/2."""
    if x_grid is None:
        x_grid = np.geomspace(1e-4, 50, 10**4)
    x_grid = np.asarray(x_grid, dtype=float)
    points = []
    for b in beta_list:
        f = spectral_phi(b, x_grid)
        neg = max(0.0, -float(f.min()))
        points.append(CheckPoint((b, "min phi"), ">= 0", float(f.min()), neg / floor))
        rise = float(np.max(np.diff(f)))
        points.append(CheckPoint((b, "max increase"), "<= 0", rise, max(0.0, rise) / floor))
        f0 = float(spectral_phi(b, 1e-6))
        points.append(CheckPoint((b, "phi(1e-6)"), 0.5, f0, abs(f0 - 0.5) / limit_tol))
    meta = {
        "betas": list(beta_list),
        "x_range": [float(x_grid[0]), float(x_grid[-1])],
        "x_points": int(x_grid.size),
        "thresholds": {"sign_and_monotonicity": floor, "limit_at_0": limit_tol},
    }
    return VerificationReport("selfdecomp", points, 1.0, meta)


def _clay(r, t):
    return np.log(-np.expm1(t)) - np.log(-np.expm1(r * t))


def check_clay_convexity(r_list=(0.5,), t_grid=None, x_grid=None, ineq_floor=1e-12):
    """Convexity of t -> log(1 - e^t) - log(1 - e^{rt}) on t < 0.

    Centered second differences divided by h^2 must exceed -floor, with the
    floor 16 eps (1 + |log(1-e^t)| + |log(1-e^{rt})|) / h^2 covering rounding
    in the two logarithms (absolute error about eps even when they are small).  The equivalent pointwise inequality
    r^2 x^{r-1} (1-x)^2 / (1-x^r)^2 >= 1 on (0, 1) is checked in log form.
    """
    if t_grid is None:
        t_grid = np.arange(-10.0, -0.01 + 5e-4, 1e-3)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t >= 0):
        raise ValueError("t_grid must lie in (-inf, 0)")
    hs = np.diff(t)
    h = float(hs.mean())
    if np.max(np.abs(hs - h)) > 1e-9 * abs(h) + 1e-12:
        raise ValueError("t_grid must be uniformly spaced")
    if x_grid is None:
        x_grid = np.concatenate([np.geomspace(1e-12, 0.5, 5000), 1 - np.geomspace(0.5, 1e-12, 5000)[1:]])
    x = np.asarray(x_grid, dtype=float)
    points = []
    for r in r_list:
        if not 0 < r < 1:
            raise ValueError("r must lie in (0, 1)")
        f = _clay(r, t)
        mag = 1 + np.abs(np.log(-np.expm1(t))) + np.abs(np.log(-np.expm1(r * t)))
        d2 = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        noise = 16 * _EPS * np.maximum(np.maximum(mag[2:], mag[:-2]), mag[1:-1]) / h**2
        worst = float(np.max(-d2 / noise))
        points.append(CheckPoint((r, "second difference"), ">= -floor", float(d2.min()), max(0.0, worst)))
        lx = np.log(x)
        lhs = 2 * math.log(r) + (r - 1) * lx + 2 * np.log1p(-x) - 2 * np.log(-np.expm1(r * lx))
        points.append(CheckPoint((r, "pointwise inequality"), ">= 0", float(lhs.min()),
                                 max(0.0, -float(lhs.min())) / ineq_floor))
    meta = {
        "r": list(r_list),
        "t_range": [float(t[0]), float(t[-1])],
        "h": h,
        "inequality_floor": ineq_floor,
        "second_difference_floor": "16 eps (1 + |log(1-e^t)| + |log(1-e^{rt})|) / h^2",
    }
    return VerificationReport("clay_convexity", points, 1.0, meta)


def _kasym_point(label, r, s, b, g, t, step, floor):
    law = kasym_product_law(r, s, b, g, t, step=step)
    x = np.exp(law.centers)
    f = law.masses / (law.step * x)
    d = np.diff(f[KASYM_EDGE_CELLS:])
    rise = float(d.max()) / float(f.max())
    return CheckPoint((label, r, s, b, g, t), "non-increasing on (1, inf)", rise, max(0.0, rise) / floor)


def check_shape_claims(params: StableParams, kasym_grid=None, step=2e-3):
    """Unimodality ingredients for tau at the given parameters.

    - K_{a/2}^{(1/a)} x 1/B_{1-1/a,1/a} has its mode at 1 within one log-step;
    - the density of 1/B_{1-1/a,1/a} decreases on (1, inf);
    - the density of K_{a/2}^{(1/a)} increases on (0, 1);
    - (K_beta^{-r})^{(t)} x K_gamma^{-s} has a non-increasing density on (1, inf),
      both at the values arising for tau and on `kasym_grid`;
    - the log-factors of X_a and their sum have log-concave densities.
    """
    a = params.alpha
    floors = {"monotone_relative": 1e-9, "log_concave_factor": 1e-8, "log_concave_sum": 1e-9}
    points = []
    notes = []
    if a < 2:
        law = ksym_product_law(a, step=step)
        f = law.masses / (law.step * np.exp(law.centers))
        ymode = float(law.centers[int(np.argmax(f))])
        points.append(CheckPoint(("ksym mode", a), 1.0, math.exp(ymode), round(abs(ymode) / step, 9)))
        bb = 1 - 1 / a, 1 / a
        y = np.geomspace(1 + 1e-6, 1e6, 2000)
        g = inverse_beta_density(*bb, y)
        rise = float(np.max(np.diff(g) / g[:-1]))
        points.append(CheckPoint(("1/B decreasing", a), "<= 0", rise, max(0.0, rise) / floors["monotone_relative"]))
        xs = np.linspace(1e-4, 1 - 1e-4, 2000)
        k = density_kanter(a / 2, xs, 1 / a)
        fall = float(np.max(-np.diff(k) / k[1:]))
        points.append(CheckPoint(("K biased increasing", a), ">= 0", -fall,
                                 max(0.0, fall) / floors["monotone_relative"]))
    else:
        notes.append("alpha = 2: K_{alpha/2} degenerates and the Ksym factor is the constant 1")
    ra = params.rho_alpha
    if ra < 1:
        points.append(_kasym_point("kasym tau", 1.0, a, ra, 1 / a, 1 / a, step, floors["monotone_relative"]))
    for r, s, b, g, t in KASYM_GRID if kasym_grid is None else kasym_grid:
        points.append(_kasym_point("kasym", r, s, b, g, t, step, floors["monotone_relative"]))
    # log-concavity of the X_alpha factors
    h = 2e-3
    yy = np.arange(-40.0, 40.0, h)
    f1, f2 = log_x_alpha_factors(a, yy)
    for name, lf in (("log L factor", f1), ("log Gamma factor", f2)):
        if lf is None:
            continue
        ok = np.isfinite(lf) & (lf > lf.max() - 600)
        d2 = np.diff(lf[ok], 2)
        points.append(CheckPoint((name, a), "<= 0", float(d2.max()),
                                 max(0.0, float(d2.max())) / floors["log_concave_factor"]))
    if f2 is not None:
        conv = np.convolve(np.exp(f1), np.exp(f2)) * h
        keep = conv > conv.max() * 1e-100
        lc = np.log(conv[keep])
        d2 = np.diff(lc, 2)
        points.append(CheckPoint(("log X_alpha", a), "<= 0", float(d2.max()),
                                 max(0.0, float(d2.max())) / floors["log_concave_sum"]))
    meta = {**_pdict(params), "log_step": step, "kasym_edge_cells": KASYM_EDGE_CELLS, "thresholds": floors}
    return VerificationReport("shape_claims", points, 1.0, meta, notes)


def _ks_repeated(draw_a, draw_b, N, level, seeds, min_pass, seed):
    points = []
    fails = 0
    for k in range(seeds):
        xa = draw_a(_derived_seed(seed, k, 0), N)
        xb = draw_b(_derived_seed(seed, k, 1), N)
        res = stats.ks_2samp(xa, xb)
        ok = res.pvalue >= level
        fails += not ok
        points.append((k, float(res.statistic), float(res.pvalue), bool(ok)))
    summary = CheckPoint("failed seeds", f"<= {seeds - min_pass}", fails, float(fails))
    return summary, points


def check_identity_ks(params: StableParams, form_a=Form.RK, form_b=Form.FINAL, N=10**5, level=0.01,
                      seeds=10, min_pass=8, seed=0, params_b: StableParams | None = None):
    """Two-sample KS test of tau drawn through two forms (or two parameter sets).

    Passes when at least `min_pass` of `seeds` independent repetitions have
    p-value >= level.
    """
    if N < 10**4:
        raise ValueError("N must be at least 10^4")
    pb = params if params_b is None else params_b
    fa, fb = Form.parse(form_a), Form.parse(form_b)
    tau_expr(params, fa), tau_expr(pb, fb)  # form compatibility

    def draw_a(sd, n):
        return sample_tau_chunked(params, fa, n, seed=sd, log=True)

    def draw_b(sd, n):
        return sample_tau_chunked(pb, fb, n, seed=sd, log=True)

    summary, per_seed = _ks_repeated(draw_a, draw_b, N, level, seeds, min_pass, seed)
    meta = {
        "a": {**_pdict(params), "form": fa.value},
        "b": {**_pdict(pb), "form": fb.value},
        "N": N, "level": level, "seed": seed, "seeds": seeds, "min_pass": min_pass,
        "per_seed": per_seed,
    }
    return VerificationReport("identity_ks", [summary], float(seeds - min_pass), meta)


def check_alpha2_ks(N=10**5, level=0.01, seeds=10, min_pass=8, seed=0, form=Form.YANO):
    """At alpha = 2, tau (YANO form, a path independent of Z) against Z_{1/2} draws."""
    p = StableParams(2.0, 0.5)
    f = Form.parse(form)

    def draw_a(sd, n):
        return sample_tau_chunked(p, f, n, seed=sd, log=True)

    def draw_b(sd, n):
        return np.log(sample_stable_pos(0.5, RandomStream(sd, 0), n))

    summary, per_seed = _ks_repeated(draw_a, draw_b, N, level, seeds, min_pass, seed)
    meta = {"form": f.value, "N": N, "level": level, "seed": seed, "seeds": seeds,
            "min_pass": min_pass, "per_seed": per_seed}
    return VerificationReport("alpha2_ks", [summary], float(seeds - min_pass), meta)


def check_alpha2_density(x_min=0.1, x_max=10.0, points=2000, tolerance=1e-6):
    """Mellin-inverted density at alpha = 2 against the c = 1/2 stable density."""
    p = StableParams(2.0, 0.5)
    g = density_tau_mellin(p, GridSpec.from_x(x_min, x_max, points))
    x = g.abscissae
    exact = np.exp(-1 / (4 * x)) / (2 * math.sqrt(math.pi) * x**1.5)
    dev = np.abs(g.values - exact)
    i = int(np.argmax(dev))
    pts = [CheckPoint(float(x[i]), float(exact[i]), float(g.values[i]), float(dev[i]))]
    kan = density_stable_pos(0.5, x)
    j = int(np.argmax(np.abs(kan - exact)))
    pts.append(CheckPoint(("kanter integral", float(x[j])), float(exact[j]), float(kan[j]),
                          float(abs(kan[j] - exact[j]))))
    meta = {"x_range": [x_min, x_max], "points": points, **{k: v for k, v in g.metadata.items() if k != "method"}}
    return VerificationReport("alpha2_density", pts, tolerance, meta)


def default_density_grid():
    """3 x 3 parameter grid: alpha in {1.2, 1.5, 1.8} with mid-strip rho values."""
    return [StableParams(a, r) for a in (1.2, 1.5, 1.8) for r in mid_strip_rhos(a)]


def check_density_routes(params_list=None, sup_tol=1e-4, mass_tol=1e-6, smoothing_tolerance=1e-3):
    """Unimodality of tau by both density routes, route agreement and unit mass."""
    if params_list is None:
        params_list = default_density_grid()
    points = []
    notes = []
    for p in params_list:
        gm = density_tau_mellin(p)
        gc = density_tau_convolution(p)
        for name, g in (("mellin", gm), ("convolution", gc)):
            m = find_mode(g, smoothing_tolerance)
            dev = 0.0 if m.local_max_count == 1 else math.inf
            points.append(CheckPoint((p.alpha, p.rho, name, "maxima"), 1, m.local_max_count, dev))
            points.append(CheckPoint((p.alpha, p.rho, name, "mass"), 1.0, g.mass, abs(g.mass - 1) / mass_tol))
        lo, hi = gm.mass_interval(0.99)
        sel = (gm.abscissae >= lo) & (gm.abscissae <= hi)
        sup = float(np.max(np.abs(gm.values[sel] - gc.values[sel])))
        points.append(CheckPoint((p.alpha, p.rho, "route sup-norm"), 0.0, sup, sup / sup_tol))
        m = find_mode(gm, smoothing_tolerance)
        # qualitative only: the density leaves 0 steeply
        x, f = gm.abscissae, gm.values
        near = (x > 0) & (x < m.mode_location)
        if np.count_nonzero(near) > 2:
            notes.append(f"alpha={p.alpha:g} rho={p.rho:.4g}: mode {m.mode_location:.6g}, "
                         f"f(x)/x rises to {np.max(f[near] / x[near]):.4g} before the mode")
    meta = {
        "params": [_pdict(p) for p in params_list],
        "thresholds": {"sup_norm": sup_tol, "mass": mass_tol},
        "smoothing_tolerance": smoothing_tolerance,
    }
    return VerificationReport("density_routes", points, 1.0, meta, notes)


def check_rejection_rate(c_list=(0.5, 0.75), t_list=(0.5, 2 / 3), N=10**6, seed=0, n_se=3.0):
    """Measured acceptance of the K_c^{(t)} rejection sampler against E[K_c^t]."""
    points = []
    for i, c in enumerate(c_list):
        for j, t in enumerate(t_list):
            st = RejectionStats()
            sample_kanter_rejection(c, t, RandomStream(seed, 1000 * i + j), N, st)
            expect = float(mellin_eval(KanterRV(c), t))
            points.append(CheckPoint((c, t), expect, st.rate, abs(st.rate - expect) / st.standard_error))
    meta = {"N_accepted": N, "seed": seed, "c": list(c_list), "t": list(t_list)}
    return VerificationReport("rejection_rate", points, n_se, meta)


# ---------------------------------------------------------------------------
# suite

def _suite_moments(seed, workers, params=None, **kw):
    p = params or StableParams(1.5, 0.5)
    s_list = kw.get("s_list") or (-0.5, -0.25, 0.25)
    return [check_moments_mc(p, s_list, N=kw.get("N", 10**6), seed=seed, workers=workers)]


def _suite_laplace(seed, workers, params=None, **kw):
    plist = [params] if params else [StableParams(a, r) for a in (1.2, 1.5, 2.0) for r in
                                     ((0.5,) if a == 2 else mid_strip_rhos(a))]
    return [check_laplace_chain(p) for p in plist]


def _suite_closed(seed, workers, params=None, **kw):
    plist = [params] if params else [StableParams(1.5, 0.5), StableParams(1.5, 1 / 3), StableParams(1.8, 0.5)]
    return [check_closed_form(p) for p in plist]


def _suite_selfdecomp(seed, workers, params=None, **kw):
    return [check_selfdecomp()]


def _suite_clay(seed, workers, params=None, r=None, **kw):
    return [check_clay_convexity((r,) if r is not None else (0.25, 0.5, 0.75, 1 - 1e-9))]


def _suite_shape(seed, workers, params=None, **kw):
    plist = [params] if params else [StableParams(a, 0.5) for a in (1.2, 1.5, 1.8)]
    return [check_shape_claims(p) for p in plist]


def _suite_ks(seed, workers, params=None, **kw):
    if params:
        return [check_identity_ks(params, Form.RK, Form.FINAL, seed=seed)]
    return [
        check_identity_ks(StableParams(1.5, 0.5), Form.YANO, Form.RK, seed=seed),
        check_identity_ks(StableParams(1.7, 0.45), Form.RK, Form.FINAL, seed=seed),
    ]


def _suite_alpha2(seed, workers, params=None, **kw):
    return [check_alpha2_ks(seed=seed), check_alpha2_density()]


def _suite_density(seed, workers, params=None, **kw):
    return [check_density_routes([params] if params else None)]


def _suite_rejection(seed, workers, params=None, **kw):
    return [check_rejection_rate(seed=seed)]


CHECKS = {
    "closed": _suite_closed,
    "laplace": _suite_laplace,
    "moments": _suite_moments,
    "selfdecomp": _suite_selfdecomp,
    "clay": _suite_clay,
    "shape": _suite_shape,
    "ks": _suite_ks,
    "alpha2": _suite_alpha2,
    "density": _suite_density,
    "rejection": _suite_rejection,
}


def run_suite(names=None, seed=0, workers=1, **kw):
    """Run the named checks (all by default) and return their reports."""
    names = list(CHECKS) if not names else list(names)
    out = []
    for n in names:
        if n not in CHECKS:
            raise KeyError(f"unknown check {n!r}; choose from {sorted(CHECKS)}")
        out += CHECKS[n](seed, workers, **kw)
    return out
