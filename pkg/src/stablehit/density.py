"""Densities of tau and of its building blocks, and mode analysis.

Two independent routes give the density of tau:

* :func:`density_tau_mellin` inverts the closed-form Mellin transform along a
  vertical line in the strip (a Fourier integral in log coordinates, summed
  by FFT);
* :func:`density_tau_convolution` convolves, in log coordinates, the explicit
  density of the size-biased stable quotient with the density of
  Z_{1/alpha}, the latter obtained by integrating out the uniform variable
  of Kanter's representation.

Laws with singular densities (Kanter variables, inverse Betas) are handled as
cell masses on a uniform grid in log x (:class:`LogLaw`), which keeps
products exact up to one grid step.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import signal, special, stats
from scipy.integrate import quad_vec
from scipy.interpolate import PchipInterpolator
from scipy.signal import find_peaks

from .mellin import (
    AdmissibilityError,
    KanterRV,
    StableParams,
    log_mellin,
    log_moments_tau,
    tau_strip,
)
from .specfun import kappa_const, log_kanter_b

__all__ = [
    "auto_grid",
    "QuadratureError",
    "GridSpec",
    "DensityGrid",
    "ModeReport",
    "LogLaw",
    "KanterBiasTable",
    "density_first_factor",
    "log_density_first_factor",
    "density_stable_pos",
    "log_variable_density_stable_pos",
    "density_tau_mellin",
    "density_tau_convolution",
    "density_kanter",
    "kanter_inverse",
    "find_mode",
    "ksym_product_law",
    "kasym_product_law",
    "inverse_beta_density",
    "log_x_alpha_factors",
]

GRID_SCHEMA = "stablehit.density/1"

# default spacing of uniform grids in ln x
DEFAULT_STEP = 0.01
# tail mass left outside automatically chosen grids
_TAIL_EPS = 1e-9
_LOG_X_CAP = 700.0
_MIN_CONV_STEP = 1e-4
# above this many multiply-adds the convolution goes through the FFT
_DIRECT_CONV_OPS = 4e8


class QuadratureError(RuntimeError):
    """Numerical integration or inversion did not reach its target accuracy."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid in ln x: `points` nodes from log_min to log_max."""

    log_min: float
    log_max: float
    points: int

    def __post_init__(self):
        if not (self.log_max > self.log_min and self.points >= 2):
            raise ValueError("GridSpec needs log_max > log_min and at least two points")

    @classmethod
    def from_x(cls, x_min, x_max, points):
        if not (0 < x_min < x_max):
            raise ValueError("need 0 < x_min < x_max")
        return cls(math.log(x_min), math.log(x_max), int(points))

    @classmethod
    def with_step(cls, log_min, log_max, step=DEFAULT_STEP):
        n = int(math.ceil((log_max - log_min) / step)) + 1
        return cls(log_min, log_min + (n - 1) * step, n)

    @property
    def step(self):
        return (self.log_max - self.log_min) / (self.points - 1)

    def y(self):
        return self.log_min + self.step * np.arange(self.points)


@dataclass
class DensityGrid:
    """Density values on increasing abscissae with quadrature weights.

    ``sum(values * weights)`` approximates the total mass, which lies within
    ``tolerance`` of 1 when the grid covers the law (``mass_fraction``).
    """

    abscissae: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    tolerance: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if not (self.abscissae.shape == self.values.shape == self.weights.shape):
            raise ValueError("abscissae, values and weights must have one shape")
        if self.abscissae.size < 2 or np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("abscissae must be strictly increasing")

    @property
    def mass(self) -> float:
        return float(np.sum(self.values * self.weights))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.values * self.weights)

    def moment(self, s) -> float:
        return float(np.sum(self.abscissae**s * self.values * self.weights))

    def mass_interval(self, fraction=0.99):
        """Central interval holding `fraction` of the mass."""
        c = self.cdf() / self.mass
        lo = np.searchsorted(c, (1 - fraction) / 2)
        hi = np.searchsorted(c, 1 - (1 - fraction) / 2)
        return self.abscissae[lo], self.abscissae[min(hi, c.size - 1)]

    def restrict(self, x_min, x_max) -> "DensityGrid":
        m = (self.abscissae >= x_min) & (self.abscissae <= x_max)
        return DensityGrid(self.abscissae[m], self.values[m], self.weights[m], self.tolerance, dict(self.metadata))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}={v}\n")
        buf.write(f"# tolerance={self.tolerance}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f", "weight"])
        for row in zip(self.abscissae, self.values, self.weights):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "schema": GRID_SCHEMA,
            "metadata": self.metadata,
            "tolerance": self.tolerance,
            "mass": self.mass,
            "x": self.abscissae.tolist(),
            "f": self.values.tolist(),
            "weight": self.weights.tolist(),
        })

    @classmethod
    def from_json(cls, text) -> "DensityGrid":
        d = json.loads(text)
        if d.get("schema") != GRID_SCHEMA:
            raise ValueError(f"unsupported schema {d.get('schema')!r}")
        return cls(d["x"], d["f"], d["weight"], d["tolerance"], d.get("metadata", {}))


def _log_grid(y, values_in_y, tolerance, metadata):
    """DensityGrid in x from a density g of ln x on a uniform y grid (trapezoid weights)."""
    step = y[1] - y[0]
    x = np.exp(y)
    w = np.full_like(y, step)
    w[0] = w[-1] = step / 2
    return DensityGrid(x, values_in_y / x, w * x, tolerance, metadata)


# ---------------------------------------------------------------------------
# explicit densities


def _require_two_sided_quotient(params: StableParams):
    if params.spectrally_negative:
        raise AdmissibilityError("the first factor degenerates at rho = 1/alpha (rho*alpha = 1)")


def log_density_first_factor(params: StableParams, y):
    """log of the density of ln A, A the size-biased stable quotient, at y = ln t."""
    _require_two_sided_quotient(params)
    a, r = params.alpha, params.rho
    ra = r * a
    y = np.asarray(y, dtype=float)
    lc = math.log(math.sin(math.pi * ra) * math.sin(math.pi / a) / (math.pi * math.sin(math.pi * r)))
    # log(t^2 + 2 t cos + 1) = 2 max(y, 0) + log(1 + 2 cos e^{-|y|} + e^{-2|y|})
    e = np.exp(-np.abs(y))
    den = 2 * np.maximum(y, 0.0) + np.log1p(2 * math.cos(math.pi * ra) * e + e * e)
    return lc + (1 + 1 / a) * y - den


def density_first_factor(params: StableParams, t):
    """Density sin(pi rho a) sin(pi/a) t^{1/a} / (pi sin(pi rho) (t^2 + 2 t cos(pi rho a) + 1))."""
    t = np.asarray(t, dtype=float)
    _require_two_sided_quotient(params)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(log_density_first_factor(params, np.log(t[pos])) - np.log(t[pos]))
    return out[()] if out.ndim == 0 else out


def log_variable_density_stable_pos(c, y, epsabs=1e-14, epsrel=1e-12):
    """Density of ln Z_c at y, from Kanter's representation.

    With Z_c^{-c} = L^{1-c} b_c(U), integrating out L gives
    g(y) = c/(1-c) * int_0^1 w e^{-w} du with w = b_c(u)^{-1/(1-c)} e^{-c y/(1-c)}.
    The half u > 1/2 is integrated in z = -ln(1-u) so that the peak, which
    moves towards u = 1 as y grows, stays resolved.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    gam = c / (1 - c)

    def near_zero(u):
        lw = -log_kanter_b(c, u) / (1 - c) - gam * y
        return np.exp(lw - np.exp(lw))

    def near_one(z):
        lw = -log_kanter_b(c, v=math.exp(-z)) / (1 - c) - gam * y
        return np.exp(lw - np.exp(lw) - z)

    zmax = max(c * float(y.max()), 0.0) + 60.0
    kw = dict(epsabs=epsabs, epsrel=epsrel, norm="max", limit=20000)
    # e^{w} overflows where the integrand is e^{-inf} = 0 anyway
    with np.errstate(over="ignore"):
        r1, e1 = quad_vec(near_zero, 0.0, 0.5, **kw)
        r2, e2 = quad_vec(near_one, math.log(2.0), zmax, **kw)
    err = gam * (e1 + e2)
    if err > 1e-9:
        raise QuadratureError(f"stable density quadrature error {err:.2e}")
    return gam * (r1 + r2)


def density_stable_pos(c, x):
    """Density of Z_c (E[exp(-lam Z_c)] = exp(-lam^c)) at x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    g = log_variable_density_stable_pos(c, np.log(x).ravel()).reshape(x.shape)
    out = g / x
    return out[()] if out.ndim == 0 else out


def inverse_beta_density(a, b, x):
    """Density of 1/B_{a,b} on (1, inf)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x > 1
    out[m] = stats.beta.pdf(1 / x[m], a, b) / x[m] ** 2
    return out


# ---------------------------------------------------------------------------
# the hitting time


def _auto_log_range(params: StableParams, eps=_TAIL_EPS, moment_order=None):
    """ln x range outside which each tail of tau holds less than eps (Markov bounds).

    With `moment_order` s the range is widened until the tails of x^s f(x)
    also hold less than eps relative to E[tau^s], using
    E[tau^s; tau > X] <= E[tau^u] X^{s-u} for u > s (and symmetrically below).
    """
    st = tau_strip(params)
    a_lo = 3.0 if math.isinf(st.lo) else 0.9 * (-st.lo)
    s_hi = 0.9 * st.hi
    y_lo = (math.log(eps) - float(log_moments_tau(params, -a_lo))) / a_lo
    y_hi = (float(log_moments_tau(params, s_hi)) - math.log(eps)) / s_hi
    if moment_order is not None:
        s0 = float(moment_order)
        if not st.contains(s0):
            raise ValueError(f"moment order {s0:g} outside the strip {st}")
        l0 = float(log_moments_tau(params, s0))
        u = 0.5 * (s0 + st.hi)
        y_hi = max(y_hi, (float(log_moments_tau(params, u)) - l0 - math.log(eps)) / (u - s0))
        u = s0 - 3.0 if math.isinf(st.lo) else 0.5 * (s0 + st.lo)
        y_lo = min(y_lo, (math.log(eps) + l0 - float(log_moments_tau(params, u))) / (s0 - u))
    # x itself must stay representable; beyond this the tail is dropped
    return max(y_lo, -_LOG_X_CAP), min(y_hi, _LOG_X_CAP)


def auto_grid(params: StableParams, step=DEFAULT_STEP, eps=_TAIL_EPS, moment_order=None) -> GridSpec:
    """Log-uniform grid covering all but eps of each tail of tau.

    Pass `moment_order` to also cover the tails of x^s f(x) for integrals
    of that moment.
    """
    return GridSpec.with_step(*_auto_log_range(params, eps, moment_order), step)


def _default_sigmas(params: StableParams):
    """Contour abscissae for ln x < 0 and ln x >= 0.

    Round-off in the inverted transform is multiplied by e^{-sigma y}, and by
    e^{(s - sigma) y} once weighted by x^s, so the left part of the grid uses
    a negative sigma and the right part a positive one three quarters of the
    way to the end of the strip.  Moments x^s with s below that sigma are then
    integrated without amplified round-off.
    """
    st = tau_strip(params)
    lo = -2.0 if math.isinf(st.lo) else st.lo
    return 0.5 * lo, 0.75 * st.hi


def _complex_log_sin(z):
    """log sin(z) for complex z, free of overflow for large |Im z|.

    sin z = e^{-iz} (e^{2iz} - 1) / (2i), used in the half-plane Im z >= 0
    where |e^{2iz}| <= 1, and by conjugation below it.  The branch is
    irrelevant: callers only exponentiate sums of these logs.
    """
    z = np.asarray(z, dtype=complex)
    flip = z.imag < 0
    zz = np.where(flip, np.conj(z), z)
    out = -1j * zz + np.log(np.expm1(2j * zz)) - (math.log(2.0) + 0.5j * math.pi)
    return np.where(flip, np.conj(out), out)


def _complex_log_sin_ratio(a, w):
    """log(sin(pi a w) / sin(pi w)) for complex w."""
    w = np.asarray(w, dtype=complex)
    if a == 1:
        return np.zeros_like(w)
    out = np.empty_like(w)
    small = np.abs(w) < 1e-4
    z2 = (np.pi * w[small]) ** 2
    out[small] = (
        math.log(a)
        + np.log1p(-(a * a) * z2 / 6 + a**4 * z2 * z2 / 120)
        - np.log1p(-z2 / 6 + z2 * z2 / 120)
    )
    wl = w[~small]
    out[~small] = _complex_log_sin(np.pi * a * wl) - _complex_log_sin(np.pi * wl)
    return out


def log_moments_tau_complex(params: StableParams, s):
    """Analytic continuation of log E[tau^s] to complex s inside the strip."""
    a, r = params.alpha, params.rho
    s = np.asarray(s, dtype=complex)
    return (
        math.log(math.sin(math.pi / a) / math.sin(math.pi * r))
        + _complex_log_sin_ratio(r * a, s + 1 / a)
        + special.loggamma(1 - a * s)
        - special.loggamma(1 - s)
    )


def _mellin_cutoff(params, sigma, rel=1e-18, du=0.5, umax=600.0):
    """Smallest u beyond which |E[tau^{sigma+iu}]| stays below rel * E[tau^sigma]."""
    u = np.arange(0.0, umax, du)
    lm = log_moments_tau_complex(params, sigma + 1j * u).real
    ok = lm < lm[0] + math.log(rel)
    # the modulus decays exponentially; take the first point after which all are below
    bad = np.nonzero(~ok)[0]
    if bad.size == 0:
        return du
    last = bad[-1]
    if last == u.size - 1:
        raise QuadratureError("Mellin transform does not decay on the search range")
    return float(u[last + 1])


def _invert_on_line(params, sigma, y):
    """Density of ln tau at y from the transform on Re s = sigma.

    With G(y) = e^{sigma y} g(y) one has G(y) = (1/2 pi) int e^{-i u y}
    E[tau^{sigma + i u}] du, summed by the trapezoid rule (exponentially
    accurate for this analytic integrand) through a single FFT.  The
    frequency step makes the aliasing period exceed twice the grid span plus
    40 decay lengths of G on either side.
    """
    st = tau_strip(params)
    dy = y[1] - y[0]
    decay = min(sigma - st.lo, st.hi - sigma)
    period = 2 * (y[-1] - y[0]) + 40.0 / decay
    n = 1 << int(math.ceil(math.log2(period / dy)))
    h = 2 * math.pi / (n * dy)
    ucut = _mellin_cutoff(params, sigma)
    k = np.arange(int(math.ceil(ucut / h)) + 1)
    if k.size > n:
        raise QuadratureError("grid too fine for the Mellin cutoff; increase the step")
    u = k * h
    coef = np.exp(log_moments_tau_complex(params, sigma + 1j * u) - 1j * u * y[0])
    coef[0] *= 0.5
    full = np.zeros(n, dtype=complex)
    full[: k.size] = coef
    gy = (h / math.pi) * np.fft.fft(full)[: y.size].real
    return gy * np.exp(-sigma * y), {"u_cutoff": ucut, "u_step": h, "fft_size": n}


def density_tau_mellin(params: StableParams, grid_spec: GridSpec | None = None, sigma=None) -> DensityGrid:
    """Density of tau by numerical inversion of its closed-form Mellin transform.

    By default two vertical contours are used, a negative sigma left of
    x = 1 and a positive one right of it.  `sigma` may be a single abscissa
    (one contour for the whole grid) or a (left, right) pair.
    """
    st = tau_strip(params)
    if grid_spec is None:
        grid_spec = GridSpec.with_step(*_auto_log_range(params))
    y_out = grid_spec.y()
    # coarse grids are refined by an integer factor and subsampled, since the
    # FFT step must resolve the decay of the transform
    m = max(1, int(math.ceil(grid_spec.step / DEFAULT_STEP - 1e-9)))
    y = grid_spec.log_min + (grid_spec.step / m) * np.arange((y_out.size - 1) * m + 1)
    meta = {"alpha": params.alpha, "rho": params.rho, "method": "mellin"}
    if sigma is not None and np.ndim(sigma) == 0:
        sigma = float(sigma)
        if not st.contains(sigma):
            raise ValueError(f"sigma={sigma} outside strip {st}")
        g, info = _invert_on_line(params, sigma, y)
        meta.update(sigma=sigma, **info)
        return _log_grid(y_out, g[::m], 1e-6, meta)
    s_left, s_right = _default_sigmas(params) if sigma is None else map(float, sigma)
    for sg in (s_left, s_right):
        if not st.contains(sg):
            raise ValueError(f"sigma={sg} outside strip {st}")
    g = np.empty_like(y)
    left = y < 0
    if np.any(left):
        g[left] = _invert_on_line(params, s_left, y)[0][left]
    if np.any(~left):
        # shift the grid origin so the FFT covers only the right part
        yr = y[~left]
        g[~left] = _invert_on_line(params, s_right, yr)[0]
    meta.update(sigma_left=s_left, sigma_right=s_right)
    return _log_grid(y_out, g[::m], 1e-6, meta)


def _aligned_range(lo, hi, step, origin=0.0):
    i0 = math.floor((lo - origin) / step)
    i1 = math.ceil((hi - origin) / step)
    return origin + step * np.arange(i0, i1 + 1)


def density_tau_convolution(params: StableParams, grid_spec: GridSpec | None = None) -> DensityGrid:
    """Density of tau as the law of A * Z_{1/alpha}, A the size-biased stable quotient.

    Computed as a trapezoid-rule convolution of the two log-variable
    densities, both analytic, on a grid aligned with the requested one.
    The spacing is at most 0.01 and shrinks with 1 - rho alpha so that the
    peak of the first factor stays resolved.
    """
    a = params.alpha
    if grid_spec is None:
        grid_spec = GridSpec.with_step(*_auto_log_range(params))
    y = grid_spec.y()
    meta = {"alpha": params.alpha, "rho": params.rho, "method": "convolution"}
    if params.spectrally_negative:
        g = log_variable_density_stable_pos(1 / a, y)
        return _log_grid(y, g, 1e-6, meta)

    # the first factor peaks at t = 1 with log-width about pi (1 - rho alpha)
    fine = min(DEFAULT_STEP, max(0.5 * (1 - params.rho_alpha), _MIN_CONV_STEP))
    m = max(1, int(math.ceil(grid_spec.step / fine - 1e-9)))
    step = grid_spec.step / m
    eps = 1e-13
    # ln Z_{1/a}: lower tail from E[Z^-2], upper from E[Z^s], s < 1/a
    zc = 1 / a
    lz2 = float(log_mellin(_stable(zc), -2.0))
    sz = 0.9 * zc
    lzs = float(log_mellin(_stable(zc), sz))
    yz = _aligned_range((math.log(eps) - lz2) / 2, (lzs - math.log(eps)) / sz, step)
    gz = log_variable_density_stable_pos(zc, yz)
    # ln A: densities decay like e^{(1+1/a) y} and e^{-(1-1/a) y}
    ya_lo = y[0] - yz[-1]
    ya_hi = y[-1] - yz[0]
    ya = _aligned_range(ya_lo, ya_hi, step, origin=y[0])
    ga = np.exp(log_density_first_factor(params, ya))
    if ga.size * gz.size < _DIRECT_CONV_OPS:
        conv = np.convolve(ga, gz) * step
    else:
        conv = np.clip(signal.fftconvolve(ga, gz), 0.0, None) * step
    yc = ya[0] + yz[0] + step * np.arange(conv.size)
    idx = np.rint((y - yc[0]) / step).astype(int)
    g = conv[idx]
    meta["step"] = step
    return _log_grid(y, g, 1e-6, meta)


def _stable(c):
    from .mellin import StablePos

    return StablePos(c)


# ---------------------------------------------------------------------------
# Kanter variables


def _cot_pi(u, v):
    """cot(pi u) given u and v = 1 - u, accurate near both ends."""
    return np.where(u <= 0.5, 1 / np.tan(np.pi * np.minimum(u, 0.5)), -1 / np.tan(np.pi * np.minimum(v, 0.5)))


def kanter_inverse(c, x, iterations=200):
    """(u, v=1-u) with b_c(u) = kappa_c x, by bisection on the logit of u."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("x must lie in (0, 1)")
    target = np.log(kappa_const(c)) + np.log(x)
    lo = np.full(x.shape, -700.0)
    hi = np.full(x.shape, 40.0)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        val = log_kanter_b(c, special.expit(mid), special.expit(-mid))
        # log b decreases in u, hence in the logit
        above = val > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo < 1e-13 * np.maximum(1.0, np.abs(mid))):
            break
    else:
        bad = np.argmax(hi - lo)
        raise QuadratureError(f"Kanter inversion did not converge; bracket [{lo.flat[bad]}, {hi.flat[bad]}]")
    mid = 0.5 * (lo + hi)
    return special.expit(mid), special.expit(-mid)


def density_kanter(c, x, bias_order=0.0):
    """Density of K_c^{(t)} (t = bias_order) at x in (0, 1).

    f_{K_c}(x) = 1 / (x |d log b_c / du|) at u = b_c^{-1}(kappa_c x); the
    size-biased version is x^t f(x) / E[K_c^t].
    """
    x = np.asarray(x, dtype=float)
    u, v = kanter_inverse(c, x)
    dlog = np.pi * (
        _cot_pi(u, v)
        - c * c / np.tan(np.pi * c * u)
        - (1 - c) ** 2 / np.tan(np.pi * (1 - c) * u)
    )
    f = 1.0 / (x * np.abs(dlog))
    if bias_order != 0:
        f = f * np.exp(bias_order * np.log(x) - float(log_mellin(KanterRV(c), bias_order)))
    return f[()] if f.ndim == 0 else f


class KanterBiasTable:
    """Tabulated law of K_c^{(t)} through its uniform variable.

    K_c^{(t)} = k(U*) with k = b_c / kappa_c and U* of density k(u)^t / E[K_c^t].
    With v = 1 - u = y^q, q = 1/(1+t), the density of y is bounded and
    nonzero at y = 0 even when x^t is unbounded near x = 0.
    Its CDF is tabulated by the trapezoid rule, doubling the node count until
    successive tables agree to `tol`; sampling inverts the table with a
    monotone cubic.
    """

    def __init__(self, c, t, n=4096, tol=1e-6, max_n=1 << 22):
        if not 0 < c < 1:
            raise ValueError("c must lie in (0, 1)")
        if not t > -1:
            raise ValueError("K_c^{(t)} exists only for t > -1")
        self.c, self.t = float(c), float(t)
        self.q = 1 / (1 + t)
        self.log_kappa = math.log(kappa_const(c))
        self.norm = math.exp(float(log_mellin(KanterRV(c), t))) if t != 0 else 1.0
        prev = self._cdf_table(n)
        while True:
            cur = self._cdf_table(2 * n)
            err = max(np.max(np.abs(cur[::2] - prev)), abs(cur[-1] - 1.0))
            n *= 2
            if err < tol:
                break
            if n > max_n:
                raise QuadratureError(f"Kanter bias table: CDF error {err:.2e} at {n} nodes")
            prev = cur
        self.nodes = n
        self.cdf_error = float(err)
        self.y = np.linspace(0.0, 1.0, n + 1)
        h = cur / cur[-1]
        self.H = h
        self._ppf = PchipInterpolator(h, self.y)
        self._cdf_y = PchipInterpolator(self.y, h)

    def _density_y(self, y):
        c, t, q = self.c, self.t, self.q
        out = np.empty_like(y)
        inner = (y > 0) & (y < 1)
        yi = y[inner]
        logk = log_kanter_b(c, v=yi**q) - self.log_kappa
        out[inner] = q * np.exp(t * logk + (q - 1) * np.log(yi))
        out[y >= 1] = q
        # k(1 - v) ~ m0 v as v -> 0, so the density tends to q m0^t
        lm0 = (
            math.log(math.pi)
            - c * math.log(math.sin(math.pi * c))
            - (1 - c) * math.log(math.sin(math.pi * (1 - c)))
            - self.log_kappa
        )
        out[y <= 0] = q * math.exp(t * lm0)
        return out / self.norm

    def _cdf_table(self, n):
        y = np.linspace(0.0, 1.0, n + 1)
        d = self._density_y(y)
        return np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1])) / n])

    def log_sample(self, rng, size):
        """ln K_c^{(t)} draws."""
        w = rng.random(size)
        y = np.clip(self._ppf(w), 0.0, 1.0)
        v = np.clip(y**self.q, 1e-300, 1 - 1e-16)
        return log_kanter_b(self.c, v=v) - self.log_kappa

    def cdf(self, x):
        """P[K_c^{(t)} <= x]."""
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 1, 1.0, 0.0)
        m = (x > 0) & (x < 1)
        if np.any(m):
            _, v = kanter_inverse(self.c, x[m])
            out[m] = np.clip(self._cdf_y(v ** (1 / self.q)), 0.0, 1.0)
        return out


# ---------------------------------------------------------------------------
# laws as cell masses in log coordinates


@dataclass
class LogLaw:
    """Law of ln X as probability masses of cells [y_j - step/2, y_j + step/2]."""

    y0: float
    step: float
    masses: np.ndarray

    @classmethod
    def from_cdf(cls, cdf_y: Callable, lo, hi, step, origin=0.0):
        """Cells aligned on origin + k*step covering [lo, hi]; cdf_y is P[ln X <= y]."""
        centers = _aligned_range(lo, hi, step, origin)
        edges = np.concatenate([centers - step / 2, [centers[-1] + step / 2]])
        cdf = np.asarray(cdf_y(edges), dtype=float)
        masses = np.clip(np.diff(cdf), 0.0, None)
        return cls(float(centers[0]), step, masses)

    @property
    def centers(self):
        return self.y0 + self.step * np.arange(self.masses.size)

    @property
    def total(self):
        return float(self.masses.sum())

    def __mul__(self, other: "LogLaw") -> "LogLaw":
        """Law of the independent product (sum of logs)."""
        if not math.isclose(self.step, other.step, rel_tol=1e-12):
            raise ValueError("LogLaw product needs equal steps")
        return LogLaw(self.y0 + other.y0, self.step, np.convolve(self.masses, other.masses))

    def to_density_grid(self, tolerance=1e-6, metadata=None) -> DensityGrid:
        y = self.centers
        width = np.exp(y + self.step / 2) - np.exp(y - self.step / 2)
        return DensityGrid(np.exp(y), self.masses / width, width, tolerance, metadata or {})


def _kanter_log_cdf(table: KanterBiasTable, power: float):
    """CDF in y of power * ln K, K ~ table's law."""

    def cdf(y):
        y = np.asarray(y, dtype=float)
        if power > 0:
            # P[power ln K <= y] = P[K <= e^{y/power}]
            return table.cdf(np.exp(np.minimum(y / power, 0.0)))
        return 1.0 - table.cdf(np.exp(np.minimum(y / power, 0.0)))

    return cdf


def ksym_product_law(alpha, step=2e-3, eps=1e-10) -> LogLaw:
    """ln of K_{alpha/2}^{(1/alpha)} x 1/B_{1-1/alpha, 1/alpha}."""
    c, t = alpha / 2, 1 / alpha
    kt = KanterBiasTable(c, t)
    k_lo = _kanter_quantile_log(kt, eps)
    lk = LogLaw.from_cdf(_kanter_log_cdf(kt, 1.0), k_lo, 0.0, step)
    a, b = 1 - 1 / alpha, 1 / alpha
    hi = -math.log(stats.beta.ppf(eps, a, b))
    lb = LogLaw.from_cdf(lambda y: stats.beta.sf(np.exp(-np.maximum(y, 0.0)), a, b), 0.0, hi, step)
    return lk * lb


def kasym_product_law(r, s, beta, gamma, t, step=2e-3, eps=1e-10) -> LogLaw:
    """ln of (K_beta^{-r})^{(t)} x K_gamma^{-s}, supported on (0, inf)."""
    # (K^{-r})^{(t)} = (K^{(-r t)})^{-r}
    t1 = KanterBiasTable(beta, -r * t)
    t2 = KanterBiasTable(gamma, 0.0)
    hi1 = -r * _kanter_quantile_log(t1, eps)
    hi2 = -s * _kanter_quantile_log(t2, eps)
    l1 = LogLaw.from_cdf(_kanter_log_cdf(t1, -r), 0.0, hi1, step)
    l2 = LogLaw.from_cdf(_kanter_log_cdf(t2, -s), 0.0, hi2, step)
    return l1 * l2


def _kanter_quantile_log(table: KanterBiasTable, p):
    """ln of the p-quantile of the tabulated law."""
    y = float(table._ppf(p))
    v = max(y**table.q, 1e-300)
    return float(log_kanter_b(table.c, v=v) - table.log_kappa)


def log_x_alpha_factors(alpha, y):
    """Log-densities of the two log-factors of the strongly unimodal part of tau.

    Returns (log density of -(alpha/2) ln L, log density of
    (1 - alpha/2) ln Gamma_{1/alpha + 1/2}) at y; the second is None at
    alpha = 2 where the factor is the constant 1.
    """
    y = np.asarray(y, dtype=float)
    p1 = -alpha / 2
    w = y / p1
    f1 = w - np.exp(w) - math.log(abs(p1))
    if alpha >= 2:
        return f1, None
    p2 = 1 - alpha / 2
    sh = 1 / alpha + 0.5
    w = y / p2
    f2 = sh * w - np.exp(w) - special.gammaln(sh) - math.log(p2)
    return f1, f2


# ---------------------------------------------------------------------------
# modes


@dataclass(frozen=True)
class ModeReport:
    mode_location: float
    local_max_count: int
    smoothing_tolerance: float
    maxima: tuple = ()

    @property
    def unimodal(self) -> bool:
        return self.local_max_count == 1


def find_mode(grid: DensityGrid, smoothing_tolerance=1e-3) -> ModeReport:
    """Argmax and number of local maxima with relative prominence above the tolerance.

    Endpoints count as maxima when the density falls away from them.
    Plateaus count once.
    """
    f = np.asarray(grid.values, dtype=float)
    if f.size < 3 or not np.all(np.isfinite(f)):
        raise ValueError("degenerate density grid")
    top = float(f.max())
    if top <= 0:
        raise ValueError("density grid is identically zero")
    # padding below the minimum lets edge maxima register; their prominence
    # is then measured against the interior side only
    pad = np.concatenate([[-top], f, [-top]])
    peaks, props = find_peaks(pad, prominence=0.0, plateau_size=1)
    keep = [p - 1 for p, pr in zip(peaks, props["prominences"]) if pr / top > smoothing_tolerance]
    imax = int(np.argmax(f))
    return ModeReport(
        mode_location=float(grid.abscissae[imax]),
        local_max_count=len(keep),
        smoothing_tolerance=smoothing_tolerance,
        maxima=tuple(float(grid.abscissae[i]) for i in keep),
    )
