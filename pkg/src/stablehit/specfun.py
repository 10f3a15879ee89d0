"""Scalar special functions: log-Gamma, Gamma ratios, Kanter's function,
the constant kappa_c and the spectral function phi_beta.

Every function accepts floats or numpy arrays and broadcasts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

__all__ = [
    "PoleError",
    "GammaRatioSpec",
    "log_gamma",
    "gamma_sign",
    "gamma_ratio",
    "log_gamma_ratio",
    "kanter_b",
    "log_kanter_b",
    "kappa_const",
    "spectral_phi",
]

# below this distance to an endpoint kanter_b switches to its limit form
_KANTER_EDGE = 1e-8
# phi_beta uses the cancelled expansion below this abscissa
_PHI_SMALL_X = 1.0
# 1/expm1(y) - 1/y is summed from its Bernoulli series below this argument
_G_SERIES = 0.1


class PoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


def _check_poles(x):
    x = np.asarray(x, dtype=float)
    bad = (x <= 0) & (x == np.floor(x))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {x[bad].ravel()[0]:g}")
    if np.any(~np.isfinite(x)):
        raise ValueError("log_gamma requires finite arguments")
    return x


def log_gamma(x):
    """ln|Gamma(x)|, with the reflection formula handling x < 0.

    Raises PoleError at nonpositive integers and OverflowError if the
    result is not representable.
    """
    x = _check_poles(x)
    out = special.gammaln(x)
    if np.any(np.isinf(out)):
        raise OverflowError("ln Gamma overflows double precision")
    return out[()] if out.ndim == 0 else out


def gamma_sign(x):
    """Sign of Gamma(x): +1 for x > 0, alternating on the negative axis."""
    x = _check_poles(x)
    out = special.gammasgn(x)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class GammaRatioSpec:
    """prod Gamma(numerator_args) / prod Gamma(denominator_args)."""

    numerator_args: Sequence[float] = field(default_factory=tuple)
    denominator_args: Sequence[float] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "numerator_args", tuple(self.numerator_args))
        object.__setattr__(self, "denominator_args", tuple(self.denominator_args))
        _check_poles(np.array(self.numerator_args + self.denominator_args, dtype=float))


def log_gamma_ratio(num, den):
    """Return (log|ratio|, sign) for prod Gamma(num) / prod Gamma(den).

    Entries of `num` and `den` may be arrays; they are broadcast together.
    """
    logv = 0.0
    sign = 1.0
    for a in num:
        logv = logv + log_gamma(a)
        sign = sign * gamma_sign(a)
    for a in den:
        logv = logv - log_gamma(a)
        sign = sign * gamma_sign(a)
    return logv, sign


def gamma_ratio(spec: GammaRatioSpec):
    logv, sign = log_gamma_ratio(spec.numerator_args, spec.denominator_args)
    if np.any(logv > 709.78):
        raise OverflowError("Gamma ratio exceeds double range")
    return sign * np.exp(logv)


def _check_open_unit(name, v):
    v = np.asarray(v, dtype=float)
    if np.any(~((v > 0) & (v < 1))):
        raise ValueError(f"{name} must lie strictly inside (0, 1)")
    return v


def kappa_const(c):
    """kappa_c = c^{-c} (1-c)^{c-1}, the supremum of kanter_b(c, .)."""
    c = _check_open_unit("c", c)
    out = np.exp(-c * np.log(c) - (1 - c) * np.log1p(-c))
    return out[()] if out.ndim == 0 else out


def log_kanter_b(c, u=None, v=None):
    """log b_c(u).

    Give ``v = 1 - u`` instead of (or along with) u when the distance to the
    right endpoint is known more accurately than u itself.
    """
    c = _check_open_unit("c", c)
    if v is None:
        u = _check_open_unit("u", u)
        v = 1.0 - u
    elif u is None:
        v = _check_open_unit("v", v)
        u = 1.0 - v
    else:
        # both sides supplied (e.g. from a logit); u may round to 1.0
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        if np.any(~((u > 0) & (v > 0) & (u <= 1) & (v <= 1))):
            raise ValueError("u and v = 1 - u must lie in (0, 1)")
    c, u, v = np.broadcast_arrays(c, u, v)
    # sin(pi u) is evaluated on the shorter side of the interval
    w = np.minimum(u, v)
    with np.errstate(divide="ignore"):
        out = (
            np.log(np.sin(np.pi * w))
            - c * np.log(np.sin(np.pi * c * u))
            - (1 - c) * np.log(np.sin(np.pi * (1 - c) * u))
        )
    near0 = u < _KANTER_EDGE
    if np.any(near0):
        lk = -c * np.log(c) - (1 - c) * np.log1p(-c)
        out = np.where(near0, lk, out)
    near1 = v < _KANTER_EDGE
    if np.any(near1):
        lead = (
            np.log(np.pi * v)
            - c * np.log(np.sin(np.pi * c))
            - (1 - c) * np.log(np.sin(np.pi * (1 - c)))
        )
        out = np.where(near1, lead, out)
    return out[()] if out.ndim == 0 else out


def kanter_b(c, u=None, v=None):
    """Kanter's function b_c(u) = sin(pi u) / (sin^c(pi c u) sin^{1-c}(pi (1-c) u)).

    Strictly decreasing on (0, 1) from kappa_c to 0.  The endpoints
    themselves are rejected; within 1e-8 of them the limiting forms are used.
    """
    return np.exp(log_kanter_b(c, u, v))


def _g(y):
    """1/expm1(y) - 1/y, finite at 0 where it equals -1/2."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < _G_SERIES
    ys = y[small]
    y2 = ys * ys
    out[small] = -0.5 + ys * (1 / 12 - y2 * (1 / 720 - y2 * (1 / 30240 - y2 * (1 / 1209600 - y2 / 47900160))))
    yl = y[~small]
    with np.errstate(over="ignore"):
        out[~small] = 1.0 / np.expm1(yl) - 1.0 / yl
    return out


def spectral_phi(beta, x):
    """Spectral function of -log K_beta.

    phi(x) = 1/(e^x - 1) - 1/(e^{x/beta} - 1) - 1/(e^{x/(1-beta)} - 1).
    The three poles at 0 cancel; for small x the pole parts are removed
    term by term so that phi(0+) = 1/2 is reached without cancellation.
    """
    beta = _check_open_unit("beta", beta)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("x must be positive")
    beta, x = np.broadcast_arrays(beta, x)
    beta = beta.astype(float).ravel()
    xf = x.astype(float).ravel()
    out = np.empty_like(xf)
    small = xf < _PHI_SMALL_X
    xs, bs = xf[small], beta[small]
    # grouping the beta and 1 - beta terms keeps phi exactly symmetric
    out[small] = _g(xs) - (_g(xs / bs) + _g(xs / (1 - bs)))
    xl, bl = xf[~small], beta[~small]
    with np.errstate(over="ignore"):
        out[~small] = 1 / np.expm1(xl) - (1 / np.expm1(xl / bl) + 1 / np.expm1(xl / (1 - bl)))
    out = out.reshape(x.shape)
    return out[()] if out.ndim == 0 else out
