"""Positive random variables as Mellin transforms.

A random variable is an immutable expression tree whose leaves are the
atoms L (unit exponential), Gamma_t, Beta_{a,b}, Z_c (positive c-stable with
E[exp(-lam Z_c)] = exp(-lam^c)) and K_c (Kanter variable on [0, 1]).
Every leaf occurrence is an independent copy, so ``Product(Z, Power(Z, -1))``
is a quotient of two independent variables.

The hitting time tau of level 1 by a strictly alpha-stable process is built
from these atoms in three equivalent ways (see :func:`tau_expr`), and its
closed-form Mellin transform is :func:`moments_tau`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .report import CheckPoint, VerificationReport
from .specfun import kappa_const, log_gamma

__all__ = [
    "AdmissibilityError",
    "StripError",
    "StableParams",
    "MellinStrip",
    "RVExpr",
    "Const",
    "ExpL",
    "GammaRV",
    "BetaRV",
    "StablePos",
    "KanterRV",
    "Power",
    "Product",
    "SizeBias",
    "Form",
    "ClosedForm",
    "strip_of",
    "mellin_eval",
    "log_mellin",
    "tau_expr",
    "tau_strip",
    "moments_tau",
    "log_moments_tau",
    "closed_form_tau",
    "identity_check",
    "default_s_grid",
    "expr_to_json",
    "expr_from_json",
]

_EPS = 1e-12


class AdmissibilityError(ValueError):
    """(alpha, rho) outside 1 < alpha <= 2, 1 - 1/alpha <= rho <= 1/alpha."""


class StripError(ValueError):
    """A Mellin exponent lies outside the finiteness strip."""


@dataclass(frozen=True)
class StableParams:
    """Index alpha and positivity parameter rho = P[X_1 >= 0]."""

    alpha: float
    rho: float

    def __post_init__(self):
        a, r = float(self.alpha), float(self.rho)
        if not (math.isfinite(a) and math.isfinite(r)):
            raise AdmissibilityError("alpha and rho must be finite")
        if not (1 < a <= 2 + _EPS):
            raise AdmissibilityError(f"alpha={a} outside (1, 2]")
        a = min(a, 2.0)
        lo, hi = 1 - 1 / a, 1 / a
        if r < lo - _EPS or r > hi + _EPS:
            raise AdmissibilityError(f"rho={r} outside [{lo:.6g}, {hi:.6g}] for alpha={a}")
        # snap boundary values so exact comparisons below are safe
        if abs(r - lo) <= _EPS:
            r = lo
        if abs(r - hi) <= _EPS:
            r = hi
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "rho", r)

    @property
    def rho_alpha(self) -> float:
        return self.rho * self.alpha

    @property
    def spectrally_negative(self) -> bool:
        """rho = 1/alpha: no positive jumps and tau is Z_{1/alpha} itself."""
        return self.rho == 1 / self.alpha

    @property
    def spectrally_positive(self) -> bool:
        return self.alpha < 2 and self.rho == 1 - 1 / self.alpha

    @property
    def symmetric(self) -> bool:
        return abs(self.rho - 0.5) <= _EPS

    @property
    def scale_c(self) -> float:
        """Scale c = cos(pi alpha (rho - 1/2)) of the (c, theta) parametrisation."""
        return math.cos(math.pi * self.alpha * (self.rho - 0.5))

    @property
    def theta(self) -> float | None:
        """Skewness theta; undefined (None) at alpha = 2."""
        t = math.tan(math.pi * self.alpha / 2)
        if abs(t) < 1e-14:
            return None
        return math.tan(math.pi * self.alpha * (self.rho - 0.5)) / t

    @property
    def local_time_kappa(self) -> float:
        """Normalising constant of the inverse local time at zero."""
        return self.alpha * math.sin(math.pi / self.alpha) / math.sin(math.pi * self.rho)

    def rho_range(self) -> tuple[float, float]:
        return 1 - 1 / self.alpha, 1 / self.alpha


@dataclass(frozen=True)
class MellinStrip:
    """Open interval (lo, hi) of exponents s with E[X^s] finite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise StripError(f"empty strip ({self.lo}, {self.hi})")

    def contains(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(np.all((s > self.lo) & (s < self.hi)))

    def intersect(self, other: "MellinStrip") -> "MellinStrip":
        return MellinStrip(max(self.lo, other.lo), min(self.hi, other.hi))

    def shift(self, t: float) -> "MellinStrip":
        return MellinStrip(self.lo - t, self.hi - t)

    def scale(self, p: float) -> "MellinStrip":
        if p > 0:
            return MellinStrip(self.lo / p, self.hi / p)
        if p < 0:
            return MellinStrip(self.hi / p, self.lo / p)
        return MellinStrip(-math.inf, math.inf)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __str__(self):
        return f"({self.lo:.6g}, {self.hi:.6g})"


_ALL = MellinStrip(-math.inf, math.inf)


class RVExpr:
    """Base class of expression-tree nodes."""

    def strip(self) -> MellinStrip:
        raise NotImplementedError

    def _log_mellin(self, s):
        raise NotImplementedError

    def log_mellin(self, s):
        """log E[X^s]; raises StripError naming the first offending subtree."""
        st = self.strip()
        if not st.contains(s):
            raise StripError(f"s={_fmt_s(s)} outside strip {st} of {self}")
        return self._log_mellin(np.asarray(s, dtype=float))

    def to_dict(self) -> dict:
        raise NotImplementedError

    # convenience constructors
    def __pow__(self, p):
        return Power(self, float(p))

    def __mul__(self, other):
        return Product((self, other))

    def biased(self, t):
        return SizeBias(self, float(t))


def _fmt_s(s):
    s = np.asarray(s)
    if s.ndim == 0:
        return f"{float(s):.6g}"
    return f"[{s.min():.6g}, {s.max():.6g}]"


@dataclass(frozen=True, repr=False)
class Const(RVExpr):
    k: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ValueError("Const requires a positive finite value")

    def strip(self):
        return _ALL

    def _log_mellin(self, s):
        return s * math.log(self.k)

    def to_dict(self):
        return {"type": "Const", "k": self.k}

    def __repr__(self):
        return f"{self.k:.6g}"


@dataclass(frozen=True, repr=False)
class ExpL(RVExpr):
    def strip(self):
        return MellinStrip(-1.0, math.inf)

    def _log_mellin(self, s):
        return log_gamma(1 + s)

    def to_dict(self):
        return {"type": "ExpL"}

    def __repr__(self):
        return "L"


@dataclass(frozen=True, repr=False)
class GammaRV(RVExpr):
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("Gamma shape must be positive")

    def strip(self):
        return MellinStrip(-self.t, math.inf)

    def _log_mellin(self, s):
        return log_gamma(self.t + s) - log_gamma(self.t)

    def to_dict(self):
        return {"type": "GammaRV", "t": self.t}

    def __repr__(self):
        return f"Gamma({self.t:.6g})"


@dataclass(frozen=True, repr=False)
class BetaRV(RVExpr):
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Beta parameters must be positive")

    def strip(self):
        return MellinStrip(-self.a, math.inf)

    def _log_mellin(self, s):
        a, b = self.a, self.b
        return log_gamma(a + s) + log_gamma(a + b) - log_gamma(a) - log_gamma(a + b + s)

    def to_dict(self):
        return {"type": "BetaRV", "a": self.a, "b": self.b}

    def __repr__(self):
        return f"B({self.a:.6g},{self.b:.6g})"


@dataclass(frozen=True, repr=False)
class StablePos(RVExpr):
    """Positive c-stable Z_c; Z_1 is the constant 1."""

    c: float

    def __post_init__(self):
        if not (0 < self.c <= 1):
            raise ValueError("stable index c must lie in (0, 1]")

    def strip(self):
        if self.c == 1:
            return _ALL
        return MellinStrip(-math.inf, self.c)

    def _log_mellin(self, s):
        if self.c == 1:
            return np.zeros_like(s)
        return log_gamma(1 - s / self.c) - log_gamma(1 - s)

    def to_dict(self):
        return {"type": "StablePos", "c": self.c}

    def __repr__(self):
        return f"Z({self.c:.6g})"


@dataclass(frozen=True, repr=False)
class KanterRV(RVExpr):
    """K_c = b_c(U) / kappa_c, supported on [0, 1]."""

    c: float

    def __post_init__(self):
        if not (0 < self.c < 1):
            raise ValueError("Kanter index c must lie in (0, 1)")

    def strip(self):
        return MellinStrip(-1.0, math.inf)

    def _log_mellin(self, s):
        c = self.c
        return (
            -s * math.log(kappa_const(c))
            + log_gamma(1 + s)
            - log_gamma(1 + c * s)
            - log_gamma(1 + (1 - c) * s)
        )

    def to_dict(self):
        return {"type": "KanterRV", "c": self.c}

    def __repr__(self):
        return f"K({self.c:.6g})"


@dataclass(frozen=True, repr=False)
class Power(RVExpr):
    child: RVExpr
    p: float

    def strip(self):
        return self.child.strip().scale(self.p)

    def _log_mellin(self, s):
        if self.p == 0:
            return np.zeros_like(s)
        return self.child.log_mellin(self.p * s)

    def to_dict(self):
        return {"type": "Power", "p": self.p, "child": self.child.to_dict()}

    def __repr__(self):
        return f"{self.child!r}^{self.p:.6g}"


@dataclass(frozen=True, repr=False)
class Product(RVExpr):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("empty product")

    def strip(self):
        st = _ALL
        for ch in self.children:
            st = st.intersect(ch.strip())
        return st

    def _log_mellin(self, s):
        return sum(ch.log_mellin(s) for ch in self.children)

    def to_dict(self):
        return {"type": "Product", "children": [c.to_dict() for c in self.children]}

    def __repr__(self):
        return "(" + " * ".join(repr(c) for c in self.children) + ")"


@dataclass(frozen=True, repr=False)
class SizeBias(RVExpr):
    """X^{(t)}: the law of X reweighted by x^t / E[X^t]."""

    child: RVExpr
    t: float

    def __post_init__(self):
        st = self.child.strip()
        if not st.contains(self.t):
            raise StripError(f"size-bias order {self.t:.6g} outside strip {st} of {self.child!r}")

    def strip(self):
        return self.child.strip().shift(self.t)

    def _log_mellin(self, s):
        return self.child.log_mellin(s + self.t) - self.child.log_mellin(self.t)

    def to_dict(self):
        return {"type": "SizeBias", "t": self.t, "child": self.child.to_dict()}

    def __repr__(self):
        return f"[{self.child!r}]^({self.t:.6g})"


def strip_of(expr: RVExpr) -> MellinStrip:
    """Finiteness strip: exact for atoms, interval arithmetic for composites."""
    return expr.strip()


def log_mellin(expr: RVExpr, s):
    out = expr.log_mellin(s)
    return out[()] if np.ndim(out) == 0 else out


def mellin_eval(expr: RVExpr, s):
    """E[X^s] for s (scalar or array) strictly inside the strip."""
    return np.exp(log_mellin(expr, s))


# ---------------------------------------------------------------------------
# JSON round trip

_NODE_TYPES = {
    "Const": lambda d: Const(float(d["k"])),
    "ExpL": lambda d: ExpL(),
    "GammaRV": lambda d: GammaRV(float(d["t"])),
    "BetaRV": lambda d: BetaRV(float(d["a"]), float(d["b"])),
    "StablePos": lambda d: StablePos(float(d["c"])),
    "KanterRV": lambda d: KanterRV(float(d["c"])),
    "Power": lambda d: Power(_from_dict(d["child"]), float(d["p"])),
    "Product": lambda d: Product(tuple(_from_dict(c) for c in d["children"])),
    "SizeBias": lambda d: SizeBias(_from_dict(d["child"]), float(d["t"])),
}

EXPR_SCHEMA = "stablehit.rvexpr/1"


def _from_dict(d):
    try:
        build = _NODE_TYPES[d["type"]]
    except KeyError:
        raise ValueError(f"unknown node type {d.get('type')!r}") from None
    return build(d)


def expr_to_json(expr: RVExpr, **kw) -> str:
    return json.dumps({"schema": EXPR_SCHEMA, "expr": expr.to_dict()}, **kw)


def expr_from_json(text: str) -> RVExpr:
    doc = json.loads(text)
    if doc.get("schema") != EXPR_SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    return _from_dict(doc["expr"])


# ---------------------------------------------------------------------------
# the hitting time


class Form(str, enum.Enum):
    YANO = "YANO"  # symmetric case: exponential, size-biased stable, inverse Beta
    RK = "RK"  # size-biased stable quotient times Z_{1/alpha}
    FINAL = "FINAL"  # RK with every stable atom expanded through Kanter's factorisation

    @classmethod
    def parse(cls, v) -> "Form":
        if isinstance(v, cls):
            return v
        return cls(str(v).upper())


def tau_strip(params: StableParams) -> MellinStrip:
    a = params.alpha
    if params.spectrally_negative:
        return MellinStrip(-math.inf, 1 / a)
    return MellinStrip(-1 - 1 / a, 1 - 1 / a)


def tau_expr(params: StableParams, form=Form.RK) -> RVExpr:
    """Expression tree for tau = hitting time of 1.

    YANO needs rho = 1/2.  RK and FINAL cover the whole admissible range;
    at the spectrally negative edge rho = 1/alpha they reduce to Z_{1/alpha}
    (RK returns the atom, FINAL its Kanter expansion).
    """
    form = Form.parse(form)
    a = params.alpha
    ra = params.rho_alpha
    if form is Form.YANO:
        if not params.symmetric:
            raise AdmissibilityError("the YANO form requires rho = 1/2")
        return Product((
            Const(2.0 ** -a),
            Power(ExpL(), -a / 2),
            Power(SizeBias(StablePos(a / 2), -0.5), -a / 2),
            Power(BetaRV(1 - 1 / a, 1 / a), -1.0),
        ))
    if form is Form.RK:
        if params.spectrally_negative:
            return StablePos(1 / a)
        quotient = Product((Power(StablePos(ra), ra), Power(StablePos(ra), -ra)))
        return Product((SizeBias(quotient, 1 / a), StablePos(1 / a)))
    # FINAL
    tail = [
        Const(kappa_const(1 / a) ** -a),
        Power(ExpL(), 1 - a),
        Power(KanterRV(1 / a), -a),
    ]
    if params.spectrally_negative:
        return Product(tuple(tail))
    exp_ratio = Power(Product((ExpL(), Power(ExpL(), -1.0))), 1 - ra)
    return Product((
        tail[0],
        SizeBias(exp_ratio, 1 / a),
        tail[1],
        SizeBias(KanterRV(ra), 1 / a),
        SizeBias(Power(KanterRV(ra), -1.0), 1 / a),
        tail[2],
    ))


def _log_sin_ratio(a, y):
    """log(sin(pi a y) / sin(pi y)) for real y in (-1, 1), 0 < a <= 1.

    For a = 1 the ratio is identically 1 and y is unrestricted.
    """
    y = np.asarray(y, dtype=float)
    if a == 1:
        return np.zeros_like(y)
    out = np.empty_like(y)
    small = np.abs(y) < 1e-4
    z2 = (np.pi * y[small]) ** 2
    # sin(a z)/sin(z) = a (1 - a^2 z^2/6 + a^4 z^4/120) / (1 - z^2/6 + z^4/120) + O(z^6)
    out[small] = (
        math.log(a)
        + np.log1p(-(a * a) * z2 / 6 + a**4 * z2 * z2 / 120)
        - np.log1p(-z2 / 6 + z2 * z2 / 120)
    )
    yl = y[~small]
    out[~small] = np.log(np.sin(np.pi * a * yl) / np.sin(np.pi * yl))
    return out


def log_moments_tau(params: StableParams, s):
    """log E[tau^s] from the closed form, s in (-1 - 1/alpha, 1 - 1/alpha)."""
    st = tau_strip(params)
    if not st.contains(s):
        raise StripError(f"s={_fmt_s(s)} outside strip {st} of tau")
    s = np.asarray(s, dtype=float)
    a, r = params.alpha, params.rho
    y = s + 1 / a
    out = (
        math.log(math.sin(math.pi / a) / math.sin(math.pi * r))
        + _log_sin_ratio(r * a, y)
        + log_gamma(1 - a * s)
        - log_gamma(1 - s)
    )
    return out[()] if out.ndim == 0 else out


def moments_tau(params: StableParams, s):
    """E[tau^s] = sin(pi/a) sin(pi rho a (s + 1/a)) / (sin(pi rho) sin(pi (s + 1/a)))
    * Gamma(1 - a s) / Gamma(1 - s)."""
    return np.exp(log_moments_tau(params, s))


@dataclass(frozen=True)
class ClosedForm:
    """A Mellin transform given by a function rather than a tree."""

    func: Callable
    strip_: MellinStrip
    label: str = "closed form"

    def strip(self):
        return self.strip_

    def __repr__(self):
        return self.label


def closed_form_tau(params: StableParams) -> ClosedForm:
    return ClosedForm(
        lambda s: moments_tau(params, s),
        tau_strip(params),
        f"closed-form E[tau^s] (alpha={params.alpha:.6g}, rho={params.rho:.6g})",
    )


def default_s_grid(strip: MellinStrip, n=50, fraction=0.8) -> np.ndarray:
    """n Chebyshev points on the central `fraction` of the strip.

    Infinite ends are clamped to +-4 before shrinking.
    """
    lo = strip.lo if math.isfinite(strip.lo) else min(-4.0, strip.hi - 4.0)
    hi = strip.hi if math.isfinite(strip.hi) else max(4.0, strip.lo + 4.0)
    mid, half = (lo + hi) / 2, fraction * (hi - lo) / 2
    k = np.arange(n)
    return mid + half * np.cos(np.pi * (2 * k + 1) / (2 * n))[::-1]


Transform = Union[RVExpr, ClosedForm]


def _evaluate(side: Transform, s):
    if isinstance(side, ClosedForm):
        return np.asarray(side.func(s), dtype=float)
    return np.asarray(mellin_eval(side, s), dtype=float)


def identity_check(
    lhs: Transform,
    rhs: Transform,
    s_grid: Iterable[float] | None = None,
    tolerance: float = 1e-9,
    name: str = "mellin identity",
) -> VerificationReport:
    """Compare two Mellin transforms pointwise by relative deviation."""
    st = lhs.strip().intersect(rhs.strip())
    s = default_s_grid(st) if s_grid is None else np.asarray(list(s_grid), dtype=float)
    if not st.contains(s):
        raise StripError(f"grid leaves the common strip {st}")
    left = _evaluate(lhs, s)
    right = _evaluate(rhs, s)
    dev = np.abs(left - right) / np.abs(right)
    points = [CheckPoint(float(si), float(r), float(l), float(d)) for si, l, r, d in zip(s, left, right, dev)]
    return VerificationReport(
        check_name=name,
        points=points,
        tolerance=tolerance,
        metadata={"lhs": repr(lhs), "rhs": repr(rhs), "strip": [st.lo, st.hi], "grid_points": len(s)},
    )
