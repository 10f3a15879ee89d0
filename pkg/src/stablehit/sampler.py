"""Random-variate generation for the atoms, their size-biased versions and tau.

Expressions are compiled into a flat SamplerPlan before drawing.  Size-biasing
is pushed down the tree with the exact rules

    (X Y)^{(t)} = X^{(t)} Y^{(t)}            (independent factors)
    (X^p)^{(t)} = (X^{(tp)})^p
    L^{(t)} = Gamma_{1+t},  Gamma_a^{(t)} = Gamma_{a+t},  B_{a,b}^{(t)} = B_{a+t,b}
    Z_c = kappa_c^{-1/c} L^{-(1-c)/c} K_c^{-1/c}    (Kanter)

so that the only genuinely biased leaves left are Kanter variables K_c^{(t)}.
Those are drawn by rejection when t > 0 (weight x^t <= 1 on (0, 1)) and by
inverting a tabulated CDF when t < 0 (weight unbounded near 0).

All sampling happens on the log scale; tau itself can exceed the double range
for alpha close to 1.
"""

from __future__ import annotations

import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .density import KanterBiasTable
from .mellin import (
    BetaRV,
    Const,
    ExpL,
    Form,
    GammaRV,
    KanterRV,
    Power,
    Product,
    RVExpr,
    SizeBias,
    StableParams,
    StablePos,
    StripError,
    mellin_eval,
    tau_expr,
)
from .specfun import kappa_const, log_kanter_b

__all__ = [
    "RandomStream",
    "PlanLeaf",
    "SamplerPlan",
    "RejectionStats",
    "compile_plan",
    "sample_stable_pos",
    "sample_kanter",
    "kanter_from_uniform",
    "sample_size_biased",
    "sample_kanter_rejection",
    "sample_expr",
    "sample_tau",
    "sample_tau_chunked",
    "write_samples",
    "read_samples",
    "DEFAULT_CHUNK",
]

DEFAULT_CHUNK = 65536
_BIN_MAGIC = b"STBHIT01"


class RandomStream:
    """A reproducible, independent random stream identified by (seed, stream_index).

    Streams are derived through numpy's SeedSequence with the stream index as
    spawn key, so distinct pairs give statistically independent PCG64
    generators and the same pair replays the same sequence.
    """

    def __init__(self, seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise ValueError("stream_index must be nonnegative")
        self.seed = int(seed) % (1 << 64)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_index={self.stream_index})"

    def uniform_open(self, size):
        """Uniforms on the open interval (0, 1)."""
        u = self.generator.random(size)
        # 0.0 occurs with probability 2^-53; move it to the smallest grid cell
        return np.where(u == 0.0, 2.0**-54, u)

    def log_exponential(self, size):
        return np.log(self.generator.standard_exponential(size))

    def log_gamma_variate(self, a, size):
        """ln Gamma_a, stable for small shapes via Gamma_a = Gamma_{a+1} U^{1/a}."""
        if a >= 1:
            return np.log(self.generator.standard_gamma(a, size))
        g = np.log(self.generator.standard_gamma(a + 1, size))
        return g + np.log(self.uniform_open(size)) / a


# ---------------------------------------------------------------------------
# plans


@dataclass(frozen=True)
class PlanLeaf:
    """One independent factor X^power of the compiled product.

    kind is "gamma" (args: shape), "beta" (a, b), "stable" (c) or
    "kanter" (c, bias).  strategy is closed_form, rejection or inverse_cdf.
    """

    kind: str
    args: tuple
    power: float
    strategy: str = "closed_form"
    weight_bound: float | None = None
    table_accuracy: float | None = None

    def describe(self) -> str:
        args = ", ".join(f"{a:.6g}" for a in self.args)
        extra = ""
        if self.weight_bound is not None:
            extra = f" weight<= {self.weight_bound:g}"
        if self.table_accuracy is not None:
            extra = f" cdf_err={self.table_accuracy:.1e}"
        return f"{self.kind}({args})^{self.power:.6g} [{self.strategy}{extra}]"


@dataclass(frozen=True)
class SamplerPlan:
    """An expression together with its flat sampling recipe."""

    expr: RVExpr
    log_const: float
    leaves: tuple[PlanLeaf, ...]

    def describe(self) -> str:
        lines = [f"const factor exp({self.log_const:.12g})"]
        lines += ["  " + leaf.describe() for leaf in self.leaves]
        return "\n".join(lines)

    @property
    def strategies(self) -> dict:
        out: dict = {}
        for leaf in self.leaves:
            out[leaf.strategy] = out.get(leaf.strategy, 0) + 1
        return out


class _Builder:
    def __init__(self):
        self.log_const = 0.0
        self.leaves: list[PlanLeaf] = []

    def add(self, node: RVExpr, t: float, p: float):
        if isinstance(node, Const):
            self.log_const += p * math.log(node.k)
        elif isinstance(node, Product):
            for ch in node.children:
                self.add(ch, t, p)
        elif isinstance(node, Power):
            self.add(node.child, t * node.p, p * node.p)
        elif isinstance(node, SizeBias):
            self.add(node.child, t + node.t, p)
        elif isinstance(node, ExpL):
            self._gamma(1.0 + t, p)
        elif isinstance(node, GammaRV):
            self._gamma(node.t + t, p)
        elif isinstance(node, BetaRV):
            a = node.a + t
            if not a > 0:
                raise StripError(f"Beta size-bias order {t:g} leaves first parameter {a:g} <= 0")
            self.leaves.append(PlanLeaf("beta", (a, node.b), p))
        elif isinstance(node, StablePos):
            c = node.c
            if c == 1.0:
                return
            if t == 0.0:
                self.leaves.append(PlanLeaf("stable", (c,), p))
                return
            kanter = Product((
                Const(float(kappa_const(c)) ** (-1 / c)),
                Power(ExpL(), -(1 - c) / c),
                Power(KanterRV(c), -1 / c),
            ))
            self.add(kanter, t, p)
        elif isinstance(node, KanterRV):
            if not t > -1:
                raise StripError(f"K_{node.c:g} has no size-biased version of order {t:g}")
            if t == 0.0:
                self.leaves.append(PlanLeaf("kanter", (node.c, 0.0), p))
            elif t > 0:
                self.leaves.append(PlanLeaf("kanter", (node.c, t), p, "rejection", weight_bound=1.0))
            else:
                table = _bias_table(node.c, t)
                self.leaves.append(
                    PlanLeaf("kanter", (node.c, t), p, "inverse_cdf", table_accuracy=table.cdf_error)
                )
        else:
            raise TypeError(f"cannot sample node {node!r}")

    def _gamma(self, a, p):
        if not a > 0:
            raise StripError(f"size-biasing leaves a Gamma shape {a:g} <= 0")
        self.leaves.append(PlanLeaf("gamma", (a,), p))


def compile_plan(expr: RVExpr) -> SamplerPlan:
    """Rewrite `expr` into independent leaves with assigned strategies."""
    b = _Builder()
    b.add(expr, 0.0, 1.0)
    return SamplerPlan(expr, b.log_const, tuple(b.leaves))


@lru_cache(maxsize=64)
def _bias_table(c: float, t: float) -> KanterBiasTable:
    return KanterBiasTable(c, t)


# ---------------------------------------------------------------------------
# atoms


def kanter_from_uniform(c, u):
    """K_c evaluated at a given uniform draw: b_c(u) / kappa_c."""
    return np.exp(log_kanter_b(c, u) - math.log(kappa_const(c)))


def _log_kanter(c, rs: RandomStream, size):
    u = rs.uniform_open(size)
    return log_kanter_b(c, u) - math.log(kappa_const(c))


def _log_stable(c, rs: RandomStream, size):
    # Z_c^{-c} = L^{1-c} b_c(U)
    lb = log_kanter_b(c, rs.uniform_open(size))
    ll = rs.log_exponential(size)
    return -((1 - c) * ll + lb) / c


def _check_c(c):
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")


def sample_stable_pos(c, rs: RandomStream, size=None):
    """Positive c-stable variates with Laplace transform exp(-lambda^c)."""
    _check_c(c)
    out = np.exp(_log_stable(c, rs, 1 if size is None else size))
    return float(out[0]) if size is None else out


def sample_kanter(c, rs: RandomStream, size=None):
    """Kanter variates K_c = b_c(U) / kappa_c, valued in (0, 1)."""
    _check_c(c)
    out = np.exp(_log_kanter(c, rs, 1 if size is None else size))
    return float(out[0]) if size is None else out


@dataclass
class RejectionStats:
    """Proposal and acceptance counts of a rejection sampler."""

    proposed: int = 0
    accepted: int = 0
    expected_rate: float | None = None

    @property
    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else math.nan

    @property
    def standard_error(self) -> float:
        p = self.expected_rate if self.expected_rate is not None else self.rate
        return math.sqrt(p * (1 - p) / self.proposed) if self.proposed else math.nan


def _log_kanter_rejection(c, t, rs: RandomStream, size, stats: RejectionStats | None = None):
    out = np.empty(size)
    filled = 0
    rate = float(mellin_eval(KanterRV(c), t))
    while filled < size:
        need = size - filled
        m = int(min(max(need / rate * 1.1 + 16, 64), 1 << 22))
        lk = _log_kanter(c, rs, m)
        keep = np.log(rs.uniform_open(m)) < t * lk
        acc = lk[keep][:need]
        out[filled : filled + acc.size] = acc
        filled += acc.size
        if stats is not None:
            stats.proposed += m
            stats.accepted += int(keep.sum())
    if stats is not None:
        stats.expected_rate = rate
    return out


def sample_kanter_rejection(c, t, rs: RandomStream, size, stats: RejectionStats | None = None):
    """K_c^{(t)} for t > 0 by rejection; acceptance probability is E[K_c^t]."""
    _check_c(c)
    if not t > 0:
        raise ValueError("rejection needs a positive size-bias order")
    return np.exp(_log_kanter_rejection(c, t, rs, size, stats))


def _log_leaf(leaf: PlanLeaf, rs: RandomStream, size, stats):
    if leaf.kind == "gamma":
        return rs.log_gamma_variate(leaf.args[0], size)
    if leaf.kind == "beta":
        a, b = leaf.args
        ga = rs.log_gamma_variate(a, size)
        gb = rs.log_gamma_variate(b, size)
        return ga - np.logaddexp(ga, gb)
    if leaf.kind == "stable":
        return _log_stable(leaf.args[0], rs, size)
    c, t = leaf.args
    if leaf.strategy == "closed_form":
        return _log_kanter(c, rs, size)
    if leaf.strategy == "rejection":
        return _log_kanter_rejection(c, t, rs, size, stats)
    return _bias_table(c, t).log_sample(rs.generator, size)


def sample_plan_log(plan: SamplerPlan, rs: RandomStream, size: int, stats: RejectionStats | None = None):
    """ln of `size` draws from a compiled plan."""
    out = np.full(size, plan.log_const)
    for leaf in plan.leaves:
        out += leaf.power * _log_leaf(leaf, rs, size, stats)
    return out


def sample_expr(expr: RVExpr, rs: RandomStream, size=None, log=False):
    """Draws from the law of an arbitrary expression tree."""
    plan = compile_plan(expr)
    y = sample_plan_log(plan, rs, 1 if size is None else size)
    out = y if log else np.exp(y)
    return float(out[0]) if size is None else out


def sample_size_biased(node: SizeBias, rs: RandomStream, size=None, log=False):
    """Draws from X^{(t)} for node = SizeBias(X, t)."""
    if not isinstance(node, SizeBias):
        raise TypeError("sample_size_biased expects a SizeBias node")
    return sample_expr(node, rs, size, log)


# ---------------------------------------------------------------------------
# tau


def sample_tau(params: StableParams, form=Form.RK, rs: RandomStream | None = None, size=None, log=False):
    """Draws of the hitting time tau through the chosen factorization."""
    if rs is None:
        raise ValueError("a RandomStream is required")
    return sample_expr(tau_expr(params, form), rs, size, log)


def _chunk_job(args):
    expr_plan, seed, index, size = args
    return sample_plan_log(expr_plan, RandomStream(seed, index), size)


def sample_tau_chunked(
    params: StableParams,
    form=Form.RK,
    n: int = 1,
    seed: int = 0,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    log=False,
):
    """n draws of tau in chunks; chunk j uses stream (seed, j).

    The result is identical for every worker count since the chunk layout
    depends on n and `chunk` only.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    plan = compile_plan(tau_expr(params, form))
    sizes = [min(chunk, n - k) for k in range(0, n, chunk)]
    jobs = [(plan, seed, j, m) for j, m in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    y = np.concatenate(parts) if parts else np.empty(0)
    return y if log else np.exp(y)


# ---------------------------------------------------------------------------
# dumps


@dataclass
class SampleHeader:
    alpha: float
    rho: float
    form: str
    seed: int
    n: int
    log_scale: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "alpha": self.alpha,
            "rho": self.rho,
            "form": self.form,
            "seed": self.seed,
            "n": self.n,
            "log_scale": self.log_scale,
        }
        d.update(self.extra)
        return d


def write_samples(path, samples, header: SampleHeader | dict, fmt="csv"):
    """Write draws as CSV (with `# key=value` header lines) or binary.

    The binary layout is the 8-byte magic STBHIT01, a little-endian uint32
    header length, the JSON header, then the samples as little-endian float64.
    """
    meta = header.to_dict() if isinstance(header, SampleHeader) else dict(header)
    x = np.asarray(samples, dtype="<f8")
    if fmt == "csv":
        with open(path, "w") as fh:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
            fh.write("value\n")
            np.savetxt(fh, x, fmt="%.17g")
    elif fmt == "bin":
        blob = json.dumps(meta).encode()
        with open(path, "wb") as fh:
            fh.write(_BIN_MAGIC)
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            fh.write(x.tobytes())
    else:
        raise ValueError(f"unknown sample format {fmt!r}")


def read_samples(path):
    """Inverse of write_samples; returns (samples, header dict)."""
    with open(path, "rb") as fh:
        head = fh.read(len(_BIN_MAGIC))
        if head == _BIN_MAGIC:
            (m,) = struct.unpack("<I", fh.read(4))
            meta = json.loads(fh.read(m))
            return np.frombuffer(fh.read(), dtype="<f8").copy(), meta
    meta = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif line and line != "value":
            body.append(float(line))
    return np.array(body), meta
