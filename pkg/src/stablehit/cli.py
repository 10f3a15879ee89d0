"""Command-line interface.

    stablehit sample   --alpha A --rho R [--form RK] --n N --seed S [--workers K] [--out F] [--format csv|bin|json]
    stablehit moments  --alpha A --rho R --s S [S ...] [--n N]
    stablehit density  --alpha A --rho R [--method mellin|convolution] [--grid-min X --grid-max X --grid-points M]
    stablehit mode     --alpha A --rho R [...grid flags] [--tolerance T]
    stablehit verify   [--check NAME ...] [--alpha A --rho R] [--r R]

Exit status: 0 success, 1 a check failed, 2 usage error, 3 inadmissible (alpha, rho).
Data goes to stdout or --out; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .density import GridSpec, density_tau_convolution, density_tau_mellin, find_mode
from .mellin import AdmissibilityError, Form, StableParams, StripError, moments_tau, tau_strip
from .sampler import DEFAULT_CHUNK, SampleHeader, sample_tau_chunked, write_samples
from .verify import CHECKS, run_suite

log = logging.getLogger("stablehit")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ADMISSIBILITY = 0, 1, 2, 3

_EPILOG = """\
output columns
  sample  (csv)   one column `value`: draws of tau (times level^alpha); header
                  lines `# key=value` give alpha, rho, form, seed, n, level
  sample  (bin)   magic STBHIT01, uint32 LE header length, JSON header,
                  then float64 LE draws
  moments (csv)   s, closed_form[, mc_mean, mc_se, z] : E[tau^s]
  density (csv)   x, f, weight : density of tau on a log-uniform grid with
                  trapezoid weights in x; JSON schema stablehit.density/1
  mode            JSON with mode_location, local_max_count, maxima
  verify          aligned text by default, JSON (report schema_version 1)
                  with --format json

--level x rescales to the hitting time of x, which is x^alpha tau.
"""


@dataclass
class RunConfig:
    command: str
    alpha: float
    rho: float
    form: str = "RK"
    n: int = 1
    seed: int = 0
    workers: int = 1
    output_path: str | None = None
    format: str = "csv"


def _positive_int(v):
    n = int(v)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _positive_float(v):
    x = float(v)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablehit",
        description="Hitting time of a point for strictly stable Levy processes.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params_required=True):
        p.add_argument("--alpha", type=float, required=params_required, help="stability index in (1, 2]")
        p.add_argument("--rho", type=float, required=params_required, help="positivity parameter")
        p.add_argument("--level", type=_positive_float, default=1.0, help="level to hit (default 1)")
        p.add_argument("--out", help="output file (default stdout)")

    def grid(p):
        p.add_argument("--grid-min", type=_positive_float, help="smallest x of the output grid")
        p.add_argument("--grid-max", type=_positive_float, help="largest x of the output grid")
        p.add_argument("--grid-points", type=_positive_int, default=2000)
        p.add_argument("--method", choices=["mellin", "convolution"], default="mellin")

    forms = [f.value for f in Form]
    p = sub.add_parser("sample", help="draw tau", epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--form", choices=forms, default="RK")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--chunk", type=_positive_int, default=DEFAULT_CHUNK, help=argparse.SUPPRESS)
    p.add_argument("--format", choices=["csv", "bin", "json"], default="csv")

    p = sub.add_parser("moments", help="E[tau^s], closed form and optional Monte Carlo")
    common(p)
    p.add_argument("--s", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, default=0, help="Monte Carlo draws (0 = closed form only)")
    p.add_argument("--form", choices=forms, default="RK")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("density", help="density of tau on a grid")
    common(p)
    grid(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("mode", help="mode and number of local maxima of the density")
    common(p)
    grid(p)
    p.add_argument("--tolerance", type=float, default=1e-3, help="relative prominence below which maxima are ignored")

    p = sub.add_parser("verify", help="run the verification suite or selected checks")
    common(p, params_required=False)
    p.add_argument("--check", action="append", choices=sorted(CHECKS), help="check to run (repeatable; default all)")
    p.add_argument("--r", type=float, help="parameter r of the convexity check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--tolerance", type=float, help="override every report tolerance (recorded in the report)")
    p.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _params(args) -> StableParams | None:
    if args.alpha is None and args.rho is None:
        return None
    if args.alpha is None or args.rho is None:
        raise _Usage("--alpha and --rho go together")
    return StableParams(args.alpha, args.rho)


class _Usage(Exception):
    pass


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sample(args):
    p = _params(args)
    cfg = RunConfig("sample", p.alpha, p.rho, args.form, args.n, args.seed, args.workers, args.out, args.format)
    log.info("sampling %d draws, %s form, %d worker(s)", cfg.n, cfg.form, cfg.workers)
    y = sample_tau_chunked(p, cfg.form, cfg.n, cfg.seed, cfg.workers, chunk=args.chunk, log=True)
    y = y + p.alpha * math.log(args.level)
    x = np.exp(y)
    header = SampleHeader(p.alpha, p.rho, cfg.form, cfg.seed, cfg.n, extra={"level": args.level})
    if cfg.format == "bin":
        if not cfg.output_path:
            raise _Usage("binary output needs --out")
        write_samples(cfg.output_path, x, header, "bin")
    elif cfg.format == "json":
        _emit(json.dumps({**header.to_dict(), "values": x.tolist()}) + "\n", cfg.output_path)
    elif cfg.output_path:
        write_samples(cfg.output_path, x, header, "csv")
    else:
        _csv_stdout(x, header)
    return EXIT_OK


def _csv_stdout(x, header):
    for k, v in header.to_dict().items():
        sys.stdout.write(f"# {k}={v}\n")
    sys.stdout.write("value\n")
    np.savetxt(sys.stdout, x, fmt="%.17g")


def _cmd_moments(args):
    p = _params(args)
    st = tau_strip(p)
    for s in args.s:
        if not st.contains(s):
            raise StripError(f"s={s:g} is outside the moment strip {st}")
    scale = args.level ** p.alpha
    rows = []
    y = None
    if args.n > 0:
        y = sample_tau_chunked(p, args.form, args.n, args.seed, args.workers, log=True)
    for s in args.s:
        row = {"s": s, "closed_form": float(moments_tau(p, s)) * scale**s}
        if y is not None:
            v = np.exp(s * y) * scale**s
            row["mc_mean"] = float(v.mean())
            row["mc_se"] = float(v.std(ddof=1) / math.sqrt(v.size))
            row["z"] = (row["mc_mean"] - row["closed_form"]) / row["mc_se"] if row["mc_se"] > 0 else 0.0
        rows.append(row)
    if args.format == "json":
        meta = {"alpha": p.alpha, "rho": p.rho, "level": args.level, "n": args.n, "seed": args.seed}
        _emit(json.dumps({"schema": "stablehit.moments/1", **meta, "rows": rows}, indent=2) + "\n", args.out)
    else:
        cols = list(rows[0])
        lines = [",".join(cols)] + [",".join(f"{r[c]:.10g}" for c in cols) for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _density(args):
    p = _params(args)
    if (args.grid_min is None) != (args.grid_max is None):
        raise _Usage("--grid-min and --grid-max go together")
    spec = None
    if args.grid_min is not None:
        # the grid is given for tau_level = level^alpha tau
        scale = args.level ** p.alpha
        spec = GridSpec.from_x(args.grid_min / scale, args.grid_max / scale, args.grid_points)
    route = density_tau_mellin if args.method == "mellin" else density_tau_convolution
    g = route(p, spec)
    if args.level != 1.0:
        scale = args.level ** p.alpha
        g.abscissae = g.abscissae * scale
        g.values = g.values / scale
        g.weights = g.weights * scale
        g.metadata["level"] = args.level
    return g


def _cmd_density(args):
    g = _density(args)
    log.info("mass %.12f on %d points", g.mass, g.abscissae.size)
    _emit(g.to_json() + "\n" if args.format == "json" else g.to_csv(), args.out)
    return EXIT_OK


def _cmd_mode(args):
    g = _density(args)
    m = find_mode(g, args.tolerance)
    out = {
        "alpha": args.alpha,
        "rho": args.rho,
        "level": args.level,
        "method": args.method,
        "mode_location": m.mode_location,
        "local_max_count": m.local_max_count,
        "smoothing_tolerance": m.smoothing_tolerance,
        "maxima": list(m.maxima),
        "unimodal": m.unimodal,
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_verify(args):
    p = _params(args)
    kw = {}
    if p is not None:
        kw["params"] = p
    if args.r is not None:
        if not 0 < args.r < 1:
            raise _Usage("--r must lie in (0, 1)")
        kw["r"] = args.r
    reports = run_suite(args.check, seed=args.seed, workers=args.workers, **kw)
    if args.tolerance is not None:
        for r in reports:
            r.notes.append(f"tolerance overridden from {r.tolerance:g} to {args.tolerance:g}")
            r.tolerance = args.tolerance
    ok = all(r.passed for r in reports)
    if args.format == "json":
        text = json.dumps({"passed": ok, "reports": [r.to_dict() for r in reports]}, indent=2) + "\n"
    else:
        text = "\n".join(r.to_text() for r in reports) + "\n"
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_CHECK


_COMMANDS = {
    "sample": _cmd_sample,
    "moments": _cmd_moments,
    "density": _cmd_density,
    "mode": _cmd_mode,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except AdmissibilityError as e:
        print(f"stablehit: inadmissible parameters: {e}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (_Usage, StripError, ValueError) as e:
        print(f"stablehit: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"stablehit: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
