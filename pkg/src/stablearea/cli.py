"""``stablearea`` command line: evaluation, sampling, simulation and ``verify``.

Bulk output is CSV (header row, LF endings, shortest round-trip float repr)
or JSON.  Sampling commands also emit a JSON metadata document: next to
``--out`` as ``<out>.meta.json``, or on stderr when writing to stdout.

Exit status: 0 success, 1 failed verification, 2 usage error,
3 numerical tolerance not met.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__, arealaw, pathsim, perpetuity, verification
from .dist import ParameterError, RngState
from .specfun import DomainError

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_ALPHA = 1.5

NUMERIC_ERRORS = (
    arealaw.ToleranceError,
    perpetuity.QuadratureError,
    perpetuity.TailBoundError,
    pathsim.HorizonError,
)


class UsageError(Exception):
    pass


def _count(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError("n must be a positive integer")
    return int(v)


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def parse_x(text):
    """``"2.5"`` or ``"a:b:steps"`` (linear); ``"log:a:b:steps"`` spaces geometrically."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        log = parts[0] == "log"
        if log:
            parts = parts[1:]
        if len(parts) != 3:
            raise ValueError
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--x expects a number or a:b:steps, got {text!r}")
    if k < 1:
        raise UsageError("--x needs at least one step")
    if log:
        if not (a > 0 and b > 0):
            raise UsageError("log spacing needs positive endpoints")
        return np.geomspace(a, b, k)
    return np.linspace(a, b, k)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_safe(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(header, rows, fmt, meta=None):
    if fmt == "json":
        doc = {"columns": list(header), "rows": [list(r) for r in rows]}
        if meta is not None:
            doc["meta"] = meta
        return json.dumps(_json_safe(doc), indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _meta(args, law_tag, horizon_failures=0, details=None):
    m = {
        "command": args.command,
        "alpha": args.alpha,
        "n": getattr(args, "n", None),
        "seed": args.seed,
        "dt": getattr(args, "dt", None),
        "eps": args.eps,
        "law_tag": law_tag,
        "horizon_failures": horizon_failures,
        "version": __version__,
    }
    if details:
        m["details"] = details
    return _json_safe(m)


# ------------------------------------------------------------- commands

def cmd_density(args):
    xs = parse_x(args.x)
    v, r, e = arealaw.density_many(args.alpha, xs, args.eps)
    return ("x", "value", "regime", "error_bound"), list(zip(xs, v, r, e)), None


def cmd_cdf(args):
    xs = parse_x(args.x)
    ctx = arealaw.AlphaContext(args.alpha)
    eps = args.eps if args.eps_explicit else 1e-5
    vals = arealaw.cdf(ctx, xs, eps=eps)
    if ctx.alpha == 1.0:
        regimes = ["point_mass"] * xs.size
    else:
        floor = arealaw.series_floor(ctx, 1e-6)
        regimes = [arealaw.ZERO_ASYMPTOTE if x < floor else arealaw.SERIES for x in xs]
    rows = [(x, v, r, eps) for x, v, r in zip(xs, np.atleast_1d(vals), regimes)]
    return ("x", "value", "regime", "error_bound"), rows, None


def cmd_asymptote(args):
    xs = parse_x(args.x)
    z = np.atleast_1d(arealaw.density_zero_asymptote(args.alpha, xs))
    t = np.atleast_1d(arealaw.density_tail_asymptote(args.alpha, xs))
    rows = []
    for x, a, b in zip(xs, z, t):
        rows.append((x, a, arealaw.ZERO_ASYMPTOTE, math.inf))
        rows.append((x, b, arealaw.TAIL_ASYMPTOTE, math.inf))
    return ("x", "value", "regime", "error_bound"), rows, None


def cmd_moments(args):
    ss = [float(v) for v in args.s.split(",")] if args.s else [-1.0, -0.5, 0.2]
    rows = [(s, arealaw.fractional_moment(args.alpha, s)) for s in ss]
    return ("s", "value"), rows, None


def cmd_sample(args):
    b = arealaw.sample_area(args.alpha, args.n, RngState(args.seed))
    return ("value",), [(v,) for v in b.values], _meta(args, b.law)


def cmd_simulate_path(args):
    cfg = pathsim.PathConfig(dt=args.dt if args.dt is not None else 1e-3)
    tb, ab = pathsim.batch_stopped_areas(args.alpha, cfg, args.n, RngState(args.seed), workers=args.workers)
    meta = _meta(args, "stopped_area", ab.meta["horizon_failures"], ab.meta)
    meta["dt"] = cfg.dt
    return ("hitting_time", "area"), list(zip(tb.values, ab.values)), meta


def cmd_simulate_perpetuity(args):
    proc = (perpetuity.area_process if args.kind == "area" else perpetuity.frechet_process)(args.alpha)
    dt = args.dt if args.dt is not None else 1e-2
    b = perpetuity.simulate_perpetuity(proc, eps_jump=args.eps_jump, horizon=args.horizon, dt=dt,
                                       n=args.n, rng=RngState(args.seed))
    meta = _meta(args, f"perpetuity_{proc.kind}", 0, b.meta)
    meta["dt"] = dt
    return ("value",), [(v,) for v in b.values], meta


def cmd_verify(args):
    names = None
    if args.checks:
        names = [c.strip().upper() for c in args.checks.split(",")]
        bad = [c for c in names if c not in verification.CHECKS]
        if bad:
            raise UsageError(f"unknown checks: {', '.join(bad)}")
    alphas = None if args.alpha is None else (args.alpha,)
    rows = verification.run_checks(names, seed=args.seed, alphas=alphas)
    header = ("check", "alpha", "quantity", "value", "threshold", "passed")
    return header, [r.as_row() for r in rows], None


COMMANDS = {
    "density": cmd_density,
    "cdf": cmd_cdf,
    "asymptote": cmd_asymptote,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "simulate-path": cmd_simulate_path,
    "simulate-perpetuity": cmd_simulate_perpetuity,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=None,
                        help="stability index in [1, 2] (default 1.5; verify: full grid)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--eps", type=_positive, default=None,
                        help="tolerance (density: relative, default 1e-10; cdf: absolute, default 1e-5)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    p = _Parser(prog="stablearea", description="Area under a stable process until its first zero.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("density", "cdf", "asymptote"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--x", required=True, help="point, a:b:steps or log:a:b:steps")
    sp = sub.add_parser("moments", parents=[common])
    sp.add_argument("--s", default=None, help="comma-separated orders")
    sp = sub.add_parser("sample", parents=[common])
    sp.add_argument("--n", type=_count, default=100_000)
    sp = sub.add_parser("simulate-path", parents=[common])
    sp.add_argument("--n", type=_count, default=100_000)
    sp.add_argument("--dt", type=_positive, default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp = sub.add_parser("simulate-perpetuity", parents=[common])
    sp.add_argument("--n", type=_count, default=100_000)
    sp.add_argument("--dt", type=_positive, default=None)
    sp.add_argument("--kind", choices=("area", "frechet"), default="area")
    sp.add_argument("--eps-jump", type=_positive, default=0.05)
    sp.add_argument("--horizon", type=_positive, default=None)
    sp = sub.add_parser("verify", parents=[common],
                        help="acceptance checks; --alpha restricts the alpha grids to one value")
    sp.add_argument("--checks", default=None, help="comma-separated subset, e.g. A1,A3")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.alpha is None and args.command != "verify":
            args.alpha = DEFAULT_ALPHA
        args.eps_explicit = args.eps is not None
        if args.eps is None:
            args.eps = 1e-10
        if args.alpha is not None and not 1.0 <= args.alpha <= 2.0:
            raise UsageError("--alpha must lie in [1, 2]")
        header, rows, meta = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"stablearea: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, DomainError) as e:
        print(f"stablearea: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as e:
        print(f"stablearea: numerical tolerance not met: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    text = render(header, rows, args.format, meta if args.format == "json" else None)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        if meta is not None and args.format == "csv":
            with open(args.out + ".meta.json", "w", newline="") as fh:
                fh.write(json.dumps(meta, indent=1) + "\n")
    else:
        sys.stdout.write(text)
        if meta is not None and args.format == "csv":
            sys.stderr.write(json.dumps(meta) + "\n")

    if args.command == "verify":
        return EXIT_OK if all(r[-1] for r in rows) else EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
