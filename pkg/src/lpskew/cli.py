"""Command-line entry point: ``lpskew {simulate,estimate,analytic,mc-table}``.

Exit codes: 0 success, 1 usage error, 2 data or model error, 3 the only
result is a flagged estimate (nonpositive long-run variance).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from . import io as series_io
from .analytic import analytic_constants
from .estimators import BandwidthPlan, EstimationError, default_bandwidths, estimate_d_gph, k_hat
from .montecarlo import (
    DEFAULT_SEED,
    ExperimentConfig,
    ExperimentError,
    emit_table,
    load_config,
    reference_config,
    run_experiment,
)
from .process import InnovationSpec, LinearProcessSpec, ModelError
from .simulate import simulate_path

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FLAGGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _nan_to_none(doc: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in doc.items()}


def _write(text_or_bytes, out: Optional[str]) -> None:
    binary = isinstance(text_or_bytes, bytes)
    if out is None:
        if binary:
            sys.stdout.buffer.write(text_or_bytes)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(text_or_bytes)
        return
    with open(out, "wb" if binary else "w") as fh:
        fh.write(text_or_bytes)


def _load_spec(path: str) -> LinearProcessSpec:
    with open(path) as fh:
        return LinearProcessSpec.from_json(fh.read())


def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    path = simulate_path(spec, args.n, args.seed, args.M)
    payload = (series_io.format_csv(path.x) if args.format == "csv"
               else series_io.format_binary(path.x))
    _write(payload, args.out)
    if args.meta:
        meta = {"spec_fingerprint": path.spec_fingerprint, "seed": path.seed,
                "n": path.n, "truncation_M": path.truncation_M, **path.meta}
        _write(_dump(meta), args.meta)
    return EXIT_OK


def cmd_estimate(args) -> int:
    x = series_io.read_series(args.input, args.format)
    if x.size < 8:
        raise EstimationError("estimation needs at least 8 observations")
    if args.d == "auto":
        d = estimate_d_gph(x, args.gph_frac)
        d_estimated = True
    else:
        try:
            d = float(args.d)
        except ValueError:
            raise UsageError(f"--d must be a number or 'auto', got {args.d!r}") from None
        if not 0 <= d < 0.5:
            raise UsageError("--d must lie in [0, 0.5)")
        d_estimated = False
    plan = default_bandwidths(x.size, d).to_dict()
    for name in ("q0", "q1", "q2", "q3"):
        value = getattr(args, name)
        if value is not None:
            plan[name] = value
    try:
        plan = BandwidthPlan(**plan)
        plan.validate(x.size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    est = k_hat(x, d, plan)
    doc = est.to_dict()
    doc["d_estimated"] = d_estimated
    _write(_dump(doc), args.out)
    return EXIT_FLAGGED if est.flagged else EXIT_OK


def cmd_analytic(args) -> int:
    if args.spec:
        spec = _load_spec(args.spec)
    else:
        spec = LinearProcessSpec(d=args.d, innovation=InnovationSpec.parse(args.innovation))
    doc = _nan_to_none(analytic_constants(spec).to_dict())
    doc["innovation"] = spec.innovation.to_dict()
    _write(_dump(doc), args.out)
    return EXIT_OK


def _parse_sizes(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma-separated integers, got {text!r}") from None


def cmd_mc_table(args) -> int:
    if (args.config is None) == (args.table is None):
        raise UsageError("give exactly one of --config or --table")
    base = load_config(args.config) if args.config else reference_config(args.table)
    doc = base.to_dict()
    if args.reps is not None:
        doc["replications"] = args.reps
    if args.sizes is not None:
        doc["sizes"] = _parse_sizes(args.sizes)
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.d_mode is not None:
        doc["d_mode"] = args.d_mode
    try:
        config = ExperimentConfig.from_dict(doc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = run_experiment(config, workers=args.workers)
    _write(emit_table(rows, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="lpskew", formatter_class=fmt,
                     description="Skewness of partial sums of short- and long-memory "
                                 "linear processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", formatter_class=fmt,
                       help="simulate a sample path from a process spec")
    p.add_argument("--spec", required=True, help="process spec JSON file")
    p.add_argument("--n", type=int, required=True, help="path length")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit seed")
    p.add_argument("--M", type=int, default=None,
                   help="MA truncation (default: max(10n, 1e4) for d > 0, "
                        "geometric tail certificate for d = 0)")
    p.add_argument("--format", choices=("csv", "bin"), default="csv", help="output format")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--meta", default=None, help="write provenance JSON to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", formatter_class=fmt,
                       help="estimate the scaled skewness of the sample mean")
    p.add_argument("--in", dest="input", required=True, help="series file (CSV or binary)")
    p.add_argument("--format", choices=("auto", "csv", "bin"), default="auto",
                   help="input format")
    p.add_argument("--d", required=True,
                   help="memory parameter in [0, 0.5), or 'auto' for a GPH estimate")
    p.add_argument("--gph-frac", type=float, default=0.5,
                   help="GPH bandwidth exponent used with --d auto")
    for name, what in (("q0", "long-run variance"), ("q1", "Delta(0) scaling"),
                       ("q2", "Delta(h) sum"), ("q3", "Delta(h, h') sum")):
        p.add_argument(f"--{name}", type=int, default=None,
                       help=f"{what} bandwidth (default: rule of thumb for n and d)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("analytic", formatter_class=fmt,
                       help="print the limiting constants m, I2, I3, k, v as JSON")
    p.add_argument("--d", type=float, default=0.0, help="memory parameter of FARIMA(0,d,0)")
    p.add_argument("--innovation", default="exp:1",
                   help="exp:RATE, gaussian:SIGMA2 or custom:SIGMA2,ETA,M4,M6")
    p.add_argument("--spec", default=None,
                   help="process spec JSON file (overrides --d and --innovation)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("mc-table", formatter_class=fmt,
                       help="run a Monte Carlo MSE study and print the table")
    p.add_argument("--config", default=None, help="experiment config JSON file")
    p.add_argument("--table", type=int, choices=(1, 2, 3, 4), default=None,
                   help="use built-in reference study 1-4 instead of --config")
    p.add_argument("--reps", type=int, default=None, help="override replications")
    p.add_argument("--sizes", default=None, help="override sample sizes, e.g. 200,1000,5000")
    p.add_argument("--seed", type=int, default=None, help="override base seed")
    p.add_argument("--d-mode", choices=("known", "estimated"), default=None,
                   help="override how d is obtained")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $LPSKEW_WORKERS or CPU count)")
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="csv",
                   help="table format")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_mc_table)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lpskew: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, EstimationError, ExperimentError, series_io.SeriesFormatError,
            ValueError, OSError) as exc:
        print(f"lpskew: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
