"""Command line: ``goalrate fit | plot | sample``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import model as m
from .ingest import DatasetError, load_counts, sniff_format
from .plots import PLOT_KINDS, render
from .report import FitConfig, build_report, dumps, model_from_report, summary_lines

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class StageError(Exception):
    def __init__(self, stage: str, message: str, code: int = EXIT_DATA):
        super().__init__(f"{stage}: {message}")
        self.code = code


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(output, text)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _load_report(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise StageError("report", str(exc)) from exc


def cmd_fit(args) -> int:
    try:
        with open(args.input, encoding="utf-8-sig") as fh:
            text = fh.read()
        counts = load_counts(text, args.format)
    except (OSError, UnicodeDecodeError, DatasetError) as exc:
        raise StageError("ingest", str(exc)) from exc
    fmt = args.format or sniff_format(text)
    try:
        cfg = FitConfig(
            seed=args.seed, alpha=args.alpha, bootstrap_reps=args.bootstrap_reps, sims=args.sims,
            block_sizes=args.blocks, drop_sets=tuple(args.drop_minutes or ((18,), (1, 2, 3, 18))),
            sim_exclude=args.sim_exclude, loess_span=args.loess_span, loess_degree=args.loess_degree,
            loess_mode=args.loess_mode, workers=args.workers, input_format=fmt,
        )
    except ValueError as exc:
        raise StageError("config", str(exc), EXIT_USAGE) from exc
    try:
        report = build_report(counts, cfg)
    except m.ModelError as exc:
        raise StageError("model", str(exc)) from exc
    except ValueError as exc:
        raise StageError("analysis", str(exc)) from exc
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError("analysis", str(exc), EXIT_NUMERIC) from exc
    _emit(dumps(report), args.output)
    if not args.quiet:
        stream = sys.stderr if args.output in (None, "-") else sys.stdout
        print("\n".join(summary_lines(report)), file=stream)
    return 0


def cmd_plot(args) -> int:
    report = _load_report(args.report)
    try:
        svg = render(report, args.kind)
    except (KeyError, TypeError) as exc:
        raise StageError("plot", f"report is missing data: {exc}") from exc
    _emit(svg, args.output)
    return 0


def cmd_sample(args) -> int:
    if args.n < 0:
        print("goalrate sample: error: n must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    report = _load_report(args.report)
    try:
        mod = model_from_report(report)
    except (KeyError, TypeError, ValueError) as exc:
        raise StageError("report", f"no usable model: {exc}") from exc
    times = m.sample_goal_times(mod, args.n, args.seed)
    minutes = m.time_to_minute(times)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "minute"])
    for x, minute in zip(times.tolist(), minutes.tolist()):
        writer.writerow([repr(x), minute])
    _emit(buf.getvalue(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goalrate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the model, run all tests and simulations, write a JSON report")
    fit.add_argument("--input", "-i", required=True, help="events CSV or pre-tallied minute,count CSV")
    fit.add_argument("--format", choices=("events", "tallied"), default=None,
                     help="input layout (default: detect from header)")
    fit.add_argument("--output", "-o", default=None, help="report path (default: stdout)")
    fit.add_argument("--seed", type=_seed, default=0)
    fit.add_argument("--alpha", type=float, default=0.05)
    fit.add_argument("--bootstrap-reps", type=int, default=10_000)
    fit.add_argument("--sims", type=int, default=10_000, help="simulated maxima per half")
    fit.add_argument("--blocks", type=_int_list, default=(2, 3, 5), help="block sizes, e.g. 2,3,5")
    fit.add_argument("--drop-minutes", type=_int_list, action="append",
                     help="minutes to drop in one extra test; repeat for several sets (default: 18 and 1,2,3,18)")
    fit.add_argument("--sim-exclude", type=_int_list, default=(),
                     help="minutes (and their goals) left out of the maxima simulations")
    fit.add_argument("--loess-span", type=float, default=0.75)
    fit.add_argument("--loess-degree", type=int, choices=(1, 2), default=2)
    fit.add_argument("--loess-mode", choices=("full", "per-half"), default="full")
    fit.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo (results do not depend on it)")
    fit.add_argument("--quiet", "-q", action="store_true")
    fit.set_defaults(func=cmd_fit)

    plot = sub.add_parser("plot", help="render an SVG figure from a report")
    plot.add_argument("--report", "-r", required=True)
    plot.add_argument("--kind", "-k", required=True, choices=PLOT_KINDS)
    plot.add_argument("--output", "-o", default=None)
    plot.set_defaults(func=cmd_plot)

    sample = sub.add_parser("sample", help="draw goal times from a fitted model")
    sample.add_argument("--report", "-r", required=True)
    sample.add_argument("--n", "-n", type=int, required=True)
    sample.add_argument("--seed", type=_seed, default=0)
    sample.add_argument("--output", "-o", default=None)
    sample.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"goalrate {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"goalrate {args.command}: error: output: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
