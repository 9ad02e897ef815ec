"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 physics violation,
3 oracle disagreement (some row with |z| > 3).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from .config import experiment_a_defaults, experiment_b_defaults, load_config
from .errors import ConfigError, UnphysicalStateError, UnreachableFrequencyError
from .experiments import SWEEP_PARAMS, run_experiment_a, run_experiment_b, run_sweep, run_timing

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_ORACLE = 0, 1, 2, 3

log = logging.getLogger("sidebandsep")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="scenario YAML file (built-in defaults otherwise)")
    p.add_argument("--out", type=Path, help="directory for CSV output files")
    p.add_argument("--oracle", type=int, metavar="N", help="also run the Monte-Carlo oracle with N samples")
    p.add_argument("--seed", type=int, metavar="S", help="oracle seed")
    p.add_argument("--workers", type=int, default=1, help="oracle worker threads")
    p.add_argument("--format", choices=("csv", "report"), default="report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sidebandsep", description="Optical side-band separation simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("run-a", help="classical separation of modulation side-bands"))
    _common(sub.add_parser("run-b", help="entanglement from a squeezed input"))

    t = sub.add_parser("timing", help="delay lengths usable with a pulse train")
    t.add_argument("--rep-rate", type=float, default=82e6, help="repetition rate, Hz")
    t.add_argument("--target", type=float, help="desired measurement frequency, Hz")
    t.add_argument("--n-max", type=int, default=10)
    t.add_argument("--out", type=Path)
    t.add_argument("--format", choices=("csv", "report"), default="report")

    s = sub.add_parser("sweep", help="parameter sweep over theta, visibility or squeezing")
    _common(s)
    s.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--num", type=int, default=21)
    return parser


def _table_text(header, rows, fmt) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[f"{v:.10g}" for v in row] for row in rows])
        return buf.getvalue()
    widths = [max(14, len(h)) for h in header]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(f"{v:{w}.6g}" for v, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def _write_table(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(rows, dtype=float), delimiter=",", header=",".join(header), comments="", fmt="%.10g")


def _scenario(args, defaults):
    cfg = load_config(args.config) if args.config else defaults()
    return cfg.with_oracle(args.oracle, args.seed)


def _run(args) -> int:
    if args.command == "timing":
        header, rows = run_timing(args.rep_rate, args.target, args.n_max)
        sys.stdout.write(_table_text(header, rows, args.format))
        if args.out:
            _write_table(args.out / "timing.csv", header, rows)
        return EXIT_OK

    if args.command == "sweep":
        cfg = _scenario(args, experiment_b_defaults)
        values = np.linspace(args.start, args.stop, args.num)
        header, table = run_sweep(cfg, args.param, values)
        sys.stdout.write(_table_text(header, table, args.format))
        if args.out:
            _write_table(args.out / f"{cfg.name}_sweep_{args.param}.csv", header, table)
        return EXIT_OK

    runner, defaults = {
        "run-a": (run_experiment_a, experiment_a_defaults),
        "run-b": (run_experiment_b, experiment_b_defaults),
    }[args.command]
    cfg = _scenario(args, defaults)
    report = runner(cfg, workers=args.workers)
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_text())
    if args.out:
        for path in report.write(args.out):
            log.info("wrote %s", path)
    if report.oracle_failed():
        log.error("oracle disagrees with the analytic values (max |z| = %.2f)", report.max_abs_z())
        return EXIT_ORACLE
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnphysicalStateError, UnreachableFrequencyError) as exc:
        print(f"physics violation: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
