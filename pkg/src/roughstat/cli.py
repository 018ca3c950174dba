"""Command-line entry point: ``roughstat run | suite | check-axioms``."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .config import KEYS, parse_config
from .errors import ConfigError, RoughStatError
from .pm_core import SpaceKind, axiom_check, parse_space
from .runner import EXIT_CONFIG_ERROR, EXIT_OK, Report, run_experiment, suite_report


def _config_help() -> str:
    width = max(len(k) for k in KEYS)
    lines = ["config keys (one 'key = value' per line, '#' starts a comment):"]
    lines += [f"  {k.ljust(width)}  {v}" for k, v in KEYS.items()]
    lines.append("exit codes: 0 ok, 2 a theorem check failed, 3 config error")
    return "\n".join(lines)


def _emit(report: Report, out: str | None, fmt: str, stem: str) -> None:
    if out is None:
        if fmt in ("json", "both"):
            sys.stdout.write(report.json_text())
        if fmt in ("csv", "both"):
            sys.stdout.write(report.csv_text())
        return
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        (outdir / f"{stem}.json").write_text(report.json_text(), encoding="utf-8")
    if fmt in ("csv", "both"):
        (outdir / f"{stem}.csv").write_text(report.csv_text(), encoding="utf-8")


def _tau(text: str) -> Fraction:
    try:
        tau = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed fraction {text!r}") from None
    if not 0 < tau < Fraction(1, 5):
        raise argparse.ArgumentTypeError("tau must lie strictly between 0 and 1/5")
    return tau


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughstat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config",
                         epilog=_config_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("config")
    run.add_argument("--out", help="directory for <config-stem>.json/.csv (default: stdout)")
    run.add_argument("--format", choices=("json", "csv", "both"), default="json")
    run.add_argument("--seed", type=int, help="override the config's seed")

    suite = sub.add_parser("suite", help="run every theorem check on its built-in instance")
    suite.add_argument("--n", type=int, default=100_000, help="prefix length N (default 100000)")
    suite.add_argument("--tau", type=_tau, default=Fraction(1, 100), help="density threshold P/Q")
    suite.add_argument("--seed", type=int, default=0, help="first seed for random instances")
    suite.add_argument("--random", type=int, default=0, metavar="K",
                       help="also run K seeded random instances")
    suite.add_argument("--out")
    suite.add_argument("--format", choices=("json", "csv", "both"), default="json")

    ax = sub.add_parser("check-axioms", help="check the partial metric axioms on a sample")
    ax.add_argument("space", help="max_rplus | shifted_euclidean[:a]")
    ax.add_argument("--a", help="self-distance for shifted_euclidean")
    ax.add_argument("--samples", type=int, default=12)
    return parser


def _check_axioms(args) -> int:
    kind, _, a = args.space.partition(":")
    space = parse_space(kind, a or args.a)
    n = max(1, args.samples)
    if space.kind is SpaceKind.MAX_RPLUS:
        sample = [Fraction(k, 2) for k in range(n)]
    else:
        sample = [Fraction(k - n // 2, 2) for k in range(n)]
    report = axiom_check(space, sample)
    body = {
        "space": space.describe(),
        "sample": [float(v) for v in sample],
        "checked_triples": report.checked_triples,
        "violations": [{"axiom": v.axiom, "witness": list(v.witness), "lhs": v.lhs, "rhs": v.rhs}
                       for v in report.violations],
    }
    sys.stdout.write(json.dumps(body, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if report.ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check-axioms":
            return _check_axioms(args)
        if args.command == "suite":
            if args.n < 2:
                raise ConfigError(["--n must be at least 2"])
            report = suite_report(args.n, args.tau, args.seed, args.random)
            _emit(report, args.out, args.format, "suite")
            return report.exit_code
        path = Path(args.config)
        cfg = parse_config(path.read_text(encoding="utf-8"))
        if args.seed is not None:
            cfg.seed = args.seed
        report = run_experiment(cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (RoughStatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    _emit(report, args.out, args.format, path.stem)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
