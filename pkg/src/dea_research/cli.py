"""Command-line entry point: ``dea-research {ingest,evaluate,dea,report,compare}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .bibliometrics import HomonymPolicy
from .csvio import ingest
from .dea import DEFAULT_STAFF_THRESHOLD, OUTPUT_NAMES, CostVector
from .errors import ConfigError, DeaResearchError
from .pipeline import (
    FORMATS,
    RunConfig,
    compare_rankings,
    load_results,
    run_bibliometric,
    run_dea,
    write_reports,
)
from .reporting import INDICATORS

logger = logging.getLogger("dea_research")


def parse_years(text: str) -> tuple[int, ...]:
    """``"2001,2003"`` or ``"2001-2003"`` (inclusive)."""
    years: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                years.extend(range(lo, hi + 1))
            elif part:
                years.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad year list {text!r}") from None
    if not years:
        raise argparse.ArgumentTypeError("empty year list")
    return tuple(dict.fromkeys(years))


def parse_weights(text: str) -> CostVector:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cost weights {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three weights: FP,AP,RF")
    try:
        return CostVector(*parts)
    except DeaResearchError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config_flags(p: argparse.ArgumentParser, years: bool = False) -> None:
    if years:
        p.add_argument("--years", type=parse_years, default=(2001, 2002, 2003),
                       help="years to average over, e.g. 2001-2003 or 2001,2002 (default 2001-2003)")
        p.add_argument("--homonym-policy", choices=[h.value for h in HomonymPolicy],
                       default=HomonymPolicy.REJECT.value)
    p.add_argument("--cost-weights", type=parse_weights, default=CostVector(),
                   metavar="W_FP,W_AP,W_RF", help="relative staff costs (default 1.814,1.370,1.000)")
    p.add_argument("--staff-threshold", type=float, default=DEFAULT_STAFF_THRESHOLD,
                   help="units with fewer total staff are excluded (default 5)")
    p.add_argument("--cost-scale", type=float, default=1.0,
                   help="monetary units per weighted staff unit for output/cost")
    p.add_argument("--output-selector", choices=OUTPUT_NAMES, default="pu",
                   help="output used by the ratio indicators (default pu)")
    p.add_argument("--format", choices=FORMATS, default="csv", dest="report_format")
    p.add_argument("--out", type=Path, required=True, help="run directory for report files")


def _config(args, years: bool = False) -> RunConfig:
    return RunConfig(
        years=args.years if years else (2001, 2002, 2003),
        costs=args.cost_weights,
        staff_threshold=args.staff_threshold,
        homonym_policy=args.homonym_policy if years else HomonymPolicy.REJECT,
        cost_scale=args.cost_scale,
        output_selector=args.output_selector,
        report_format=args.report_format,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dea-research",
        description="DEA technical, allocative and cost efficiency of research units.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate staff, publication and journal files")
    for name in ("staff", "publications", "journals"):
        p.add_argument(f"--{name}", type=Path, required=True)

    p = sub.add_parser("evaluate", help="full pipeline from bibliometric inputs")
    for name in ("staff", "publications", "journals"):
        p.add_argument(f"--{name}", type=Path, required=True)
    _config_flags(p, years=True)

    p = sub.add_parser("dea", help="DEA on a pre-aggregated panel.csv")
    p.add_argument("--panel", type=Path, required=True)
    _config_flags(p)

    p = sub.add_parser("report", help="re-render reports from a stored run")
    p.add_argument("--results", type=Path, required=True, help="run directory or results.json")
    p.add_argument("--format", choices=FORMATS, default=None, dest="report_format")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("compare", help="rank variation between two indicators of a stored run")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--a", choices=INDICATORS, default="te")
    p.add_argument("--b", choices=INDICATORS, default="output_per_scientist")
    p.add_argument("--uda", type=int, default=None)
    return parser


def _run(args) -> int:
    if args.command == "ingest":
        data = ingest(args.staff, args.publications, args.journals)
        print(json.dumps({
            "staff_rows": len(data.roster),
            "publications": len(data.publications),
            "journals": len(data.journals),
        }, indent=2))
        return 0

    if args.command == "evaluate":
        results = run_bibliometric(args.staff, args.publications, args.journals, _config(args, True))
    elif args.command == "dea":
        results = run_dea(args.panel, _config(args))
    elif args.command == "report":
        results = load_results(args.results)
        if args.report_format:
            results.config = dataclasses.replace(results.config, report_format=args.report_format)
    else:
        results = load_results(args.results)
        stats = compare_rankings(results, args.a, args.b)
        if args.uda is not None:
            if args.uda not in stats:
                raise ConfigError(f"UDA {args.uda} not in results")
            stats = {args.uda: stats[args.uda]}
        print(json.dumps({str(k): v.to_dict() for k, v in stats.items()}, indent=2, sort_keys=True))
        return 0

    files = write_reports(results, args.out)
    logger.info("wrote %d files to %s", len(files), args.out)
    for name in files:
        print(args.out / name)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except DeaResearchError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
