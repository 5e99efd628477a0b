"""End-to-end orchestration: inputs -> panels -> DEA -> report files."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .bibliometrics import AmbiguityReport, HomonymPolicy, build_panels
from .csvio import file_digest, ingest, read_panel_csv, write_panel_csv
from .dea import (
    DEFAULT_STAFF_THRESHOLD,
    OUTPUT_NAMES,
    CostVector,
    DmuPanel,
    EfficiencyRecord,
    evaluate_panel,
)
from .errors import ConfigError, PanelEmpty, ParseError
from .reporting import (
    INDICATORS,
    IndicatorTable,
    descriptive_stats,
    indicator_table,
    rank_variation,
    tertile_summary,
)

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    years: tuple[int, ...] = (2001, 2002, 2003)
    costs: CostVector = CostVector()
    staff_threshold: float = DEFAULT_STAFF_THRESHOLD
    homonym_policy: HomonymPolicy = HomonymPolicy.REJECT
    cost_scale: float = 1.0
    output_selector: str = "pu"
    report_format: str = "csv"
    compare: tuple[str, str] = ("te", "output_per_scientist")

    def __post_init__(self):
        if not self.years:
            raise ConfigError("years must not be empty")
        if not self.staff_threshold >= 0:
            raise ConfigError("staff threshold must be >= 0")
        if not self.cost_scale > 0:
            raise ConfigError("cost scale must be > 0")
        if self.output_selector not in OUTPUT_NAMES:
            raise ConfigError(f"output selector must be one of {OUTPUT_NAMES}")
        if self.report_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        for ind in self.compare:
            if ind not in INDICATORS:
                raise ConfigError(f"unknown indicator {ind!r}; expected one of {INDICATORS}")
        object.__setattr__(self, "homonym_policy", HomonymPolicy(self.homonym_policy))

    def to_dict(self) -> dict:
        return {
            "years": list(self.years),
            "cost_weights": [self.costs.w_fp, self.costs.w_ap, self.costs.w_rf],
            "staff_threshold": self.staff_threshold,
            "homonym_policy": self.homonym_policy.value,
            "cost_scale": self.cost_scale,
            "output_selector": self.output_selector,
            "format": self.report_format,
            "compare": list(self.compare),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> RunConfig:
        return cls(
            years=tuple(d["years"]),
            costs=CostVector(*d["cost_weights"]),
            staff_threshold=d["staff_threshold"],
            homonym_policy=HomonymPolicy(d["homonym_policy"]),
            cost_scale=d["cost_scale"],
            output_selector=d["output_selector"],
            report_format=d["format"],
            compare=tuple(d.get("compare", ("te", "output_per_scientist"))),
        )


@dataclass
class RunResults:
    config: RunConfig
    panels: dict[int, DmuPanel]
    records: dict[int, list[EfficiencyRecord]]
    ambiguity: AmbiguityReport | None = None
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)
    skipped_udas: list[int] = field(default_factory=list)

    def tables(self) -> dict[int, IndicatorTable]:
        c = self.config
        return {
            uda: indicator_table(self.panels[uda], recs, c.costs, c.output_selector, c.cost_scale)
            for uda, recs in sorted(self.records.items())
        }

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "config": self.config.to_dict(),
            "inputs": self.inputs,
            "skipped_udas": self.skipped_udas,
            "ambiguity": self.ambiguity.to_dict() if self.ambiguity else None,
            "areas": [
                {
                    "uda": uda,
                    "min_staff_threshold": p.min_staff_threshold,
                    "dmus": [
                        {"dmu_id": d, "inputs": x.tolist(), "outputs": y.tolist()}
                        for d, x, y in zip(p.dmu_ids, p.inputs, p.outputs)
                    ],
                    "records": [r.to_dict() for r in self.records.get(uda, [])],
                }
                for uda, p in sorted(self.panels.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> RunResults:
        panels, records = {}, {}
        for area in d["areas"]:
            uda = int(area["uda"])
            panels[uda] = DmuPanel.from_bundles(
                uda,
                [(u["dmu_id"], u["inputs"], u["outputs"]) for u in area["dmus"]],
                area["min_staff_threshold"],
            )
            if area["records"]:
                records[uda] = [EfficiencyRecord.from_dict(r) for r in area["records"]]
        amb = d.get("ambiguity")
        ambiguity = None
        if amb:
            ambiguity = AmbiguityReport(
                HomonymPolicy(amb["policy"]),
                amb["ambiguous"],
                amb["unattributed_publications"],
                amb["unmatched_tokens"],
            )
        return cls(
            RunConfig.from_dict(d["config"]), panels, records, ambiguity,
            d.get("inputs", {}), list(d.get("skipped_udas", [])),
        )


def evaluate_panels(panels: Mapping[int, DmuPanel], config: RunConfig) -> RunResults:
    """Run DEA on every area; areas with no eligible unit are skipped, not fatal.

    Raises PanelEmpty only when no area at all can be evaluated.
    """
    records: dict[int, list[EfficiencyRecord]] = {}
    skipped = []
    panels = {uda: p.with_threshold(config.staff_threshold) for uda, p in sorted(panels.items())}
    for uda, panel in panels.items():
        try:
            records[uda] = evaluate_panel(panel, config.costs)
        except PanelEmpty:
            logger.warning("UDA %s has no eligible units after exclusions; skipped", uda)
            skipped.append(uda)
    if not records:
        raise PanelEmpty("no disciplinary area has an eligible unit")
    return RunResults(config, panels, records, skipped_udas=skipped)


def _input_entry(path) -> dict[str, str]:
    return {"file": Path(path).name, "sha256": file_digest(path)}


def run_dea(panel_path, config: RunConfig) -> RunResults:
    panels = read_panel_csv(panel_path, config.staff_threshold)
    results = evaluate_panels(panels, config)
    results.inputs = {"panel": _input_entry(panel_path)}
    return results


def run_bibliometric(staff_path, publications_path, journals_path, config: RunConfig) -> RunResults:
    data = ingest(staff_path, publications_path, journals_path)
    panels, ambiguity = build_panels(
        data.roster, data.publications, data.journals, config.years,
        config.homonym_policy, config.staff_threshold,
    )
    if not panels:
        raise PanelEmpty(f"no staff or publications in years {list(config.years)}")
    results = evaluate_panels(panels, config)
    results.ambiguity = ambiguity
    results.inputs = {
        "staff": _input_entry(staff_path),
        "publications": _input_entry(publications_path),
        "journals": _input_entry(journals_path),
    }
    return results


# -- report rendering ----------------------------------------------------


def _fmt(v, digits: int = 3) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.{digits}f}"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


EFFICIENCY_HEADER = (
    "dmu_id", "status", "scientists",
    "te", "te_rank", "ae", "ae_rank", "ce", "ce_rank",
    "output_per_scientist", "output_per_scientist_rank",
    "output_per_cost", "output_per_cost_rank", "peers",
)


def _efficiency_csv(table: IndicatorTable, path: Path) -> None:
    rows = []
    for r in table.rows:
        cells = [r.dmu_id, r.status, _fmt(r.scientists, 2)]
        for ind in INDICATORS:
            cells += [_fmt(r.scores[ind]), _fmt(r.ranks[ind])]
        cells.append(";".join(f"{d}:{w:.3f}" for d, w in r.peers))
        rows.append(cells)
    _write_csv(path, EFFICIENCY_HEADER, rows)


def _efficiency_json(table: IndicatorTable, path: Path) -> None:
    _write_json(path, {
        "uda": table.uda,
        "rows": [
            {
                "dmu_id": r.dmu_id,
                "status": r.status,
                "scientists": r.scientists,
                "scores": r.scores,
                "ranks": r.ranks,
                "peers": [[d, w] for d, w in r.peers],
            }
            for r in table.rows
        ],
    })


def compare_rankings(results: RunResults, a: str, b: str):
    """Rank-variation statistics between indicators ``a`` and ``b`` for every area."""
    out = {}
    for uda, table in results.tables().items():
        scored = [r for r in table.rows if r.ranks[a] is not None]
        out[uda] = rank_variation(
            {r.dmu_id: r.ranks[a] for r in scored}, {r.dmu_id: r.ranks[b] for r in scored}
        )
    return out


def write_reports(results: RunResults, out_dir) -> list[str]:
    """Write every report file under ``out_dir``; returns the file names written.

    Output is byte-deterministic for identical results.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = results.config
    tables = results.tables()
    written: list[str] = []

    def done(name: str) -> Path:
        written.append(name)
        return out / name

    for uda, table in tables.items():
        if cfg.report_format == "csv":
            _efficiency_csv(table, done(f"efficiency_{uda}.csv"))
        else:
            _efficiency_json(table, done(f"efficiency_{uda}.json"))

    tert_rows = []
    for uda, recs in sorted(results.records.items()):
        for ind in ("te", "ce"):
            t = tertile_summary(recs, ind, uda)
            means = t.tertile_means or (None, None, None)
            tert_rows.append([
                uda, ind, t.efficient_count, t.total_count,
                *(_fmt(m) for m in means), *t.group_sizes, int(t.degenerate),
            ])
    _write_csv(done("tertiles.csv"), (
        "uda", "indicator", "efficient", "evaluated",
        "tertile_1", "tertile_2", "tertile_3", "size_1", "size_2", "size_3", "degenerate",
    ), tert_rows)

    desc_rows = []
    for uda, panel in sorted(results.panels.items()):
        for var, s in descriptive_stats(panel).items():
            desc_rows.append([uda, len(panel), var, _fmt(s.ave), _fmt(s.min), _fmt(s.max), _fmt(s.std)])
    _write_csv(done("descriptives.csv"), ("uda", "units", "variable", "ave", "min", "max", "std"), desc_rows)

    a, b = cfg.compare
    rv = compare_rankings(results, a, b)
    _write_csv(done("rank_variation.csv"), (
        "uda", "indicator_a", "indicator_b", "changed", "total",
        "max_variation", "average_variation", "median_variation", "coefficient_of_variation",
    ), [
        [uda, a, b, s.changed_count, s.total_count, s.max_variation,
         _fmt(s.average_variation), _fmt(s.median_variation, 1), _fmt(s.coefficient_of_variation)]
        for uda, s in rv.items()
    ])

    # plot-ready series
    score_rows, diff_rows = [], []
    for uda, table in tables.items():
        for r in table.rows:
            if r.ranks[a] is None:
                continue
            score_rows.append([uda, r.dmu_id, *(repr(float(r.scores[i])) for i in INDICATORS)])
            diff_rows.append([uda, r.dmu_id, r.ranks[a], r.ranks[b], abs(r.ranks[a] - r.ranks[b])])
    _write_csv(done("plot_scores.csv"), ("uda", "dmu_id", *INDICATORS), score_rows)
    _write_csv(done("plot_rank_differences.csv"),
               ("uda", "dmu_id", f"{a}_rank", f"{b}_rank", "abs_difference"), diff_rows)

    write_panel_csv(results.panels, done("panel.csv"))
    _write_json(done("results.json"), results.to_dict())
    if results.ambiguity is not None:
        _write_json(done("ambiguity_report.json"), results.ambiguity.to_dict())

    _write_json(out / "manifest.json", {
        "version": __version__,
        "config": cfg.to_dict(),
        "inputs": results.inputs,
        "skipped_udas": results.skipped_udas,
        "outputs": {name: file_digest(out / name) for name in sorted(written)},
    })
    written.append("manifest.json")
    return written


def load_results(path) -> RunResults:
    p = Path(path)
    if p.is_dir():
        p = p / "results.json"
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read results: {exc.strerror}", str(p)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", str(p), exc.lineno) from None
    return RunResults.from_dict(data)
