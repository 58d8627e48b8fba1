"""Aggregation of per-record metric vectors into the two result shapes:
overall per-metric means and per-error-type-group per-metric means.

Means are unweighted arithmetic means per record. Records missing an
optional metric (e.g. BERTScore without embeddings) are excluded from that
metric's mean only; every cell records how many records fed it. TER is
exported with an explicit direction column because it is the one metric
where lower is better.

Aggregation is single-threaded on purpose: determinism is part of the
contract (double runs must be byte-identical).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import ErrorType, SegmentRecord
from .metrics import METRIC_DIRECTIONS, METRIC_ORDER, MetricVector


class ReportError(Exception):
    """Invalid aggregation input or malformed score file."""


#: Normalization identifier recorded in every score file and report.
NORMALIZATION_ID = "nfc_lowercase_punct_separated"


@dataclass(frozen=True)
class ScoreRow:
    """One scored record as persisted in a score file."""

    record_id: str
    error_type: ErrorType | None
    critical: bool | None
    vector: MetricVector


@dataclass(frozen=True)
class StratifiedReport:
    overall: dict[str, float]
    by_error_type: dict[str, dict[str, float]]
    counts: dict[str, int]
    config_fingerprint: str
    # per-cell record counts; exclusions of optional metrics show up as
    # cell_counts < counts for the same group
    cell_counts: dict[str, dict[str, int]] = field(default_factory=dict)
    overall_counts: dict[str, int] = field(default_factory=dict)


def config_fingerprint(config: dict | None) -> str:
    canonical = json.dumps(config or {}, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _mean(values: Sequence[float]) -> float:
    # statistics.mean is exact-rational internally, so the mean is correctly
    # rounded; cells must reproduce an independent exact recomputation.
    return float(statistics.mean(values))


def aggregate_rows(rows: Sequence[ScoreRow], config: dict | None = None) -> StratifiedReport:
    """Aggregate score rows; every row must be critical and carry an error type."""
    if not rows:
        raise ReportError("cannot aggregate an empty score set")
    per_group: dict[str, dict[str, list[float]]] = {}
    per_metric: dict[str, list[float]] = {name: [] for name in METRIC_ORDER}
    counts: dict[str, int] = {}
    for row in rows:
        if row.critical is not True:
            raise ReportError(f"record {row.record_id!r} is not marked critical")
        if row.error_type is None:
            raise ReportError(f"record {row.record_id!r} has no error_type")
        group = row.error_type.group
        counts[group] = counts.get(group, 0) + 1
        cells = per_group.setdefault(group, {name: [] for name in METRIC_ORDER})
        for name, value in row.vector.to_dict().items():
            cells[name].append(value)
            per_metric[name].append(value)
    by_error_type = {
        group: {name: _mean(vals) for name, vals in cells.items() if vals}
        for group, cells in sorted(per_group.items())
    }
    cell_counts = {
        group: {name: len(vals) for name, vals in cells.items() if vals}
        for group, cells in sorted(per_group.items())
    }
    overall = {name: _mean(vals) for name, vals in per_metric.items() if vals}
    overall_counts = {name: len(vals) for name, vals in per_metric.items() if vals}
    return StratifiedReport(
        overall=overall,
        by_error_type=by_error_type,
        counts=dict(sorted(counts.items())),
        config_fingerprint=config_fingerprint(config),
        cell_counts=cell_counts,
        overall_counts=overall_counts,
    )


def aggregate(
    pairs: Sequence[tuple[SegmentRecord, MetricVector]],
    config: dict | None = None,
) -> StratifiedReport:
    """Aggregate (record, vector) pairs from the scorer."""
    rows = [
        ScoreRow(rec.id, rec.error_type, rec.critical, vector)
        for rec, vector in pairs
    ]
    return aggregate_rows(rows, config)


# ---------------------------------------------------------------------------
# Score file persistence (JSONL: header line + one row per record)

SCORE_FILE_KIND = "score_file"


def write_score_file(path, rows: Iterable[ScoreRow], header_extra: dict | None = None) -> None:
    header = {"kind": SCORE_FILE_KIND, "normalization": NORMALIZATION_ID}
    if header_extra:
        header.update(header_extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
        for row in rows:
            obj: dict = {"id": row.record_id}
            if row.error_type is not None:
                obj["error_type"] = row.error_type.value
            if row.critical is not None:
                obj["critical"] = row.critical
            obj["scores"] = row.vector.to_dict()
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_score_file(path) -> tuple[dict, list[ScoreRow]]:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in (l.strip() for l in fh) if line]
    if not lines:
        raise ReportError(f"{path}: empty score file")
    header = json.loads(lines[0])
    if header.get("kind") != SCORE_FILE_KIND:
        raise ReportError(f"{path}: first line must be a score-file header")
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        obj = json.loads(line)
        try:
            error_type = ErrorType(obj["error_type"]) if "error_type" in obj else None
            vector = MetricVector.from_dict(obj["scores"])
        except (KeyError, ValueError) as exc:
            raise ReportError(f"{path} line {line_no}: {exc}") from exc
        rows.append(ScoreRow(obj["id"], error_type, obj.get("critical"), vector))
    return header, rows


# ---------------------------------------------------------------------------
# Export

def _csv_rows(report: StratifiedReport) -> list[list[str]]:
    rows: list[list[str]] = [["scope", "group", "metric", "mean", "n", "direction"]]
    for group in sorted(report.by_error_type):
        cells = report.by_error_type[group]
        cell_n = report.cell_counts.get(group, {})
        for name in METRIC_ORDER:
            mean = cells.get(name)
            rows.append([
                "group",
                group,
                name,
                "" if mean is None else repr(mean),
                str(cell_n.get(name, 0)),
                METRIC_DIRECTIONS[name],
            ])
    for name in METRIC_ORDER:
        mean = report.overall.get(name)
        rows.append([
            "overall",
            "all",
            name,
            "" if mean is None else repr(mean),
            str(report.overall_counts.get(name, 0)),
            METRIC_DIRECTIONS[name],
        ])
    return rows


def render_csv(report: StratifiedReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(_csv_rows(report))
    return buf.getvalue()


def render_plot_data(report: StratifiedReport) -> str:
    """Grouped-bar series: one JSON object per (group, metric) bar."""
    lines = []
    for group in sorted(report.by_error_type):
        for name in METRIC_ORDER:
            if name in report.by_error_type[group]:
                lines.append(json.dumps(
                    {"group": group, "metric": name, "value": report.by_error_type[group][name]},
                    ensure_ascii=False,
                ))
    return "\n".join(lines) + "\n"


def render_table(report: StratifiedReport) -> str:
    """Fixed-width text table, groups as columns, metrics as rows."""
    groups = sorted(report.by_error_type)
    headers = ["metric"] + groups + ["overall", "direction"]
    body: list[list[str]] = []
    for name in METRIC_ORDER:
        if name not in report.overall and not any(name in report.by_error_type[g] for g in groups):
            continue
        row = [name]
        for group in groups:
            mean = report.by_error_type[group].get(name)
            row.append("-" if mean is None else f"{mean:.4f}")
        overall = report.overall.get(name)
        row.append("-" if overall is None else f"{overall:.4f}")
        row.append(METRIC_DIRECTIONS[name])
        body.append(row)
    widths = [max(len(r[i]) for r in [headers] + body) for i in range(len(headers))]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    counts = ", ".join(f"{g}={report.counts[g]}" for g in sorted(report.counts))
    lines.append("")
    lines.append(f"records per group: {counts}")
    lines.append(f"config fingerprint: {report.config_fingerprint}")
    return "\n".join(lines) + "\n"


EXPORT_FORMATS = ("csv", "table-text", "plot-data")


def export_report(report: StratifiedReport, fmt: str, path) -> None:
    """Write the report in one of the supported formats, byte-deterministic."""
    if fmt == "csv":
        content = render_csv(report)
    elif fmt == "table-text":
        content = render_table(report)
    elif fmt == "plot-data":
        content = render_plot_data(report)
    else:
        raise ReportError(f"unknown export format {fmt!r}; expected one of {EXPORT_FORMATS}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)


def read_report_csv(path) -> list[dict]:
    """Parse an exported csv back into rows (means as floats, exact)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append({
                "scope": row["scope"],
                "group": row["group"],
                "metric": row["metric"],
                "mean": float(row["mean"]) if row["mean"] else None,
                "n": int(row["n"]),
                "direction": row["direction"],
            })
        return rows
