"""Report rendering: text tables, CSV/JSON export, and figure files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evalharness import AblationReport, EvalReport
from .hazards import HAZARD_CATEGORIES

# Column order for the category accuracy table.
TABLE_CATEGORY_ORDER = (
    "Analysis Approach",
    "Hazard Characteristics",
    "Impacts and Damage",
    "Response and Recovery",
)


def _pct(value: float | None) -> str:
    return "-" if value is None else f"{value * 100:.2f}%"


def _render_rows(headers: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def render_category_table(reports: list[EvalReport]) -> str:
    """Per-config accuracy by question category, plus the overall column."""
    headers = ["Config", *TABLE_CATEGORY_ORDER, "Overall"]
    rows = []
    for report in reports:
        row = [report.config.name]
        for category in TABLE_CATEGORY_ORDER:
            row.append(_pct(report.accuracy_by_category[category]["accuracy"]))
        row.append(_pct(report.overall_accuracy))
        rows.append(row)
    return _render_rows(headers, rows)


def render_hazard_table(reports: list[EvalReport]) -> str:
    headers = ["Config", *HAZARD_CATEGORIES, "Overall"]
    rows = []
    for report in reports:
        row = [report.config.name]
        for hazard in HAZARD_CATEGORIES:
            row.append(_pct(report.accuracy_by_hazard[hazard]["accuracy"]))
        row.append(_pct(report.overall_accuracy))
        rows.append(row)
    return _render_rows(headers, rows)


def render_ablation_table(ablation: AblationReport) -> str:
    """Config rows with overall accuracy and mean latency, deltas vs row 1."""
    headers = ["Config", "Overall Accuracy", "Average Latency"]
    rows = []
    for i, delta in enumerate(ablation.deltas):
        acc = f"{delta['accuracy'] * 100:.2f}%"
        lat = f"{delta['mean_latency']:.3f}s"
        if i > 0:
            acc += f" ({delta['accuracy_delta'] * 100:+.2f}%)"
            lat += f" ({delta['latency_delta']:+.3f}s)"
        rows.append([delta["name"], acc, lat])
    return _render_rows(headers, rows)


# ---------------------------------------------------------------------------
# File exports
# ---------------------------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    return {
        "config": {
            "name": report.config.name,
            "variant": report.config.variant,
            "chunking_strategy": report.config.chunking_strategy,
            "overrides": dict(report.config.overrides),
        },
        "overall_accuracy": report.overall_accuracy,
        "accuracy_by_category": report.accuracy_by_category,
        "accuracy_by_kind": report.accuracy_by_kind,
        "accuracy_by_hazard": report.accuracy_by_hazard,
        "mean_latency": report.mean_latency,
        "median_latency": report.median_latency,
        "abstentions": report.abstentions,
        "items": [
            {
                "question_id": it.question_id,
                "kind": it.kind,
                "category": it.category,
                "hazard": it.hazard,
                "predicted": it.predicted,
                "gold": it.gold,
                "correct": it.correct,
                "latency": it.latency,
                "evidence_source": it.evidence_source,
            }
            for it in report.items
        ],
    }


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def write_items_csv(report: EvalReport, path: str | Path) -> None:
    """Delimited per-item records, one row per dataset question."""
    fields = [
        "question_id",
        "kind",
        "category",
        "hazard",
        "predicted",
        "gold",
        "correct",
        "latency",
        "evidence_source",
    ]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for it in report.items:
            writer.writerow(
                [
                    it.question_id,
                    it.kind,
                    it.category,
                    it.hazard,
                    it.predicted if it.predicted is not None else "",
                    it.gold,
                    str(it.correct).lower(),
                    f"{it.latency:.3f}",
                    it.evidence_source,
                ]
            )


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def _grouped_bars(ax, reports: list[EvalReport], keys: tuple[str, ...], breakdown_attr: str):
    width = 0.8 / max(1, len(reports))
    for j, report in enumerate(reports):
        breakdown = getattr(report, breakdown_attr)
        values = [(breakdown[k]["accuracy"] or 0.0) * 100 for k in keys]
        positions = [i + j * width for i in range(len(keys))]
        ax.bar(positions, values, width=width, label=report.config.name)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(keys))])
    ax.set_xticklabels(keys, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)


def render_figures(reports: list[EvalReport], out_dir: str | Path) -> list[Path]:
    """Write accuracy and latency figures next to the delimited output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    _grouped_bars(ax, reports, TABLE_CATEGORY_ORDER, "accuracy_by_category")
    ax.set_title("Accuracy by question category")
    fig.tight_layout()
    path = out_dir / "accuracy_by_category.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    # Only plot hazards that actually occur in some report.
    present = tuple(
        h
        for h in HAZARD_CATEGORIES
        if any(r.accuracy_by_hazard[h]["count"] for r in reports)
    )
    if present:
        fig, ax = plt.subplots(figsize=(7, 4))
        _grouped_bars(ax, reports, present, "accuracy_by_hazard")
        ax.set_title("Accuracy by hazard type")
        fig.tight_layout()
        path = out_dir / "accuracy_by_hazard.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    names = [r.config.name for r in reports]
    ax.bar(names, [r.mean_latency for r in reports], width=0.5)
    ax.set_ylabel("Mean latency (s)")
    ax.set_title("Latency by configuration")
    ax.tick_params(axis="x", rotation=15)
    fig.tight_layout()
    path = out_dir / "latency.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    return written
