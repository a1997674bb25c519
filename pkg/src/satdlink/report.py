"""File outputs for the CLI: delimited data plus rendered figures.

Every report-style artifact is written as machine-readable output (JSON or
CSV) with a matplotlib PNG rendered next to it under the same stem.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .census import CensusRow, census_markdown, highlight_rows
from .evaluate import RELATION_CLASSES, CurveRow, EvalReport
from .model import SatdPair
from .pairs import NUM_BINS, SimilarityStats


def _figure_path(path: Path) -> Path:
    return path.with_suffix(".png")


def write_eval_report(report: EvalReport, path: str | Path) -> Path:
    """JSON report plus a per-class metrics bar chart beside it."""
    path = Path(path)
    path.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8")

    labels = [cls.value for cls in RELATION_CLASSES] + ["average"]
    rows = [report.summary_per_class[cls] for cls in RELATION_CLASSES] + [report.summary_average]
    x = range(len(labels))
    width = 0.25
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([i - width for i in x], [r.precision for r in rows], width, label="precision")
    ax.bar(list(x), [r.recall for r in rows], width, label="recall")
    ax.bar([i + width for i in x], [r.f1 for r in rows], width, label="F1")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title("Cross-validation metrics")
    ax.legend()
    fig.tight_layout()
    figure = _figure_path(path)
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return figure


def write_curve_csv(rows: Sequence[CurveRow], path: str | Path) -> Path:
    """Learning-curve CSV plus the rendered curve beside it."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_train", "f1_duplication", "f1_repayment", "seed"])
        for row in rows:
            writer.writerow([row.n_train, row.f1_duplication, row.f1_repayment, row.seed])

    fig, ax = plt.subplots(figsize=(7, 4))
    for seed in sorted({row.seed for row in rows}):
        seed_rows = sorted((r for r in rows if r.seed == seed), key=lambda r: r.n_train)
        ns = [r.n_train for r in seed_rows]
        ax.plot(ns, [r.f1_duplication for r in seed_rows], marker="o",
                label=f"duplication (seed {seed})")
        ax.plot(ns, [r.f1_repayment for r in seed_rows], marker="s", linestyle="--",
                label=f"repayment (seed {seed})")
    ax.set_xlabel("training pairs")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1)
    ax.set_title("Learning curve")
    ax.legend(fontsize="small")
    fig.tight_layout()
    figure = _figure_path(path)
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return figure


def write_similarity_histogram(
    stats: SimilarityStats, path: str | Path, pairs: Sequence[SatdPair] | None = None
) -> Path:
    """Bin histogram PNG; annotates mean and standard deviation."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    edges = [i / NUM_BINS for i in range(NUM_BINS)]
    ax.bar(edges, stats.bin_counts, width=1 / NUM_BINS, align="edge", edgecolor="black")
    ax.set_xlabel("cosine similarity")
    ax.set_ylabel("pairs")
    title = f"Similarity distribution (mean {stats.mean:.3f}, std {stats.std:.3f}"
    if pairs is not None:
        title += f", n={len(pairs)}"
    ax.set_title(title + ")")
    fig.tight_layout()
    figure = _figure_path(path)
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return figure


def write_census(
    rows: Sequence[CensusRow],
    path: str | Path,
    threshold: int = 1000,
    markdown_path: str | Path | None = None,
) -> Path:
    """Census JSON (with bold flags) plus a horizontal bar figure beside it."""
    path = Path(path)
    flags = highlight_rows(rows, threshold)
    payload = {
        "highlight_threshold": threshold,
        "rows": [dict(row.to_json_dict(), bold=flag) for row, flag in zip(rows, flags)],
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if markdown_path is not None:
        Path(markdown_path).write_text(census_markdown(rows, threshold), encoding="utf-8")

    shown = list(rows)[:20]
    names = [
        f"{r.to_json_dict()['origin_label']} → {r.to_json_dict()['target_label']}"
        for r in shown
    ]
    y = range(len(shown))
    fig, ax = plt.subplots(figsize=(8, max(3, 0.4 * len(shown) + 1)))
    ax.barh(list(y), [r.duplication_count for r in shown], 0.4, label="duplication")
    ax.barh([i + 0.4 for i in y], [r.repayment_count for r in shown], 0.4, label="repayment")
    ax.set_yticks([i + 0.2 for i in y])
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("pairs")
    ax.set_title("Relation census")
    ax.legend()
    fig.tight_layout()
    figure = _figure_path(path)
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return figure
