"""Report rendering for the CLI: delimited outputs plus matplotlib figures
written next to them. Analysis modules return plain values; everything
presentation-shaped lives here."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import (  # noqa: E402
    CorrelationCdf,
    DifferenceHistogram,
    FrequencyCdf,
    HeatmapResult,
    Histogram,
    SizeAggregate,
)
from .experiment import StratumSummary  # noqa: E402
from .predictor import EvalResult  # noqa: E402

FIGURE_DPI = 110


def _figure_path(out_path: str | Path) -> Path:
    p = Path(out_path)
    return p.with_suffix(".png")


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


# -- distributions -----------------------------------------------------------

def distribution_payload(hist: Histogram, metric: str) -> dict:
    fractions = hist.fractions()
    return {
        "metric": metric,
        "total": hist.total,
        "values": {f"{label:.1f}": fractions[label] for label in hist.labels},
        "counts": {f"{label:.1f}": hist.counts.get(label, 0) for label in hist.labels},
    }


def write_distribution_csv(hist: Histogram, metric: str, path: str | Path) -> None:
    fractions = hist.fractions()
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["value", "fraction", "count"])
        for label in sorted(hist.labels, reverse=True):
            w.writerow([f"{label:.1f}", f"{fractions[label]:.6f}", hist.counts.get(label, 0)])


def render_distribution(hist: Histogram, metric: str, out_path: str | Path) -> Path:
    fractions = hist.fractions()
    labels = [f"{v:.1f}" for v in hist.labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(labels, [fractions[v] for v in hist.labels], color="0.35")
    ax.set_xlabel("score value")
    ax.set_ylabel("fraction")
    ax.set_title(f"value distribution: {metric}")
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- correlation CDF -----------------------------------------------------------

def correlation_payload(cdf: CorrelationCdf) -> dict:
    return {"coefficients": cdf.coefficients, "summary": cdf.summary()}


def render_correlation(cdfs: list[CorrelationCdf], out_path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    styles = ["-", "--", ":"]
    plotted = False
    for cdf, style in zip(cdfs, styles):
        n = len(cdf.coefficients)
        if n == 0:
            continue
        ys = [(i + 1) / n for i in range(n)]
        ax.plot(cdf.coefficients, ys, style, color="0.2", label=f"{cdf.metric_a} vs {cdf.metric_b}")
        plotted = True
    ax.set_xlabel("Pearson correlation coefficient")
    ax.set_ylabel("CDF")
    ax.set_xlim(-1, 1)
    if plotted:
        ax.legend(fontsize=7)
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- difference histogram -----------------------------------------------------

def write_difference_csv(diff: DifferenceHistogram, path: str | Path) -> None:
    fractions = diff.histogram.fractions()
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["difference", "fraction", "count"])
        for label in diff.histogram.labels:
            w.writerow([f"{label:.1f}", f"{fractions[label]:.6f}", diff.histogram.counts.get(label, 0)])
        w.writerow(["fractionAt2.0", f"{diff.fraction_at_2:.6f}", ""])
        w.writerow(["fractionGe1.5", f"{diff.fraction_ge_1_5:.6f}", ""])


def render_difference(diff: DifferenceHistogram, out_path: str | Path) -> Path:
    fractions = diff.histogram.fractions()
    labels = [f"{v:.1f}" for v in diff.histogram.labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(labels, [fractions[v] for v in diff.histogram.labels], color="0.35")
    ax.set_xlabel("|placement score - interruption-free score|")
    ax.set_ylabel("fraction")
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- update frequency -----------------------------------------------------------

def frequency_payload(cdfs: list[FrequencyCdf]) -> dict:
    return {
        cdf.metric: {
            "gapsHours": cdf.gaps_hours,
            "seriesCount": cdf.series_count,
            "medianHours": cdf.median(),
        }
        for cdf in cdfs
    }


def render_frequency(cdfs: list[FrequencyCdf], out_path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    styles = ["-", "--", ":", "-."]
    plotted = False
    for cdf, style in zip(cdfs, styles):
        n = len(cdf.gaps_hours)
        if n == 0:
            continue
        ys = [(i + 1) / n for i in range(n)]
        ax.plot(cdf.gaps_hours, ys, style, color="0.2", label=cdf.metric)
        plotted = True
    ax.set_xscale("log")
    ax.set_xlabel("hours between updates")
    ax.set_ylabel("CDF")
    if plotted:
        ax.legend(fontsize=7)
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- heatmap -----------------------------------------------------------------

def write_heatmap_csv(grid: HeatmapResult, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"{grid.row_dim}\\{grid.col_dim}", *grid.cols])
        for row, line in zip(grid.rows, grid.cells):
            w.writerow([row, *["NA" if v is None else f"{v:.4f}" for v in line]])


def render_heatmap(grid: HeatmapResult, out_path: str | Path) -> Path:
    import numpy as np

    data = np.array(
        [[np.nan if v is None else v for v in line] for line in grid.cells], dtype=float
    )
    fig, ax = plt.subplots(figsize=(6, 0.6 + 0.35 * max(1, len(grid.rows))))
    masked = np.ma.masked_invalid(data)
    cmap = plt.get_cmap("gray")
    cmap = cmap.copy()
    cmap.set_bad("red", alpha=0.35)
    im = ax.imshow(masked, aspect="auto", cmap=cmap, vmin=1.0, vmax=3.0)
    ax.set_xticks(range(len(grid.cols)))
    ax.set_xticklabels(grid.cols, rotation=90, fontsize=6)
    ax.set_yticks(range(len(grid.rows)))
    ax.set_yticklabels(grid.rows, fontsize=7)
    fig.colorbar(im, ax=ax, label=grid.metric)
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- size grouping ---------------------------------------------------------------

def write_sizes_csv(rows: list[SizeAggregate], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["size", "meanScore", "typeCount"])
        for row in rows:
            w.writerow([row.size, f"{row.mean_score:.4f}", row.type_count])


def render_sizes(rows: list[SizeAggregate], metric: str, out_path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = [r.size for r in rows]
    ax.plot(xs, [r.mean_score for r in rows], "-o", color="0.2", label=f"mean {metric}")
    ax2 = ax.twinx()
    ax2.plot(xs, [r.type_count for r in rows], "*", color="0.5", label="type count")
    ax.set_xlabel("instance size")
    ax.set_ylabel("mean score")
    ax2.set_ylabel("types")
    ax.tick_params(axis="x", rotation=60)
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- experiment summary (outcome table + latency CDFs) ---------------------------

def write_outcomes_csv(summaries: list[StratumSummary], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            ["stratum", "cases", "notFulfilledPct", "interruptedPct", "medianFulfillS", "medianInterruptS"]
        )
        for s in summaries:
            mf = s.median_fulfill_s()
            mi = s.median_interrupt_s()
            w.writerow(
                [
                    s.stratum,
                    s.cases,
                    f"{s.not_fulfilled_pct:.2f}",
                    f"{s.interrupted_pct:.2f}",
                    "" if mf is None else f"{mf:.1f}",
                    "" if mi is None else f"{mi:.1f}",
                ]
            )


def render_latency_cdfs(summaries: list[StratumSummary], out_path: str | Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    for s in summaries:
        for ax, data in ((ax1, s.fulfill_latencies_s), (ax2, s.interrupt_latencies_s)):
            if not data:
                continue
            ys = [(i + 1) / len(data) for i in range(len(data))]
            ax.plot(data, ys, label=s.stratum)
    for ax, title in ((ax1, "time to fulfillment (s)"), (ax2, "time to interruption (s)")):
        ax.set_xscale("log")
        ax.set_xlabel(title)
        ax.set_ylabel("CDF")
        ax.legend(fontsize=6)
    fig.tight_layout()
    path = _figure_path(out_path)
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


# -- prediction comparison ---------------------------------------------------------

def write_prediction_csv(results: dict[str, EvalResult], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "accuracy", "macroF1"])
        for method, res in results.items():
            w.writerow([method, f"{res.accuracy:.4f}", f"{res.macro_f1:.4f}"])


def format_prediction_table(results: dict[str, EvalResult]) -> str:
    lines = [f"{'method':<10} {'accuracy':>9} {'macroF1':>9}"]
    for method, res in results.items():
        lines.append(f"{method:<10} {res.accuracy:>9.4f} {res.macro_f1:>9.4f}")
    return "\n".join(lines)
