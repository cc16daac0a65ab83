"""Benchmark report rendering: text table, CSV, JSON and figures.

The report path always writes the delimited samples next to the rendered
figure so results can be re-analyzed without re-running the benchmark.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import BenchmarkReport, linear_fit


def render_table(report: BenchmarkReport) -> str:
    headers = ["series", "n", "mean", "stdev", "min", "max", "unit"]
    rows = []
    for series in report.series:
        samples = series.samples or [0.0]
        rows.append([
            series.label, str(series.n),
            f"{series.mean():.3e}", f"{series.stdev():.3e}",
            f"{min(samples):.3e}", f"{max(samples):.3e}", series.unit,
        ])
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths))
    lines = [report.label, fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    if report.message_counts:
        lines.append("message counts: " + json.dumps(
            {k: v for k, v in report.message_counts.items() if k != "per_step"}))
    return "\n".join(lines)


def write_csv(report: BenchmarkReport, path: Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "index", "sample", "unit"])
        for series in report.series:
            for i, sample in enumerate(series.samples):
                writer.writerow([series.label, i, repr(sample), series.unit])
        for i, count in enumerate(report.message_counts.get("per_step", [])):
            writer.writerow(["messages_per_step", i + 1, count, "messages"])
    return path


def write_json(report: BenchmarkReport, path: Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_doc(), indent=2, sort_keys=True) + "\n")
    return path


def render_figure(report: BenchmarkReport, path: Path) -> Path:
    path = Path(path)
    if report.label == "component_creation":
        _creation_figure(report, path)
    elif report.label.startswith("probe_addition"):
        _probe_figure(report, path)
    elif report.label == "proxy_generation":
        _proxy_figure(report, path)
    else:
        _generic_figure(report, path)
    return path


def write_report(report: BenchmarkReport, outdir: Path, stem: str = "") -> List[Path]:
    """Write CSV + JSON + PNG for a report; returns the created paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = stem or report.label
    return [
        write_csv(report, outdir / f"{stem}.csv"),
        write_json(report, outdir / f"{stem}.json"),
        render_figure(report, outdir / f"{stem}.png"),
    ]


def _creation_figure(report: BenchmarkReport, path: Path) -> None:
    creation = report.get("creation").samples
    n = np.arange(1, len(creation) + 1)
    cumulative = np.cumsum(creation)
    slope, r2 = linear_fit(n, cumulative)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(n, cumulative * 1e3, lw=1.2, label="measured")
    ax1.plot(n, slope * n * 1e3, "--", lw=1.0,
             label=f"fit c*n (R$^2$={r2:.4f})")
    ax1.set_xlabel("components created")
    ax1.set_ylabel("cumulative time [ms]")
    ax1.set_title("creation cost grows linearly")
    ax1.legend()
    ax2.plot(n, np.asarray(creation) * 1e6, ".", ms=2, alpha=0.5)
    ax2.set_xlabel("component index")
    ax2.set_ylabel("per-instantiation time [us]")
    ax2.set_title("per-instantiation samples")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _probe_figure(report: BenchmarkReport, path: Path) -> None:
    per_step = report.message_counts.get("per_step", [])
    times = report.get("per_probe_wall_time").samples
    k = np.arange(1, len(per_step) + 1)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.bar(k, per_step, width=0.8)
    ax1.set_xlabel("probe #")
    ax1.set_ylabel("discovery messages")
    ax1.set_title(f"messages per probe ({report.metadata.get('mode')})")
    ax2.plot(np.arange(1, len(times) + 1), np.asarray(times) * 1e3, ".-", ms=3)
    ax2.set_xlabel("probe #")
    ax2.set_ylabel("wall time [ms]")
    ax2.set_title("per-probe wall time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _proxy_figure(report: BenchmarkReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for series in report.series:
        ax.hist(np.asarray(series.samples) * 1e3, bins=30, alpha=0.5,
                label=series.label)
    ax.set_xlabel("time [ms]")
    ax.set_ylabel("runs")
    ax.set_title("proxy adaptation chain timing")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _generic_figure(report: BenchmarkReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for series in report.series:
        ax.plot(series.samples, label=series.label)
    ax.set_title(report.label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
