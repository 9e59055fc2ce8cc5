"""CSV/JSON readers and delimited report writers for the CLI."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import ClusterModel, DataSet, GammaIndex, GaussianComponent, Partition
from .selection import AicReport
from .simulate import ExperimentReport

__all__ = [
    "read_data_csv",
    "read_labels_csv",
    "model_to_json",
    "model_from_json",
    "write_model_json",
    "read_model_json",
    "write_profile",
    "write_aic_curve",
    "write_experiment_tables",
    "format_cell",
]

# Sentinel written instead of +inf (zero within-cluster scatter).
PERFECT_SEPARATION = "PerfectSeparation"


def format_cell(value: float) -> str:
    if math.isinf(value):
        return PERFECT_SEPARATION
    return f"{value:.6g}"


def read_data_csv(path: str | Path, header: bool = True) -> DataSet:
    """Read a numeric CSV: one observation per row, comma separated.

    With ``header`` the first row names the features; all remaining cells
    must parse as numbers.
    """
    rows: list[list[float]] = []
    names: tuple[str, ...] | None = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            if i == 0 and header:
                names = tuple(cell.strip() for cell in row)
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"{path}: row {i + 1} is not numeric: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return DataSet(np.array(rows), feature_names=names)


def read_labels_csv(path: str | Path) -> tuple[str, ...]:
    """Read one category identifier per row."""
    labels = []
    with open(path, newline="") as fh:
        for line in fh:
            text = line.strip()
            if text:
                labels.append(text.split(",")[0].strip())
    if not labels:
        raise ValueError(f"{path}: no labels")
    return tuple(labels)


def model_to_json(model: ClusterModel, labels: Partition | None = None) -> dict:
    doc = {
        "gamma_mu": float(model.gamma_mu),
        "gamma_sigma": float(model.gamma_sigma),
        "components": [
            {"mu": c.mu.tolist(), "sigma": c.sigma.tolist()} for c in model.components
        ],
        "proportions": None
        if model.proportions is None
        else model.proportions.tolist(),
    }
    if labels is not None:
        doc["labels"] = labels.labels.tolist()
    return doc


def model_from_json(doc: dict) -> tuple[ClusterModel, Partition | None]:
    components = tuple(
        GaussianComponent(np.array(c["mu"], dtype=float), np.array(c["sigma"], dtype=float))
        for c in doc["components"]
    )
    proportions = doc.get("proportions")
    model = ClusterModel(
        components,
        None if proportions is None else np.array(proportions, dtype=float),
        GammaIndex(float(doc["gamma_mu"])),
        GammaIndex(float(doc["gamma_sigma"])),
    )
    labels = doc.get("labels")
    partition = None
    if labels is not None:
        partition = Partition(np.array(labels, dtype=int), model.k)
    return model, partition


def write_model_json(path: str | Path, model: ClusterModel, labels: Partition | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_json(model, labels), fh, indent=2)
        fh.write("\n")


def read_model_json(path: str | Path) -> tuple[ClusterModel, Partition | None]:
    with open(path) as fh:
        return model_from_json(json.load(fh))


def write_profile(path: str | Path, grid: np.ndarray, values: np.ndarray) -> None:
    """Two-column numeric text: evaluation point, objective value."""
    with open(path, "w") as fh:
        for g, v in zip(np.asarray(grid).ravel(), np.asarray(values).ravel()):
            fh.write(f"{g:.10g} {v:.10g}\n")


def write_aic_curve(path: str | Path, report: AicReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma_mu", "gamma_sigma", "k", "aic"])
        for rec in report.records:
            writer.writerow([f"{rec.gamma_mu:.6g}", f"{rec.gamma_sigma:.6g}", rec.k, f"{rec.aic:.6f}"])


def write_experiment_tables(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write the frequency, metric, and per-run tables as CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    all_ks = sorted({k for m in report.config.methods for k in report.freq[m]})
    freq_path = out / "frequencies.csv"
    with open(freq_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + [f"k={k}" for k in all_ks] + ["failures"])
        for m in report.config.methods:
            writer.writerow(
                [m]
                + [report.freq[m].get(k, 0) for k in all_ks]
                + [report.failures[m]]
            )
    written.append(freq_path)

    true_k = report.config.mixture.k
    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = (
            ["method", "mean_bhi"]
            + [f"dm{j + 1}" for j in range(true_k)]
            + [f"dv{j + 1}" for j in range(true_k)]
        )
        writer.writerow(header)
        for m in report.config.methods:
            dm = report.dm[m]
            dv = report.dv[m]
            writer.writerow(
                [m, format_cell(report.mean_bhi[m])]
                + [format_cell(v) for v in (dm if dm else [float("nan")] * true_k)]
                + [format_cell(v) for v in (dv if dv else [float("nan")] * true_k)]
            )
    written.append(metrics_path)

    runs_path = out / "runs.csv"
    with open(runs_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "method", "k", "bhi", "gamma_mu", "gamma_sigma"])
        for rec in report.records:
            writer.writerow(
                [
                    rec.run,
                    rec.method,
                    rec.k,
                    format_cell(rec.bhi),
                    "" if rec.gamma_mu is None else f"{rec.gamma_mu:.6g}",
                    "" if rec.gamma_sigma is None else f"{rec.gamma_sigma:.6g}",
                ]
            )
    written.append(runs_path)
    return written
