"""Render campaign CSV outputs into figures.

Consumes only the documented delimited files: the campaign summary
(per-set mean cumulative exploitation regret with a 95% band and the set's
condition constant) and per-norm sharpness curves. Rendering is a pure
function of the CSV bytes; no timestamps are embedded, so reruns produce
identical image files.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """A CSV input does not match the documented schema."""

    def __init__(self, message, column=None):
        super().__init__(message if column is None
                         else f"{message} (column {column!r})")
        self.column = column


_SUMMARY_COLUMNS = ("set", "exploit_round", "mean_cum_regret", "ci95",
                    "n_trials", "K")
_CURVE_COLUMNS = ("delta", "sharpness")


@dataclass(frozen=True)
class PlotSpec:
    """Inputs and output for one figure."""

    summary: str | None = None
    curves: tuple = ()
    out: str = "figure.png"
    labels: tuple = ()          # optional override, one per curve file
    xlim: tuple | None = None
    ylim: tuple | None = None


def _check_columns(fieldnames, required, path):
    for column in required:
        if fieldnames is None or column not in fieldnames:
            raise SchemaError(f"{path} is missing a required column",
                              column=column)


def read_summary(path):
    """Parse the campaign summary into per-set regret series.

    Returns an ordered dict: set name -> dict with `round`, `mean`, `ci`
    arrays plus the scalar `K` and `n_trials`. Raises SchemaError on
    missing columns or when any set has fewer than two trials (the
    confidence band is undefined there).
    """
    sets = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_columns(reader.fieldnames, _SUMMARY_COLUMNS, path)
        for row in reader:
            entry = sets.setdefault(row["set"], {"round": [], "mean": [],
                                                 "ci": [], "K": None,
                                                 "n_trials": None})
            entry["round"].append(int(row["exploit_round"]))
            entry["mean"].append(float(row["mean_cum_regret"]))
            entry["ci"].append(float(row["ci95"]))
            entry["K"] = float(row["K"])
            entry["n_trials"] = int(float(row["n_trials"]))
    if not sets:
        raise SchemaError(f"{path} holds no data rows")
    for name, entry in sets.items():
        if entry["n_trials"] < 2:
            raise SchemaError(
                f"set {name!r} has {entry['n_trials']} trial(s); the 95% "
                "band needs at least 2")
        for key in ("round", "mean", "ci"):
            entry[key] = np.asarray(entry[key], dtype=float)
        if np.isnan(entry["ci"]).any():
            raise SchemaError(f"set {name!r} carries undefined band values",
                              column="ci95")
    return sets


def read_curve(path):
    """Parse one sharpness curve CSV into (delta, sharpness) arrays."""
    deltas, values = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_columns(reader.fieldnames, _CURVE_COLUMNS, path)
        for row in reader:
            deltas.append(float(row["delta"]))
            values.append(float(row["sharpness"]))
    if not deltas:
        raise SchemaError(f"{path} holds no curve points")
    return np.asarray(deltas), np.asarray(values)


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, ax, spec):
    if spec.xlim is not None:
        ax.set_xlim(*spec.xlim)
    if spec.ylim is not None:
        ax.set_ylim(*spec.ylim)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Software": None})
    plt.close(fig)
    return out


def plot_regret(spec):
    """Mean cumulative exploitation regret per set with 95% bands.

    One line per safety set, shaded band mean +/- ci, legend annotated
    with each set's condition constant; x-axis is the exploitation round
    index. Returns the written image path.
    """
    if spec.summary is None:
        raise SchemaError("a summary CSV path is required")
    sets = read_summary(spec.summary)
    fig, ax = _new_axes()
    for name, entry in sets.items():
        line, = ax.plot(entry["round"], entry["mean"],
                        label=f"{name} (K={entry['K']:.3g})")
        ax.fill_between(entry["round"], entry["mean"] - entry["ci"],
                        entry["mean"] + entry["ci"], alpha=0.25,
                        color=line.get_color(), linewidth=0)
    ax.set_xlabel("exploitation round")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    return _finish(fig, ax, spec)


def plot_sharpness(spec):
    """Overlay sharpness curves (one per input CSV); curves start at the
    origin by construction. Returns the written image path."""
    if not spec.curves:
        raise SchemaError("at least one sharpness curve CSV is required")
    labels = spec.labels or tuple(Path(p).stem.replace("sharpness_", "")
                                  for p in spec.curves)
    if len(labels) != len(spec.curves):
        raise SchemaError("labels must match the curve files one to one")
    fig, ax = _new_axes()
    for path, label in zip(spec.curves, labels):
        deltas, values = read_curve(path)
        ax.plot(deltas, values, label=label)
    ax.set_xlabel("shrinkage")
    ax.set_ylabel("sharpness")
    ax.legend()
    return _finish(fig, ax, spec)
