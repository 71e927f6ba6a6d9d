"""Render figures from offloading-simulator run outputs.

The only coupling to the simulator is its file contract: each run is a
per-slot CSV (fixed column order, one row per slot) plus a metadata JSON
carrying policy, seed, summary, and sweep provenance. Figures never import
the simulator.

Every rendered image is accompanied by a tidy CSV of exactly the plotted
points (columns: series, x, y), so the figures themselves are testable: the
companion table must equal an independent aggregation of the inputs.
"""

from __future__ import annotations

import glob as globmod
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_IDS = ("convergence-v", "convergence-lambda", "cost-vs-v", "buffer-vs-v",
              "long-cost", "long-volume")

_AXIS_FOR = {"convergence-v": "control_v", "convergence-lambda": "poisson_mean",
             "cost-vs-v": "control_v", "buffer-vs-v": "control_v"}

_REQUIRED = {"convergence-v": ["t", "sum_q_next"],
             "convergence-lambda": ["t", "sum_q_next"],
             "cost-vs-v": ["cost"],
             "buffer-vs-v": ["sum_q_next"],
             "long-cost": ["t", "cost"],
             "long-volume": ["t", "queued_bits"]}


class FigureError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    inputs: str  # glob over run outputs
    out: str | Path
    title: str | None = None
    dpi: int = 150
    styling: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunInput:
    name: str
    frame: pd.DataFrame
    meta: dict


def load_runs(pattern: str) -> list[RunInput]:
    """Load every run whose CSV matches the glob and has a sibling JSON."""
    paths = sorted(p for p in globmod.glob(pattern) if p.endswith(".csv"))
    if not paths and not pattern.endswith(".csv"):
        paths = sorted(globmod.glob(pattern.rstrip("/") + "*.csv")
                       + globmod.glob(pattern.rstrip("/") + "/*.csv"))
    runs = []
    for path in paths:
        meta_path = Path(path).with_suffix(".json")
        if not meta_path.exists():
            continue
        with open(meta_path) as fh:
            meta = json.load(fh)
        if "summary" not in meta:
            continue
        runs.append(RunInput(name=Path(path).stem,
                             frame=pd.read_csv(path), meta=meta))
    if not runs:
        raise FigureError(f"no inputs matched {pattern!r}")
    return runs


def check_lineage(runs: list[RunInput]) -> None:
    """All inputs must descend from one base config."""
    def lineage(meta):
        sweep = meta.get("sweep") or {}
        return sweep.get("base_config_hash") or meta.get("config_hash")

    hashes = {lineage(r.meta) for r in runs}
    if len(hashes) > 1:
        raise FigureError(f"inputs mix config lineages: {sorted(hashes)}")


def check_columns(runs: list[RunInput], figure: str) -> None:
    for r in runs:
        missing = [c for c in _REQUIRED[figure] if c not in r.frame.columns]
        if missing:
            version = r.meta.get("engine_version", "unknown")
            raise FigureError(
                f"run {r.name} is missing column(s) {missing} "
                f"(produced by engine version {version})")


def _axis_value(run: RunInput, axis: str) -> float:
    sweep = run.meta.get("sweep") or {}
    if sweep.get("axis") == axis:
        return float(sweep["value"])
    raise FigureError(f"run {run.name} carries no {axis!r} sweep value")


def aggregate(runs: list[RunInput], figure: str) -> pd.DataFrame:
    """The plotted points as a tidy (series, x, y) table."""
    check_columns(runs, figure)
    rows: list[pd.DataFrame] = []
    if figure in ("convergence-v", "convergence-lambda"):
        axis = _AXIS_FOR[figure]
        frames = []
        for r in runs:
            f = r.frame[["t", "sum_q_next"]].copy()
            f["value"] = _axis_value(r, axis)
            frames.append(f)
        combined = pd.concat(frames)
        grouped = combined.groupby(["value", "t"], as_index=False)["sum_q_next"].mean()
        for value, g in grouped.groupby("value"):
            rows.append(pd.DataFrame({
                "series": f"{axis}={value:g}", "x": g["t"].to_numpy(dtype=float),
                "y": g["sum_q_next"].to_numpy()}))
    elif figure in ("cost-vs-v", "buffer-vs-v"):
        column = "cost" if figure == "cost-vs-v" else "sum_q_next"
        recs = []
        for r in runs:
            recs.append({"policy": r.meta["policy"],
                         "value": _axis_value(r, "control_v"),
                         "metric": r.frame[column].mean()})
        table = pd.DataFrame(recs).groupby(["policy", "value"],
                                           as_index=False)["metric"].mean()
        for policy, g in table.groupby("policy"):
            g = g.sort_values("value")
            rows.append(pd.DataFrame({
                "series": policy, "x": g["value"].to_numpy(),
                "y": g["metric"].to_numpy()}))
    elif figure == "long-cost":
        for r in runs:
            t = r.frame["t"].to_numpy(dtype=float)
            cum = r.frame["cost"].expanding().mean().to_numpy()
            rows.append(pd.DataFrame({"series": r.name, "x": t, "y": cum}))
    elif figure == "long-volume":
        for r in runs:
            t = r.frame["t"].to_numpy(dtype=float)
            cum = r.frame["queued_bits"].cumsum().to_numpy()
            rows.append(pd.DataFrame({"series": r.name, "x": t, "y": cum}))
    else:
        raise FigureError(f"unknown figure {figure!r}; expected one of {FIGURE_IDS}")
    return pd.concat(rows, ignore_index=True)


_LABELS = {
    "convergence-v": ("slot", "total backlog (bits)"),
    "convergence-lambda": ("slot", "total backlog (bits)"),
    "cost-vs-v": ("control parameter V", "time-averaged cost"),
    "buffer-vs-v": ("control parameter V", "time-averaged backlog (bits)"),
    "long-cost": ("slot", "running average cost"),
    "long-volume": ("slot", "cumulative offloaded volume (bits)"),
}


def render(spec: FigureSpec) -> tuple[Path, Path]:
    """Render one figure; returns (image path, companion CSV path)."""
    if spec.figure not in FIGURE_IDS:
        raise FigureError(f"unknown figure {spec.figure!r}; expected one of {FIGURE_IDS}")
    runs = load_runs(spec.inputs)
    check_lineage(runs)
    table = aggregate(runs, spec.figure)

    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for series, g in table.groupby("series", sort=True):
        marker = "o" if len(g) <= 30 else None
        ax.plot(g["x"], g["y"], label=str(series), marker=marker, markersize=4)
    xlabel, ylabel = _LABELS[spec.figure]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(spec.title or spec.figure)
    ax.grid(True, alpha=0.4)
    if table["series"].nunique() > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)

    companion = out.with_suffix(".csv")
    table.to_csv(companion, index=False, float_format=None)
    return out, companion
