"""Render mmgame CSV outputs into figures.

Five figure kinds, one image per invocation:

- ``crossing``: log-odds curve against the expected-reward line from
  ``crossing.csv``, fixed-point roots marked.
- ``q-convergence``: per-action Q trajectories from ``snapshots.csv``,
  mean with confidence bands across instances.
- ``inventory``: per-agent inventory paths from ``series.csv``, mean with
  confidence bands across instances.
- ``histogram``: action frequencies from one or more ``action_freq.csv``
  files, grouped bars.
- ``payoff-heatmap``: agent 1's payoff matrix from ``tensor.csv``.

Rendering never recomputes model quantities; everything drawn comes straight
from the input files. Images are deterministic for identical inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "RenderResult", "FIGURE_KINDS", "render"]

FIGURE_KINDS = ("crossing", "q-convergence", "inventory", "histogram", "payoff-heatmap")

_SAVE_OPTS = dict(dpi=150, metadata={"Software": "mmgame-plots"})


class RenderError(ValueError):
    """Unusable input: missing file, missing column, or empty data."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    labels: tuple[str, ...] = ()
    actions: tuple[int, ...] = ()  # optional 1-based subset for q-convergence
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; choose from {FIGURE_KINDS}")
        if not self.inputs:
            raise RenderError("at least one input CSV is required")


@dataclass(frozen=True)
class RenderResult:
    output: Path
    marked_roots: tuple[float, ...] = ()


def _read_columns(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not Path(path).exists():
        raise RenderError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path}: empty file") from None
        rows = list(reader)
    for col in required:
        if col not in header:
            raise RenderError(f"{path}: missing required column {col!r}")
    if not rows:
        raise RenderError(f"{path}: no data rows")
    out = {}
    for col in header:
        idx = header.index(col)
        values = [r[idx] for r in rows]
        try:
            out[col] = np.array([float(v) for v in values])
        except ValueError:
            out[col] = np.array(values)
    return out


def _labels_for(spec: FigureSpec) -> list[str]:
    if spec.labels:
        if len(spec.labels) != len(spec.inputs):
            raise RenderError("need one --label per input file")
        return list(spec.labels)
    return [Path(p).parent.name or Path(p).stem for p in spec.inputs]


def _band(ax, x, series, label, color=None):
    """Mean line with a 95% band across instances."""
    mean = series.mean(axis=0)
    line = ax.plot(x, mean, label=label, color=color)[0]
    if series.shape[0] > 1:
        half = 1.96 * series.std(axis=0, ddof=1) / np.sqrt(series.shape[0])
        ax.fill_between(x, mean - half, mean + half, alpha=0.25,
                        color=line.get_color(), linewidth=0)
    return line


def _render_crossing(spec: FigureSpec, ax) -> tuple[float, ...]:
    roots_all = []
    styles = ["--", "-.", ":"]
    for i, path in enumerate(Path(p) for p in spec.inputs):
        cols = _read_columns(path, ("temperature", "intercept", "slope", "root_p"))
        intercept, slope = cols["intercept"][0], cols["slope"][0]
        lam = cols["temperature"][0]
        label = f"line {intercept:+.3g} {slope:+.3g}p (temperature {lam:g})"
        p = np.linspace(1e-4, 1 - 1e-4, 2001)
        ax.plot(p, intercept + slope * p, styles[i % len(styles)], label=label)
        roots = [float(r) for r in cols["root_p"]]
        ax.plot(roots, [intercept + slope * r for r in roots], "o", ms=7,
                mfc="none", color="tab:red")
        roots_all.extend(roots)
    p = np.linspace(1e-4, 1 - 1e-4, 2001)
    ax.plot(p, np.log(p / (1 - p)), "k-", label="ln(p/(1-p))")
    ax.set_xlabel("probability of the lower spread")
    ax.set_ylabel("log-odds")
    ax.set_xlim(0, 1)
    ax.legend(fontsize=8)
    return tuple(roots_all)


def _render_q_convergence(spec: FigureSpec, ax):
    cols = _read_columns(Path(spec.inputs[0]), ("instance", "period", "agent", "action", "q_value"))
    actions = sorted(set(int(a) for a in cols["action"]))
    if spec.actions:
        actions = [a for a in actions if a in spec.actions]
        if not actions:
            raise RenderError("requested actions not present in the snapshot file")
    periods = np.unique(cols["period"])
    instances = np.unique(cols["instance"])
    for a in actions:
        series = np.full((len(instances), len(periods)), np.nan)
        mask_a = cols["action"] == a
        for i, inst in enumerate(instances):
            mask = mask_a & (cols["instance"] == inst)
            per = cols["period"][mask]
            # mean over agents at each period
            qv = cols["q_value"][mask]
            for j, t in enumerate(periods):
                sel = per == t
                if sel.any():
                    series[i, j] = qv[sel].mean()
        keep = ~np.isnan(series).any(axis=0)
        _band(ax, periods[keep], series[:, keep], label=f"action {a}")
    ax.set_xlabel("period")
    ax.set_ylabel("Q-value")
    ax.legend(fontsize=8, ncol=2)


def _render_inventory(spec: FigureSpec, ax):
    cols = _read_columns(Path(spec.inputs[0]), ("instance", "period", "agent", "inventory"))
    agents = np.unique(cols["agent"])
    periods = np.unique(cols["period"])
    instances = np.unique(cols["instance"])
    for agent in agents:
        series = np.full((len(instances), len(periods)), np.nan)
        mask_a = cols["agent"] == agent
        for i, inst in enumerate(instances):
            mask = mask_a & (cols["instance"] == inst)
            per = cols["period"][mask]
            inv = cols["inventory"][mask]
            for j, t in enumerate(periods):
                sel = per == t
                if sel.any():
                    series[i, j] = inv[sel][0]
        keep = ~np.isnan(series).any(axis=0)
        _band(ax, periods[keep], series[:, keep], label=f"agent {int(agent)}")
    ax.axhline(0.0, color="k", linewidth=0.6)
    ax.set_xlabel("period")
    ax.set_ylabel("inventory")
    ax.legend(fontsize=8)


def _render_histogram(spec: FigureSpec, ax):
    labels = _labels_for(spec)
    width = 0.8 / len(spec.inputs)
    for i, (path, label) in enumerate(zip(spec.inputs, labels)):
        cols = _read_columns(Path(path), ("action", "frequency"))
        x = cols["action"] + (i - (len(spec.inputs) - 1) / 2) * width
        ax.bar(x, cols["frequency"], width=width, label=label)
    ax.set_xlabel("action")
    ax.set_ylabel("frequency")
    ax.set_xticks(cols["action"].astype(int))
    ax.legend(fontsize=8)


def _render_payoff_heatmap(spec: FigureSpec, ax):
    cols = _read_columns(Path(spec.inputs[0]), ("agent", "action_1", "action_2", "expected_reward"))
    mask = cols["agent"] == 1
    a1 = cols["action_1"][mask].astype(int)
    a2 = cols["action_2"][mask].astype(int)
    w = int(max(a1.max(), a2.max()))
    grid = np.full((w, w), np.nan)
    grid[a1 - 1, a2 - 1] = cols["expected_reward"][mask]
    im = ax.imshow(grid.T, origin="lower", cmap="viridis",
                   extent=(0.5, w + 0.5, 0.5, w + 0.5))
    ax.figure.colorbar(im, ax=ax, label="expected reward")
    if w <= 16:
        ax.set_xticks(range(1, w + 1))
        ax.set_yticks(range(1, w + 1))
    if w <= 4:
        for i in range(w):
            for j in range(w):
                ax.text(i + 1, j + 1, f"{grid[i, j]:.3f}", ha="center", va="center",
                        color="w", fontsize=8)
    ax.set_xlabel("own action")
    ax.set_ylabel("rival action")


def render(spec: FigureSpec) -> RenderResult:
    """Draw one figure and write it to ``spec.output``."""
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    marked: tuple[float, ...] = ()
    try:
        if spec.kind == "crossing":
            marked = _render_crossing(spec, ax)
        elif spec.kind == "q-convergence":
            _render_q_convergence(spec, ax)
        elif spec.kind == "inventory":
            _render_inventory(spec, ax)
        elif spec.kind == "histogram":
            _render_histogram(spec, ax)
        else:
            _render_payoff_heatmap(spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        ax.grid(True, alpha=0.3)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, **_SAVE_OPTS)
    finally:
        plt.close(fig)
    return RenderResult(output=Path(spec.output), marked_roots=marked)
