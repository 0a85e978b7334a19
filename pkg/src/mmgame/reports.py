"""CSV and JSON emission for analysis results and training runs.

Schemas (all indices 1-based in files):

- ``tensor.csv``: agent, action_1..action_N, expected_reward
- ``analysis.csv``: xi, action, q_value, probability
- ``crossing.csv``: temperature, intercept, slope, root_p
- ``snapshots.csv``: instance, period, agent, action, q_value
- ``series.csv``: instance, period, agent, inventory, window_reward, window_orders
- ``final_q.csv``: instance, agent, state, action, q_value
- ``final_policies.csv``: instance, agent, state, greedy_action
- ``last_window.csv``: instance, periods, orders, reward, termination, stop_period
- ``action_freq.csv``: action, frequency
- ``summary.json``: manifest with config echo, seeds, headline numbers
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import BatchResult
from .market import PayoffTensor, tensor_to_csv

__all__ = [
    "atomic_write_text",
    "write_csv",
    "write_tensor",
    "write_analysis_rows",
    "write_crossing",
    "write_batch",
    "write_summary",
]


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_tensor(tensor: PayoffTensor, out_dir: Path) -> Path:
    path = out_dir / "tensor.csv"
    tmp = path.with_name(path.name + ".tmp")
    tensor_to_csv(tensor, tmp)
    os.replace(tmp, path)
    return path


def write_analysis_rows(
    out_dir: Path, blocks: Sequence[tuple[float, np.ndarray, np.ndarray]]
) -> Path:
    """One block of (xi, q, probability) rows per inventory-aversion level."""
    rows = []
    for xi, q, prob in blocks:
        for a, (qv, pv) in enumerate(zip(q, prob), start=1):
            rows.append([_fmt(float(xi)), a, _fmt(float(qv)), _fmt(float(pv))])
    path = out_dir / "analysis.csv"
    write_csv(path, ["xi", "action", "q_value", "probability"], rows)
    return path


def write_crossing(
    out_dir: Path, temperature: float, intercept: float, slope: float, roots: Sequence[float]
) -> Path:
    path = out_dir / "crossing.csv"
    write_csv(
        path,
        ["temperature", "intercept", "slope", "root_p"],
        [[_fmt(temperature), _fmt(intercept), _fmt(slope), _fmt(float(r))] for r in roots],
    )
    return path


def write_batch(result: BatchResult, out_dir: Path) -> None:
    """Emit the full CSV set for one training batch."""
    snap_rows = []
    series_rows = []
    for rec in result.records:
        for s, period in enumerate(rec.periods):
            for j in range(rec.q_snapshots.shape[1]):
                for a in range(rec.q_snapshots.shape[2]):
                    snap_rows.append(
                        [rec.instance, int(period), j + 1, a + 1, _fmt(rec.q_snapshots[s, j, a])]
                    )
                series_rows.append(
                    [
                        rec.instance,
                        int(period),
                        j + 1,
                        _fmt(rec.inventory_snapshots[s, j]),
                        _fmt(rec.reward_window_means[s, j]),
                        _fmt(rec.orders_window_means[s]),
                    ]
                )
    write_csv(
        out_dir / "snapshots.csv",
        ["instance", "period", "agent", "action", "q_value"],
        snap_rows,
    )
    write_csv(
        out_dir / "series.csv",
        ["instance", "period", "agent", "inventory", "window_reward", "window_orders"],
        series_rows,
    )

    finalq_rows = []
    policy_rows = []
    for rec in result.records:
        n_agents, n_states, n_actions = rec.final_q.shape
        for j in range(n_agents):
            for s in range(n_states):
                policy_rows.append([rec.instance, j + 1, s + 1, int(rec.greedy[j, s]) + 1])
                for a in range(n_actions):
                    finalq_rows.append(
                        [rec.instance, j + 1, s + 1, a + 1, _fmt(rec.final_q[j, s, a])]
                    )
    write_csv(
        out_dir / "final_q.csv",
        ["instance", "agent", "state", "action", "q_value"],
        finalq_rows,
    )
    write_csv(
        out_dir / "final_policies.csv",
        ["instance", "agent", "state", "greedy_action"],
        policy_rows,
    )

    write_csv(
        out_dir / "last_window.csv",
        ["instance", "periods", "orders", "reward", "termination", "stop_period"],
        [
            [
                rec.instance,
                rec.last_window.n_periods,
                _fmt(rec.last_window.orders_mean),
                _fmt(float(rec.last_window.reward_means.mean())),
                rec.termination,
                rec.stop_period,
            ]
            for rec in result.records
        ],
    )

    freq = result.action_frequencies()
    write_csv(
        out_dir / "action_freq.csv",
        ["action", "frequency"],
        [[a + 1, _fmt(float(f))] for a, f in enumerate(freq)],
    )


def write_summary(out_dir: Path, payload: dict) -> Path:
    path = out_dir / "summary.json"
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)!r}")
