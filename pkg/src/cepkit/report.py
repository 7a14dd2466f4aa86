"""Renders one engine run as a picture.

The figure stacks two shared-axis panels: every pushed event on a lane
per event type, and every emitted row underneath at its emission time.
Written for headless use; the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import OutputRow, TimedEvent
from .model import RuleModel

REPORT_NAME = "timeline.png"


def write_report(
    model: RuleModel,
    events: Sequence[TimedEvent],
    rows: Sequence[OutputRow],
    directory: str | Path,
) -> Path:
    """Draw the run into ``directory/timeline.png`` and return the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = directory / REPORT_NAME

    lanes = [e.name for e in model.events]
    lane_of = {name: i for i, name in enumerate(lanes)}

    fig, (ax_in, ax_out) = plt.subplots(
        2, 1, sharex=True, figsize=(9, 4.5),
        height_ratios=[max(len(lanes), 1), 1],
    )
    fig.suptitle(f"{model.name}: {len(events)} events in, {len(rows)} rows out")

    if events:
        xs = [e.timestamp / 1000.0 for e in events]
        ys = [lane_of[e.type_name] for e in events]
        ax_in.scatter(xs, ys, marker="o", s=36, zorder=3)
    ax_in.set_yticks(range(len(lanes)), lanes)
    ax_in.set_ylim(-0.6, max(len(lanes) - 0.4, 0.6))
    ax_in.grid(True, axis="x", alpha=0.3)
    ax_in.set_ylabel("input")

    if rows:
        ax_out.scatter(
            [r.emitted_at / 1000.0 for r in rows], [0] * len(rows),
            marker="^", s=48, color="tab:red", zorder=3,
        )
    label = rows[0].derived_event_name if rows and rows[0].derived_event_name else "rows"
    ax_out.set_yticks([0], [label])
    ax_out.set_ylim(-0.6, 0.6)
    ax_out.grid(True, axis="x", alpha=0.3)
    ax_out.set_xlabel("time (s)")

    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
