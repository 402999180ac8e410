"""Figure rendering for sweep tables and rosters.

Everything draws through the Agg backend straight to files, so plotting
works the same on headless machines and never pops a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import NspInstance, decode

_SWEEP_PANELS = (
    ("satisfaction_frequency", "satisfaction frequency"),
    ("mean_hamming", "mean Hamming distance to nearest optimum"),
    ("std_hamming", "std of Hamming distance"),
)


def plot_sweep(rows: list[dict], out_dir, stem: str = "sweep") -> list[str]:
    """Render one line chart per sweep statistic; returns the file paths.

    Rows with empty statistics (failed cells) are skipped point-wise, so a
    partially failed sweep still plots everything that ran.
    """
    paths = []
    for key, label in _SWEEP_PANELS:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for nurses in sorted({row["N"] for row in rows}):
            cells = sorted(
                (row["D"], row[key])
                for row in rows
                if row["N"] == nurses and row.get(key) is not None
            )
            if cells:
                days = [c[0] for c in cells]
                values = [c[1] for c in cells]
                ax.plot(days, values, marker="o", label=f"N={nurses}")
        ax.set_xlabel("days")
        ax.set_ylabel(label)
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = f"{out_dir}/{stem}_{key}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def plot_roster(instance: NspInstance, schedule, path) -> None:
    """Render a duty grid (rows nurses, columns chronological slots)."""
    grid = decode(instance, schedule)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.25 * instance.num_slots), 2.5))
    ax.imshow(grid, cmap="Greys", aspect="auto", vmin=0, vmax=1)
    if instance.shifts_per_day > 1:
        for day in range(1, instance.num_days):
            ax.axvline(day * instance.shifts_per_day - 0.5, color="tab:blue", lw=0.8)
    ax.set_xlabel("slot")
    ax.set_ylabel("nurse")
    ax.set_yticks(np.arange(instance.num_nurses))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
