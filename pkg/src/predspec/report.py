"""Bench output: CSV rows plus step-count and program-size figures."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from predspec.corpus import CSV_HEADER, MODES  # noqa: E402

_STYLE = {"original": ("tab:gray", "o", "--"), "specialized": ("tab:blue", "s", "-"),
          "reynolds": ("tab:red", "^", "-")}


def csv_text(metrics, with_time=False) -> str:
    return "\n".join([CSV_HEADER] + [m.row(with_time) for m in metrics]) + "\n"


def write_csv(metrics, path, with_time=False) -> Path:
    path = Path(path)
    path.write_text(csv_text(metrics, with_time), encoding="utf-8")
    return path


def _by_family(metrics):
    out = defaultdict(lambda: defaultdict(list))
    for m in metrics:
        out[m.family][m.mode].append(m)
    return out


def plot_steps(metrics, path) -> Path:
    """Interpreter steps against n, one panel per family, one line per mode."""
    fams = _by_family(metrics)
    fig, axes = plt.subplots(1, len(fams), figsize=(4.2 * len(fams), 3.4), squeeze=False)
    for ax, (fam, modes) in zip(axes[0], fams.items()):
        for mode in MODES:
            rows = sorted(modes.get(mode, ()), key=lambda m: m.n)
            if not rows:
                continue
            color, marker, ls = _STYLE[mode]
            ax.plot([m.n for m in rows], [m.steps for m in rows], color=color, marker=marker,
                    ls=ls, ms=4, lw=1.2, label=mode, zorder=3 if mode == "original" else 2)
        ax.set_title(fam)
        ax.set_xlabel("n")
        ax.set_ylabel("steps")
        ax.grid(alpha=0.3)
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_sizes(metrics, path) -> Path:
    """Non-fact clause counts per family and mode (taken at the smallest n)."""
    fams = _by_family(metrics)
    names = list(fams)
    present = [m for m in MODES if any(m in fams[f] for f in names)]
    width = 0.8 / max(1, len(present))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.3 * len(names) + 1.5), 3.4))
    for j, mode in enumerate(present):
        xs, ys = [], []
        for i, fam in enumerate(names):
            rows = sorted(fams[fam].get(mode, ()), key=lambda m: m.n)
            if rows:
                xs.append(i + (j - (len(present) - 1) / 2) * width)
                ys.append(rows[0].clauses)
        ax.bar(xs, ys, width=width, color=_STYLE[mode][0], label=mode)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("rules")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def write_report(metrics, csv_path, with_time=False, plots=True):
    """CSV at ``csv_path``; figures ``<stem>_steps.png`` and ``<stem>_sizes.png`` beside it."""
    csv_path = Path(csv_path)
    written = [write_csv(metrics, csv_path, with_time)]
    if plots and metrics:
        written.append(plot_steps(metrics, csv_path.with_name(csv_path.stem + "_steps.png")))
        written.append(plot_sizes(metrics, csv_path.with_name(csv_path.stem + "_sizes.png")))
    return written
