"""Histogram reports: delimited data tables plus rendered figures.

Every report is written as a plot-ready two-column CSV (bin, frequency); a
matplotlib rendering of the same data is saved alongside unless disabled.
"""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path
from typing import Sequence

from .stats import KGramDistribution


def symbol_frequencies(
    symbols: Sequence[str], order_hint: Sequence[str] | None = None
) -> list[tuple[str, float]]:
    """Relative frequency per symbol, in alphabet order when given."""
    counts = Counter(symbols)
    total = len(symbols)
    labels = list(order_hint) if order_hint else sorted(counts)
    return [(lab, counts.get(lab, 0) / total) for lab in labels]


def distribution_rows(dist: KGramDistribution) -> list[tuple[str, float]]:
    return [
        ("".join(g), float(dist.prob(g))) for g in dist.alphabet.grams(dist.order)
    ]


def write_table(path: str | Path, rows: Sequence[tuple[str, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "frequency"])
        for label, freq in rows:
            writer.writerow([label, f"{freq:.6f}"])


def render_histogram(
    path: str | Path,
    rows: Sequence[tuple[str, float]],
    title: str,
    reference: Sequence[tuple[str, float]] | None = None,
    reference_title: str = "reference",
) -> None:
    """Bar chart of the table; with a reference, a two-panel comparison."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = [(title, rows)] if reference is None else [
        (reference_title, list(reference)),
        (title, list(rows)),
    ]
    fig, axes = plt.subplots(
        1, len(panels), figsize=(5.0 * len(panels), 3.4), sharey=True, squeeze=False
    )
    for ax, (name, data) in zip(axes[0], panels):
        labels = [lab for lab, _ in data]
        freqs = [f for _, f in data]
        ax.bar(range(len(data)), freqs, color="#4878a8", edgecolor="black", linewidth=0.4)
        ax.set_xticks(range(len(data)))
        ax.set_xticklabels(labels, rotation=45 if max(map(len, labels)) > 4 else 0, fontsize=8)
        ax.set_title(name, fontsize=10)
        ax.set_xlabel("bin")
    axes[0][0].set_ylabel("frequency")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
