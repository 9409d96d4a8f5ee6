"""File formats: symbol streams, delay CSVs, distribution/model/manifest JSON.

Symbol streams are newline-delimited UTF-8 labels; a compact one-character-
per-symbol mode is available for single-character alphabets.  JSON numbers
are parsed as exact decimal fractions so that tables written with a few
decimals keep their arithmetic identities.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .chains import ChainModel
from .channel import HmmSpec
from .stats import KGramDistribution


def read_stream(path: str | Path, compact: bool = False) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if compact:
        return [c for c in text if not c.isspace()]
    return [line for line in text.splitlines() if line.strip()]


def write_stream(path: str | Path, symbols: Sequence[str], compact: bool = False) -> None:
    if compact:
        if any(len(s) != 1 for s in symbols):
            raise ValueError("compact streams need single-character symbols")
        Path(path).write_text("".join(symbols) + "\n", encoding="utf-8")
    else:
        Path(path).write_text(
            "".join(f"{s}\n" for s in symbols), encoding="utf-8"
        )


def _load_json_exact(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh, parse_float=Fraction)


def _dump_json(path: str | Path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_distribution(path: str | Path) -> KGramDistribution:
    return KGramDistribution.from_json(_load_json_exact(path))


def write_distribution(path: str | Path, dist: KGramDistribution) -> None:
    _dump_json(path, dist.to_json())


def read_model(path: str | Path) -> ChainModel:
    return ChainModel.from_json(_load_json_exact(path))


def write_model(path: str | Path, model: ChainModel) -> None:
    _dump_json(path, model.to_json())


def read_hmm(path: str | Path) -> HmmSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return HmmSpec.from_json(json.load(fh))


def write_hmm(path: str | Path, spec: HmmSpec) -> None:
    _dump_json(path, spec.to_json())


def read_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_manifest(path: str | Path, manifest: dict) -> None:
    _dump_json(path, manifest)


def read_delays(path: str | Path, timestamps: bool = False) -> list[float]:
    """One delay in seconds per line; with ``timestamps`` the column is read
    as absolute times and first differences are returned."""
    values: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            values.append(float(row[0]))
    if timestamps:
        return [b - a for a, b in zip(values, values[1:])]
    return values


def write_delays(path: str | Path, delays: Sequence[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for d in delays:
            writer.writerow([f"{d:.9g}"])
