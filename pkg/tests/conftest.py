"""Shared fixtures: golden tables for the binary demo process and helpers
for generating random consistent inputs."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from gramforge import Alphabet, KGramDistribution
from gramforge.stats import estimate

# The worked binary example used throughout: a 1000-step sample of a two-state
# hidden Markov source, counted circularly at k=2 and printed at 3 decimals.
GOLDEN_R2 = {
    "00": "0.513",
    "01": "0.244",
    "10": "0.244",
    "11": "0.000",
}

# 3-gram statistics of the same sample
GOLDEN_R3_DATA = {
    "000": 0.338, "001": 0.174, "010": 0.244, "011": 0.0,
    "100": 0.174, "101": 0.070, "110": 0.0, "111": 0.0,
}

# transition tables synthesized from GOLDEN_R2 (3-decimal reference values)
GOLDEN_STANDARD = {
    ("00", "00"): 0.678, ("00", "01"): 0.322,
    ("10", "00"): 0.678, ("10", "01"): 0.322,
    ("01", "10"): 1.000, ("11", "10"): 1.000,
}
GOLDEN_VERTEX_RAW = {
    ("00", "00"): 1.000, ("10", "01"): 1.000,
    ("01", "10"): 1.000, ("11", "11"): 1.000,
}
GOLDEN_U05 = {
    ("00", "00"): 0.839, ("00", "01"): 0.161,
    ("10", "00"): 0.339, ("10", "01"): 0.661,
    ("01", "10"): 1.000, ("11", "10"): 0.500, ("11", "11"): 0.500,
}
GOLDEN_U02 = {
    ("00", "00"): 0.936, ("00", "01"): 0.064,
    ("10", "00"): 0.136, ("10", "01"): 0.864,
    ("01", "10"): 1.000, ("11", "10"): 0.200, ("11", "11"): 0.800,
}

# implied 3-gram tables of the synthesized chains (3-decimal references)
GOLDEN_R3_STANDARD = {
    "000": 0.348, "001": 0.165, "010": 0.244, "011": 0.0,
    "100": 0.165, "101": 0.079, "110": 0.0, "111": 0.0,
}
GOLDEN_R3_VERTEX = {
    "000": 0.513, "001": 0.0, "010": 0.244, "011": 0.0,
    "100": 0.0, "101": 0.244, "110": 0.0, "111": 0.0,
}
GOLDEN_R3_U05 = {
    "000": 0.430, "001": 0.083, "010": 0.244, "011": 0.0,
    "100": 0.083, "101": 0.161, "110": 0.0, "111": 0.0,
}
GOLDEN_R3_U02 = {
    "000": 0.480, "001": 0.033, "010": 0.244, "011": 0.0,
    "100": 0.033, "101": 0.211, "110": 0.0, "111": 0.0,
}

# reference entropy rates of the four chains, bits per symbol
GOLDEN_ENTROPY = {"standard": 0.6863, "vertex": 0.0, "u05": 0.5520, "u02": 0.3165}

GREEK_SEQ = list("αααβαβγγ")


@pytest.fixture(scope="session")
def alpha01() -> Alphabet:
    return Alphabet(("0", "1"))


@pytest.fixture(scope="session")
def golden_r2(alpha01) -> KGramDistribution:
    probs = {tuple(k): Fraction(v) for k, v in GOLDEN_R2.items()}
    return KGramDistribution.from_probs(alpha01, 2, probs, source="designed")


def gram(s: str) -> tuple[str, ...]:
    return tuple(s)


def table_of(model) -> dict[tuple[str, str], float]:
    """Flatten a model's rows into {(state, target): p} keyed by joined labels."""
    out = {}
    for s in model.states:
        for t, p in model.row(s).items():
            out[("".join(s), "".join(t))] = p
    return out


def assert_table_close(model, reference: dict, places: int = 3) -> None:
    got = table_of(model)
    for key, val in reference.items():
        assert key in got or val == 0.0, f"missing transition {key}"
        assert round(got.get(key, 0.0), places) == round(val, places), (
            f"{key}: got {got.get(key, 0.0):.6f}, want {val:.3f}"
        )
    for key, val in got.items():
        if key not in reference:
            assert round(val, places) == 0.0, f"unexpected transition {key}={val}"


def random_consistent_input(seed: int, sigma: int, k: int, length: int | None = None):
    """A consistent distribution made the honest way: simulate a random
    sparse chain over k-grams and estimate its output circularly."""
    rng = np.random.default_rng(seed)
    labels = tuple("abcdefgh"[:sigma])
    if length is None:
        length = max(400, 40 * sigma**k)
    rows: dict[tuple[str, ...], tuple[np.ndarray, tuple[str, ...]]] = {}

    def row_for(state):
        if state not in rows:
            mask = rng.random(sigma) > 0.3
            if not mask.any():
                mask[rng.integers(sigma)] = True
            w = rng.random(sigma) * mask
            rows[state] = (np.cumsum(w / w.sum()), labels)
        return rows[state]

    state = tuple(rng.choice(labels, size=k))
    seq = list(state)
    for _ in range(length - k):
        cum, labs = row_for(state)
        nxt = labs[int(np.searchsorted(cum, rng.random(), side="right"))]
        seq.append(nxt)
        state = state[1:] + (nxt,) if k > 1 else (nxt,)
    return estimate(seq, k, mode="circular", alphabet=Alphabet(labels))
