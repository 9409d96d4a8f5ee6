"""Data sources and sinks for symbol streams.

Covers the two ends of the pipeline that are not chains themselves: a hidden
Markov simulator (joint state-transition/symbol-emission matrices, used to
generate non-Markovian test traffic) and delay-bin quantization that maps
between inter-packet delays in seconds and the finite symbol alphabet.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .chains import ChainModel
from .rand import make_rng
from .stats import Alphabet

HMM_ROW_TOL = 1e-12


@dataclass(frozen=True)
class HmmSpec:
    """Hidden Markov model given as one matrix per symbol.

    ``matrices[sym][i][j]`` is the probability of jumping from hidden state i
    to hidden state j while emitting ``sym``; summed over symbols the
    matrices must be row-stochastic.
    """

    num_states: int
    alphabet: Alphabet
    matrices: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        if set(self.matrices) != set(self.alphabet.symbols):
            raise ValueError("need exactly one matrix per alphabet symbol")
        total = np.zeros((self.num_states, self.num_states))
        for sym, mat in self.matrices.items():
            arr = np.asarray(mat, dtype=float)
            if arr.shape != (self.num_states, self.num_states):
                raise ValueError(f"matrix for {sym!r} has shape {arr.shape}")
            if (arr < 0).any():
                raise ValueError(f"matrix for {sym!r} has negative entries")
            total += arr
        if np.abs(total.sum(axis=1) - 1.0).max() > HMM_ROW_TOL:
            raise ValueError("summed matrices are not row-stochastic")

    def state_transition_matrix(self) -> np.ndarray:
        """Hidden-state chain ignoring emissions."""
        total = np.zeros((self.num_states, self.num_states))
        for mat in self.matrices.values():
            total += np.asarray(mat, dtype=float)
        return total

    def to_json(self) -> dict:
        return {
            "num_states": self.num_states,
            "alphabet": list(self.alphabet.symbols),
            "matrices": {
                sym: np.asarray(mat, dtype=float).tolist()
                for sym, mat in self.matrices.items()
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "HmmSpec":
        alphabet = Alphabet(tuple(obj["alphabet"]))
        return cls(
            num_states=int(obj["num_states"]),
            alphabet=alphabet,
            matrices={
                sym: np.asarray(mat, dtype=float) for sym, mat in obj["matrices"].items()
            },
        )


def hmm_simulate(
    h: HmmSpec, n: int, seed: int = 0, start_state: int = 0
) -> list[str]:
    """Emit n symbols by jointly sampling (symbol, next state) pairs.

    Choices are inverse-CDF over the canonical flattening (symbols in
    alphabet order, destination states ascending), one uniform per step.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= start_state < h.num_states:
        raise ValueError(f"start_state {start_state} out of range")
    choices: list[tuple[tuple[float, ...], tuple[int, ...], tuple[str, ...]]] = []
    for i in range(h.num_states):
        cum: list[float] = []
        nxt: list[int] = []
        sym: list[str] = []
        acc = 0.0
        for s in h.alphabet.symbols:
            row = np.asarray(h.matrices[s], dtype=float)[i]
            for j in range(h.num_states):
                p = float(row[j])
                if p > 0:
                    acc += p
                    cum.append(acc)
                    nxt.append(j)
                    sym.append(s)
        if not cum:
            raise ValueError(f"hidden state {i} has no outgoing probability")
        cum[-1] = 1.0
        choices.append((tuple(cum), tuple(nxt), tuple(sym)))

    rng = make_rng(seed)
    out: list[str] = []
    append = out.append
    state = start_state
    for u in rng.random(n).tolist():
        cum, nxt, sym = choices[state]
        idx = bisect_right(cum, u)
        append(sym[idx])
        state = nxt[idx]
    return out


def chain_to_hmm(M: ChainModel) -> HmmSpec:
    """Re-express a k-gram chain as an equivalent hidden Markov model
    (hidden states = grams, each transition emits its new last symbol)."""
    states = list(M.states)
    index = {s: i for i, s in enumerate(states)}
    mats = {
        sym: np.zeros((len(states), len(states))) for sym in M.alphabet.symbols
    }
    for s, row in M.trans.items():
        for t, p in row.items():
            mats[t[-1]][index[s], index[t]] = p
    return HmmSpec(len(states), M.alphabet, mats)


# ---------------------------------------------------------------------------
# delay quantization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DelayBinning:
    """Bijection between delay bins (seconds) and alphabet symbols.

    ``edges`` are the strictly increasing bin boundaries (one more edge than
    bins); bin i covers [edges[i], edges[i+1]) and emits ``representatives[i]``
    (bin centers unless overridden) under the symbol ``symbols[i]``.
    """

    edges: tuple[float, ...]
    symbols: tuple[str, ...]
    representatives: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.edges) < 2:
            raise ValueError("need at least two edges")
        if any(a >= b for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("edges must be strictly increasing")
        nbins = len(self.edges) - 1
        if len(self.symbols) != nbins or len(set(self.symbols)) != nbins:
            raise ValueError("need one distinct symbol per bin")
        if self.representatives is None:
            centers = tuple(
                (a + b) / 2.0 for a, b in zip(self.edges, self.edges[1:])
            )
            object.__setattr__(self, "representatives", centers)
        elif len(self.representatives) != nbins:
            raise ValueError("need one representative per bin")
        else:
            for i, rep in enumerate(self.representatives):
                if not self.edges[i] <= rep < self.edges[i + 1]:
                    raise ValueError(
                        f"representative {rep} falls outside bin {i}"
                    )

    @property
    def num_bins(self) -> int:
        return len(self.edges) - 1

    def alphabet(self) -> Alphabet:
        return Alphabet(self.symbols)

    def bin_of(self, delay: float) -> int | None:
        idx = bisect_right(self.edges, delay) - 1
        if 0 <= idx < self.num_bins:
            return idx
        return None


def delays_to_symbols(
    delays: Sequence[float], b: DelayBinning, policy: str = "strict"
) -> list[str]:
    """Quantize delays into bin symbols.

    ``strict`` rejects delays outside the binned range; ``clamp`` maps them
    to the nearest edge bin.
    """
    if policy not in ("strict", "clamp"):
        raise ValueError(f"unknown policy {policy!r}")
    out = []
    for pos, d in enumerate(delays):
        if d < 0:
            raise ValueError(f"negative delay {d} at position {pos}")
        idx = b.bin_of(d)
        if idx is None:
            if policy == "strict":
                raise ValueError(
                    f"delay {d} at position {pos} outside "
                    f"[{b.edges[0]}, {b.edges[-1]})"
                )
            idx = 0 if d < b.edges[0] else b.num_bins - 1
        out.append(b.symbols[idx])
    return out


def symbols_to_delays(
    symbols: Sequence[str],
    b: DelayBinning,
    jitter_seed: int | None = None,
) -> list[float]:
    """Emit one delay per symbol: the bin representative, or a seeded uniform
    draw inside the bin when ``jitter_seed`` is given.  Quantizing the output
    recovers the input exactly either way."""
    index = {s: i for i, s in enumerate(b.symbols)}
    bins = []
    for pos, s in enumerate(symbols):
        if s not in index:
            raise ValueError(f"symbol {s!r} at position {pos} not mapped to a bin")
        bins.append(index[s])
    if jitter_seed is None:
        reps = b.representatives
        return [reps[i] for i in bins]
    rng = make_rng(jitter_seed)
    us = rng.random(len(bins)).tolist()
    edges = b.edges
    return [
        edges[i] + u * (edges[i + 1] - edges[i]) for i, u in zip(bins, us)
    ]
