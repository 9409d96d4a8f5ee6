"""Bundled presets for the demo workflows.

* ``paper-fig2`` -- the 13-bin inter-packet delay quantization (10 ms bins
  covering 0.01 s through 0.13 s) used by the beacon-delay examples.
* ``beacon13``   -- measured first-order delay statistics of a multi-hop
  beacon over those 13 bins.
* ``nonmarkov2`` -- a two-state hidden Markov generator whose emission
  process is not Markovian of any order; handy as a source of consistent
  but non-trivial test traffic.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .channel import DelayBinning, HmmSpec
from .stats import Alphabet, KGramDistribution

_BEACON_SYMBOLS = tuple(str(i) for i in range(1, 14))

_BEACON_FREQS = (
    "0.0029", "0.0144", "0.0734", "0.1453", "0.3094", "0.1295", "0.1151",
    "0.1079", "0.1007", "0", "0", "0", "0.0014",
)


def beacon13_distribution() -> KGramDistribution:
    alphabet = Alphabet(_BEACON_SYMBOLS)
    probs = {
        (sym,): Fraction(freq) for sym, freq in zip(_BEACON_SYMBOLS, _BEACON_FREQS)
    }
    return KGramDistribution.from_probs(alphabet, 1, probs, source="designed")


def fig2_binning() -> DelayBinning:
    edges = tuple(0.005 + 0.01 * i for i in range(14))
    reps = tuple(0.01 * (i + 1) for i in range(13))
    return DelayBinning(edges=edges, symbols=_BEACON_SYMBOLS, representatives=reps)


def nonmarkov2_hmm() -> HmmSpec:
    alphabet = Alphabet(("0", "1"))
    return HmmSpec(
        num_states=2,
        alphabet=alphabet,
        matrices={
            "0": np.array([[0.5, 0.5], [0.0, 0.5]]),
            "1": np.array([[0.0, 0.0], [0.5, 0.0]]),
        },
    )


BINNINGS = {"paper-fig2": fig2_binning}
DISTRIBUTIONS = {"beacon13": beacon13_distribution}
HMMS = {"nonmarkov2": nonmarkov2_hmm}


def get_binning(name: str) -> DelayBinning:
    try:
        return BINNINGS[name]()
    except KeyError:
        raise ValueError(
            f"unknown binning preset {name!r}; available: {sorted(BINNINGS)}"
        ) from None


def get_distribution(name: str) -> KGramDistribution:
    try:
        return DISTRIBUTIONS[name]()
    except KeyError:
        raise ValueError(
            f"unknown distribution preset {name!r}; available: {sorted(DISTRIBUTIONS)}"
        ) from None


def get_hmm(name: str) -> HmmSpec:
    try:
        return HMMS[name]()
    except KeyError:
        raise ValueError(
            f"unknown HMM preset {name!r}; available: {sorted(HMMS)}"
        ) from None
