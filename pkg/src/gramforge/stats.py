"""k-gram statistics over finite symbol alphabets.

A k-gram is a length-k window of consecutive symbols; the k-order statistics
of a sequence are the relative frequencies of all k-grams under a width-k
slide advancing one symbol at a time.  Two counting modes are supported:

* ``linear``   -- the n-k+1 windows of the sequence itself;
* ``circular`` -- the n windows of the sequence extended periodically by its
  first k-1 symbols, which forces the prefix/suffix marginal identity
  ``sum_a R(ay) = sum_b R(yb) = R(y)`` to hold exactly for every ``y``.

Counts are kept as exact rationals (integer count over total windows) so the
marginal identities survive marginalization and consistency checking without
floating-point drift.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

Gram = tuple[str, ...]
Prob = Union[Fraction, float]

#: absolute tolerance for marginal-identity checks on external distributions
CONSISTENCY_TOL = 1e-9

#: total-mass slack accepted when loading externally supplied (often rounded,
#: e.g. 3-decimal) tables; counted estimates always sum to 1 exactly
EXTERNAL_MASS_TOL = 1e-2


class ConsistencyError(ValueError):
    """A distribution violates the prefix/suffix marginal identities."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol labels.

    The label order is fixed and defines the canonical (lexicographic by
    symbol index) enumeration of k-grams used everywhere else.
    """

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet labels must be distinct")
        for s in self.symbols:
            if not s or "|" in s:
                raise ValueError(f"invalid symbol label {s!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]  # type: ignore[attr-defined]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index  # type: ignore[attr-defined]

    def grams(self, k: int) -> Iterator[Gram]:
        """All k-grams in canonical order (lexicographic by symbol index)."""
        return itertools.product(self.symbols, repeat=k)

    def is_single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)


def join_gram(gram: Gram, alphabet: Alphabet) -> str:
    """Serialize a gram: plain concatenation for one-char labels, else '|'-joined."""
    if alphabet.is_single_char():
        return "".join(gram)
    return "|".join(gram)


def split_gram(key: str, alphabet: Alphabet, order: int) -> Gram:
    gram: Gram = tuple(key.split("|")) if "|" in key else tuple(key)
    if len(gram) != order:
        # multi-char labels without separators only occur for order-1 keys
        if order == 1 and key in alphabet:
            gram = (key,)
        else:
            raise ValueError(f"cannot parse gram key {key!r} at order {order}")
    for s in gram:
        if s not in alphabet:
            raise ValueError(f"gram key {key!r} uses unknown symbol {s!r}")
    return gram


@dataclass(frozen=True)
class KGramDistribution:
    """Relative frequencies R(x) over the k-grams of an alphabet.

    ``probs`` is sparse: absent grams have probability zero, while explicit
    zero entries are allowed (designed tables list them).  Values are exact
    ``Fraction``s when the distribution was counted or parsed from decimal
    text, plain floats otherwise.
    """

    alphabet: Alphabet
    order: int
    probs: Mapping[Gram, Prob]
    source: str = "designed"  # linear | circular | designed

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.source not in ("linear", "circular", "designed"):
            raise ValueError(f"unknown source {self.source!r}")
        for gram, p in self.probs.items():
            if len(gram) != self.order:
                raise ValueError(f"gram {gram!r} does not have length {self.order}")
            if p < 0:
                raise ValueError(f"negative probability for {gram!r}")
            for s in gram:
                if s not in self.alphabet:
                    raise ValueError(f"gram {gram!r} uses unknown symbol {s!r}")

    def prob(self, gram: Gram) -> Prob:
        return self.probs.get(tuple(gram), Fraction(0))

    def total(self) -> Prob:
        return sum(self.probs.values(), Fraction(0))

    def support(self) -> list[Gram]:
        """Grams with positive probability, in canonical order."""
        return sorted(
            (g for g, p in self.probs.items() if p > 0),
            key=lambda g: tuple(self.alphabet.index(s) for s in g),
        )

    def as_floats(self) -> dict[Gram, float]:
        return {g: float(p) for g, p in self.probs.items()}

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "probs": {
                join_gram(g, self.alphabet): float(p) for g, p in self.probs.items()
            },
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "KGramDistribution":
        alphabet = Alphabet(tuple(obj["alphabet"]))
        order = int(obj["order"])
        probs = {
            split_gram(key, alphabet, order): _as_prob(p)
            for key, p in obj["probs"].items()
        }
        return cls.from_probs(
            alphabet, order, probs, source=obj.get("source", "designed")
        )

    @classmethod
    def from_counts(
        cls,
        alphabet: Alphabet,
        order: int,
        counts: Mapping[Gram, int],
        total: int,
        source: str,
    ) -> "KGramDistribution":
        probs = {g: Fraction(c, total) for g, c in counts.items() if c}
        return cls(alphabet, order, probs, source)

    @classmethod
    def from_probs(
        cls,
        alphabet: Alphabet,
        order: int,
        probs: Mapping[Gram, Prob],
        source: str = "designed",
        mass_tol: float = EXTERNAL_MASS_TOL,
    ) -> "KGramDistribution":
        """Build from explicit probabilities, checking total mass loosely.

        Published tables are often rounded to a few decimals and need not sum
        to 1 exactly (``mass_tol`` bounds the accepted slack).
        """
        dist = cls(alphabet, order, dict(probs), source)
        if abs(float(dist.total()) - 1.0) > mass_tol:
            raise ValueError(
                f"probabilities sum to {float(dist.total())}, not 1 (tol {mass_tol})"
            )
        return dist


def _as_prob(p) -> Prob:
    if isinstance(p, (Fraction, int)):
        return Fraction(p)
    return p


def estimate(
    seq: Sequence[str],
    k: int,
    mode: str = "circular",
    alphabet: Alphabet | None = None,
) -> KGramDistribution:
    """Count k-gram frequencies of a symbol sequence.

    Parameters
    ----------
    seq : sequence of symbol labels
    k : window width (>= 1)
    mode : 'linear' counts the ``len(seq)-k+1`` windows of the sequence;
        'circular' appends the first ``k-1`` symbols and counts ``len(seq)``
        windows of the periodic extension.
    alphabet : explicit alphabet; when omitted it is inferred as the sorted
        set of observed labels (zero-probability grams are then not
        representable beyond the observed symbols).

    The result is exact: counts over total windows, stored as rationals.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode not in ("linear", "circular"):
        raise ValueError(f"unknown mode {mode!r}")
    seq = list(seq)
    if len(seq) < k:
        raise ValueError(f"sequence of length {len(seq)} is shorter than k={k}")
    if alphabet is None:
        alphabet = Alphabet(tuple(sorted(set(seq))))
    else:
        known = set(alphabet.symbols)
        for s in seq:
            if s not in known:
                raise ValueError(f"symbol {s!r} not in alphabet")

    if mode == "circular":
        ext = seq + seq[: k - 1] if k > 1 else seq
        total = len(seq)
    else:
        ext = seq
        total = len(seq) - k + 1
    counts = Counter(zip(*(ext[i:] for i in range(k)))) if k > 1 else Counter(
        (s,) for s in ext
    )
    return KGramDistribution.from_counts(alphabet, k, counts, total, mode)


def marginalize(R: KGramDistribution, j: int, side: str = "suffix") -> KGramDistribution:
    """Sum an order-k distribution down to order j.

    ``side`` names the part of each gram that is *kept*: 'prefix' keeps the
    first j symbols (summing over trailing positions), 'suffix' keeps the
    last j.  For circular estimates the two agree exactly.  ``j == k`` is
    allowed and returns R unchanged.
    """
    if side not in ("prefix", "suffix"):
        raise ValueError(f"unknown side {side!r}")
    if j == R.order:
        return R
    if not 1 <= j < R.order:
        raise ValueError(f"j={j} out of range for order {R.order}")
    out: dict[Gram, Prob] = {}
    for gram, p in R.probs.items():
        key = gram[:j] if side == "prefix" else gram[-j:]
        out[key] = out.get(key, Fraction(0)) + p
    return KGramDistribution(R.alphabet, j, out, R.source)


def l1_distance(R: KGramDistribution, S: KGramDistribution) -> float:
    """Sum of absolute probability differences over the union of supports."""
    if R.alphabet != S.alphabet:
        raise ValueError("distributions use different alphabets")
    if R.order != S.order:
        raise ValueError(f"order mismatch: {R.order} vs {S.order}")
    keys = set(R.probs) | set(S.probs)
    return float(sum(abs(R.prob(g) - S.prob(g)) for g in keys))


@dataclass(frozen=True)
class ConsistencyViolation:
    suffix: Gram
    incoming: float  # sum_a R(ay)
    outgoing: float  # sum_b R(yb)

    @property
    def magnitude(self) -> float:
        return abs(self.incoming - self.outgoing)


def check_consistency(
    R: KGramDistribution, tol: float = CONSISTENCY_TOL
) -> list[ConsistencyViolation]:
    """List every (k-1)-gram y where ``sum_a R(ay) != sum_b R(yb)``.

    Empty result means the distribution admits the chain constructions.
    Circular estimates satisfy the identities exactly by construction.
    """
    if R.order < 2:
        raise ValueError("consistency check requires order >= 2")
    incoming: dict[Gram, Prob] = {}
    outgoing: dict[Gram, Prob] = {}
    for gram, p in R.probs.items():
        y_in, y_out = gram[1:], gram[:-1]
        incoming[y_in] = incoming.get(y_in, Fraction(0)) + p
        outgoing[y_out] = outgoing.get(y_out, Fraction(0)) + p
    report = []
    for y in sorted(
        set(incoming) | set(outgoing),
        key=lambda g: tuple(R.alphabet.index(s) for s in g),
    ):
        a = incoming.get(y, Fraction(0))
        b = outgoing.get(y, Fraction(0))
        if abs(float(a - b)) > tol:
            report.append(ConsistencyViolation(y, float(a), float(b)))
    return report


def require_consistent(R: KGramDistribution, tol: float = CONSISTENCY_TOL) -> None:
    if R.order < 2:
        return
    report = check_consistency(R, tol)
    if report:
        worst = max(report, key=lambda v: v.magnitude)
        raise ConsistencyError(
            f"{len(report)} marginal identities violated "
            f"(worst at y={''.join(worst.suffix)!r}: "
            f"in={worst.incoming:.12g} out={worst.outgoing:.12g})"
        )
