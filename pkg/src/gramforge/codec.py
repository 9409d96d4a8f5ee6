"""Statistics-preserving covert coding over chain models.

Because a chain with entropy rate H has roughly ``2**(n*H)`` typical walks of
length n from any state, a block of r bits can be carried by one of ``2**r``
pre-agreed distinct walks whenever ``n >= r/H``.  Each state of the model gets
its own book of ``2**r`` seeded random walks; a message is sent block by
block, each codeword drawn from the book of the state where the previous one
ended, so the concatenation is itself a legal walk and the channel's k-gram
statistics are preserved.

Books are never transmitted: both ends regenerate them from
(model, r, n, seed).  Walk sampling is inverse-CDF over canonically ordered
successors driven by PCG64 streams keyed as (seed, state index, attempt), so
regeneration is bit-identical on any platform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .chains import ChainModel, WalkSampler, entropy_rate
from .rand import make_rng
from .stats import Gram, join_gram, split_gram

#: per-state attempt budget is RETRY_FACTOR * 2**r draws
RETRY_FACTOR = 64


class ZeroEntropyError(ValueError):
    """The model is deterministic; it has no typical-set capacity."""


class CodebookError(RuntimeError):
    """Codebook construction could not produce enough distinct walks."""


class DecodeError(ValueError):
    """A received block does not belong to the expected codebook."""

    def __init__(self, message: str, block_index: int | None = None):
        super().__init__(message)
        self.block_index = block_index


class LengthMismatchError(DecodeError):
    """The received stream cannot be split into whole codewords."""


def bits_from_bytes(data: bytes) -> list[int]:
    """MSB-first bit expansion."""
    out = []
    for byte in data:
        for shift in range(7, -1, -1):
            out.append((byte >> shift) & 1)
    return out


def bytes_from_bits(bits: Sequence[int]) -> bytes:
    if len(bits) % 8:
        raise ValueError(f"bit count {len(bits)} is not a multiple of 8")
    out = bytearray()
    for i in range(0, len(bits), 8):
        byte = 0
        for b in bits[i : i + 8]:
            byte = (byte << 1) | (b & 1)
        out.append(byte)
    return bytes(out)


def frame_bits(data: bytes, r: int) -> list[int]:
    """Length-prefixed framing: 32-bit big-endian payload bit count, payload,
    zero padding up to a multiple of r."""
    payload = bits_from_bytes(data)
    if len(payload) >= 1 << 32:
        raise ValueError("message too long to frame")
    header = [(len(payload) >> shift) & 1 for shift in range(31, -1, -1)]
    bits = header + payload
    if len(bits) % r:
        bits.extend([0] * (r - len(bits) % r))
    return bits


def unframe_bits(bits: Sequence[int]) -> bytes:
    if len(bits) < 32:
        raise DecodeError("framed stream shorter than its header")
    count = 0
    for b in bits[:32]:
        count = (count << 1) | (b & 1)
    if count > len(bits) - 32:
        raise DecodeError(f"framed length {count} exceeds decoded payload")
    return bytes_from_bits(list(bits[32 : 32 + count]))


@dataclass(frozen=True)
class Codebook:
    """Per-state books of 2**r distinct length-n walks, plus end states.

    Codewords are stored as symbol-index byte strings (the alphabet is
    therefore limited to 256 symbols).  Fully determined by
    (model, r, n, seed).
    """

    model: ChainModel
    r: int
    n: int
    seed: int
    books: Mapping[Gram, tuple[bytes, ...]]
    end_states: Mapping[Gram, tuple[Gram, ...]]
    lookup: Mapping[Gram, Mapping[bytes, int]] = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.lookup is None:
            object.__setattr__(
                self,
                "lookup",
                {
                    s: {cw: i for i, cw in enumerate(book)}
                    for s, book in self.books.items()
                },
            )

    @property
    def block_count(self) -> int:
        return 1 << self.r

    @property
    def canonical_start(self) -> Gram:
        """Lexicographically smallest state of maximal stationary probability;
        the zero-overhead default both ends can derive independently."""
        best = None
        best_w = -1.0
        for s in self.model.states:
            if s not in self.books:
                continue
            w = float(self.model.stationary.prob(s))
            if w > best_w:
                best, best_w = s, w
        return best

    def manifest(self, model_ref: str) -> dict:
        return {
            "model_ref": model_ref,
            "r": self.r,
            "n": self.n,
            "seed": self.seed,
            "start_policy": "canonical",
        }


def _positive_part_irreducible(M: ChainModel) -> bool:
    """Mutual reachability over the states the stationary law actually visits."""
    positive = [s for s in M.states if M.stationary.prob(s) > 0]
    if not positive:
        return False
    keep = set(positive)
    forward = {s: [t for t in M.trans[s] if t in keep] for s in positive}
    backward: dict[Gram, list[Gram]] = {s: [] for s in positive}
    for s, targets in forward.items():
        for t in targets:
            backward[t].append(s)
    for adj in (forward, backward):
        seen = {positive[0]}
        stack = [positive[0]]
        while stack:
            for t in adj[stack.pop()]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        if len(seen) != len(positive):
            return False
    return True


def default_codeword_length(M: ChainModel, r: int) -> int:
    """Smallest n with r <= n * H(M)."""
    H = entropy_rate(M)
    if H <= 0:
        raise ZeroEntropyError(
            "entropy rate is 0: a deterministic chain cannot carry covert blocks"
        )
    return math.ceil(r / H)


def build_codebook(
    M: ChainModel, r: int, seed: int = 0, n_override: int | None = None
) -> Codebook:
    """Generate the per-state books of distinct seeded walks.

    Duplicate walks are redrawn with a fresh derived stream, up to
    ``RETRY_FACTOR * 2**r`` draws per state; exhausting the budget reports
    the largest block size the chain supports at this n.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    n = n_override if n_override is not None else default_codeword_length(M, r)
    if n < 1:
        raise ValueError("codeword length must be >= 1")
    if n_override is not None:
        H = entropy_rate(M)
        if H <= 0:
            raise ZeroEntropyError(
                "entropy rate is 0: a deterministic chain cannot carry covert blocks"
            )
    sampler = WalkSampler(M)
    if M.alphabet.size > 256:
        raise ValueError("codebooks support alphabets of at most 256 symbols")
    if not _positive_part_irreducible(M):
        warnings.warn(
            "model is reducible on its positive-probability states; codeword "
            "statistics may depend on the start state",
            stacklevel=2,
        )
    want = 1 << r
    cap = RETRY_FACTOR * want
    books: dict[Gram, tuple[bytes, ...]] = {}
    end_states: dict[Gram, tuple[Gram, ...]] = {}
    for si, state in enumerate(M.states):
        seen: dict[bytes, int] = {}
        ends: list[Gram] = []
        attempt = 0
        while len(seen) < want:
            if attempt >= cap:
                achievable = int(math.log2(len(seen))) if seen else 0
                raise CodebookError(
                    f"state {join_gram(state, M.alphabet)!r}: only {len(seen)} "
                    f"distinct length-{n} walks found in {cap} draws; "
                    f"largest achievable r here is about {achievable}"
                )
            rng = make_rng(seed, si, attempt)
            attempt += 1
            ids, end = sampler.walk(sampler.index[state], n, rng)
            word = bytes(ids)
            if word in seen:
                continue
            seen[word] = len(seen)
            ends.append(sampler.states[end])
        books[state] = tuple(seen)
        end_states[state] = tuple(ends)
    return Codebook(model=M, r=r, n=n, seed=seed, books=books, end_states=end_states)


def _resolve_start(cb: Codebook, start: Gram | str | None) -> Gram:
    if start is None or (isinstance(start, str) and start == "canonical"):
        return cb.canonical_start
    key = (
        split_gram(start, cb.model.alphabet, cb.model.order)
        if isinstance(start, str)
        else tuple(start)
    )
    if key not in cb.books:
        raise ValueError(f"start state {start!r} has no codebook")
    return key


def encode_bits(
    cb: Codebook, bits: Sequence[int], start: Gram | str | None = None
) -> list[str]:
    """Map r-bit blocks to codewords, chaining each block's start state to
    the previous block's recorded end state."""
    if not bits:
        raise ValueError("empty message")
    if len(bits) % cb.r:
        raise ValueError(f"bit count {len(bits)} is not a multiple of r={cb.r}")
    state = _resolve_start(cb, start)
    symbols = cb.model.alphabet.symbols
    out: list[str] = []
    for off in range(0, len(bits), cb.r):
        index = 0
        for b in bits[off : off + cb.r]:
            index = (index << 1) | (b & 1)
        word = cb.books[state][index]
        out.extend(symbols[i] for i in word)
        state = cb.end_states[state][index]
    return out


def decode_bits(
    cb: Codebook, symbols: Sequence[str], start: Gram | str | None = None
) -> list[int]:
    """Invert :func:`encode_bits`; unknown blocks raise :class:`DecodeError`
    carrying the offending block index."""
    if len(symbols) % cb.n:
        raise LengthMismatchError(
            f"stream length {len(symbols)} is not a multiple of n={cb.n}"
        )
    index_of = {s: i for i, s in enumerate(cb.model.alphabet.symbols)}
    state = _resolve_start(cb, start)
    bits: list[int] = []
    for block, off in enumerate(range(0, len(symbols), cb.n)):
        chunk = symbols[off : off + cb.n]
        try:
            word = bytes(index_of[s] for s in chunk)
        except KeyError as exc:
            raise DecodeError(
                f"block {block}: unknown symbol {exc.args[0]!r}", block
            ) from None
        idx = cb.lookup[state].get(word)
        if idx is None:
            raise DecodeError(
                f"block {block}: sequence not in the codebook of state "
                f"{join_gram(state, cb.model.alphabet)!r}",
                block,
            )
        bits.extend((idx >> shift) & 1 for shift in range(cb.r - 1, -1, -1))
        state = cb.end_states[state][idx]
    return bits


def encode_message(
    cb: Codebook, data: bytes, start: Gram | str | None = None
) -> list[str]:
    """Frame a byte message (length prefix + padding) and encode it."""
    return encode_bits(cb, frame_bits(data, cb.r), start)


def decode_message(
    cb: Codebook, symbols: Sequence[str], start: Gram | str | None = None
) -> bytes:
    return unframe_bits(decode_bits(cb, symbols, start))


def build_from_manifest(manifest: Mapping, model: ChainModel) -> Codebook:
    """Regenerate a codebook from its manifest and the referenced model."""
    return build_codebook(
        model,
        r=int(manifest["r"]),
        seed=int(manifest["seed"]),
        n_override=int(manifest["n"]),
    )
