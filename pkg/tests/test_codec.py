import math

import pytest

from gramforge import (
    CodebookError,
    DecodeError,
    LengthMismatchError,
    ZeroEntropyError,
    build_codebook,
    build_from_manifest,
    convex_combine,
    decode_bits,
    decode_message,
    default_codeword_length,
    encode_bits,
    encode_message,
    entropy_rate,
    estimate,
    identity_chain,
    l1_distance,
    standard_solution,
    vertex_solution,
)
from gramforge.chains import WalkSampler
from gramforge.codec import bits_from_bytes, bytes_from_bits, frame_bits, unframe_bits
from gramforge.presets import beacon13_distribution
from gramforge.rand import make_rng


@pytest.fixture(scope="module")
def beacon_chain():
    R = beacon13_distribution()
    return convex_combine(standard_solution(R), identity_chain(R), 0.75)


@pytest.fixture(scope="module")
def small_beacon_book(beacon_chain):
    return build_codebook(beacon_chain, r=8, seed=0)


@pytest.fixture(scope="module")
def pair_book(golden_r2):
    return build_codebook(standard_solution(golden_r2), r=4, seed=3, n_override=30)


class TestBits:
    def test_byte_roundtrip(self):
        data = bytes(range(256))
        assert bytes_from_bits(bits_from_bytes(data)) == data

    def test_bit_order_msb_first(self):
        assert bits_from_bytes(b"\x80") == [1, 0, 0, 0, 0, 0, 0, 0]
        assert bits_from_bytes(b"\x01")[-1] == 1

    def test_framing_roundtrip(self):
        for payload in (b"", b"x", b"hello world", bytes(range(64))):
            for r in (1, 3, 8, 13):
                bits = frame_bits(payload, r)
                assert len(bits) % r == 0
                assert unframe_bits(bits) == payload

    def test_unframe_rejects_bad_length(self):
        with pytest.raises(DecodeError):
            unframe_bits([0] * 16)
        bits = frame_bits(b"ab", 8)
        with pytest.raises(DecodeError):
            unframe_bits(bits[:-16] if len(bits) > 48 else bits[:40])


class TestBuild:
    def test_length_from_entropy(self, beacon_chain, golden_r2):
        H = entropy_rate(beacon_chain)
        assert default_codeword_length(beacon_chain, 8) == math.ceil(8 / H)
        # the binary standard solution: ceil(8 / 0.6865...) = 12
        assert default_codeword_length(standard_solution(golden_r2), 8) == 12

    def test_books_complete_and_distinct(self, small_beacon_book):
        cb = small_beacon_book
        assert cb.n == default_codeword_length(cb.model, 8)
        for state, book in cb.books.items():
            assert len(book) == 256
            assert len(set(book)) == 256
            assert all(len(w) == cb.n for w in book)
            assert len(cb.end_states[state]) == 256

    def test_minimal_codebook(self, golden_r2):
        cb = build_codebook(standard_solution(golden_r2), r=1, seed=0)
        for book in cb.books.values():
            assert len(book) == 2
            assert book[0] != book[1]

    def test_codewords_are_legal_walks(self, pair_book):
        cb = pair_book
        for state, book in cb.books.items():
            for i, word in enumerate(book[:16]):
                cur = state
                for sym_id in word:
                    sym = cb.model.alphabet.symbols[sym_id]
                    target = cur[1:] + (sym,)
                    assert cb.model.transition(cur, target) > 0
                    cur = target
                assert cb.end_states[state][i] == cur

    def test_zero_entropy_rejected(self, golden_r2):
        frozen = vertex_solution(golden_r2, solver_raw=True)
        assert entropy_rate(frozen) == 0.0
        with pytest.raises(ZeroEntropyError, match="entropy"):
            build_codebook(frozen, r=4, seed=0)
        with pytest.raises(ZeroEntropyError):
            build_codebook(frozen, r=4, seed=0, n_override=100)

    def test_retry_cap_reports_achievable_r(self, golden_r2):
        # walks of length 1 from a binary chain: at most 2 distinct codewords
        model = standard_solution(golden_r2, prune_zero_states=True)
        with pytest.raises(CodebookError, match="largest achievable r"):
            build_codebook(model, r=3, seed=0, n_override=1)

    def test_deterministic_rebuild(self, golden_r2):
        model = standard_solution(golden_r2)
        a = build_codebook(model, r=5, seed=11)
        b = build_codebook(model, r=5, seed=11)
        assert a.books == b.books
        assert a.end_states == b.end_states
        c = build_codebook(model, r=5, seed=12)
        assert a.books != c.books

    def test_manifest_rebuild(self, pair_book):
        manifest = pair_book.manifest("model.json")
        assert manifest == {
            "model_ref": "model.json", "r": 4, "n": 30, "seed": 3,
            "start_policy": "canonical",
        }
        clone = build_from_manifest(manifest, pair_book.model)
        assert clone.books == pair_book.books


class TestEncode:
    def test_zero_block_is_first_codeword(self, pair_book):
        cb = pair_book
        start = cb.canonical_start
        out = encode_bits(cb, [0] * cb.r, start=start)
        assert len(out) == cb.n
        word = bytes(cb.model.alphabet.index(s) for s in out)
        assert word == cb.books[start][0]

    def test_canonical_start_is_modal_state(self, small_beacon_book):
        assert small_beacon_book.canonical_start == ("5",)

    def test_empty_message_rejected(self, pair_book):
        with pytest.raises(ValueError, match="empty"):
            encode_bits(pair_book, [])

    def test_partial_block_rejected(self, pair_book):
        with pytest.raises(ValueError, match="multiple"):
            encode_bits(pair_book, [1, 0, 1])

    def test_unknown_start(self, pair_book):
        with pytest.raises(ValueError, match="start"):
            encode_bits(pair_book, [0] * 4, start=("2", "2"))

    def test_concatenation_is_legal_walk(self, small_beacon_book):
        cb = small_beacon_book
        data = bytes(make_rng(42).integers(0, 256, 32).tolist())
        out = encode_bits(cb, bits_from_bytes(data))
        cur = cb.canonical_start
        for sym in out:
            target = cur[1:] + (sym,)
            assert cb.model.transition(cur, target) > 0
            cur = target

    def test_statistics_approach_reference_with_length(self, beacon_chain):
        R = beacon13_distribution()
        cb = build_codebook(beacon_chain, r=8, seed=0, n_override=1995)
        l1s = []
        for nbytes in (4, 16, 64):
            data = bytes(make_rng(777, 1).integers(0, 256, nbytes).tolist())
            sym = encode_bits(cb, bits_from_bytes(data))
            assert len(sym) == nbytes * 1995
            est = estimate(sym, 1, mode="linear", alphabet=R.alphabet)
            l1s.append(l1_distance(est, R))
        assert l1s[0] > l1s[1] > l1s[2]
        assert l1s[2] <= 0.01


class TestDecode:
    def test_roundtrip_hundred_messages(self, small_beacon_book):
        cb = small_beacon_book
        rng = make_rng(2024)
        for trial in range(100):
            size = int(rng.integers(0, 40))
            data = bytes(rng.integers(0, 256, size).tolist())
            assert decode_message(cb, encode_message(cb, data)) == data

    def test_raw_roundtrip(self, pair_book):
        data = bytes(make_rng(8).integers(0, 256, 12).tolist())
        bits = bits_from_bytes(data)
        assert decode_bits(pair_book, encode_bits(pair_book, bits)) == bits

    def test_corruption_detected_at_block(self, pair_book):
        cb = pair_book
        data = bytes(make_rng(9).integers(0, 256, 4).tolist())
        sym = encode_bits(cb, bits_from_bytes(data))
        block = 3
        pos = block * cb.n + 7
        sym[pos] = "1" if sym[pos] == "0" else "0"
        with pytest.raises(DecodeError) as err:
            decode_bits(cb, sym)
        assert err.value.block_index == block

    def test_unknown_symbol_detected(self, pair_book):
        sym = encode_bits(pair_book, [0] * 4)
        sym[5] = "x"
        with pytest.raises(DecodeError) as err:
            decode_bits(pair_book, sym)
        assert err.value.block_index == 0

    def test_length_mismatch(self, pair_book):
        sym = encode_bits(pair_book, [0] * 4)
        with pytest.raises(LengthMismatchError):
            decode_bits(pair_book, sym[:-1])

    def test_random_walks_do_not_decode(self, pair_book):
        # streams produced by plain random walks (not through the encoder)
        # should almost never be valid codewords: r=4 against n*H ~ 20.6 bits
        cb = pair_book
        sampler = WalkSampler(cb.model)
        sid = sampler.index[cb.canonical_start]
        failures = 0
        trials = 1000
        for t in range(trials):
            ids, _ = sampler.walk(sid, cb.n, make_rng(55, t))
            try:
                decode_bits(cb, sampler.to_labels(ids), start=cb.canonical_start)
            except DecodeError:
                failures += 1
        rate = failures / trials
        assert rate >= 0.99, f"measured failure rate {rate}"
