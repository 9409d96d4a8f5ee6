"""Command-line surface: estimate -> synthesize -> encode/decode -> detect.

Exit codes: 0 success (or verdict consistent / carrier intact), 2 shaped or
tampered, 3 insufficient data, 1 usage or validation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import presets, report, streams
from .chains import (
    convex_combine,
    entropy_rate,
    identity_chain,
    implied_higher_stats,
    simulate,
    standard_solution,
    two_state_family,
    vertex_solution,
)
from .channel import delays_to_symbols, hmm_simulate, symbols_to_delays
from .codec import (
    bits_from_bytes,
    build_codebook,
    build_from_manifest,
    bytes_from_bits,
    decode_bits,
    decode_message,
    encode_bits,
    encode_message,
    frame_bits,
)
from .detect import calibrate, divergence_test, verify_carrier
from .stats import Alphabet, estimate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SHAPED = 2
EXIT_INSUFFICIENT = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default, which collides with the
    # 'shaped' verdict code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_stream_args(p, readonly=True):
    p.add_argument("stream", help="symbol stream file (newline-delimited labels)")
    p.add_argument(
        "--compact",
        action="store_true",
        help="treat the stream as one character per symbol",
    )


def _load_stream(args):
    return streams.read_stream(args.stream, compact=args.compact)


def _add_codebook_args(p):
    p.add_argument("--model", help="chain model JSON file")
    p.add_argument("--manifest", help="codebook manifest JSON file")
    p.add_argument("--r", type=int, help="bits per block")
    p.add_argument("--n", type=int, help="codeword length override")
    p.add_argument("--seed", type=int, default=0, help="codebook seed (default 0)")
    p.add_argument("--start", help="start state (default: canonical)")


def _build_codebook(args, parser):
    if args.manifest:
        manifest = streams.read_manifest(args.manifest)
        model_path = manifest["model_ref"]
        if not Path(model_path).is_absolute():
            model_path = Path(args.manifest).parent / model_path
        model = streams.read_model(model_path)
        return build_from_manifest(manifest, model)
    if not args.model or args.r is None:
        parser.error("need either --manifest or both --model and --r")
    model = streams.read_model(args.model)
    return build_codebook(model, r=args.r, seed=args.seed, n_override=args.n)


def _parse_alphabet(spec: str | None) -> Alphabet | None:
    if spec is None:
        return None
    return Alphabet(tuple(s for s in spec.split(",") if s))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gramforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="count k-gram statistics of a stream")
    _add_stream_args(p)
    p.add_argument("-k", type=int, required=True, help="gram width")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument(
        "--circular", dest="mode", action="store_const", const="circular",
        help="count over the periodic extension (default)",
    )
    mode.add_argument(
        "--linear", dest="mode", action="store_const", const="linear",
        help="count the plain sliding windows",
    )
    p.set_defaults(mode="circular")
    p.add_argument("--alphabet", help="comma-separated labels (default: inferred)")
    p.add_argument("--out", required=True, help="output distribution JSON")

    p = sub.add_parser("synthesize", help="build a chain realizing a distribution")
    p.add_argument("distribution", help="distribution JSON file")
    p.add_argument(
        "--construction",
        choices=["standard", "vertex", "convex", "identity"],
        default="standard",
    )
    p.add_argument(
        "--u", type=float, default=0.5,
        help="convex weight on the standard component (construction=convex)",
    )
    p.add_argument(
        "--rule", choices=["northwest", "lexicographic-greedy"], default="northwest",
        help="vertex selection rule",
    )
    p.add_argument(
        "--solver-raw", action="store_true",
        help="northwest over the full grid; zero-mass states get degenerate rows",
    )
    p.add_argument(
        "--prune-zero-states", action="store_true",
        help="drop states the stationary law never visits",
    )
    p.add_argument("--out", required=True, help="output model JSON")

    p = sub.add_parser("combine", help="convex combination of two models")
    p.add_argument("model_a")
    p.add_argument("model_b")
    p.add_argument("--u", type=float, required=True, help="weight on model_a")
    p.add_argument("--out", required=True)

    p = sub.add_parser("two-state", help="closed-form binary family member")
    p.add_argument("--r1", type=float, required=True, help="stationary frequency of '1'")
    p.add_argument("--p00", type=float, required=True, help="self-loop probability of '0'")
    p.add_argument("--out", required=True)

    p = sub.add_parser("entropy", help="entropy rate of a model (bits/symbol)")
    p.add_argument("model")

    p = sub.add_parser("implied", help="the (k+1)-gram law a model induces")
    p.add_argument("model")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="random walk in a model")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="stationary-random")
    p.add_argument("--out", required=True)
    p.add_argument("--compact", action="store_true")

    p = sub.add_parser("hmm-sim", help="simulate a hidden Markov source")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="HMM spec JSON file")
    src.add_argument("--preset", help=f"bundled spec: {sorted(presets.HMMS)}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-state", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--compact", action="store_true")

    p = sub.add_parser("encode", help="embed a message into a symbol stream")
    _add_codebook_args(p)
    p.add_argument("--message", required=True, help="message file (bytes), or - for stdin")
    p.add_argument(
        "--raw", action="store_true",
        help="no framing: message bits must fill whole blocks",
    )
    p.add_argument("--out", required=True, help="output stream file")
    p.add_argument("--compact", action="store_true")
    p.add_argument("--emit-manifest", help="also write a codebook manifest here")

    p = sub.add_parser("decode", help="recover a message from a symbol stream")
    _add_codebook_args(p)
    p.add_argument("stream", help="encoded stream file")
    p.add_argument("--compact", action="store_true")
    p.add_argument("--raw", action="store_true")
    p.add_argument("--out", required=True, help="output message file")

    p = sub.add_parser("detect", help="test a stream against a designed model")
    _add_stream_args(p)
    p.add_argument("model")
    p.add_argument("--order", type=int, help="gram order to test (default k+1)")
    p.add_argument("--threshold", type=float)
    p.add_argument(
        "--calibrate", nargs=3, metavar=("TRIALS", "WINDOWS", "QUANTILE"),
        help="calibrate the threshold on the model",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-windows", type=int)
    p.add_argument("--json", help="also write the report as JSON here")

    p = sub.add_parser("calibrate", help="Monte Carlo null threshold for a model")
    p.add_argument("model")
    p.add_argument("--order", type=int)
    p.add_argument("--windows", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--quantile", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify-carrier", help="check an embedded reference message")
    _add_codebook_args(p)
    p.add_argument("stream", help="observed stream file")
    p.add_argument("--compact", action="store_true")
    p.add_argument("--expected", required=True, help="reference message file")
    p.add_argument("--raw", action="store_true")

    p = sub.add_parser("figure", help="histogram report: data table + rendering")
    p.add_argument("--fig", choices=["2", "4"], required=True)
    p.add_argument("--delays", help="delay CSV input (fig 2)")
    p.add_argument("--timestamps", action="store_true", help="delay column holds absolute times")
    p.add_argument("--stream", help="symbol stream input")
    p.add_argument("--compact", action="store_true")
    p.add_argument("--binning", default="paper-fig2", help="delay binning preset")
    p.add_argument("--reference", help="reference distribution JSON or preset (fig 4)")
    p.add_argument("--out", required=True, help="output CSV table")
    p.add_argument("--plot", help="output image path (default: table path with .png)")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("quantize", help="delays (seconds) -> symbols")
    p.add_argument("delays", help="delay CSV file")
    p.add_argument("--timestamps", action="store_true")
    p.add_argument("--binning", default="paper-fig2")
    p.add_argument("--policy", choices=["strict", "clamp"], default="strict")
    p.add_argument("--out", required=True)
    p.add_argument("--compact", action="store_true")

    p = sub.add_parser("dequantize", help="symbols -> delays (seconds)")
    _add_stream_args(p)
    p.add_argument("--binning", default="paper-fig2")
    p.add_argument("--jitter-seed", type=int, help="spread delays inside their bins")
    p.add_argument("--out", required=True)

    return parser


def _cmd_estimate(args) -> int:
    seq = _load_stream(args)
    dist = estimate(seq, args.k, mode=args.mode, alphabet=_parse_alphabet(args.alphabet))
    streams.write_distribution(args.out, dist)
    print(f"{len(seq)} symbols, {len(dist.support())} observed {args.k}-grams -> {args.out}")
    return EXIT_OK


def _cmd_synthesize(args) -> int:
    R = streams.read_distribution(args.distribution)
    if args.construction == "standard":
        model = standard_solution(R, prune_zero_states=args.prune_zero_states)
    elif args.construction == "vertex":
        model = vertex_solution(
            R,
            rule=args.rule,
            solver_raw=args.solver_raw,
            prune_zero_states=args.prune_zero_states,
        )
    elif args.construction == "identity":
        model = identity_chain(R)
    else:
        a = standard_solution(R, prune_zero_states=args.prune_zero_states)
        b = vertex_solution(
            R,
            rule=args.rule,
            solver_raw=args.solver_raw,
            prune_zero_states=args.prune_zero_states,
        )
        model = convex_combine(a, b, args.u)
    streams.write_model(args.out, model)
    print(f"entropy rate: {entropy_rate(model):.6f} bits/symbol")
    print(f"{len(model.states)} states -> {args.out}")
    return EXIT_OK


def _cmd_combine(args) -> int:
    a = streams.read_model(args.model_a)
    b = streams.read_model(args.model_b)
    model = convex_combine(a, b, args.u)
    streams.write_model(args.out, model)
    print(f"entropy rate: {entropy_rate(model):.6f} bits/symbol")
    return EXIT_OK


def _cmd_two_state(args) -> int:
    model = two_state_family(args.r1, args.p00)
    streams.write_model(args.out, model)
    rows = {s: dict(model.row(s)) for s in model.states}
    print(
        "p00={:.6g} p01={:.6g} p10={:.6g} p11={:.6g}".format(
            rows[("0",)].get(("0",), 0.0),
            rows[("0",)].get(("1",), 0.0),
            rows[("1",)].get(("0",), 0.0),
            rows[("1",)].get(("1",), 0.0),
        )
    )
    return EXIT_OK


def _cmd_entropy(args) -> int:
    model = streams.read_model(args.model)
    print(f"{entropy_rate(model):.10f}")
    return EXIT_OK


def _cmd_implied(args) -> int:
    model = streams.read_model(args.model)
    streams.write_distribution(args.out, implied_higher_stats(model))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    model = streams.read_model(args.model)
    seq = simulate(model, args.n, seed=args.seed, start=args.start)
    streams.write_stream(args.out, seq, compact=args.compact)
    return EXIT_OK


def _cmd_hmm_sim(args) -> int:
    spec = presets.get_hmm(args.preset) if args.preset else streams.read_hmm(args.spec)
    seq = hmm_simulate(spec, args.n, seed=args.seed, start_state=args.start_state)
    streams.write_stream(args.out, seq, compact=args.compact)
    return EXIT_OK


def _read_message(source: str) -> bytes:
    if source == "-":
        return sys.stdin.buffer.read()
    return Path(source).read_bytes()


def _cmd_encode(args, parser) -> int:
    cb = _build_codebook(args, parser)
    data = _read_message(args.message)
    if args.raw:
        bits = bits_from_bytes(data)
        symbols = encode_bits(cb, bits, start=args.start)
    else:
        symbols = encode_message(cb, data, start=args.start)
    streams.write_stream(args.out, symbols, compact=args.compact)
    if args.emit_manifest:
        model_ref = args.model if args.model else streams.read_manifest(args.manifest)["model_ref"]
        streams.write_manifest(args.emit_manifest, cb.manifest(model_ref))
    print(f"{len(symbols)} symbols ({len(symbols) // cb.n} blocks of n={cb.n})")
    return EXIT_OK


def _cmd_decode(args, parser) -> int:
    cb = _build_codebook(args, parser)
    symbols = streams.read_stream(args.stream, compact=args.compact)
    if args.raw:
        bits = decode_bits(cb, symbols, start=args.start)
        data = bytes_from_bits(bits)
    else:
        data = decode_message(cb, symbols, start=args.start)
    Path(args.out).write_bytes(data)
    print(f"{len(data)} bytes -> {args.out}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    seq = _load_stream(args)
    model = streams.read_model(args.model)
    if args.calibrate:
        trials, windows, quantile = args.calibrate
        threshold = calibrate(
            model,
            args.order if args.order is not None else model.order + 1,
            windows=int(windows),
            trials=int(trials),
            quantile=float(quantile),
            seed=args.seed,
        )
    else:
        threshold = args.threshold
    rep = divergence_test(
        seq,
        model,
        order=args.order,
        threshold=threshold,
        min_windows=args.min_windows,
        calibration_seed=args.seed,
    )
    print(rep.format_table())
    if args.json:
        streams.write_manifest(args.json, rep.to_json())
    if rep.verdict == "shaped":
        return EXIT_SHAPED
    if rep.verdict == "insufficient-data":
        return EXIT_INSUFFICIENT
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    model = streams.read_model(args.model)
    order = args.order if args.order is not None else model.order + 1
    thr = calibrate(
        model,
        order,
        windows=args.windows,
        trials=args.trials,
        quantile=args.quantile,
        seed=args.seed,
    )
    print(f"{thr:.10f}")
    return EXIT_OK


def _cmd_verify_carrier(args, parser) -> int:
    cb = _build_codebook(args, parser)
    symbols = streams.read_stream(args.stream, compact=args.compact)
    data = _read_message(args.expected)
    expected = bits_from_bytes(data) if args.raw else frame_bits(data, cb.r)
    rep = verify_carrier(cb, symbols, expected, start=args.start)
    if rep.status == "intact":
        print("intact")
        return EXIT_OK
    if rep.status == "tampered":
        print(f"tampered at block {rep.block_index}")
    else:
        print("length mismatch")
    return EXIT_SHAPED


def _cmd_figure(args, parser) -> int:
    binning = presets.get_binning(args.binning)

    def delay_labels(rows):
        # key bins by their representative delay when the stream uses the
        # binning's symbols, otherwise keep the raw labels
        if [lab for lab, _ in rows] == list(binning.symbols):
            reps = binning.representatives
            return [(f"{reps[i]:.2f}", f) for i, (_, f) in enumerate(rows)]
        return rows

    if args.fig == "2":
        if args.delays:
            delays = streams.read_delays(args.delays, timestamps=args.timestamps)
            symbols = delays_to_symbols(delays, binning, policy="clamp")
        elif args.stream:
            symbols = streams.read_stream(args.stream, compact=args.compact)
        else:
            parser.error("figure 2 needs --delays or --stream")
        hint = binning.symbols if set(symbols) <= set(binning.symbols) else None
        rows = delay_labels(report.symbol_frequencies(symbols, order_hint=hint))
        reference = None
        title = "inter-arrival delay frequencies"
    else:
        if not args.stream:
            parser.error("figure 4 needs --stream")
        symbols = streams.read_stream(args.stream, compact=args.compact)
        hint = binning.symbols if set(symbols) <= set(binning.symbols) else None
        rows = delay_labels(report.symbol_frequencies(symbols, order_hint=hint))
        reference = None
        if args.reference:
            if args.reference in presets.DISTRIBUTIONS:
                ref_dist = presets.get_distribution(args.reference)
            else:
                ref_dist = streams.read_distribution(args.reference)
            reference = delay_labels(report.distribution_rows(ref_dist))
        title = "codeword stream delay frequencies"
    report.write_table(args.out, rows)
    if not args.no_plot:
        plot_path = args.plot or str(Path(args.out).with_suffix(".png"))
        report.render_histogram(
            plot_path, rows, title, reference=reference, reference_title="measured traffic"
        )
        print(f"table -> {args.out}, figure -> {plot_path}")
    else:
        print(f"table -> {args.out}")
    return EXIT_OK


def _cmd_quantize(args) -> int:
    binning = presets.get_binning(args.binning)
    delays = streams.read_delays(args.delays, timestamps=args.timestamps)
    symbols = delays_to_symbols(delays, binning, policy=args.policy)
    streams.write_stream(args.out, symbols, compact=args.compact)
    return EXIT_OK


def _cmd_dequantize(args) -> int:
    binning = presets.get_binning(args.binning)
    symbols = _load_stream(args)
    delays = symbols_to_delays(symbols, binning, jitter_seed=args.jitter_seed)
    streams.write_delays(args.out, delays)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "estimate": _cmd_estimate,
        "synthesize": _cmd_synthesize,
        "combine": _cmd_combine,
        "two-state": _cmd_two_state,
        "entropy": _cmd_entropy,
        "implied": _cmd_implied,
        "simulate": _cmd_simulate,
        "hmm-sim": _cmd_hmm_sim,
        "detect": _cmd_detect,
        "calibrate": _cmd_calibrate,
        "quantize": _cmd_quantize,
        "dequantize": _cmd_dequantize,
    }
    needs_parser = {
        "encode": _cmd_encode,
        "decode": _cmd_decode,
        "verify-carrier": _cmd_verify_carrier,
        "figure": _cmd_figure,
    }
    try:
        if args.command in needs_parser:
            return needs_parser[args.command](args, parser)
        return handlers[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
