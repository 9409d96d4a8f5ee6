"""Defender-side monitoring of higher-order statistics.

A defender who deployed a designed chain knows exactly which (k+1)-gram law
the channel should exhibit.  ``divergence_test`` compares the circular
(k+1)-gram estimate of observed traffic against that implied law (or against
the stationary marginals at lower orders) using an L1 statistic whose
threshold is Monte Carlo calibrated on the designed model itself -- the
windows of a sliding count overlap, so no closed-form null is assumed.  A
G-statistic is reported alongside for reference only.

``verify_carrier`` covers the complementary defense: a reference message
encoded through the channel fails to decode the moment anyone reshapes it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import ChainModel, WalkSampler, entropy_rate, implied_higher_stats
from .codec import Codebook, DecodeError, LengthMismatchError, decode_bits
from .rand import make_rng
from .stats import Gram, KGramDistribution, estimate, l1_distance, marginalize

DEFAULT_TRIALS = 200
DEFAULT_QUANTILE = 0.99


@dataclass(frozen=True)
class DetectionReport:
    order_tested: int
    sample_windows: int
    l1: float
    g_statistic: float
    threshold: float
    verdict: str  # consistent | shaped | insufficient-data
    min_windows: int
    support_violations: tuple[Gram, ...] = ()

    def to_json(self) -> dict:
        return {
            "order_tested": self.order_tested,
            "sample_windows": self.sample_windows,
            "l1": self.l1,
            "g_statistic": self.g_statistic,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "min_windows": self.min_windows,
            "support_violations": ["".join(g) for g in self.support_violations],
        }

    def format_table(self) -> str:
        rows = [
            ("order tested", str(self.order_tested)),
            ("sample windows", str(self.sample_windows)),
            ("L1 divergence", f"{self.l1:.6f}"),
            ("threshold", f"{self.threshold:.6f}"),
            ("G statistic", f"{self.g_statistic:.3f}"),
            ("support violations", str(len(self.support_violations))),
            ("verdict", self.verdict),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def expected_distribution(M: ChainModel, order: int) -> KGramDistribution:
    """What the designed model says order-grams should look like."""
    if order == M.order + 1:
        return implied_higher_stats(M)
    if order == M.order:
        return M.stationary
    if 1 <= order < M.order:
        return marginalize(M.stationary, order, side="suffix")
    raise ValueError(
        f"order {order} not testable against an order-{M.order} model "
        f"(use 1..{M.order + 1})"
    )


def default_min_windows(M: ChainModel, order: int) -> int:
    """Crude coverage floor: 10 windows per possible gram."""
    return 10 * M.alphabet.size**order


def divergence_test(
    observed: Sequence[str],
    M: ChainModel,
    order: int | None = None,
    threshold: float | None = None,
    min_windows: int | None = None,
    calibration_trials: int = DEFAULT_TRIALS,
    calibration_quantile: float = DEFAULT_QUANTILE,
    calibration_seed: int = 0,
) -> DetectionReport:
    """Compare a stream's circular order-gram statistics to the design.

    ``order`` defaults to the designed layer k+1.  When no threshold is
    supplied one is calibrated on the model at the observed length.  Any
    observed mass on a gram the design forbids is an immediate ``shaped``
    verdict; short streams return ``insufficient-data`` instead of raising.
    """
    if order is None:
        order = M.order + 1
    observed = list(observed)
    expected = expected_distribution(M, order)
    floor = default_min_windows(M, order) if min_windows is None else min_windows

    windows = len(observed)
    if windows < max(floor, order):
        return DetectionReport(
            order_tested=order,
            sample_windows=windows,
            l1=math.nan,
            g_statistic=math.nan,
            threshold=threshold if threshold is not None else math.nan,
            verdict="insufficient-data",
            min_windows=floor,
        )

    est = estimate(observed, order, mode="circular", alphabet=M.alphabet)
    l1 = l1_distance(est, expected)
    g = _g_statistic(est, expected, windows)
    # the circular wrap manufactures up to order-1 windows the source never
    # produced, so forbidden grams only count beyond that allowance
    forbidden = [g_ for g_ in est.support() if float(expected.prob(g_)) == 0.0]
    forbidden_windows = round(sum(float(est.prob(g_)) for g_ in forbidden) * windows)
    violations = tuple(forbidden) if forbidden_windows > order - 1 else ()
    if threshold is None:
        threshold = calibrate(
            M,
            order,
            windows=windows,
            trials=calibration_trials,
            quantile=calibration_quantile,
            seed=calibration_seed,
        )
    shaped = bool(violations) or l1 > threshold
    return DetectionReport(
        order_tested=order,
        sample_windows=windows,
        l1=l1,
        g_statistic=g,
        threshold=threshold,
        verdict="shaped" if shaped else "consistent",
        min_windows=floor,
        support_violations=violations,
    )


def _g_statistic(
    est: KGramDistribution, expected: KGramDistribution, windows: int
) -> float:
    total = 0.0
    for gram, p in est.probs.items():
        q = float(expected.prob(gram))
        pf = float(p)
        if pf > 0 and q > 0:
            total += pf * math.log(pf / q)
    return 2.0 * windows * total


def calibrate(
    M: ChainModel,
    order: int,
    windows: int,
    trials: int = DEFAULT_TRIALS,
    quantile: float = DEFAULT_QUANTILE,
    seed: int = 0,
) -> float:
    """Empirical null quantile of the L1 statistic under the model itself.

    Each trial simulates ``windows`` symbols with its own derived stream
    (seed, trial index) from a stationary-random start, so the threshold is
    reproducible and trials are order-independent.
    """
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    if not 0 < quantile < 1:
        raise ValueError("quantile must lie strictly between 0 and 1")
    if entropy_rate(M) == 0.0 and order > M.order:
        warnings.warn(
            "deterministic model: null statistics have no spread, threshold is 0",
            stacklevel=2,
        )
        return 0.0
    expected = expected_distribution(M, order)
    sampler = WalkSampler(M)
    values = []
    for t in range(trials):
        rng = make_rng(seed, t)
        start = sampler.draw_start(rng)
        ids, _ = sampler.walk(start, windows, rng)
        stream = sampler.to_labels(ids)
        est = estimate(stream, order, mode="circular", alphabet=M.alphabet)
        values.append(l1_distance(est, expected))
    return float(np.quantile(values, quantile, method="higher"))


@dataclass(frozen=True)
class CarrierReport:
    status: str  # intact | tampered | length_mismatch
    block_index: int | None = None

    def to_json(self) -> dict:
        return {"status": self.status, "block_index": self.block_index}


def verify_carrier(
    cb: Codebook,
    observed: Sequence[str],
    expected_bits: Sequence[int],
    start: Gram | str | None = None,
) -> CarrierReport:
    """Decode an embedded reference message and compare against the original.

    Any reshaping of the stream surfaces as a failed or wrong block; the
    first offending block index is reported.
    """
    observed = list(observed)
    try:
        got = decode_bits(cb, observed, start)
    except LengthMismatchError:
        return CarrierReport("length_mismatch")
    except DecodeError as exc:
        return CarrierReport("tampered", exc.block_index)
    expected = [b & 1 for b in expected_bits]
    if len(got) != len(expected):
        return CarrierReport("length_mismatch")
    for i, (a, b) in enumerate(zip(got, expected)):
        if a != b:
            return CarrierReport("tampered", i // cb.r)
    return CarrierReport("intact")
