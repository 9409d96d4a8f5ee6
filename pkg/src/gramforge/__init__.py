"""gramforge: k-gram statistics, chain synthesis, covert coding, detection."""

from .stats import (
    Alphabet,
    ConsistencyError,
    ConsistencyViolation,
    KGramDistribution,
    check_consistency,
    estimate,
    l1_distance,
    marginalize,
)
from .chains import (
    ChainClassification,
    ChainModel,
    SuffixSystem,
    classify_chain,
    convex_combine,
    entropy_rate,
    identity_chain,
    implied_higher_stats,
    simulate,
    standard_solution,
    suffix_systems,
    two_state_family,
    two_state_feasible_interval,
    verify_model,
    vertex_solution,
)
from .codec import (
    Codebook,
    CodebookError,
    DecodeError,
    LengthMismatchError,
    ZeroEntropyError,
    build_codebook,
    build_from_manifest,
    decode_bits,
    decode_message,
    default_codeword_length,
    encode_bits,
    encode_message,
)
from .detect import (
    CarrierReport,
    DetectionReport,
    calibrate,
    divergence_test,
    expected_distribution,
    verify_carrier,
)
from .channel import (
    DelayBinning,
    HmmSpec,
    chain_to_hmm,
    delays_to_symbols,
    hmm_simulate,
    symbols_to_delays,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
