"""Deterministic random-stream construction.

Every stochastic operation in the package draws from a PCG64 generator keyed
through ``numpy.random.SeedSequence``, and consumes only raw uniforms via
``Generator.random`` with inverse-CDF selection.  Derived streams (per trial,
per codebook state, per retry) extend the entropy tuple instead of mutating a
shared generator, so results are reproducible across platforms and safe to
parallelize.
"""

from __future__ import annotations

import numpy as np


def make_rng(*entropy: int) -> np.random.Generator:
    """PCG64 generator keyed by an integer tuple."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
