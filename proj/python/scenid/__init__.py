# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The scenid Authors
"""Channel scenario identification: sounding, BEM-LS estimation, D-DPDP features."""

from ._scenid import (
    FEATURE_SIZE,
    MAX_TAPS,
    ScenidError,
    complexity_count,
    ddpdp,
    dpss,
    fading,
    generate_dataset,
    mseq,
    periodic_autocorrelation,
    profile,
    sound,
)

__version__ = "0.1.0"

__all__ = [
    "FEATURE_SIZE",
    "MAX_TAPS",
    "ScenidError",
    "complexity_count",
    "ddpdp",
    "dpss",
    "fading",
    "generate_dataset",
    "mseq",
    "periodic_autocorrelation",
    "profile",
    "sound",
]
