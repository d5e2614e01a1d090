# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The scenid Authors

import json

import numpy as np
import pytest

import scenid


def test_mseq_autocorrelation():
    chips = scenid.mseq(5)
    assert len(chips) == 31
    ac = scenid.periodic_autocorrelation(chips)
    assert ac[0] == 31
    assert all(v == -1 for v in ac[1:])


def test_bad_polynomial_raises():
    with pytest.raises(scenid.ScenidError):
        scenid.mseq(4, [2])


def test_profile_and_fading_shapes():
    assert scenid.profile(1)["name"] == "cost207RAx4"
    assert scenid.profile(6)["delays_us"][-1] == 110.0
    gains, delays = scenid.fading(3, 500, seed=1)
    assert gains.shape == (6, 500)
    assert delays == [0, 1, 2, 3, 4, 5]
    again, _ = scenid.fading(3, 500, seed=1)
    np.testing.assert_array_equal(gains, again)


def test_sound_recovers_static_paths():
    chips = np.array(scenid.mseq(8), dtype=complex)
    rx = chips + 0.5j * np.roll(chips, 3)
    est = scenid.sound(rx, threshold_factor=0.2)
    assert est["order"] == 2
    assert est["delays"] == [0, 3]
    np.testing.assert_allclose(est["amplitudes"], [1.0, 0.5j], atol=1e-9)


def test_dpss_orthonormal():
    seq, conc = scenid.dpss(128, 0.02, 5)
    np.testing.assert_allclose(seq @ seq.T, np.eye(5), atol=1e-10)
    assert all(0.0 < c <= 1.0 for c in conc)


def test_ddpdp_rows_sum_to_one():
    gains, _ = scenid.fading(6, 1000, seed=2)
    d = scenid.ddpdp(gains)
    assert d.shape == (12, 400)
    np.testing.assert_allclose(d.sum(axis=1), 1.0, atol=1e-12)


def test_complexity_count():
    assert scenid.complexity_count([64, 48, 32, 24], 6, 600) == 6631200


def test_small_dataset():
    cfg = {"scenarios": [1], "vectors_per_condition": 1, "snr_db": [20], "samples_per_vector": 1024}
    features, labels, snr = scenid.generate_dataset(json.dumps(cfg))
    assert features.shape == (2, scenid.FEATURE_SIZE)
    assert labels == [1, 1]
    assert snr == [None, 20.0]
