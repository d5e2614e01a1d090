// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "scenid/channel_est.hpp"

namespace scenid {

inline constexpr int kEnvelopeBins = 400;
inline constexpr double kEnvelopeMax = 2.0;
inline constexpr double kBinWidth = kEnvelopeMax / kEnvelopeBins;
inline constexpr int kFeatureLength = kEnvelopeBins * kMaxTaps;

/// Delay-discrete probability distribution plot: row l is the histogram of
/// tap-l envelopes over 400 bins of width 0.005 on [0, 2), each row summing
/// to one. Envelopes >= 2 land in the last bin.
struct DDPDP {
    Eigen::MatrixXd bins;
    double bin_width = kBinWidth;
    double delay_unit_us = kDelayUnitUs;

    Eigen::Index rows() const { return bins.rows(); }
};

struct FeatureVector {
    std::vector<double> values;
    std::optional<int> label;
};

using OneHotLabel = std::array<double, kScenarioCount>;

/// Bin index of one envelope value.
int envelope_bin(double envelope);

DDPDP build_ddpdp(const CIREstimate& cir);
/// Row-major concatenation, delay 0 first.
FeatureVector flatten(const DDPDP& ddpdp);
DDPDP unflatten(const FeatureVector& feature, int rows = kMaxTaps);
OneHotLabel one_hot(int label);

/// Places the taps of a simulated CIR on the fixed delay grid 0..rows-1;
/// grid positions without a tap stay zero.
CIREstimate to_grid(const CIRMatrix& cir, int rows = kMaxTaps);

} // namespace scenid
