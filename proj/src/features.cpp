// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/features.hpp"

#include <cmath>

#include "scenid/error.hpp"

namespace scenid {

int envelope_bin(double envelope) {
    if (!(envelope >= 0.0)) return 0;
    if (envelope >= kEnvelopeMax) return kEnvelopeBins - 1;
    // Scale by the integer bin count so exact multiples of the width map
    // to their own bin (0.73 / 0.005 rounds to 145.999...).
    double scaled = envelope * (kEnvelopeBins / kEnvelopeMax);
    double nearest = std::round(scaled);
    int bin = (std::abs(scaled - nearest) < 1e-9 * std::max(1.0, scaled)) ? static_cast<int>(nearest)
                                                                           : static_cast<int>(std::floor(scaled));
    return std::min(bin, kEnvelopeBins - 1);
}

DDPDP build_ddpdp(const CIREstimate& cir) {
    require(cir.gains.rows() >= 1, ErrorKind::InvalidArgument, "CIR estimate has no delay rows");
    require(cir.gains.cols() >= kEnvelopeBins, ErrorKind::InsufficientData,
            "D-DPDP needs at least " + std::to_string(kEnvelopeBins) + " samples per row, got " +
                std::to_string(cir.gains.cols()));
    DDPDP out;
    out.bins = Eigen::MatrixXd::Zero(cir.gains.rows(), kEnvelopeBins);
    for (Eigen::Index l = 0; l < cir.gains.rows(); ++l) {
        for (Eigen::Index n = 0; n < cir.gains.cols(); ++n) {
            const cd g = cir.gains(l, n);
            require(std::isfinite(g.real()) && std::isfinite(g.imag()), ErrorKind::DegenerateInput,
                    "non-finite CIR value in row " + std::to_string(l));
            out.bins(l, envelope_bin(std::abs(g))) += 1.0;
        }
    }
    out.bins /= static_cast<double>(cir.gains.cols());
    return out;
}

FeatureVector flatten(const DDPDP& ddpdp) {
    FeatureVector f;
    f.values.reserve(static_cast<std::size_t>(ddpdp.bins.size()));
    for (Eigen::Index l = 0; l < ddpdp.bins.rows(); ++l)
        for (Eigen::Index b = 0; b < ddpdp.bins.cols(); ++b) f.values.push_back(ddpdp.bins(l, b));
    return f;
}

DDPDP unflatten(const FeatureVector& feature, int rows) {
    require(rows >= 1 && feature.values.size() == static_cast<std::size_t>(rows) * kEnvelopeBins, ErrorKind::Dimension,
            "feature length " + std::to_string(feature.values.size()) + " is not " + std::to_string(rows) + " x " +
                std::to_string(kEnvelopeBins));
    DDPDP out;
    out.bins.resize(rows, kEnvelopeBins);
    for (int l = 0; l < rows; ++l)
        for (int b = 0; b < kEnvelopeBins; ++b)
            out.bins(l, b) = feature.values[static_cast<std::size_t>(l) * kEnvelopeBins + static_cast<std::size_t>(b)];
    return out;
}

OneHotLabel one_hot(int label) {
    require(label >= 1 && label <= kScenarioCount, ErrorKind::InvalidArgument,
            "label " + std::to_string(label) + " outside 1.." + std::to_string(kScenarioCount));
    OneHotLabel v{};
    v[static_cast<std::size_t>(label - 1)] = 1.0;
    return v;
}

CIREstimate to_grid(const CIRMatrix& cir, int rows) {
    CIREstimate out;
    out.source = CIREstimate::Source::TrueSim;
    out.gains = Eigen::MatrixXcd::Zero(rows, cir.samples());
    for (int d = 0; d < rows; ++d) out.delay_grid.push_back(d);
    for (Eigen::Index l = 0; l < cir.taps(); ++l) {
        int d = cir.delay_units[static_cast<std::size_t>(l)];
        require(d >= 0 && d < rows, ErrorKind::Dimension, "tap delay " + std::to_string(d) + " outside the grid");
        out.gains.row(d) += cir.gains.row(l);
    }
    return out;
}

} // namespace scenid
