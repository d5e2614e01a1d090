// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace scenid {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

/// Delay-grid resolution: one unit is one symbol period at 100 ksym/s.
inline constexpr double kDelayUnitUs = 10.0;
/// Rows in every CIR estimate and D-DPDP (largest scenario has 12 taps).
inline constexpr int kMaxTaps = 12;
inline constexpr int kScenarioCount = 6;

/// Uniformly sampled complex baseband sequence.
struct ComplexSignal {
    CVector samples;
    double sample_period_s = 1e-5;

    std::size_t size() const { return samples.size(); }
};

/// Tap-gain series mu_l[n] on an integer delay grid. Row l of `gains`
/// belongs to delay `delay_units[l]`.
struct CIRMatrix {
    Eigen::MatrixXcd gains;
    double sample_period_s = 1e-5;
    std::vector<int> delay_units;

    Eigen::Index taps() const { return gains.rows(); }
    Eigen::Index samples() const { return gains.cols(); }
};

double mean_power(const CVector& x);

} // namespace scenid
