// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scenid/types.hpp"

namespace scenid {

/// Discrete prolate spheroidal (Slepian) sequences. Row d of `sequences`
/// is the d-th most concentrated sequence in [-W, W].
struct DPSSBasis {
    std::size_t length = 0;
    double half_bandwidth = 0.0;
    std::size_t count = 0;
    Eigen::MatrixXd sequences;
    std::vector<double> concentrations;
};

/// Slepian sequences from the symmetric tridiagonal commuting matrix.
/// Sign convention: first element above roundoff is positive.
DPSSBasis generate_dpss(std::size_t length, double half_bandwidth, std::size_t count);

/// Shared instance per (length, W, count); safe for concurrent callers.
std::shared_ptr<const DPSSBasis> cached_dpss(std::size_t length, double half_bandwidth, std::size_t count);

/// Energy fraction of `seq` inside [-W, W]: seq^T K seq / seq^T seq with the
/// sinc kernel K[m][n] = sin(2 pi W (m - n)) / (pi (m - n)).
double band_concentration(const Eigen::VectorXd& seq, double half_bandwidth);

/// D = ceil(2 nu N) + 3.
std::size_t basis_dimension(double normalized_doppler, std::size_t length);

/// Transmitted frame with a mask of the symbols the receiver knows.
struct PilotPattern {
    CVector symbols;
    std::vector<bool> known;

    static PilotPattern all_known(CVector symbols);
    static PilotPattern from_positions(CVector symbols, const std::vector<std::size_t>& pilot_positions);
    std::size_t size() const { return symbols.size(); }
};

struct BEMCoefficients {
    /// L x D, row l holds the basis weights of delay_grid[l].
    Eigen::MatrixXcd coeffs;
};

struct CIREstimate {
    enum class Source { TrueSim, BemLs };
    Eigen::MatrixXcd gains;
    std::vector<int> delay_grid;
    Source source = Source::BemLs;
};

/// Least squares fit of y[n] = sum_l sum_d c_{l,d} u_d[n] x[n - tau_l] over
/// every sample whose regressors are all known (symbols before the frame
/// count as zero). Throws Identifiability when the system is rank deficient.
std::pair<BEMCoefficients, CIREstimate> bem_ls_estimate(const ComplexSignal& received, const PilotPattern& pilots,
                                                         const std::vector<int>& delay_grid, const DPSSBasis& basis);

/// Rows of the regression above: sample indices used and the regressor
/// matrix. Exposed for the normal-equation checks.
struct BemRegression {
    std::vector<std::size_t> rows;
    Eigen::MatrixXcd design;
};
BemRegression bem_regression(const PilotPattern& pilots, std::size_t offset, std::size_t length,
                             const std::vector<int>& delay_grid, const DPSSBasis& basis);

/// Windowed BEM-LS over long frames: independent fits per window, gains
/// concatenated. Factorizations are cached by regressor content, so a
/// periodic known frame is factorized once per distinct window.
class BemLsEstimator {
public:
    BemLsEstimator(std::vector<int> delay_grid, double normalized_doppler, std::size_t window_length = 512);

    CIREstimate estimate(const ComplexSignal& received, const PilotPattern& pilots) const;

    const std::vector<int>& delay_grid() const { return delay_grid_; }
    std::size_t window_length() const { return window_length_; }

private:
    struct Solver;
    std::shared_ptr<const Solver> solver_for(const PilotPattern& pilots, std::size_t offset, std::size_t length) const;

    std::vector<int> delay_grid_;
    double normalized_doppler_;
    std::size_t window_length_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, std::vector<std::shared_ptr<const Solver>>> cache_;
    mutable std::size_t cached_ = 0;
};

/// ||est - truth||^2 / ||truth||^2
double nmse(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth);

} // namespace scenid
