// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <cstdint>
#include <vector>

#include "scenid/types.hpp"

namespace scenid {

/// Maximal-length sequence from a Fibonacci LFSR. `feedback_taps` lists the
/// exponents of the primitive polynomial below x^p (e.g. x^3 + x + 1 -> {1}
/// plus the implicit constant term); the register bit i holds s[n + i].
struct MSequence {
    int register_length = 0;
    std::vector<int> feedback_taps;
    std::vector<int> chips; // +1 / -1
    double chip_period_s = 1e-5;

    std::size_t period() const { return chips.size(); }
    CVector as_signal() const;
};

/// Default primitive polynomials for p = 2..16 (exponents besides x^p and 1).
const std::vector<int>& default_feedback_taps(int register_length);

/// Bit 0 -> +1, bit 1 -> -1. `initial_state` bit i is register stage i.
MSequence generate_mseq(int register_length, std::vector<int> feedback_taps, std::uint32_t initial_state);

/// Periodic autocorrelation in integer arithmetic.
std::vector<long> periodic_autocorrelation(const std::vector<int>& chips);

/// `periods` back-to-back copies of the chips, for driving a channel.
ComplexSignal periodic_probe(const MSequence& mseq, std::size_t periods);

struct OrderEstimate {
    int order = 0;
    std::vector<int> peak_lags;
    std::vector<double> peak_values;
    double threshold = 0.0;
    /// Phase-insensitive per-lag path magnitude, one entry per lag.
    std::vector<double> spectrum;
};

struct OrderOptions {
    double threshold_factor = 0.5;
    /// Per-probe false-alarm probability used to set the noise floor.
    double false_alarm = 1e-3;
};

/// Channel-order estimate from an m-sequence probe. The received signal
/// (length a multiple of the period, first sample aligned with chip 0) is
/// averaged over periods, despread by circular correlation against the
/// local chips and reduced to per-lag magnitudes. Lags above
/// threshold_factor x (largest magnitude) and above a noise floor estimated
/// from the median magnitude count as paths. The floor assumes fewer than
/// half of the lags carry paths.
OrderEstimate estimate_order(const ComplexSignal& received, const MSequence& local,
                             const OrderOptions& options = {});

/// Same detection on the mean per-lag power of several probes of one
/// channel (delays fixed, gains free to differ between probes). Pooling
/// keeps a tap that is in a deep fade during one probe detectable.
OrderEstimate estimate_order_pooled(const std::vector<ComplexSignal>& probes, const MSequence& local,
                                    const OrderOptions& options = {});

/// Per-lag complex path gains of one probe. The off-peak autocorrelation of
/// an m-sequence is exactly -1, so C[k] = (N+1) mu_k - sum mu and
/// sum_k C[k] = sum mu; the gains follow exactly in the noiseless case.
CVector lag_gains(const ComplexSignal& received, const MSequence& local);

/// Spectra of the (period-averaged) probe and the local chips in centered
/// bin order k = -floor(N/2) ... ceil(N/2) - 1.
struct FrequencyData {
    CVector R;
    CVector M;
    std::vector<int> k;

    std::size_t size() const { return R.size(); }
    double m_energy() const;
};

FrequencyData probe_spectrum(const ComplexSignal& received, const MSequence& local);

/// alpha(tau)^H (M^* residual): the delay-matched correlation of a residual
/// spectrum.
cd delay_correlation(const FrequencyData& freq, const CVector& residual, int delay);

/// alpha(tau)^H (M^* residual) / ||M||_F^2.
cd amplitude_given_delay(const FrequencyData& freq, const CVector& residual, int delay);

/// argmax over candidates of |alpha(tau)^H (M^* residual)|^2; first (smallest
/// delay) wins on ties.
int delay_argmax(const FrequencyData& freq, const CVector& residual, const std::vector<int>& candidates);

struct PathEstimate {
    int delay_units = 0;
    cd amplitude;
};

struct DelayAmplitudeEstimate {
    std::vector<PathEstimate> paths;
    double residual_cost = 0.0;
    int iterations = 0;
    /// Cost after every relaxation sweep, in order.
    std::vector<double> sweep_costs;
};

/// Sum_k |R[k] - M[k] sum_l mu_l exp(-j 2 pi tau_l k / N)|^2.
double relax_cost(const FrequencyData& freq, const std::vector<PathEstimate>& paths);

/// Model spectrum M[k] sum_l mu_l exp(-j 2 pi tau_l k / N).
CVector model_spectrum(const FrequencyData& freq, const std::vector<PathEstimate>& paths);

struct RelaxOptions {
    int max_outer_iters = 50;
    double tol = 1e-8;
};

/// Staged relaxation: grow the model one path at a time; after each growth
/// step re-fit every path against the residual of all others until the
/// relative cost decrease per sweep drops below `tol`.
DelayAmplitudeEstimate relax_estimate(const FrequencyData& freq, int order, const std::vector<int>& candidates,
                                      const RelaxOptions& options = {});

std::vector<int> delay_range(int first, int last_exclusive);

/// Delay profile of a channel sounded several times: order from the pooled
/// detection, delays by majority vote of per-probe relaxation fits.
struct DelayProfile {
    OrderEstimate detection;
    std::vector<int> delays; // ascending
    std::vector<int> votes;  // per lag
};

DelayProfile estimate_delay_profile(const std::vector<ComplexSignal>& probes, const MSequence& local,
                                    const OrderOptions& order_options = {}, const RelaxOptions& relax_options = {});

} // namespace scenid
