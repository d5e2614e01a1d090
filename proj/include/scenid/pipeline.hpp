// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "scenid/classifier.hpp"
#include "scenid/features.hpp"
#include "scenid/scenario_sim.hpp"
#include "scenid/sounding.hpp"

namespace scenid {

enum class EstimationMode { OracleCir, BemLs };

/// Which delays BEM-LS fits: the profile found by sounding the channel
/// (rows outside it stay zero), or every row of the 12-unit grid.
enum class DelayGridMode { Sounded, Full };

const char* to_string(EstimationMode mode);
EstimationMode parse_estimation_mode(const std::string& text);
const char* to_string(DelayGridMode mode);
DelayGridMode parse_delay_grid_mode(const std::string& text);

/// m-sequence sounding of each realization: `snapshots` probes of the
/// channel frozen at evenly spaced instants, each `periods` periods long
/// after a one-period cyclic prefix.
struct SoundingPlan {
    int register_length = 8;
    int snapshots = 16;
    int periods = 2;
    double threshold_factor = 0.05;
    double false_alarm = 1e-3;
};

struct DatasetSpec {
    std::vector<int> scenario_labels{1, 2, 3, 4, 5, 6};
    int vectors_per_condition = 20;
    std::vector<double> snr_list_db{0, 10, 20, 30, 40};
    bool include_noiseless = true;
    std::size_t samples_per_vector = 25600;
    SimConfig sim;
    EstimationMode estimation = EstimationMode::BemLs;
    std::uint64_t master_seed = 2018;
    std::size_t window_length = 512;
    DelayGridMode delay_grid = DelayGridMode::Sounded;
    SoundingPlan sounding;

    void validate() const;
    /// Conditions in generation order: noiseless first, then the SNR list.
    std::vector<std::optional<double>> conditions() const;
    std::size_t record_count() const;
    std::uint64_t fingerprint() const;
};

struct DatasetRecord {
    std::vector<double> feature;
    int label = 0;
    std::optional<double> snr_db; // empty = noiseless
    std::uint64_t realization_seed = 0;
};

struct Dataset {
    std::uint64_t fingerprint = 0;
    std::vector<DatasetRecord> records;
};

/// Seed of record (label, condition, index) under the master seed.
std::uint64_t realization_seed(std::uint64_t master_seed, int label, std::optional<double> snr_db, int index);

/// Known QPSK frame used for BEM-LS: one pseudo-random block of
/// `window_length` symbols repeated to `length`.
PilotPattern known_frame(std::uint64_t master_seed, std::size_t length, std::size_t window_length);

/// BEM-LS estimators shared across records, one per delay set.
class EstimatorPool {
public:
    EstimatorPool(double normalized_doppler, std::size_t window_length)
        : normalized_doppler_(normalized_doppler), window_length_(window_length) {}

    const BemLsEstimator& get(const std::vector<int>& delays);

private:
    double normalized_doppler_;
    std::size_t window_length_;
    std::mutex mu_;
    std::map<std::vector<int>, std::unique_ptr<BemLsEstimator>> pool_;
};

/// Probes of `cir` for the sounding step, noise at `snr_db`.
std::vector<ComplexSignal> sounding_probes(const CIRMatrix& cir, const MSequence& mseq, const SoundingPlan& plan,
                                           std::optional<double> snr_db, std::uint64_t seed);

/// One record's CIR estimate on the 12-row grid, exactly as
/// generate_dataset computes it.
CIREstimate simulate_cir_estimate(const DatasetSpec& spec, const ScenarioProfile& profile,
                                  std::optional<double> snr_db, std::uint64_t seed, EstimatorPool* pool = nullptr);

/// `threads` <= 1 runs inline. Output is independent of the thread count.
Dataset generate_dataset(const DatasetSpec& spec, int threads = 1);

std::string format_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

struct SplitResult {
    std::vector<DatasetRecord> train;
    std::map<double, std::vector<DatasetRecord>> test; // by SNR, ascending
    std::vector<std::string> warnings;
};

/// Train on every noiseless record, test on the rest grouped by SNR.
SplitResult split_train_test(const std::vector<DatasetRecord>& records);

LabeledSet to_labeled_set(const std::vector<DatasetRecord>& records);

using ConfusionMatrix = std::array<std::array<long, kScenarioCount>, kScenarioCount>; // [true][predicted]

struct SnrResult {
    double snr_db = 0.0;
    std::size_t count = 0;
    double accuracy = 0.0;
    ConfusionMatrix confusion{};
};

struct EvalReport {
    std::vector<SnrResult> per_snr;
    double average_accuracy = 0.0;
    std::vector<std::string> notices;
};

EvalReport evaluate(const MLPParams& params, const std::map<double, std::vector<DatasetRecord>>& test);

/// Delimiter-separated report: header row of SNRs plus "Avg", accuracy row
/// in percent, then one confusion block per SNR.
std::string format_report(const EvalReport& report);

struct ChannelProfileEstimate {
    OrderEstimate order;
    DelayAmplitudeEstimate paths;
};

/// Order estimation followed by relaxation with the estimated order over
/// every lag of the probe period.
ChannelProfileEstimate sound_and_profile(const ComplexSignal& received, const MSequence& local,
                                         const OrderOptions& order_options = {},
                                         const RelaxOptions& relax_options = {});

} // namespace scenid
