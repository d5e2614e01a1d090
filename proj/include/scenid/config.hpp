// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenid/classifier.hpp"
#include "scenid/pipeline.hpp"

namespace scenid::config {

using nlohmann::json;

/// Parses JSON text; syntax errors are reported with line and column. A
/// run manifest is accepted wherever a config is: its `resolved_config`
/// object is used.
json parse(const std::string& text, const std::string& source);
json load(const std::string& path);

DatasetSpec dataset_spec(const json& j);
json to_json(const DatasetSpec& spec);

struct TrainSettings {
    std::vector<int> hidden{64, 48, 32, 24};
    TrainConfig train;
};
TrainSettings train_settings(const json& j);
json to_json(const TrainSettings& settings);

struct SoundSettings {
    int register_length = 8;
    std::vector<int> feedback_taps; // empty = default polynomial
    std::uint32_t initial_state = 1;
    OrderOptions order;
    RelaxOptions relax;

    MSequence sequence() const;
};
SoundSettings sound_settings(const json& j);
json to_json(const SoundSettings& settings);

struct EstimateSettings {
    double normalized_doppler = 0.004;
    std::size_t window_length = 512;
    std::uint64_t frame_seed = 2018;
    int delay_rows = kMaxTaps;
};
EstimateSettings estimate_settings(const json& j);
json to_json(const EstimateSettings& settings);

struct SimulateSettings {
    enum class Output { Fading, Frame, Probe };
    int scenario = 1;
    std::size_t n_samples = 25600;
    SimConfig sim;
    std::optional<double> snr_db;
    Output output = Output::Fading;
    std::size_t window_length = 512;
    std::uint64_t frame_seed = 2018;
    int register_length = 8;
    std::size_t probe_periods = 4;
};
SimulateSettings simulate_settings(const json& j);
json to_json(const SimulateSettings& settings);

} // namespace scenid::config
