// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/config.hpp"

#include <set>

#include "scenid/error.hpp"
#include "scenid/io.hpp"

namespace scenid::config {

json parse(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, source + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Parse, source + ": top level must be a JSON object");
    if (j.contains("resolved_config")) return j.at("resolved_config");
    return j;
}

json load(const std::string& path) { return parse(io::read_file(path), path); }

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
    std::set<std::string> names(known.begin(), known.end());
    for (const auto& [key, _] : j.items())
        if (!names.count(key)) fail(ErrorKind::Parse, std::string(what) + " config: unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const char* what) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string(what) + " config: key '" + key + "': " + e.what());
    }
}

} // namespace

DatasetSpec dataset_spec(const json& j) {
    reject_unknown(j,
                   {"scenarios", "vectors_per_condition", "snr_db", "include_noiseless", "samples_per_vector",
                    "symbol_rate_hz", "normalized_doppler", "samples_per_symbol", "estimation", "seed",
                    "window_length", "delay_grid", "probe_register_length", "probe_snapshots", "probe_periods",
                    "probe_threshold_factor", "probe_false_alarm"},
                   "dataset");
    DatasetSpec s;
    read(j, "scenarios", s.scenario_labels, "dataset");
    read(j, "vectors_per_condition", s.vectors_per_condition, "dataset");
    read(j, "snr_db", s.snr_list_db, "dataset");
    read(j, "include_noiseless", s.include_noiseless, "dataset");
    read(j, "samples_per_vector", s.samples_per_vector, "dataset");
    read(j, "symbol_rate_hz", s.sim.symbol_rate_hz, "dataset");
    read(j, "normalized_doppler", s.sim.normalized_doppler, "dataset");
    read(j, "samples_per_symbol", s.sim.samples_per_symbol, "dataset");
    std::string mode = to_string(s.estimation);
    read(j, "estimation", mode, "dataset");
    s.estimation = parse_estimation_mode(mode);
    read(j, "seed", s.master_seed, "dataset");
    read(j, "window_length", s.window_length, "dataset");
    std::string grid = to_string(s.delay_grid);
    read(j, "delay_grid", grid, "dataset");
    s.delay_grid = parse_delay_grid_mode(grid);
    read(j, "probe_register_length", s.sounding.register_length, "dataset");
    read(j, "probe_snapshots", s.sounding.snapshots, "dataset");
    read(j, "probe_periods", s.sounding.periods, "dataset");
    read(j, "probe_threshold_factor", s.sounding.threshold_factor, "dataset");
    read(j, "probe_false_alarm", s.sounding.false_alarm, "dataset");
    s.validate();
    return s;
}

json to_json(const DatasetSpec& s) {
    return json{{"scenarios", s.scenario_labels},
                {"vectors_per_condition", s.vectors_per_condition},
                {"snr_db", s.snr_list_db},
                {"include_noiseless", s.include_noiseless},
                {"samples_per_vector", s.samples_per_vector},
                {"symbol_rate_hz", s.sim.symbol_rate_hz},
                {"normalized_doppler", s.sim.normalized_doppler},
                {"samples_per_symbol", s.sim.samples_per_symbol},
                {"estimation", to_string(s.estimation)},
                {"seed", s.master_seed},
                {"window_length", s.window_length},
                {"delay_grid", to_string(s.delay_grid)},
                {"probe_register_length", s.sounding.register_length},
                {"probe_snapshots", s.sounding.snapshots},
                {"probe_periods", s.sounding.periods},
                {"probe_threshold_factor", s.sounding.threshold_factor},
                {"probe_false_alarm", s.sounding.false_alarm}};
}

TrainSettings train_settings(const json& j) {
    reject_unknown(j,
                   {"hidden_layers", "learning_rate", "momentum", "epochs", "batch_size", "seed", "plateau_patience",
                    "plateau_tol"},
                   "train");
    TrainSettings s;
    read(j, "hidden_layers", s.hidden, "train");
    read(j, "learning_rate", s.train.learning_rate, "train");
    read(j, "momentum", s.train.momentum, "train");
    read(j, "epochs", s.train.epochs, "train");
    read(j, "batch_size", s.train.batch_size, "train");
    read(j, "seed", s.train.seed, "train");
    read(j, "plateau_patience", s.train.plateau_patience, "train");
    read(j, "plateau_tol", s.train.plateau_tol, "train");
    require(!s.hidden.empty(), ErrorKind::InvalidArgument, "train config: hidden_layers must not be empty");
    s.train.validate();
    return s;
}

json to_json(const TrainSettings& s) {
    return json{{"hidden_layers", s.hidden},           {"learning_rate", s.train.learning_rate},
                {"momentum", s.train.momentum},        {"epochs", s.train.epochs},
                {"batch_size", s.train.batch_size},    {"seed", s.train.seed},
                {"plateau_patience", s.train.plateau_patience}, {"plateau_tol", s.train.plateau_tol}};
}

MSequence SoundSettings::sequence() const {
    auto taps = feedback_taps.empty() ? default_feedback_taps(register_length) : feedback_taps;
    return generate_mseq(register_length, taps, initial_state);
}

SoundSettings sound_settings(const json& j) {
    reject_unknown(j,
                   {"register_length", "feedback_taps", "initial_state", "threshold_factor", "false_alarm",
                    "max_outer_iters", "tol"},
                   "sound");
    SoundSettings s;
    read(j, "register_length", s.register_length, "sound");
    read(j, "feedback_taps", s.feedback_taps, "sound");
    read(j, "initial_state", s.initial_state, "sound");
    read(j, "threshold_factor", s.order.threshold_factor, "sound");
    read(j, "false_alarm", s.order.false_alarm, "sound");
    read(j, "max_outer_iters", s.relax.max_outer_iters, "sound");
    read(j, "tol", s.relax.tol, "sound");
    return s;
}

json to_json(const SoundSettings& s) {
    return json{{"register_length", s.register_length},
                {"feedback_taps", s.feedback_taps.empty() ? default_feedback_taps(s.register_length) : s.feedback_taps},
                {"initial_state", s.initial_state},
                {"threshold_factor", s.order.threshold_factor},
                {"false_alarm", s.order.false_alarm},
                {"max_outer_iters", s.relax.max_outer_iters},
                {"tol", s.relax.tol}};
}

EstimateSettings estimate_settings(const json& j) {
    reject_unknown(j, {"normalized_doppler", "window_length", "seed", "delay_rows"}, "estimate");
    EstimateSettings s;
    read(j, "normalized_doppler", s.normalized_doppler, "estimate");
    read(j, "window_length", s.window_length, "estimate");
    read(j, "seed", s.frame_seed, "estimate");
    read(j, "delay_rows", s.delay_rows, "estimate");
    require(s.delay_rows >= 1, ErrorKind::InvalidArgument, "estimate config: delay_rows must be >= 1");
    return s;
}

json to_json(const EstimateSettings& s) {
    return json{{"normalized_doppler", s.normalized_doppler},
                {"window_length", s.window_length},
                {"seed", s.frame_seed},
                {"delay_rows", s.delay_rows}};
}

namespace {
const char* output_name(SimulateSettings::Output o) {
    switch (o) {
    case SimulateSettings::Output::Fading: return "fading";
    case SimulateSettings::Output::Frame: return "frame";
    case SimulateSettings::Output::Probe: return "probe";
    }
    return "fading";
}
} // namespace

SimulateSettings simulate_settings(const json& j) {
    reject_unknown(j,
                   {"scenario", "n_samples", "symbol_rate_hz", "normalized_doppler", "seed", "snr_db", "output",
                    "window_length", "register_length", "probe_periods"},
                   "simulate");
    SimulateSettings s;
    read(j, "scenario", s.scenario, "simulate");
    read(j, "n_samples", s.n_samples, "simulate");
    read(j, "symbol_rate_hz", s.sim.symbol_rate_hz, "simulate");
    read(j, "normalized_doppler", s.sim.normalized_doppler, "simulate");
    read(j, "seed", s.frame_seed, "simulate");
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
        double v = 0.0;
        read(j, "snr_db", v, "simulate");
        s.snr_db = v;
    }
    std::string out = output_name(s.output);
    read(j, "output", out, "simulate");
    if (out == "fading")
        s.output = SimulateSettings::Output::Fading;
    else if (out == "frame")
        s.output = SimulateSettings::Output::Frame;
    else if (out == "probe")
        s.output = SimulateSettings::Output::Probe;
    else
        fail(ErrorKind::Parse, "simulate config: output must be fading, frame or probe");
    read(j, "window_length", s.window_length, "simulate");
    read(j, "register_length", s.register_length, "simulate");
    read(j, "probe_periods", s.probe_periods, "simulate");
    s.sim.seed = s.frame_seed;
    s.sim.validate();
    require(s.n_samples >= 1, ErrorKind::InvalidArgument, "simulate config: n_samples must be >= 1");
    require(s.probe_periods >= 1, ErrorKind::InvalidArgument, "simulate config: probe_periods must be >= 1");
    return s;
}

json to_json(const SimulateSettings& s) {
    return json{{"scenario", s.scenario},
                {"n_samples", s.n_samples},
                {"symbol_rate_hz", s.sim.symbol_rate_hz},
                {"normalized_doppler", s.sim.normalized_doppler},
                {"seed", s.frame_seed},
                {"snr_db", s.snr_db ? json(*s.snr_db) : json(nullptr)},
                {"output", output_name(s.output)},
                {"window_length", s.window_length},
                {"register_length", s.register_length},
                {"probe_periods", s.probe_periods}};
}

} // namespace scenid::config
