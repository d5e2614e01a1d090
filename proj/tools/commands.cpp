// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "scenid/classifier.hpp"
#include "scenid/config.hpp"
#include "scenid/error.hpp"
#include "scenid/features.hpp"
#include "scenid/io.hpp"
#include "scenid/pipeline.hpp"
#include "scenid/rng.hpp"

namespace scenid::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string output;
    bool print_config = false;
    // Subcommand inputs.
    std::string dataset;
    std::string model;
    std::string signal;
    std::string ddpdp;
};

struct LoadedConfig {
    json settings = json::object();
    json inputs = json::object();
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

LoadedConfig load_config(const Common& c, const std::string& subcommand, bool has_seed) {
    LoadedConfig cfg;
    if (!c.config_path.empty()) {
        const std::string text = io::read_file(c.config_path);
        cfg.settings = config::parse(text, c.config_path);
        const json raw = json::parse(text);
        if (raw.contains("resolved_config")) {
            const std::string recorded = raw.value("subcommand", "");
            require(recorded == subcommand, ErrorKind::InvalidArgument,
                    c.config_path + ": manifest of '" + recorded + "' given to '" + subcommand + "'");
            if (raw.contains("inputs")) cfg.inputs = raw.at("inputs");
        }
    }
    if (c.seed) {
        require(has_seed, ErrorKind::InvalidArgument, subcommand + " has no randomness; --seed does not apply");
        cfg.settings["seed"] = *c.seed;
    }
    return cfg;
}

std::string input_path(const std::string& flag, const LoadedConfig& cfg, const char* key) {
    if (!flag.empty()) return flag;
    if (cfg.inputs.contains(key)) return cfg.inputs.at(key).get<std::string>();
    fail(ErrorKind::InvalidArgument, std::string("--") + key + " is required");
}

class Manifest {
public:
    Manifest(std::string subcommand, const Common& c, json resolved)
        : j_{{"tool", "scenid"},
             {"version", kVersion},
             {"subcommand", std::move(subcommand)},
             {"config_path", c.config_path},
             {"threads", c.threads},
             {"resolved_config", std::move(resolved)},
             {"inputs", json::object()},
             {"outputs", json::array()},
             {"timings_s", json::object()}} {}

    void input(const char* key, const std::string& path) { j_["inputs"][key] = path; }
    void timing(const char* stage, double seconds) { j_["timings_s"][stage] = seconds; }
    json& extra(const char* key) { return j_[key]; }

    /// Writes `content` to `path` and records it with its content hash.
    void write_output(const std::string& path, const std::string& content) {
        io::write_file(path, content);
        j_["outputs"].push_back({{"path", path}, {"fnv1a64", io::hex64(fnv1a64(content.data(), content.size()))}});
    }

    void save(const std::string& output) const { io::write_file(output + ".manifest.json", j_.dump(2) + "\n"); }

private:
    json j_;
};

std::string output_or(const Common& c, const char* fallback) { return c.output.empty() ? fallback : c.output; }

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

int cmd_dataset(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "dataset", true);
    const DatasetSpec spec = config::dataset_spec(cfg.settings);
    const json resolved = config::to_json(spec);
    if (c.print_config) {
        print_json(out, resolved);
        return 0;
    }
    const std::string path = output_or(c, "dataset.txt");
    Manifest m("dataset", c, resolved);
    auto t0 = Clock::now();
    const Dataset ds = generate_dataset(spec, c.threads);
    m.timing("generate", seconds_since(t0));
    t0 = Clock::now();
    m.write_output(path, format_dataset(ds));
    m.timing("write", seconds_since(t0));
    m.extra("records") = ds.records.size();
    m.save(path);
    out << "wrote " << ds.records.size() << " records to " << path << "\n";
    return 0;
}

int cmd_train(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "train", true);
    const config::TrainSettings settings = config::train_settings(cfg.settings);
    const json resolved = config::to_json(settings);
    if (c.print_config) {
        print_json(out, resolved);
        return 0;
    }
    const std::string dataset_path = input_path(c.dataset, cfg, "dataset");
    const std::string path = output_or(c, "model.txt");
    Manifest m("train", c, resolved);
    m.input("dataset", dataset_path);

    auto t0 = Clock::now();
    const Dataset ds = load_dataset(dataset_path);
    m.timing("load", seconds_since(t0));
    SplitResult split;
    try {
        split = split_train_test(ds.records);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidSplit) throw;
        throw Error(e.kind(), std::string(e.what()) +
                                  "; training uses the noiseless records, so generate the dataset with "
                                  "include_noiseless = true");
    }
    const LabeledSet set = to_labeled_set(split.train);
    std::vector<int> sizes{static_cast<int>(set.inputs.rows())};
    sizes.insert(sizes.end(), settings.hidden.begin(), settings.hidden.end());
    sizes.push_back(kScenarioCount);

    t0 = Clock::now();
    auto [params, report] = train(init_mlp(sizes, settings.train.seed), set, settings.train);
    m.timing("train", seconds_since(t0));

    std::ostringstream model;
    write_model(model, params);
    m.write_output(path, model.str());
    m.extra("train_records") = set.size();
    m.extra("epochs_run") = report.epoch_loss.size();
    m.extra("train_accuracy") = report.train_accuracy;
    m.extra("loss_curve") = report.epoch_loss;
    m.save(path);
    out << "trained " << report.epoch_loss.size() << " epochs on " << set.size() << " records, final loss "
        << io::format_double(report.epoch_loss.back()) << ", training accuracy "
        << io::format_double(100.0 * report.train_accuracy) << " %\n";
    out << "wrote model to " << path << "\n";
    return 0;
}

int cmd_eval(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "eval", false);
    require(cfg.settings.empty(), ErrorKind::Parse, "eval takes no config keys");
    if (c.print_config) {
        print_json(out, json::object());
        return 0;
    }
    const std::string model_path = input_path(c.model, cfg, "model");
    const std::string dataset_path = input_path(c.dataset, cfg, "dataset");
    const std::string path = output_or(c, "report.csv");
    Manifest m("eval", c, json::object());
    m.input("model", model_path);
    m.input("dataset", dataset_path);

    auto t0 = Clock::now();
    const MLPParams params = load_model(model_path);
    const Dataset ds = load_dataset(dataset_path);
    m.timing("load", seconds_since(t0));
    std::map<double, std::vector<DatasetRecord>> test;
    for (const auto& r : ds.records)
        if (r.snr_db) test[*r.snr_db].push_back(r);
    require(!test.empty(), ErrorKind::InvalidArgument, dataset_path + ": no records with a finite SNR to evaluate");
    if (!ds.records.empty() && static_cast<int>(ds.records.front().feature.size()) != params.input_size())
        fail(ErrorKind::Dimension, "model '" + model_path + "' expects " + std::to_string(params.input_size()) +
                                       " features but dataset '" + dataset_path + "' has " +
                                       std::to_string(ds.records.front().feature.size()));

    t0 = Clock::now();
    const EvalReport report = evaluate(params, test);
    m.timing("evaluate", seconds_since(t0));
    const std::string text = format_report(report);
    m.write_output(path, text);
    json per_snr = json::object();
    for (const auto& r : report.per_snr) per_snr[io::format_double(r.snr_db)] = r.accuracy;
    m.extra("accuracy") = per_snr;
    m.extra("average_accuracy") = report.average_accuracy;
    m.save(path);

    std::istringstream lines(text);
    std::string line;
    for (int i = 0; i < 2 && std::getline(lines, line); ++i) out << line << "\n";
    for (const auto& n : report.notices) out << "note: " << n << "\n";
    out << "wrote report to " << path << "\n";
    return 0;
}

int cmd_sound(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "sound", false);
    const config::SoundSettings settings = config::sound_settings(cfg.settings);
    const json resolved = config::to_json(settings);
    if (c.print_config) {
        print_json(out, resolved);
        return 0;
    }
    const std::string signal_path = input_path(c.signal, cfg, "signal");
    Manifest m("sound", c, resolved);
    m.input("signal", signal_path);

    auto t0 = Clock::now();
    const ComplexSignal received = io::load_signal(signal_path);
    const MSequence mseq = settings.sequence();
    const ChannelProfileEstimate est = sound_and_profile(received, mseq, settings.order, settings.relax);
    m.timing("estimate", seconds_since(t0));

    const double unit_us = received.sample_period_s * 1e6;
    out << "order " << est.order.order << "\n";
    out << "threshold " << io::format_double(est.order.threshold) << "\n";
    out << "delay_units,delay_us,magnitude,phase_rad\n";
    json paths = json::array();
    for (const auto& p : est.paths.paths) {
        const double delay_us = p.delay_units * unit_us;
        out << p.delay_units << ',' << io::format_double(delay_us) << ',' << io::format_double(std::abs(p.amplitude))
            << ',' << io::format_double(std::arg(p.amplitude)) << "\n";
        paths.push_back({{"delay_units", p.delay_units},
                         {"delay_us", delay_us},
                         {"re", p.amplitude.real()},
                         {"im", p.amplitude.imag()},
                         {"magnitude", std::abs(p.amplitude)},
                         {"phase_rad", std::arg(p.amplitude)}});
    }
    out << "residual_cost " << io::format_double(est.paths.residual_cost) << "\n";

    if (!c.output.empty()) {
        const json result{{"order", est.order.order},
                          {"threshold", est.order.threshold},
                          {"peak_lags", est.order.peak_lags},
                          {"peak_values", est.order.peak_values},
                          {"paths", paths},
                          {"residual_cost", est.paths.residual_cost},
                          {"iterations", est.paths.iterations}};
        m.write_output(c.output, result.dump(2) + "\n");
        m.save(c.output);
    }
    return 0;
}

std::string format_ddpdp(const DDPDP& d, const std::vector<int>& delays) {
    std::string s = "delay_us";
    for (int b = 0; b < kEnvelopeBins; ++b) s += ",bin_" + io::format_double(b * d.bin_width);
    s += "\n";
    for (Eigen::Index l = 0; l < d.rows(); ++l) {
        s += io::format_double(delays[static_cast<std::size_t>(l)] * d.delay_unit_us);
        for (int b = 0; b < kEnvelopeBins; ++b) s += "," + io::format_double(d.bins(l, b));
        s += "\n";
    }
    return s;
}

int cmd_estimate(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "estimate", true);
    const config::EstimateSettings settings = config::estimate_settings(cfg.settings);
    const json resolved = config::to_json(settings);
    if (c.print_config) {
        print_json(out, resolved);
        return 0;
    }
    const std::string signal_path = input_path(c.signal, cfg, "signal");
    const std::string path = output_or(c, "cir.txt");
    Manifest m("estimate", c, resolved);
    m.input("signal", signal_path);

    auto t0 = Clock::now();
    const ComplexSignal received = io::load_signal(signal_path);
    const PilotPattern frame = known_frame(settings.frame_seed, received.samples.size(), settings.window_length);
    const BemLsEstimator estimator(delay_range(0, settings.delay_rows), settings.normalized_doppler,
                                   settings.window_length);
    const CIREstimate est = estimator.estimate(received, frame);
    m.timing("estimate", seconds_since(t0));

    m.write_output(path, format_cir(est.gains, est.delay_grid, 1.0 / received.sample_period_s));
    if (!c.ddpdp.empty()) m.write_output(c.ddpdp, format_ddpdp(build_ddpdp(est), est.delay_grid));
    m.save(path);
    out << "estimated " << est.gains.rows() << " delay rows over " << est.gains.cols() << " samples; wrote " << path
        << "\n";
    return 0;
}

int cmd_simulate(const Common& c, std::ostream& out) {
    const LoadedConfig cfg = load_config(c, "simulate", true);
    const config::SimulateSettings s = config::simulate_settings(cfg.settings);
    const json resolved = config::to_json(s);
    if (c.print_config) {
        print_json(out, resolved);
        return 0;
    }
    const std::string path = output_or(c, "simulated.txt");
    Manifest m("simulate", c, resolved);
    const ScenarioProfile profile = load_profile(s.scenario).normalized();
    const double ts = s.sim.sample_period_s();
    const double rate = s.sim.symbol_rate_hz * s.sim.samples_per_symbol;

    auto t0 = Clock::now();
    std::string content;
    switch (s.output) {
    case config::SimulateSettings::Output::Fading: {
        const CIRMatrix cir = generate_fading(profile, s.n_samples, s.sim, derive_seed(s.frame_seed, {1}));
        content = format_cir(cir.gains, cir.delay_units, rate);
        break;
    }
    case config::SimulateSettings::Output::Frame: {
        const CIRMatrix cir = generate_fading(profile, s.n_samples, s.sim, derive_seed(s.frame_seed, {1}));
        const PilotPattern frame = known_frame(s.frame_seed, s.n_samples, s.window_length);
        const ComplexSignal rx =
            add_awgn(apply_channel(ComplexSignal{frame.symbols, ts}, cir), s.snr_db, derive_seed(s.frame_seed, {2}));
        content = io::format_signal(rx);
        break;
    }
    case config::SimulateSettings::Output::Probe: {
        // The channel is held at its first-sample gains for the whole probe.
        MSequence mseq = generate_mseq(s.register_length, default_feedback_taps(s.register_length), 1);
        mseq.chip_period_s = ts;
        const CIRMatrix cir = generate_fading(profile, 1, s.sim, derive_seed(s.frame_seed, {1}));
        SoundingPlan plan;
        plan.register_length = s.register_length;
        plan.snapshots = 1;
        plan.periods = static_cast<int>(s.probe_periods);
        content = io::format_signal(sounding_probes(cir, mseq, plan, s.snr_db, derive_seed(s.frame_seed, {2}))[0]);
        break;
    }
    }
    m.timing("simulate", seconds_since(t0));
    m.write_output(path, content);
    m.save(path);
    out << "wrote " << path << "\n";
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool seeded) {
    sub->add_option("--config", c.config_path, "JSON config file or a run manifest");
    if (seeded) sub->add_option("--seed", c.seed, "Overrides the config seed");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--output", c.output, "Output file");
    sub->add_flag("--print-config", c.print_config, "Print the resolved config and exit");
}

} // namespace

std::string format_cir(const Eigen::MatrixXcd& gains, const std::vector<int>& delays, double sample_rate_hz) {
    std::string s = "scenid-cir 1 rows=" + std::to_string(gains.rows()) + " samples=" + std::to_string(gains.cols()) +
                    " sample_rate_hz=" + io::format_double(sample_rate_hz) + "\ndelays";
    for (int d : delays) s += " " + std::to_string(d);
    s += "\n";
    for (Eigen::Index n = 0; n < gains.cols(); ++n) {
        for (Eigen::Index l = 0; l < gains.rows(); ++l) {
            if (l) s += ' ';
            s += io::format_double(gains(l, n).real()) + " " + io::format_double(gains(l, n).imag());
        }
        s += "\n";
    }
    return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scenario identification of time-varying multipath channels", "scenid"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common c;

    auto* dataset = app.add_subcommand("dataset", "Generate a labeled D-DPDP dataset");
    add_common(dataset, c, true);

    auto* train = app.add_subcommand("train", "Train the classifier on the noiseless records of a dataset");
    add_common(train, c, true);
    train->add_option("--dataset", c.dataset, "Dataset file");

    auto* eval = app.add_subcommand("eval", "Accuracy per SNR of a model on a dataset");
    add_common(eval, c, false);
    eval->add_option("--model", c.model, "Model file");
    eval->add_option("--dataset", c.dataset, "Dataset file");

    auto* sound = app.add_subcommand("sound", "Channel order and path delays from an m-sequence probe");
    add_common(sound, c, false);
    sound->add_option("--signal", c.signal, "Received probe signal file");

    auto* estimate = app.add_subcommand("estimate", "BEM-LS CIR estimate of a received known frame");
    add_common(estimate, c, true);
    estimate->add_option("--signal", c.signal, "Received frame signal file");
    estimate->add_option("--ddpdp", c.ddpdp, "Also write the D-DPDP matrix as CSV");

    auto* simulate = app.add_subcommand("simulate", "Fading traces, received frames or received probes");
    add_common(simulate, c, true);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (dataset->parsed()) return cmd_dataset(c, out);
        if (train->parsed()) return cmd_train(c, out);
        if (eval->parsed()) return cmd_eval(c, out);
        if (sound->parsed()) return cmd_sound(c, out);
        if (estimate->parsed()) return cmd_estimate(c, out);
        if (simulate->parsed()) return cmd_simulate(c, out);
    } catch (const std::exception& e) {
        err << "scenid: error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace scenid::cli
