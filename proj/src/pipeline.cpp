// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/pipeline.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "scenid/error.hpp"
#include "scenid/io.hpp"
#include "scenid/rng.hpp"

namespace scenid {

const char* to_string(EstimationMode mode) {
    return mode == EstimationMode::OracleCir ? "oracle-cir" : "bem-ls";
}

EstimationMode parse_estimation_mode(const std::string& text) {
    if (text == "oracle-cir") return EstimationMode::OracleCir;
    if (text == "bem-ls") return EstimationMode::BemLs;
    fail(ErrorKind::InvalidArgument, "estimation must be 'oracle-cir' or 'bem-ls', got '" + text + "'");
}

const char* to_string(DelayGridMode mode) { return mode == DelayGridMode::Sounded ? "sounded" : "full"; }

DelayGridMode parse_delay_grid_mode(const std::string& text) {
    if (text == "sounded") return DelayGridMode::Sounded;
    if (text == "full") return DelayGridMode::Full;
    fail(ErrorKind::InvalidArgument, "delay_grid must be 'sounded' or 'full', got '" + text + "'");
}

// ---------------------------------------------------------------- spec

void DatasetSpec::validate() const {
    require(!scenario_labels.empty(), ErrorKind::InvalidArgument, "no scenarios selected");
    for (int l : scenario_labels)
        require(l >= 1 && l <= kScenarioCount, ErrorKind::InvalidArgument, "scenario label " + std::to_string(l) + " outside 1..6");
    require(vectors_per_condition >= 1, ErrorKind::InvalidArgument, "vectors_per_condition must be >= 1");
    require(samples_per_vector >= static_cast<std::size_t>(kEnvelopeBins), ErrorKind::InvalidArgument,
            "samples_per_vector must be >= " + std::to_string(kEnvelopeBins));
    require(include_noiseless || !snr_list_db.empty(), ErrorKind::InvalidArgument, "no conditions selected");
    for (double s : snr_list_db) require(std::isfinite(s), ErrorKind::InvalidArgument, "SNR values must be finite");
    require(window_length >= 1, ErrorKind::InvalidArgument, "window_length must be >= 1");
    require(sounding.snapshots >= 1 && sounding.periods >= 1, ErrorKind::InvalidArgument,
            "sounding needs at least one snapshot and one period");
    require(sounding.register_length >= 4, ErrorKind::InvalidArgument, "sounding register length must be >= 4");
    sim.validate();
}

std::vector<std::optional<double>> DatasetSpec::conditions() const {
    std::vector<std::optional<double>> out;
    if (include_noiseless) out.emplace_back(std::nullopt);
    for (double s : snr_list_db) out.emplace_back(s);
    return out;
}

std::size_t DatasetSpec::record_count() const {
    return scenario_labels.size() * conditions().size() * static_cast<std::size_t>(vectors_per_condition);
}

std::uint64_t DatasetSpec::fingerprint() const {
    std::ostringstream os;
    os << "labels";
    for (int l : scenario_labels) os << ' ' << l;
    os << " vpc " << vectors_per_condition << " snr";
    for (double s : snr_list_db) os << ' ' << io::format_double(s);
    os << " noiseless " << include_noiseless << " n " << samples_per_vector << " rate "
       << io::format_double(sim.symbol_rate_hz) << " nu " << io::format_double(sim.normalized_doppler) << " sps "
       << sim.samples_per_symbol << " est " << to_string(estimation) << " seed " << master_seed << " win "
       << window_length << " grid " << to_string(delay_grid) << " probe " << sounding.register_length << ' '
       << sounding.snapshots << ' ' << sounding.periods << ' ' << io::format_double(sounding.threshold_factor) << ' '
       << io::format_double(sounding.false_alarm);
    const std::string s = os.str();
    return fnv1a64(s.data(), s.size());
}

std::uint64_t realization_seed(std::uint64_t master_seed, int label, std::optional<double> snr_db, int index) {
    const std::uint64_t cond = snr_db ? std::bit_cast<std::uint64_t>(*snr_db) : 0xfffffffffffffffULL;
    return derive_seed(master_seed, {static_cast<std::uint64_t>(label), cond, static_cast<std::uint64_t>(index)});
}

PilotPattern known_frame(std::uint64_t master_seed, std::size_t length, std::size_t window_length) {
    std::mt19937_64 gen(derive_seed(master_seed, {0x6b6e6f776eULL}));
    std::vector<std::uint8_t> bits(2 * window_length);
    for (auto& b : bits) b = static_cast<std::uint8_t>(gen() >> 63);
    const CVector block = modulate_qpsk(bits, PilotSpec{}).signal.samples;
    CVector symbols(length);
    for (std::size_t i = 0; i < length; ++i) symbols[i] = block[i % block.size()];
    return PilotPattern::all_known(std::move(symbols));
}

// ------------------------------------------------------------- generation

const BemLsEstimator& EstimatorPool::get(const std::vector<int>& delays) {
    std::lock_guard lock(mu_);
    auto& slot = pool_[delays];
    if (!slot) slot = std::make_unique<BemLsEstimator>(delays, normalized_doppler_, window_length_);
    return *slot;
}

std::vector<ComplexSignal> sounding_probes(const CIRMatrix& cir, const MSequence& mseq, const SoundingPlan& plan,
                                           std::optional<double> snr_db, std::uint64_t seed) {
    const std::size_t period = mseq.period();
    const ComplexSignal tx = periodic_probe(mseq, static_cast<std::size_t>(plan.periods) + 1);
    std::vector<ComplexSignal> probes;
    for (int s = 0; s < plan.snapshots; ++s) {
        const auto at = static_cast<Eigen::Index>(static_cast<std::size_t>(s) * static_cast<std::size_t>(cir.samples()) /
                                                  static_cast<std::size_t>(plan.snapshots));
        CIRMatrix frozen;
        frozen.delay_units = cir.delay_units;
        frozen.sample_period_s = cir.sample_period_s;
        frozen.gains = cir.gains.col(at).replicate(1, static_cast<Eigen::Index>(tx.size()));
        ComplexSignal rx = apply_channel(tx, frozen);
        rx.samples.erase(rx.samples.begin(), rx.samples.begin() + static_cast<long>(period));
        probes.push_back(add_awgn(rx, snr_db, derive_seed(seed, {static_cast<std::uint64_t>(s)})));
    }
    return probes;
}

CIREstimate simulate_cir_estimate(const DatasetSpec& spec, const ScenarioProfile& profile,
                                  std::optional<double> snr_db, std::uint64_t seed, EstimatorPool* pool) {
    const ScenarioProfile unit = profile.normalized();
    CIRMatrix cir = generate_fading(unit, spec.samples_per_vector, spec.sim, derive_seed(seed, {1}));
    if (spec.estimation == EstimationMode::OracleCir) return to_grid(cir);

    std::vector<int> delays = delay_range(0, kMaxTaps);
    if (spec.delay_grid == DelayGridMode::Sounded) {
        const MSequence mseq = generate_mseq(spec.sounding.register_length,
                                             default_feedback_taps(spec.sounding.register_length), 1);
        auto probes = sounding_probes(cir, mseq, spec.sounding, snr_db, derive_seed(seed, {3}));
        DelayProfile found = estimate_delay_profile(
            probes, mseq, OrderOptions{spec.sounding.threshold_factor, spec.sounding.false_alarm});
        delays.clear();
        for (int d : found.delays)
            if (d < kMaxTaps) delays.push_back(d);
    }

    CIREstimate grid;
    grid.source = CIREstimate::Source::BemLs;
    grid.delay_grid = delay_range(0, kMaxTaps);
    grid.gains = Eigen::MatrixXcd::Zero(kMaxTaps, static_cast<Eigen::Index>(spec.samples_per_vector));
    if (delays.empty()) return grid;

    std::optional<EstimatorPool> local;
    if (!pool) pool = &local.emplace(spec.sim.normalized_doppler, spec.window_length);
    const PilotPattern frame = known_frame(spec.master_seed, spec.samples_per_vector, spec.window_length);
    ComplexSignal tx{frame.symbols, spec.sim.sample_period_s()};
    ComplexSignal rx = add_awgn(apply_channel(tx, cir), snr_db, derive_seed(seed, {2}));
    CIREstimate est = pool->get(delays).estimate(rx, frame);
    for (std::size_t l = 0; l < delays.size(); ++l)
        grid.gains.row(delays[l]) = est.gains.row(static_cast<Eigen::Index>(l));
    return grid;
}

Dataset generate_dataset(const DatasetSpec& spec, int threads) {
    spec.validate();
    struct Job {
        int label;
        std::optional<double> snr;
        int index;
    };
    std::vector<Job> jobs;
    for (int label : spec.scenario_labels)
        for (const auto& cond : spec.conditions())
            for (int i = 0; i < spec.vectors_per_condition; ++i) jobs.push_back({label, cond, i});

    std::vector<ScenarioProfile> profiles;
    for (int label = 1; label <= kScenarioCount; ++label) profiles.push_back(load_profile(label));
    EstimatorPool estimators(spec.sim.normalized_doppler, spec.window_length);

    Dataset ds;
    ds.fingerprint = spec.fingerprint();
    ds.records.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[j];
            try {
                DatasetRecord rec;
                rec.label = job.label;
                rec.snr_db = job.snr;
                rec.realization_seed = realization_seed(spec.master_seed, job.label, job.snr, job.index);
                CIREstimate est = simulate_cir_estimate(spec, profiles[static_cast<std::size_t>(job.label - 1)], job.snr,
                                                        rec.realization_seed, &estimators);
                rec.feature = flatten(build_ddpdp(est)).values;
                ds.records[j] = std::move(rec);
            } catch (const Error& e) {
                std::lock_guard lock(error_mu);
                if (!error) {
                    std::string snr = job.snr ? io::format_double(*job.snr) + " dB" : "noiseless";
                    error = std::make_exception_ptr(
                        Error(e.kind(), std::string(e.what()) + " (scenario " + std::to_string(job.label) + ", SNR " +
                                            snr + ", index " + std::to_string(job.index) + ")"));
                }
                next = jobs.size();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return ds;
}

// ---------------------------------------------------------------- dataset file

std::string format_dataset(const Dataset& dataset) {
    const std::size_t dim = dataset.records.empty() ? static_cast<std::size_t>(kFeatureLength)
                                                    : dataset.records.front().feature.size();
    std::string out = "scenid-dataset 1 fingerprint=" + io::hex64(dataset.fingerprint) + " dim=" + std::to_string(dim) +
                      " records=" + std::to_string(dataset.records.size()) + "\n";
    for (const auto& r : dataset.records) {
        require(r.feature.size() == dim, ErrorKind::Dimension, "records differ in feature length");
        out += std::to_string(r.label);
        out += ' ';
        out += r.snr_db ? io::format_double(*r.snr_db) : std::string("noiseless");
        out += ' ';
        out += std::to_string(r.realization_seed);
        for (double v : r.feature) {
            out += ' ';
            out += io::format_double(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string_view header_value(const std::vector<std::string_view>& fields, std::string_view key) {
    for (auto f : fields)
        if (f.size() > key.size() && f.substr(0, key.size()) == key && f[key.size()] == '=')
            return f.substr(key.size() + 1);
    fail(ErrorKind::Parse, "dataset line 1: missing '" + std::string(key) + "='");
}

} // namespace

Dataset parse_dataset(std::string_view text) {
    std::size_t pos = 0;
    int line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view line;
    if (!next_line(line)) fail(ErrorKind::Parse, "dataset file is empty");
    auto head = fields_of(line);
    if (head.size() < 2 || head[0] != "scenid-dataset" || head[1] != "1")
        fail(ErrorKind::Parse, "dataset line 1: expected 'scenid-dataset 1' header");
    Dataset ds;
    ds.fingerprint = std::stoull(std::string(header_value(head, "fingerprint")), nullptr, 16);
    const std::uint64_t dim = io::parse_u64(header_value(head, "dim"), "dataset line 1 dim");
    const std::uint64_t count = io::parse_u64(header_value(head, "records"), "dataset line 1 records");

    while (next_line(line)) {
        auto f = fields_of(line);
        if (f.empty()) continue;
        const std::string ctx = "dataset line " + std::to_string(line_no);
        if (f.size() != dim + 3)
            fail(ErrorKind::Parse, ctx + ": expected " + std::to_string(dim + 3) + " fields, found " + std::to_string(f.size()));
        DatasetRecord r;
        r.label = static_cast<int>(io::parse_u64(f[0], ctx + " label"));
        if (r.label < 1 || r.label > kScenarioCount) fail(ErrorKind::Parse, ctx + ": label outside 1..6");
        if (f[1] != "noiseless") r.snr_db = io::parse_double(f[1], ctx + " snr");
        r.realization_seed = io::parse_u64(f[2], ctx + " seed");
        r.feature.reserve(dim);
        for (std::size_t i = 3; i < f.size(); ++i) r.feature.push_back(io::parse_double(f[i], ctx));
        ds.records.push_back(std::move(r));
    }
    if (ds.records.size() != count)
        fail(ErrorKind::Parse, "dataset header announces " + std::to_string(count) + " records, file has " +
                                   std::to_string(ds.records.size()));
    return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset) { io::write_file(path, format_dataset(dataset)); }

Dataset load_dataset(const std::string& path) { return parse_dataset(io::read_file(path)); }

// ------------------------------------------------------------ split / eval

SplitResult split_train_test(const std::vector<DatasetRecord>& records) {
    SplitResult out;
    for (const auto& r : records) {
        if (r.snr_db)
            out.test[*r.snr_db].push_back(r);
        else
            out.train.push_back(r);
    }
    if (out.train.empty())
        fail(ErrorKind::InvalidSplit, "dataset has no noiseless records to train on; generate with include_noiseless");
    if (out.test.empty()) out.warnings.emplace_back("dataset has no finite-SNR records; test set is empty");
    return out;
}

LabeledSet to_labeled_set(const std::vector<DatasetRecord>& records) {
    LabeledSet set;
    if (records.empty()) return set;
    const auto dim = static_cast<Eigen::Index>(records.front().feature.size());
    set.inputs.resize(dim, static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        require(static_cast<Eigen::Index>(records[i].feature.size()) == dim, ErrorKind::Dimension,
                "records differ in feature length");
        set.inputs.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(records[i].feature.data(), dim);
        set.labels.push_back(records[i].label);
    }
    return set;
}

EvalReport evaluate(const MLPParams& params, const std::map<double, std::vector<DatasetRecord>>& test) {
    params.validate();
    require(params.output_size() == kScenarioCount, ErrorKind::Dimension,
            "model has " + std::to_string(params.output_size()) + " outputs, expected " + std::to_string(kScenarioCount));
    EvalReport report;
    double sum = 0.0;
    for (const auto& [snr, group] : test) {
        if (group.empty()) {
            report.notices.push_back("no test records at " + io::format_double(snr) + " dB; skipped");
            continue;
        }
        LabeledSet set = to_labeled_set(group);
        require(set.inputs.rows() == params.input_size(), ErrorKind::Dimension,
                "model expects " + std::to_string(params.input_size()) + " features, dataset has " +
                    std::to_string(set.inputs.rows()));
        Eigen::MatrixXd out = forward_batch(params, set.inputs);
        SnrResult res;
        res.snr_db = snr;
        res.count = group.size();
        std::size_t hits = 0;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const int predicted = classify_output(out.col(static_cast<Eigen::Index>(i)));
            ++res.confusion[static_cast<std::size_t>(set.labels[i] - 1)][static_cast<std::size_t>(predicted - 1)];
            if (predicted == set.labels[i]) ++hits;
        }
        res.accuracy = static_cast<double>(hits) / static_cast<double>(group.size());
        sum += res.accuracy;
        report.per_snr.push_back(res);
    }
    if (!report.per_snr.empty()) report.average_accuracy = sum / static_cast<double>(report.per_snr.size());
    return report;
}

std::string format_report(const EvalReport& report) {
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
        return std::string(buf);
    };
    std::string out = "SNR / dB";
    for (const auto& r : report.per_snr) out += "," + io::format_double(r.snr_db);
    out += ",Avg\nAccuracy / %";
    for (const auto& r : report.per_snr) out += "," + pct(r.accuracy);
    out += "," + pct(report.average_accuracy) + "\n";
    for (const auto& r : report.per_snr) {
        out += "\nconfusion SNR " + io::format_double(r.snr_db) + " dB (rows true, columns predicted)\n";
        out += "true\\pred";
        for (int c = 1; c <= kScenarioCount; ++c) out += "," + std::to_string(c);
        out += "\n";
        for (int t = 0; t < kScenarioCount; ++t) {
            out += std::to_string(t + 1);
            for (int c = 0; c < kScenarioCount; ++c) out += "," + std::to_string(r.confusion[t][c]);
            out += "\n";
        }
    }
    return out;
}

// ------------------------------------------------------------- sounding

ChannelProfileEstimate sound_and_profile(const ComplexSignal& received, const MSequence& local,
                                         const OrderOptions& order_options, const RelaxOptions& relax_options) {
    ChannelProfileEstimate out;
    out.order = estimate_order(received, local, order_options);
    if (out.order.order == 0) fail(ErrorKind::NoChannelDetected, "no correlation peak above the noise floor");
    FrequencyData freq = probe_spectrum(received, local);
    out.paths = relax_estimate(freq, out.order.order, delay_range(0, static_cast<int>(local.period())), relax_options);
    return out;
}

} // namespace scenid
