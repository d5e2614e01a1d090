// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scenid/channel_est.hpp"
#include "scenid/classifier.hpp"
#include "scenid/config.hpp"
#include "scenid/error.hpp"
#include "scenid/features.hpp"
#include "scenid/pipeline.hpp"
#include "scenid/scenario_sim.hpp"
#include "scenid/sounding.hpp"

namespace py = pybind11;
using namespace scenid;

namespace {

MSequence make_mseq(int register_length, std::optional<std::vector<int>> taps, std::uint32_t state) {
    return generate_mseq(register_length, taps ? *taps : default_feedback_taps(register_length), state);
}

} // namespace

PYBIND11_MODULE(_scenid, m) {
    m.doc() = "Channel scenario identification from D-DPDP features.";

    static py::exception<Error> error(m, "ScenidError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.attr("MAX_TAPS") = kMaxTaps;
    m.attr("FEATURE_SIZE") = kMaxTaps * kEnvelopeBins;

    m.def(
        "mseq",
        [](int p, std::optional<std::vector<int>> taps, std::uint32_t state) { return make_mseq(p, taps, state).chips; },
        py::arg("register_length"), py::arg("feedback_taps") = py::none(), py::arg("initial_state") = 1,
        "Chips (+1/-1) of one m-sequence period.");
    m.def("periodic_autocorrelation", &periodic_autocorrelation, py::arg("chips"));

    m.def(
        "profile",
        [](int label) {
            const auto p = load_profile(label);
            py::dict d;
            d["label"] = p.label;
            d["name"] = p.name;
            d["delays_us"] = p.tap_delays_us;
            d["gains_db"] = p.tap_gains_db;
            return d;
        },
        py::arg("label"));

    m.def(
        "fading",
        [](int label, std::size_t n_samples, double normalized_doppler, std::uint64_t seed) {
            SimConfig cfg;
            cfg.normalized_doppler = normalized_doppler;
            const auto cir = generate_fading(load_profile(label).normalized(), n_samples, cfg, seed);
            return std::make_pair(Eigen::MatrixXcd(cir.gains), cir.delay_units);
        },
        py::arg("label"), py::arg("n_samples"), py::arg("normalized_doppler") = 0.004, py::arg("seed") = 0,
        "Tap gains (taps x samples) and tap delays in symbols.");

    m.def(
        "sound",
        [](const CVector& received, int register_length, double threshold_factor, double false_alarm) {
            const auto mseq = make_mseq(register_length, std::nullopt, 1);
            const auto est = sound_and_profile(ComplexSignal{received, mseq.chip_period_s}, mseq,
                                               OrderOptions{threshold_factor, false_alarm});
            py::dict d;
            d["order"] = est.order.order;
            d["threshold"] = est.order.threshold;
            std::vector<int> delays;
            CVector amps;
            for (const auto& p : est.paths.paths) {
                delays.push_back(p.delay_units);
                amps.push_back(p.amplitude);
            }
            d["delays"] = delays;
            d["amplitudes"] = amps;
            d["residual_cost"] = est.paths.residual_cost;
            return d;
        },
        py::arg("received"), py::arg("register_length") = 8, py::arg("threshold_factor") = 0.5,
        py::arg("false_alarm") = 1e-3, "Order and path estimates from a received m-sequence probe.");

    m.def(
        "dpss",
        [](std::size_t length, double half_bandwidth, std::size_t count) {
            const auto b = generate_dpss(length, half_bandwidth, count);
            return std::make_pair(Eigen::MatrixXd(b.sequences), b.concentrations);
        },
        py::arg("length"), py::arg("half_bandwidth"), py::arg("count"));

    m.def(
        "ddpdp",
        [](const Eigen::MatrixXcd& gains) {
            CIREstimate c;
            c.gains = gains;
            for (Eigen::Index l = 0; l < gains.rows(); ++l) c.delay_grid.push_back(static_cast<int>(l));
            return Eigen::MatrixXd(build_ddpdp(c).bins);
        },
        py::arg("gains"), "Per-delay envelope histograms (rows x 400).");

    m.def(
        "complexity_count",
        [](const std::vector<int>& hidden, int outputs, std::uint64_t vectors) {
            return complexity_count(hidden, outputs, vectors);
        },
        py::arg("hidden"), py::arg("outputs"), py::arg("vectors"));

    m.def(
        "generate_dataset",
        [](const std::string& config_json, int threads) {
            const auto spec = config::dataset_spec(config::parse(config_json, "<config>"));
            Dataset ds;
            {
                py::gil_scoped_release release;
                ds = generate_dataset(spec, threads);
            }
            const auto rows = static_cast<Eigen::Index>(ds.records.size());
            const auto dim = rows ? static_cast<Eigen::Index>(ds.records[0].feature.size()) : 0;
            Eigen::MatrixXd features(rows, dim);
            std::vector<int> labels;
            std::vector<std::optional<double>> snr;
            for (Eigen::Index i = 0; i < rows; ++i) {
                const auto& r = ds.records[static_cast<std::size_t>(i)];
                features.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.feature.data(), dim);
                labels.push_back(r.label);
                snr.push_back(r.snr_db);
            }
            return py::make_tuple(features, labels, snr);
        },
        py::arg("config_json") = "{}", py::arg("threads") = 1,
        "Features (records x 4800), labels and SNRs (None = noiseless).");
}
