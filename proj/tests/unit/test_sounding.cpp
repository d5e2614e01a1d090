// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include <numeric>
#include <random>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scenid/error.hpp"
#include "scenid/sounding.hpp"

using namespace scenid;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const MSequence& mseq8() {
    static const MSequence m = generate_mseq(8, default_feedback_taps(8), 1);
    return m;
}

ComplexSignal probe(const MSequence& m, const std::vector<int>& delays, const std::vector<cd>& amps,
                    std::size_t periods = 1) {
    const auto one = oracle::circular_response(m.chips, delays, amps);
    ComplexSignal s;
    s.sample_period_s = m.chip_period_s;
    for (std::size_t p = 0; p < periods; ++p) s.samples.insert(s.samples.end(), one.begin(), one.end());
    return s;
}

ComplexSignal with_noise(ComplexSignal s, double snr_db, std::mt19937_64& gen) {
    const double p = mean_power(s.samples);
    auto w = oracle::complex_noise(s.size(), p * std::pow(10.0, -snr_db / 10.0), gen);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] += w[i];
    return s;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::InvalidArgument;
}

} // namespace

TEST_CASE("p = 3 sequence matches the hand-run LFSR", "[sounding]") {
    const auto m = generate_mseq(3, {1}, 0b111);
    CHECK(m.chips == oracle::mseq7_all_ones());
    CHECK(periodic_autocorrelation(m.chips) == std::vector<long>{7, -1, -1, -1, -1, -1, -1});
}

TEST_CASE("default polynomials give balanced two-valued sequences", "[sounding][property]") {
    for (int p = 2; p <= 16; ++p) {
        const auto m = generate_mseq(p, default_feedback_taps(p), 1);
        const std::size_t n = (std::size_t{1} << p) - 1;
        REQUIRE(m.period() == n);
        CHECK(std::count(m.chips.begin(), m.chips.end(), -1) == (1L << (p - 1)));
        CHECK(std::count(m.chips.begin(), m.chips.end(), 1) == (1L << (p - 1)) - 1);
        if (p <= 12) {
            const auto ac = periodic_autocorrelation(m.chips);
            CHECK(ac[0] == static_cast<long>(n));
            CHECK(std::all_of(ac.begin() + 1, ac.end(), [](long v) { return v == -1; }));
        }
    }
    CHECK(generate_mseq(8, default_feedback_taps(8), 0x5a).period() == 255);
}

TEST_CASE("generate_mseq rejects bad inputs", "[sounding]") {
    CHECK(kind_of([] { generate_mseq(3, {1}, 0); }) == ErrorKind::InvalidState);
    CHECK(kind_of([] { generate_mseq(4, {2}, 1); }) == ErrorKind::InvalidArgument); // x^4 + x^2 + 1
    CHECK(kind_of([] { generate_mseq(3, {3}, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("periodic_probe repeats the chips", "[sounding]") {
    const auto s = periodic_probe(mseq8(), 3);
    REQUIRE(s.size() == 765);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.samples[i] == cd(mseq8().chips[i % 255], 0.0));
}

TEST_CASE("lag_gains recovers static paths exactly", "[sounding]") {
    const std::vector<int> delays{0, 4, 9};
    const std::vector<cd> amps{cd(1, 0.2), cd(-0.3, 0.5), cd(0, -0.25)};
    const auto g = lag_gains(probe(mseq8(), delays, amps, 2), mseq8());
    for (std::size_t k = 0; k < 255; ++k) {
        cd expected = 0.0;
        for (std::size_t l = 0; l < delays.size(); ++l)
            if (static_cast<int>(k) == delays[l]) expected = amps[l];
        CHECK(std::abs(g[k] - expected) < 1e-12);
    }
}

TEST_CASE("estimate_order examples", "[sounding]") {
    const auto four = estimate_order(probe(mseq8(), {0, 3, 7, 12}, {1.0, cd(0, 0.8), -0.7, cd(0.4, 0.4)}), mseq8());
    CHECK(four.order == 4);
    CHECK(four.peak_lags == std::vector<int>{0, 3, 7, 12});
    CHECK(four.peak_values.size() == 4);
    for (double v : four.peak_values) CHECK(v >= four.threshold);

    const auto one = estimate_order(probe(mseq8(), {0}, {1.0}, 3), mseq8());
    CHECK(one.order == 1);
    CHECK(one.peak_lags == std::vector<int>{0});

    CHECK(kind_of([] { estimate_order(ComplexSignal{CVector(510, 0.0), 1e-5}, mseq8()); }) ==
          ErrorKind::InsufficientSignal);
    CHECK(kind_of([] { estimate_order(ComplexSignal{CVector(100, 1.0), 1e-5}, mseq8()); }) ==
          ErrorKind::InsufficientData);
    CHECK(kind_of([] { estimate_order(ComplexSignal{CVector(300, 1.0), 1e-5}, mseq8()); }) ==
          ErrorKind::Dimension);
    CHECK(kind_of([] { estimate_order(probe(mseq8(), {0}, {1.0}), mseq8(), OrderOptions{0.0, 1e-3}); }) ==
          ErrorKind::InvalidArgument);
}

TEST_CASE("order is exact whenever the power spread clears the threshold", "[sounding][property]") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double tf : {0.5, 0.2}) {
        for (int trial = 0; trial < 60; ++trial) {
            const int taps = 1 + static_cast<int>(u(gen) * 12);
            std::vector<int> pool(40);
            std::iota(pool.begin(), pool.end(), 0);
            std::shuffle(pool.begin(), pool.end(), gen);
            std::vector<int> delays(pool.begin(), pool.begin() + taps);
            std::sort(delays.begin(), delays.end());
            // Powers within (tf^2, 1] of the strongest.
            std::vector<cd> amps;
            for (int l = 0; l < taps; ++l) {
                const double pw = l == 0 ? 1.0 : tf * tf * 1.01 + (1.0 - tf * tf * 1.01) * u(gen);
                amps.push_back(std::polar(std::sqrt(pw), 2.0 * M_PI * u(gen)));
            }
            const auto est = estimate_order(probe(mseq8(), delays, amps), mseq8(), OrderOptions{tf, 1e-3});
            CHECK(est.order == taps);
            CHECK(est.peak_lags == delays);
        }
    }
}

TEST_CASE("pure noise yields no paths", "[sounding][statistical]") {
    std::mt19937_64 gen(5);
    int empty = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ComplexSignal s{oracle::complex_noise(510, 1.0, gen), 1e-5};
        if (estimate_order(s, mseq8()).order == 0) ++empty;
    }
    CHECK(empty >= 95);
}

TEST_CASE("probe_spectrum follows the DFT identities", "[sounding]") {
    const auto& m = mseq8();
    const auto id = probe_spectrum(probe(m, {0}, {1.0}), m);
    REQUIRE(id.size() == 255);
    CHECK(id.k.front() == -127);
    CHECK(id.k.back() == 127);
    for (std::size_t i = 0; i < 255; ++i) CHECK(std::abs(id.R[i] - id.M[i]) < 1e-9);

    const int d = 17;
    const auto sh = probe_spectrum(probe(m, {d}, {1.0}), m);
    for (std::size_t i = 0; i < 255; ++i) {
        const cd rot = std::polar(1.0, -2.0 * M_PI * sh.k[i] * d / 255.0);
        CHECK(std::abs(sh.R[i] - sh.M[i] * rot) < 1e-9);
    }

    const auto x = probe(m, {0, 5}, {cd(0.3, -1), cd(2, 0.1)});
    const auto fx = probe_spectrum(x, m);
    double time = 0.0, freq = 0.0;
    for (const cd& v : x.samples) time += std::norm(v);
    for (const cd& v : fx.R) freq += std::norm(v);
    CHECK_THAT(time, WithinRel(freq / 255.0, 1e-12));

    CHECK(kind_of([&] { probe_spectrum(ComplexSignal{CVector(254, 1.0), 1e-5}, m); }) == ErrorKind::Dimension);
}

TEST_CASE("amplitude_given_delay examples", "[sounding]") {
    const auto& m = mseq8();
    const auto f = probe_spectrum(probe(m, {0}, {1.0}), m);
    CHECK(std::abs(amplitude_given_delay(f, f.R, 0) - cd(1, 0)) < 1e-9);

    const cd c(0.3, -2.0);
    CVector scaled = f.R;
    for (auto& v : scaled) v *= c;
    CHECK(std::abs(amplitude_given_delay(f, scaled, 0) - c) < 1e-9);

    // Two paths; subtracting the second path's own spectrum leaves the first.
    const auto both = probe_spectrum(probe(m, {2, 9}, {cd(0.7, 0.1), cd(-0.4, 0.3)}), m);
    const auto second = probe_spectrum(probe(m, {9}, {cd(-0.4, 0.3)}), m);
    CVector residual(255);
    for (std::size_t i = 0; i < 255; ++i) residual[i] = both.R[i] - second.R[i];
    CHECK(std::abs(amplitude_given_delay(both, residual, 2) - cd(0.7, 0.1)) < 1e-9);
}

TEST_CASE("delay_argmax examples", "[sounding]") {
    const auto& m = mseq8();
    const auto all = delay_range(0, 255);
    const auto f = probe_spectrum(probe(m, {5}, {cd(0.2, 0.9)}), m);
    CHECK(delay_argmax(f, f.R, all) == 5);

    CVector scaled = f.R;
    for (auto& v : scaled) v *= cd(-3.0, 0.01);
    CHECK(delay_argmax(f, scaled, all) == 5);

    const auto two = probe_spectrum(probe(m, {2, 9}, {1.0, 0.3}), m);
    CHECK(delay_argmax(two, two.R, all) == 2);
    // Exhaustive evaluation of the objective agrees.
    int best = -1;
    double best_v = -1.0;
    for (int d : all) {
        const double v = std::norm(delay_correlation(two, two.R, d));
        if (v > best_v * (1 + 1e-12)) best_v = v, best = d;
    }
    CHECK(best == 2);

    const auto tie = probe_spectrum(probe(m, {3, 8}, {0.5, 0.5}), m);
    CHECK(delay_argmax(tie, tie.R, all) == 3);
    CHECK(delay_argmax(tie, tie.R, {8, 3}) == 3);

    CHECK(kind_of([&] { delay_argmax(f, f.R, {}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { delay_argmax(f, f.R, {255}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("relax_estimate recovers a single path in closed form", "[sounding]") {
    const auto& m = mseq8();
    const auto f = probe_spectrum(probe(m, {7}, {cd(0, 0.8)}), m);
    const auto est = relax_estimate(f, 1, delay_range(0, 255));
    REQUIRE(est.paths.size() == 1);
    CHECK(est.paths[0].delay_units == 7);
    CHECK(std::abs(est.paths[0].amplitude - cd(0, 0.8)) < 1e-9);
    CHECK(est.residual_cost < 1e-18);
}

TEST_CASE("relax_estimate matches the brute-force joint fit", "[sounding]") {
    const auto& m = mseq8();
    SECTION("two paths") {
        const auto y = oracle::circular_response(m.chips, {0, 4}, {1.0, 0.5});
        const auto oracle_fit = oracle::brute_force_paths(m.chips, y, 2, delay_range(0, 255));
        const auto est = relax_estimate(probe_spectrum(ComplexSignal{y, 1e-5}, m), 2, delay_range(0, 255));
        REQUIRE(est.paths.size() == 2);
        CHECK(oracle_fit.delays == std::vector<int>{0, 4});
        for (std::size_t l = 0; l < 2; ++l) {
            CHECK(est.paths[l].delay_units == oracle_fit.delays[l]);
            CHECK(std::abs(est.paths[l].amplitude - oracle_fit.amps[l]) < 1e-6);
        }
        CHECK(est.residual_cost < 1e-12);
    }
    SECTION("three paths") {
        const auto y = oracle::circular_response(m.chips, {1, 6, 13}, {cd(0.9, 0.1), cd(0, -0.6), cd(-0.3, 0.2)});
        const auto cands = delay_range(0, 20);
        const auto oracle_fit = oracle::brute_force_paths(m.chips, y, 3, cands);
        const auto est = relax_estimate(probe_spectrum(ComplexSignal{y, 1e-5}, m), 3, cands);
        REQUIRE(est.paths.size() == 3);
        for (std::size_t l = 0; l < 3; ++l) {
            CHECK(est.paths[l].delay_units == oracle_fit.delays[l]);
            CHECK(std::abs(est.paths[l].amplitude - oracle_fit.amps[l]) < 1e-6);
        }
    }
}

TEST_CASE("relax_estimate invariants on random channels", "[sounding][property]") {
    const auto& m = mseq8();
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const int order = 2 + trial % 2;
        const auto cands = order == 2 ? delay_range(0, 255) : delay_range(0, 24);
        std::vector<int> pool(cands);
        std::shuffle(pool.begin(), pool.end(), gen);
        std::vector<int> delays(pool.begin(), pool.begin() + order);
        std::vector<cd> amps;
        for (int l = 0; l < order; ++l)
            amps.push_back(std::polar(std::pow(10.0, -u(gen)), 2.0 * M_PI * u(gen))); // within 20 dB
        std::mt19937_64 noise_gen(trial);
        const auto clean = probe(m, delays, amps);
        const auto noisy = with_noise(clean, 25.0, noise_gen);
        for (const auto* sig : {&clean, &noisy}) {
            const auto f = probe_spectrum(*sig, m);
            const auto est = relax_estimate(f, order, cands);
            // Sorted, unique, recomputable cost, non-increasing sweeps.
            for (std::size_t l = 1; l < est.paths.size(); ++l)
                CHECK(est.paths[l - 1].delay_units < est.paths[l].delay_units);
            CHECK_THAT(est.residual_cost, WithinAbs(relax_cost(f, est.paths), 1e-9 * f.m_energy()));
            for (std::size_t s = 1; s < est.sweep_costs.size(); ++s)
                CHECK(est.sweep_costs[s] <= est.sweep_costs[s - 1] * (1 + 1e-12) + 1e-18);
            if (sig == &clean) {
                const auto fit = oracle::brute_force_paths(m.chips, sig->samples, order, cands);
                std::vector<int> got;
                for (const auto& p : est.paths) got.push_back(p.delay_units);
                CHECK(got == fit.delays);
                // Frequency-domain cost is N times the time-domain cost.
                CHECK_THAT(est.residual_cost, WithinAbs(255.0 * fit.cost, 1e-9));
            }
        }
    }
}

TEST_CASE("relax_estimate rejects an order above the candidate count", "[sounding]") {
    const auto& m = mseq8();
    const auto f = probe_spectrum(probe(m, {0}, {1.0}), m);
    CHECK(kind_of([&] { relax_estimate(f, 3, {0, 1}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { relax_estimate(f, 0, {0, 1}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("three paths at 20 dB are resolved in nearly every trial", "[sounding][statistical]") {
    const auto& m = mseq8();
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto cands = delay_range(0, 20);
    int hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> pool(cands);
        std::shuffle(pool.begin(), pool.end(), gen);
        std::vector<int> delays(pool.begin(), pool.begin() + 3);
        std::sort(delays.begin(), delays.end());
        const std::vector<cd> amps{std::polar(1.0, 2 * M_PI * u(gen)), std::polar(0.7, 2 * M_PI * u(gen)),
                                   std::polar(0.5, 2 * M_PI * u(gen))};
        const auto rx = with_noise(probe(m, delays, amps), 20.0, gen);
        const auto est = relax_estimate(probe_spectrum(rx, m), 3, cands);
        std::vector<int> got;
        for (const auto& p : est.paths) got.push_back(p.delay_units);
        if (got == delays) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("delay profile from several probes of one channel", "[sounding]") {
    const auto& m = mseq8();
    const std::vector<int> delays{0, 1, 2, 5};
    std::vector<ComplexSignal> probes;
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 6; ++s) {
        std::vector<cd> amps;
        for (std::size_t l = 0; l < delays.size(); ++l) amps.push_back(std::polar(0.3 + u(gen), 6.28 * u(gen)));
        probes.push_back(probe(m, delays, amps, 2));
    }
    const auto prof = estimate_delay_profile(probes, m, OrderOptions{0.05, 1e-3});
    CHECK(prof.detection.order == 4);
    CHECK(prof.delays == delays);
    CHECK(prof.votes.size() == 255);
}
