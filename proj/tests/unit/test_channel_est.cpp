// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include <random>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scenid/channel_est.hpp"
#include "scenid/error.hpp"
#include "scenid/rng.hpp"
#include "scenid/scenario_sim.hpp"

using namespace scenid;
using Catch::Matchers::WithinAbs;

namespace {

CVector random_qpsk(std::size_t n, std::mt19937_64& gen) {
    std::bernoulli_distribution bit;
    CVector out(n);
    for (auto& s : out) s = cd(bit(gen) ? -M_SQRT1_2 : M_SQRT1_2, bit(gen) ? -M_SQRT1_2 : M_SQRT1_2);
    return out;
}

ScenarioProfile jakes_tap() {
    ScenarioProfile p;
    p.label = 1;
    p.name = "jakes";
    p.tap_delays_us = {0.0};
    p.tap_gains_db = {0.0};
    p.doppler = {DopplerSpectrum::jakes()};
    return p;
}

double gram_error(const Eigen::MatrixXd& rows) {
    const Eigen::MatrixXd g = rows * rows.transpose();
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// Mean NMSE of a 512-sample Jakes tap estimated with an all-known frame.
double mean_jakes_nmse(double snr_db, int trials, std::uint64_t seed) {
    const BemLsEstimator est({0}, 0.004, 512);
    SimConfig cfg;
    double total = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 gen(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
        const auto pilots = PilotPattern::all_known(random_qpsk(512, gen));
        const auto cir = generate_fading(jakes_tap(), 512, cfg, gen());
        const auto rx = add_awgn(apply_channel(ComplexSignal{pilots.symbols, 1e-5}, cir), snr_db, gen());
        total += nmse(est.estimate(rx, pilots).gains, cir.gains);
    }
    return total / trials;
}

} // namespace

TEST_CASE("DPSS rows are orthonormal", "[channel_est]") {
    const auto b = generate_dpss(8, 0.1, 2);
    REQUIRE(b.sequences.rows() == 2);
    REQUIRE(b.sequences.cols() == 8);
    CHECK(gram_error(b.sequences) < 1e-9);
    for (auto [n, w, d] : {std::tuple{512, 0.004, 8}, std::tuple{25600, 0.004, 208}, std::tuple{100, 0.2, 40}}) {
        const auto big = generate_dpss(n, w, d);
        CHECK(gram_error(big.sequences) < 1e-9);
        for (std::size_t i = 1; i < big.concentrations.size(); ++i)
            CHECK(big.concentrations[i] <= big.concentrations[i - 1]);
        for (double c : big.concentrations) CHECK((c >= 0.0 && c <= 1.0));
    }
}

TEST_CASE("DPSS matches the dense sinc-kernel eigenvectors", "[channel_est]") {
    for (auto [n, w, d] : {std::tuple{64, 0.05, 3}, std::tuple{32, 0.1, 6}, std::tuple{48, 0.02, 4},
                           std::tuple{16, 0.25, 8}}) {
        const auto b = generate_dpss(static_cast<std::size_t>(n), w, static_cast<std::size_t>(d));
        const auto [rows, conc] = oracle::dense_dpss(n, w, d);
        for (int i = 0; i < d; ++i) {
            const Eigen::VectorXd a = b.sequences.row(i).transpose(), o = rows.row(i).transpose();
            CHECK(std::min((a - o).cwiseAbs().maxCoeff(), (a + o).cwiseAbs().maxCoeff()) < 1e-6);
            CHECK_THAT(b.concentrations[static_cast<std::size_t>(i)], WithinAbs(conc[static_cast<std::size_t>(i)], 1e-9));
            CHECK_THAT(band_concentration(a, w), WithinAbs(conc[static_cast<std::size_t>(i)], 1e-9));
        }
    }
    const auto b = generate_dpss(64, 0.05, 3);
    for (double c : b.concentrations) CHECK(c > 0.99);
}

TEST_CASE("DPSS sign convention and completeness", "[channel_est]") {
    const auto b = generate_dpss(16, 0.2, 16);
    for (Eigen::Index d = 0; d < 16; ++d) {
        const Eigen::VectorXd row = b.sequences.row(d).transpose();
        const double vmax = row.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < 16; ++i)
            if (std::abs(row[i]) > 1e-10 * vmax) {
                CHECK(row[i] > 0.0);
                break;
            }
    }
    std::mt19937_64 gen(1);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(16);
    for (auto& x : v) x = g(gen);
    const Eigen::VectorXd coeffs = b.sequences * v;
    CHECK((b.sequences.transpose() * coeffs - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("DPSS rejects bad parameters and caches instances", "[channel_est]") {
    CHECK_THROWS_AS(generate_dpss(16, 0.0, 2), Error);
    CHECK_THROWS_AS(generate_dpss(16, 0.5, 2), Error);
    CHECK_THROWS_AS(generate_dpss(16, 0.1, 0), Error);
    CHECK_THROWS_AS(generate_dpss(16, 0.1, 17), Error);
    CHECK(cached_dpss(128, 0.01, 4) == cached_dpss(128, 0.01, 4));
    CHECK(cached_dpss(128, 0.01, 4)->sequences == generate_dpss(128, 0.01, 4).sequences);
}

TEST_CASE("basis_dimension examples", "[channel_est]") {
    CHECK(basis_dimension(0.004, 512) == 8);
    CHECK(basis_dimension(0.004, 25600) == 208);
    CHECK(basis_dimension(0.0, 512) == 3);
    CHECK(basis_dimension(1e-9, 512) == 4);
}

TEST_CASE("static single tap with one basis function", "[channel_est]") {
    const std::size_t n = 64;
    const auto basis = generate_dpss(n, 1e-7, 1);
    std::mt19937_64 gen(3);
    const auto pilots = PilotPattern::all_known(random_qpsk(n, gen));
    const cd mu(0.7, -0.2);
    ComplexSignal rx{pilots.symbols, 1e-5};
    for (auto& v : rx.samples) v *= mu;
    const auto [coeffs, cir] = bem_ls_estimate(rx, pilots, {0}, basis);
    CHECK(coeffs.coeffs.rows() == 1);
    CHECK(coeffs.coeffs.cols() == 1);
    for (Eigen::Index i = 0; i < cir.gains.cols(); ++i) CHECK(std::abs(cir.gains(0, i) - mu) < 1e-8);
}

TEST_CASE("channels inside the basis span are reconstructed exactly", "[channel_est]") {
    const std::size_t n = 256;
    const auto basis = generate_dpss(n, 0.01, 5);
    std::mt19937_64 gen(4);
    const std::vector<int> grid{0, 2, 3};
    const auto pilots = PilotPattern::all_known(random_qpsk(n, gen));
    const auto c = oracle::complex_noise(grid.size() * 5, 1.0, gen);
    Eigen::MatrixXcd coeffs(3, 5);
    for (Eigen::Index l = 0; l < 3; ++l)
        for (Eigen::Index d = 0; d < 5; ++d) coeffs(l, d) = c[static_cast<std::size_t>(l * 5 + d)];
    CIRMatrix truth;
    truth.gains = coeffs * basis.sequences.cast<cd>();
    truth.delay_units = grid;
    const auto rx = apply_channel(ComplexSignal{pilots.symbols, 1e-5}, truth);
    const auto [est_c, est] = bem_ls_estimate(rx, pilots, grid, basis);
    CHECK(nmse(est.gains, truth.gains) < 1e-16);
    CHECK((est_c.coeffs - coeffs).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(est.delay_grid == grid);
    CHECK(est.source == CIREstimate::Source::BemLs);
}

TEST_CASE("BEM-LS residual is orthogonal to the regressors", "[channel_est][property]") {
    const std::size_t n = 300;
    const auto basis = generate_dpss(n, 0.01, 6);
    std::mt19937_64 gen(5);
    const std::vector<int> grid{0, 1, 4};
    const auto frame = random_qpsk(n, gen);
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i)
        if (i % 5 != 2) pos.push_back(i);
    const auto pilots = PilotPattern::from_positions(frame, pos);
    ComplexSignal rx{oracle::complex_noise(n, 1.0, gen), 1e-5};
    const auto [c, est] = bem_ls_estimate(rx, pilots, grid, basis);
    const auto reg = bem_regression(pilots, 0, n, grid, basis);
    REQUIRE(!reg.rows.empty());
    Eigen::VectorXcd coef(static_cast<Eigen::Index>(grid.size() * 6));
    for (Eigen::Index l = 0; l < 3; ++l) coef.segment(l * 6, 6) = c.coeffs.row(l).transpose();
    Eigen::VectorXcd y(static_cast<Eigen::Index>(reg.rows.size()));
    for (std::size_t r = 0; r < reg.rows.size(); ++r) y[static_cast<Eigen::Index>(r)] = rx.samples[reg.rows[r]];
    const Eigen::VectorXcd resid = y - reg.design * coef;
    const double scale = (reg.design.adjoint() * y).norm();
    CHECK((reg.design.adjoint() * resid).norm() < 1e-8 * scale);
    // Rows need every regressor symbol known.
    for (std::size_t r : reg.rows)
        for (int d : grid)
            if (static_cast<long>(r) - d >= 0) CHECK(pilots.known[r - static_cast<std::size_t>(d)]);
}

TEST_CASE("BEM-LS reports unidentifiable systems", "[channel_est]") {
    const std::size_t n = 64;
    std::mt19937_64 gen(6);
    const auto frame = random_qpsk(n, gen);
    std::vector<std::size_t> comb;
    for (std::size_t i = 0; i < n; i += 4) comb.push_back(i);
    const auto pilots = PilotPattern::from_positions(frame, comb);
    ComplexSignal rx{frame, 1e-5};
    try {
        bem_ls_estimate(rx, pilots, {0, 1}, generate_dpss(n, 0.01, 4));
        FAIL("expected Identifiability");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Identifiability);
        CHECK(std::string(e.what()).find("2 delays x 4 basis functions") != std::string::npos);
    }
    // One tap on the comb is fine: 16 rows for 4 unknowns.
    CHECK_NOTHROW(bem_ls_estimate(rx, pilots, {0}, generate_dpss(n, 0.01, 4)));
    CHECK_THROWS_AS(bem_ls_estimate(ComplexSignal{CVector(63), 1e-5}, pilots, {0}, generate_dpss(n, 0.01, 4)), Error);
}

TEST_CASE("windowed estimator equals per-window fits", "[channel_est]") {
    const std::size_t n = 1100;
    std::mt19937_64 gen(7);
    const auto pilots = PilotPattern::all_known(random_qpsk(n, gen));
    ComplexSignal rx{oracle::complex_noise(n, 1.0, gen), 1e-5};
    const std::vector<int> grid{0, 3};
    const BemLsEstimator est(grid, 0.004, 512);
    const auto full = est.estimate(rx, pilots);
    REQUIRE(full.gains.cols() == static_cast<Eigen::Index>(n));
    // Windows [0, 512) and [512, 1100); the second sees the first's symbols
    // as its delayed context.
    {
        const auto basis = generate_dpss(512, 0.004, basis_dimension(0.004, 512));
        PilotPattern first{CVector(pilots.symbols.begin(), pilots.symbols.begin() + 512),
                           std::vector<bool>(512, true)};
        ComplexSignal r0{CVector(rx.samples.begin(), rx.samples.begin() + 512), 1e-5};
        const auto [c0, e0] = bem_ls_estimate(r0, first, grid, basis);
        CHECK((e0.gains - full.gains.leftCols(512)).cwiseAbs().maxCoeff() < 1e-10);
    }
    // Repeated calls hit the factorization cache and agree exactly.
    CHECK(est.estimate(rx, pilots).gains == full.gains);
    const BemLsEstimator fresh(grid, 0.004, 512);
    CHECK(fresh.estimate(rx, pilots).gains == full.gains);
}

TEST_CASE("Jakes tap at 30 dB is estimated below -20 dB NMSE", "[channel_est][statistical]") {
    CHECK(10.0 * std::log10(mean_jakes_nmse(30.0, 50, 11)) < -20.0);
}

TEST_CASE("estimation error falls as SNR rises", "[channel_est][statistical]") {
    double prev = std::numeric_limits<double>::infinity();
    for (double snr : {0.0, 10.0, 20.0, 30.0, 40.0}) {
        const double e = mean_jakes_nmse(snr, 50, 12);
        CHECK(e < prev);
        prev = e;
    }
}
