// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include <random>

#include <catch_amalgamated.hpp>

#include "scenid/error.hpp"
#include "scenid/features.hpp"
#include "scenid/scenario_sim.hpp"

using namespace scenid;
using Catch::Matchers::WithinAbs;

namespace {

CIREstimate constant_rows(const std::vector<cd>& values, std::size_t n = 400) {
    CIREstimate c;
    c.gains.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < values.size(); ++l) c.gains.row(static_cast<Eigen::Index>(l)).setConstant(values[l]);
    for (std::size_t l = 0; l < values.size(); ++l) c.delay_grid.push_back(static_cast<int>(l));
    return c;
}

void check_row_stochastic(const DDPDP& d) {
    for (Eigen::Index l = 0; l < d.rows(); ++l) {
        CHECK_THAT(d.bins.row(l).sum(), WithinAbs(1.0, 1e-12));
        CHECK(d.bins.row(l).minCoeff() >= 0.0);
    }
}

DDPDP simulated(int label, std::uint64_t seed, std::size_t n = 10000) {
    return build_ddpdp(to_grid(generate_fading(load_profile(label).normalized(), n, SimConfig{}, seed)));
}

} // namespace

TEST_CASE("constant envelope lands in one bin", "[features]") {
    const auto d = build_ddpdp(constant_rows({cd(0.73, 0.0), std::polar(0.73, 1.1), cd(2.4, 0), cd(0, 0)}));
    CHECK(d.bins(0, 146) == 1.0);
    CHECK(d.bins(1, 146) == 1.0);
    CHECK(d.bins(2, 399) == 1.0);
    CHECK(d.bins(3, 0) == 1.0);
    CHECK(envelope_bin(0.73) == 146);
    CHECK(envelope_bin(0.005) == 1);
    CHECK(envelope_bin(1.9999) == 399);
    CHECK(envelope_bin(7.0) == 399);
    check_row_stochastic(d);
    CHECK(d.bin_width == 0.005);
    CHECK(d.delay_unit_us == 10.0);
}

TEST_CASE("build_ddpdp input checks", "[features]") {
    try {
        build_ddpdp(constant_rows({1.0}, 399));
        FAIL("expected InsufficientData");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientData);
    }
    auto bad = constant_rows({1.0, 1.0});
    bad.gains(1, 7) = cd(std::nan(""), 0);
    CHECK_THROWS_AS(build_ddpdp(bad), Error);
}

TEST_CASE("simulated D-DPDPs are row-stochastic with 4800 features", "[features][property]") {
    for (int label = 1; label <= 6; ++label) {
        const auto d = simulated(label, 40 + label, 2000);
        REQUIRE(d.rows() == kMaxTaps);
        check_row_stochastic(d);
        const auto f = flatten(d);
        CHECK(f.values.size() == 4800);
    }
}

TEST_CASE("flatten layout and round trip", "[features]") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    CIREstimate c;
    c.gains.resize(kMaxTaps, 1000);
    for (Eigen::Index l = 0; l < c.gains.rows(); ++l)
        for (Eigen::Index n = 0; n < c.gains.cols(); ++n) c.gains(l, n) = cd(u(gen), 0.0);
    const auto d = build_ddpdp(c);
    const auto f = flatten(d);
    REQUIRE(f.values.size() == 400 * kMaxTaps);
    for (int l = 0; l < kMaxTaps; ++l)
        for (int b = 0; b < 400; b += 37) CHECK(f.values[static_cast<std::size_t>(400 * l + b)] == d.bins(l, b));
    CHECK(unflatten(f).bins == d.bins);
    CHECK_THROWS_AS(unflatten(FeatureVector{std::vector<double>(4799), std::nullopt}), Error);
}

TEST_CASE("one_hot examples", "[features]") {
    CHECK(one_hot(1) == OneHotLabel{1, 0, 0, 0, 0, 0});
    CHECK(one_hot(6) == OneHotLabel{0, 0, 0, 0, 0, 1});
    try {
        one_hot(0);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    CHECK_THROWS_AS(one_hot(7), Error);
}

TEST_CASE("doubling envelopes doubles the bin index", "[features][property]") {
    for (int b = 1; b < 400; b += 7) {
        const double v = (b + 0.25) * kBinWidth;
        const auto one = build_ddpdp(constant_rows({v}));
        const auto two = build_ddpdp(constant_rows({2.0 * v}));
        CHECK(one.bins(0, b) == 1.0);
        CHECK(two.bins(0, std::min(2 * b, 399)) == 1.0);
    }
}

TEST_CASE("RAx6 and TUx6 differ on every shared delay row", "[features][property]") {
    const auto ra = simulated(2, 1);
    const auto tu = simulated(3, 2);
    for (Eigen::Index l = 0; l < 6; ++l) CHECK((ra.bins.row(l) - tu.bins.row(l)).cwiseAbs().sum() > 0.1);
}

TEST_CASE("to_grid places taps by delay", "[features]") {
    CIRMatrix cir;
    cir.gains = Eigen::MatrixXcd::Ones(2, 5);
    cir.gains.row(1) *= 2.0;
    cir.delay_units = {0, 3};
    const auto g = to_grid(cir);
    CHECK(g.gains.rows() == kMaxTaps);
    CHECK(g.gains(0, 2) == cd(1, 0));
    CHECK(g.gains(3, 4) == cd(2, 0));
    CHECK(g.gains(1, 0) == cd(0, 0));
    CHECK(g.source == CIREstimate::Source::TrueSim);
    cir.delay_units = {0, 12};
    CHECK_THROWS_AS(to_grid(cir), Error);
}
