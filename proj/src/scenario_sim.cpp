// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/scenario_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "scenid/error.hpp"
#include "scenid/fft.hpp"
#include "scenid/rng.hpp"
#include "scenid_profiles_data.hpp"

namespace scenid {

double mean_power(const CVector& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const cd& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

// ---------------------------------------------------------------- spectra

double DopplerSpectrum::band_power(double f_lo, double f_hi) const {
    if (f_hi <= f_lo) return 0.0;
    if (kind == Kind::Jakes) {
        auto cdf = [](double f) { return 0.5 + std::asin(std::clamp(f, -1.0, 1.0)) / M_PI; };
        return cdf(f_hi) - cdf(f_lo);
    }
    double total = 0.0, in_band = 0.0;
    for (const auto& g : components) {
        auto phi = [&](double f) { return 0.5 * std::erfc(-(f - g.center) / (g.sigma * M_SQRT2)); };
        in_band += g.amplitude * (phi(f_hi) - phi(f_lo));
        total += g.amplitude;
    }
    return total > 0.0 ? in_band / total : 0.0;
}

std::string DopplerSpectrum::to_string() const {
    if (kind == Kind::Jakes) return "jakes";
    std::ostringstream os;
    os << "gauss(";
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto& g = components[i];
        if (i) os << ';';
        os << g.amplitude << ',' << g.center << ',' << g.sigma;
    }
    os << ')';
    return os.str();
}

namespace {

double parse_double(std::string_view s, std::string_view context) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(ErrorKind::Parse, "bad number '" + std::string(s) + "' in " + std::string(context));
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

} // namespace

DopplerSpectrum DopplerSpectrum::parse(std::string_view text) {
    if (text == "jakes") return jakes();
    constexpr std::string_view head = "gauss(";
    if (!text.starts_with(head) || !text.ends_with(")"))
        fail(ErrorKind::Parse, "unknown Doppler spectrum '" + std::string(text) + "'");
    std::string_view body = text.substr(head.size(), text.size() - head.size() - 1);
    std::vector<GaussComponent> parts;
    for (std::string_view comp : split(body, ';')) {
        auto fields = split(comp, ',');
        if (fields.size() != 3)
            fail(ErrorKind::Parse, "gauss component needs 3 fields: '" + std::string(comp) + "'");
        GaussComponent g{parse_double(fields[0], text), parse_double(fields[1], text),
                         parse_double(fields[2], text)};
        if (!(g.amplitude > 0.0) || !(g.sigma > 0.0))
            fail(ErrorKind::Parse, "gauss amplitude and sigma must be positive in '" + std::string(text) + "'");
        parts.push_back(g);
    }
    return gaussian(std::move(parts));
}

// --------------------------------------------------------------- profiles

std::vector<int> ScenarioProfile::delay_units() const {
    std::vector<int> units;
    units.reserve(tap_delays_us.size());
    for (double d : tap_delays_us) units.push_back(static_cast<int>(std::lround(d / kDelayUnitUs)));
    return units;
}

std::vector<double> ScenarioProfile::linear_gains() const {
    std::vector<double> g;
    g.reserve(tap_gains_db.size());
    for (double db : tap_gains_db) g.push_back(std::pow(10.0, db / 10.0));
    return g;
}

ScenarioProfile ScenarioProfile::normalized() const {
    auto lin = linear_gains();
    double total = std::accumulate(lin.begin(), lin.end(), 0.0);
    ScenarioProfile out = *this;
    double shift = 10.0 * std::log10(total);
    for (double& db : out.tap_gains_db) db -= shift;
    return out;
}

void ScenarioProfile::validate() const {
    const std::string who = "profile '" + name + "'";
    require(tap_count() >= 1, ErrorKind::InvalidArgument, who + " has no taps");
    require(tap_gains_db.size() == tap_delays_us.size() && doppler.size() == tap_delays_us.size(),
            ErrorKind::InvalidArgument, who + ": per-tap lists differ in length");
    for (int l = 0; l < tap_count(); ++l) {
        require(std::abs(tap_delays_us[l] - kDelayUnitUs * l) < 1e-9, ErrorKind::InvalidArgument,
                who + ": tap " + std::to_string(l) + " must sit at " +
                    std::to_string(static_cast<int>(kDelayUnitUs) * l) + " us");
    }
}

void SimConfig::validate() const {
    require(symbol_rate_hz > 0.0, ErrorKind::InvalidArgument, "symbol_rate_hz must be positive");
    require(normalized_doppler >= 0.0 && normalized_doppler < 0.5, ErrorKind::InvalidArgument,
            "normalized_doppler must lie in [0, 0.5)");
    require(samples_per_symbol >= 1, ErrorKind::InvalidArgument, "samples_per_symbol must be >= 1");
}

std::vector<ScenarioProfile> parse_profiles(std::string_view text) {
    std::vector<ScenarioProfile> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool seen_header = false;
    int pending_taps = 0;
    auto where = [&] { return "profile data line " + std::to_string(line_no); };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (!seen_header) {
            int version = 0;
            if (word != "scenid-profiles" || !(ls >> version))
                fail(ErrorKind::Parse, where() + ": expected 'scenid-profiles <version>' header");
            if (version != 1)
                fail(ErrorKind::Parse, where() + ": unsupported version " + std::to_string(version));
            seen_header = true;
            continue;
        }
        if (word == "profile") {
            if (pending_taps != 0) fail(ErrorKind::Parse, where() + ": previous profile is missing taps");
            ScenarioProfile p;
            if (!(ls >> p.label >> p.name >> pending_taps) || pending_taps < 1)
                fail(ErrorKind::Parse, where() + ": expected 'profile <label> <name> <taps>'");
            out.push_back(std::move(p));
        } else if (word == "tap") {
            if (out.empty() || pending_taps == 0) fail(ErrorKind::Parse, where() + ": unexpected tap record");
            double delay = 0.0, gain = 0.0;
            std::string spectrum;
            if (!(ls >> delay >> gain >> spectrum))
                fail(ErrorKind::Parse, where() + ": expected 'tap <delay_us> <gain_db> <doppler>'");
            auto& p = out.back();
            p.tap_delays_us.push_back(delay);
            p.tap_gains_db.push_back(gain);
            p.doppler.push_back(DopplerSpectrum::parse(spectrum));
            --pending_taps;
        } else {
            fail(ErrorKind::Parse, where() + ": unknown record '" + word + "'");
        }
    }
    if (!seen_header) fail(ErrorKind::Parse, "profile data: missing header");
    if (pending_taps != 0) fail(ErrorKind::Parse, "profile data: last profile is missing taps");

    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].validate();
        for (std::size_t j = 0; j < i; ++j)
            if (out[j].label == out[i].label)
                fail(ErrorKind::Parse, "profile data: duplicate label " + std::to_string(out[i].label));
    }
    return out;
}

std::string_view builtin_profile_text() { return detail::kProfileData; }

const std::vector<ScenarioProfile>& builtin_profiles() {
    static const std::vector<ScenarioProfile> profiles = parse_profiles(builtin_profile_text());
    return profiles;
}

ScenarioProfile load_profile(int label, const std::vector<ScenarioProfile>& registry) {
    for (const auto& p : registry)
        if (p.label == label) return p;
    fail(ErrorKind::NotFound, "no scenario profile with label " + std::to_string(label));
}

ScenarioProfile load_profile(int label) { return load_profile(label, builtin_profiles()); }

// ----------------------------------------------------------------- fading

namespace {

// Frequency grid for the filtered-noise generator; at least 16384 bins so
// the Doppler band at nu = 0.004 spans ~130 bins.
std::size_t fading_fft_length(std::size_t n) {
    std::size_t len = 16384;
    while (len < n) len <<= 1;
    return len;
}

} // namespace

std::vector<double> doppler_bin_powers(const DopplerSpectrum& spectrum, double nu, std::size_t fft_len) {
    std::vector<double> p(fft_len, 0.0);
    if (nu <= 0.0) {
        p[0] = 1.0;
        return p;
    }
    const double len = static_cast<double>(fft_len);
    const long half = static_cast<long>(fft_len / 2);
    double total = 0.0;
    for (long k = -half; k < half; ++k) {
        double lo = (k - 0.5) / len / nu, hi = (k + 0.5) / len / nu;
        double w = spectrum.band_power(lo, hi);
        p[static_cast<std::size_t>((k + static_cast<long>(fft_len)) % static_cast<long>(fft_len))] = w;
        total += w;
    }
    if (total <= 0.0) {
        p.assign(fft_len, 0.0);
        p[0] = 1.0;
        return p;
    }
    for (double& w : p) w /= total;
    return p;
}

CIRMatrix generate_fading(const ScenarioProfile& profile, std::size_t n_samples, const SimConfig& config,
                          std::uint64_t seed) {
    require(n_samples >= 1, ErrorKind::InvalidArgument, "n_samples must be >= 1");
    profile.validate();
    config.validate();

    const int taps = profile.tap_count();
    const auto gains = profile.linear_gains();
    const double nu = config.normalized_doppler / config.samples_per_symbol;

    CIRMatrix cir;
    cir.gains.resize(taps, static_cast<Eigen::Index>(n_samples));
    cir.sample_period_s = config.sample_period_s();
    cir.delay_units = profile.delay_units();
    for (int& d : cir.delay_units) d *= config.samples_per_symbol;

    const std::size_t len = fading_fft_length(n_samples);
    for (int l = 0; l < taps; ++l) {
        std::mt19937_64 gen(derive_seed(seed, {static_cast<std::uint64_t>(l)}));
        std::normal_distribution<double> normal(0.0, M_SQRT1_2);
        const double amp = std::sqrt(gains[l]);

        if (nu == 0.0) {
            cd c(normal(gen), normal(gen));
            cir.gains.row(l).setConstant(amp * c);
            continue;
        }
        auto powers = doppler_bin_powers(profile.doppler[l], nu, len);
        CVector spec(len);
        for (std::size_t k = 0; k < len; ++k) {
            double re = normal(gen), im = normal(gen);
            spec[k] = amp * std::sqrt(powers[k]) * cd(re, im);
        }
        CVector trace = fft::backward(spec);
        for (std::size_t n = 0; n < n_samples; ++n) cir.gains(l, static_cast<Eigen::Index>(n)) = trace[n];
    }
    return cir;
}

// ---------------------------------------------------------- transmission

ComplexSignal apply_channel(const ComplexSignal& signal, const CIRMatrix& cir) {
    const auto n = static_cast<Eigen::Index>(signal.size());
    require(cir.samples() == n, ErrorKind::Dimension,
            "signal has " + std::to_string(n) + " samples, CIR has " + std::to_string(cir.samples()));
    require(static_cast<Eigen::Index>(cir.delay_units.size()) == cir.taps(), ErrorKind::Dimension,
            "CIR delay list does not match its tap count");
    for (int d : cir.delay_units)
        require(d >= 0 && d < n, ErrorKind::Dimension, "tap delay " + std::to_string(d) + " outside signal");

    ComplexSignal out{CVector(signal.size(), cd{}), signal.sample_period_s};
    for (Eigen::Index l = 0; l < cir.taps(); ++l) {
        const Eigen::Index d = cir.delay_units[static_cast<std::size_t>(l)];
        for (Eigen::Index i = d; i < n; ++i)
            out.samples[static_cast<std::size_t>(i)] += cir.gains(l, i) * signal.samples[static_cast<std::size_t>(i - d)];
    }
    return out;
}

ComplexSignal add_awgn(const ComplexSignal& signal, std::optional<double> snr_db, std::uint64_t seed) {
    if (!snr_db) return signal;
    const double p = mean_power(signal.samples);
    require(p > 0.0, ErrorKind::DegenerateInput, "cannot set an SNR on a zero-power signal");
    const double sigma = std::sqrt(p / std::pow(10.0, *snr_db / 10.0) / 2.0);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    ComplexSignal out = signal;
    for (cd& v : out.samples) {
        double re = normal(gen), im = normal(gen);
        v += cd(re, im);
    }
    return out;
}

QpskFrame modulate_qpsk(const std::vector<std::uint8_t>& bits, const PilotSpec& pilots) {
    require(bits.size() % 2 == 0, ErrorKind::Format,
            "QPSK needs an even number of bits, got " + std::to_string(bits.size()));
    require(pilots.spacing >= 0, ErrorKind::InvalidArgument, "pilot spacing must be >= 0");
    require(pilots.spacing != 1 || bits.empty(), ErrorKind::InvalidArgument,
            "pilot spacing 1 leaves no room for data");

    QpskFrame frame;
    auto& out = frame.signal.samples;
    std::size_t next_bit = 0;
    auto emit_pilot = [&] {
        frame.pilot_positions.push_back(out.size());
        out.push_back(pilots.symbol);
    };
    if (pilots.spacing > 0) emit_pilot();
    while (next_bit < bits.size()) {
        if (pilots.spacing > 0 && out.size() % static_cast<std::size_t>(pilots.spacing) == 0) {
            emit_pilot();
            continue;
        }
        double re = bits[next_bit] ? -1.0 : 1.0;
        double im = bits[next_bit + 1] ? -1.0 : 1.0;
        out.emplace_back(re * M_SQRT1_2, im * M_SQRT1_2);
        next_bit += 2;
    }
    return frame;
}

} // namespace scenid
