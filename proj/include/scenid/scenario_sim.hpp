// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenid/types.hpp"

namespace scenid {

/// Doppler power spectrum of one tap. Gaussian components use COST 207
/// notation: amplitude, center and sigma, the last two as fractions of the
/// maximum Doppler frequency.
struct DopplerSpectrum {
    enum class Kind { Jakes, Gaussian };
    struct GaussComponent {
        double amplitude = 1.0;
        double center = 0.0;
        double sigma = 0.1;
    };

    Kind kind = Kind::Jakes;
    std::vector<GaussComponent> components;

    static DopplerSpectrum jakes() { return {}; }
    static DopplerSpectrum gaussian(std::vector<GaussComponent> parts) {
        return {Kind::Gaussian, std::move(parts)};
    }

    /// Fraction of the tap power in [f_lo, f_hi], frequencies normalized to
    /// the maximum Doppler.
    double band_power(double f_lo, double f_hi) const;

    /// Text form used by the profile data file: `jakes` or
    /// `gauss(a,c,s;a,c,s)`.
    std::string to_string() const;
    static DopplerSpectrum parse(std::string_view text);
};

struct ScenarioProfile {
    int label = 0;
    std::string name;
    std::vector<double> tap_delays_us;
    std::vector<double> tap_gains_db;
    std::vector<DopplerSpectrum> doppler;

    int tap_count() const { return static_cast<int>(tap_delays_us.size()); }
    std::vector<int> delay_units() const;
    std::vector<double> linear_gains() const;
    /// Copy with gains shifted so the linear tap powers sum to one.
    ScenarioProfile normalized() const;
    void validate() const;
};

struct SimConfig {
    double symbol_rate_hz = 1e5;
    double normalized_doppler = 0.004;
    int samples_per_symbol = 1;
    std::uint64_t seed = 0;

    double sample_period_s() const { return 1.0 / (symbol_rate_hz * samples_per_symbol); }
    double max_doppler_hz() const { return normalized_doppler * symbol_rate_hz; }
    void validate() const;
};

/// Parses the versioned profile data file format.
std::vector<ScenarioProfile> parse_profiles(std::string_view text);
/// The six bundled profiles, parsed from the embedded data file.
const std::vector<ScenarioProfile>& builtin_profiles();
std::string_view builtin_profile_text();

ScenarioProfile load_profile(int label);
ScenarioProfile load_profile(int label, const std::vector<ScenarioProfile>& registry);

/// Filtered-Gaussian-noise fading: independent complex Gaussian taps with
/// the profile's Doppler spectra and mean powers. Rows follow the profile's
/// tap order, `delay_units` the profile delays on the 10 us grid.
/// normalized_doppler = 0 yields constant taps.
CIRMatrix generate_fading(const ScenarioProfile& profile, std::size_t n_samples,
                          const SimConfig& config, std::uint64_t seed);

/// Per-tap power of bin k (frequency k / fft_len, signed) for a process
/// with normalized maximum Doppler `nu`. Exposed for tests.
std::vector<double> doppler_bin_powers(const DopplerSpectrum& spectrum, double nu,
                                       std::size_t fft_len);

/// Time-varying FIR: out[n] = sum_l gains(l, n) * in[n - delay_l], zero
/// before the start of the signal.
ComplexSignal apply_channel(const ComplexSignal& signal, const CIRMatrix& cir);

/// Complex AWGN at the measured signal power over 10^(snr/10).
/// An empty `snr_db` means noiseless and returns the input unchanged.
ComplexSignal add_awgn(const ComplexSignal& signal, std::optional<double> snr_db,
                       std::uint64_t seed);

struct PilotSpec {
    /// Pilot at every `spacing`-th symbol starting at index 0; 0 disables.
    int spacing = 0;
    cd symbol{M_SQRT1_2, M_SQRT1_2};
};

struct QpskFrame {
    ComplexSignal signal;
    std::vector<std::size_t> pilot_positions;
};

/// Gray-mapped unit-power QPSK: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
QpskFrame modulate_qpsk(const std::vector<std::uint8_t>& bits, const PilotSpec& pilots);

} // namespace scenid
