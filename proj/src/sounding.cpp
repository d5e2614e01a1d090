// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/sounding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scenid/error.hpp"
#include "scenid/fft.hpp"

namespace scenid {

// -------------------------------------------------------------- m-sequence

CVector MSequence::as_signal() const {
    CVector out;
    out.reserve(chips.size());
    for (int c : chips) out.emplace_back(static_cast<double>(c), 0.0);
    return out;
}

const std::vector<int>& default_feedback_taps(int register_length) {
    static const std::map<int, std::vector<int>> table = {
        {2, {1}},        {3, {1}},         {4, {1}},         {5, {2}},     {6, {1}},
        {7, {1}},        {8, {4, 3, 2}},   {9, {4}},         {10, {3}},    {11, {2}},
        {12, {6, 4, 1}}, {13, {4, 3, 1}},  {14, {10, 6, 1}}, {15, {1}},    {16, {12, 3, 1}},
    };
    auto it = table.find(register_length);
    if (it == table.end())
        fail(ErrorKind::InvalidArgument, "no default polynomial for register length " + std::to_string(register_length));
    return it->second;
}

MSequence generate_mseq(int register_length, std::vector<int> feedback_taps, std::uint32_t initial_state) {
    const int p = register_length;
    require(p >= 2 && p <= 24, ErrorKind::InvalidArgument, "register length must be in [2, 24]");
    for (int t : feedback_taps)
        require(t >= 1 && t < p, ErrorKind::InvalidArgument,
                "feedback tap " + std::to_string(t) + " outside [1, " + std::to_string(p - 1) + "]");
    const std::uint32_t mask = (1u << p) - 1u;
    initial_state &= mask;
    require(initial_state != 0, ErrorKind::InvalidState, "LFSR initial state must be nonzero");

    // Recurrence s[n+p] = s[n] xor sum_{t in taps} s[n+t]; stage i holds s[n+i].
    std::uint32_t feedback_mask = 1u;
    for (int t : feedback_taps) feedback_mask ^= (1u << t);

    const std::size_t period = (std::size_t{1} << p) - 1;
    MSequence seq;
    seq.register_length = p;
    seq.feedback_taps = std::move(feedback_taps);
    seq.chips.reserve(period);

    std::uint32_t state = initial_state;
    for (std::size_t n = 0; n < period; ++n) {
        if (n > 0 && state == initial_state)
            fail(ErrorKind::InvalidArgument, "feedback polynomial is not primitive (period " + std::to_string(n) + ")");
        seq.chips.push_back((state & 1u) ? -1 : 1);
        std::uint32_t next = static_cast<std::uint32_t>(__builtin_parity(state & feedback_mask));
        state = (state >> 1) | (next << (p - 1));
    }
    require(state == initial_state, ErrorKind::InvalidArgument, "feedback polynomial is not primitive");
    return seq;
}

std::vector<long> periodic_autocorrelation(const std::vector<int>& chips) {
    const std::size_t n = chips.size();
    std::vector<long> acf(n, 0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        long acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += chips[i] * chips[(i + lag) % n];
        acf[lag] = acc;
    }
    return acf;
}

ComplexSignal periodic_probe(const MSequence& mseq, std::size_t periods) {
    ComplexSignal out;
    out.sample_period_s = mseq.chip_period_s;
    CVector one = mseq.as_signal();
    out.samples.reserve(one.size() * periods);
    for (std::size_t i = 0; i < periods; ++i) out.samples.insert(out.samples.end(), one.begin(), one.end());
    return out;
}

// ------------------------------------------------------------ order search

namespace {

CVector period_average(const ComplexSignal& received, std::size_t period) {
    require(received.size() >= period, ErrorKind::InsufficientData,
            "received probe has " + std::to_string(received.size()) + " samples, one period is " +
                std::to_string(period));
    require(received.size() % period == 0, ErrorKind::Dimension,
            "received length " + std::to_string(received.size()) + " is not a multiple of the period " +
                std::to_string(period));
    const std::size_t periods = received.size() / period;
    CVector avg(period, cd{});
    for (std::size_t i = 0; i < received.size(); ++i) avg[i % period] += received.samples[i];
    for (cd& v : avg) v /= static_cast<double>(periods);
    return avg;
}

} // namespace

CVector lag_gains(const ComplexSignal& received, const MSequence& local) {
    const std::size_t n = local.period();
    CVector avg = period_average(received, n);
    CVector r_hat = fft::forward(avg);
    CVector m_hat = fft::forward(local.as_signal());
    for (std::size_t q = 0; q < n; ++q) r_hat[q] *= std::conj(m_hat[q]);
    CVector corr = fft::backward(r_hat); // N * C[k]
    cd total{};
    for (cd& c : corr) {
        c /= static_cast<double>(n);
        total += c;
    }
    CVector gains(n);
    for (std::size_t k = 0; k < n; ++k) gains[k] = (corr[k] + total) / static_cast<double>(n + 1);
    return gains;
}

namespace {

// P(X > t) for X the mean of `s` iid unit exponentials (Erlang survival).
double pooled_survival(double t, int s) {
    double term = std::exp(-s * t), sum = term;
    for (int i = 1; i < s; ++i) {
        term *= s * t / i;
        sum += term;
    }
    return sum;
}

double pooled_quantile(double tail, int s) {
    double lo = 0.0, hi = 1.0;
    while (pooled_survival(hi, s) > tail) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (pooled_survival(mid, s) > tail ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

OrderEstimate estimate_order_pooled(const std::vector<ComplexSignal>& probes, const MSequence& local,
                                    const OrderOptions& options) {
    require(options.threshold_factor > 0.0 && options.threshold_factor <= 1.0, ErrorKind::InvalidArgument,
            "threshold_factor must lie in (0, 1]");
    require(options.false_alarm > 0.0 && options.false_alarm < 1.0, ErrorKind::InvalidArgument,
            "false_alarm must lie in (0, 1)");
    require(!probes.empty(), ErrorKind::InsufficientData, "no probes");
    const std::size_t n = local.period();

    std::vector<double> power(n, 0.0);
    double rms = 0.0;
    for (const auto& probe : probes) {
        CVector g = lag_gains(probe, local);
        for (std::size_t k = 0; k < n; ++k) power[k] += std::norm(g[k]);
        rms = std::max(rms, std::sqrt(mean_power(probe.samples)));
    }
    const int pooled = static_cast<int>(probes.size());
    OrderEstimate est;
    est.spectrum.resize(n);
    for (std::size_t k = 0; k < n; ++k) est.spectrum[k] = std::sqrt(power[k] / pooled);

    const double peak = *std::max_element(est.spectrum.begin(), est.spectrum.end());
    if (rms == 0.0 || !(peak > 1e-12 * rms))
        fail(ErrorKind::InsufficientSignal, "no correlation peak above the numeric floor");

    // Noise floor: per-lag gain noise is circular Gaussian, so the pooled
    // power is a scaled mean of `pooled` unit exponentials. Scale it from
    // the median and place the floor at a false-alarm rate of false_alarm
    // per probe set.
    std::vector<double> sorted = est.spectrum;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n / 2), sorted.end());
    const double median_power = sorted[n / 2] * sorted[n / 2];
    const double noise_power = median_power / pooled_quantile(0.5, pooled);
    const double floor =
        std::sqrt(noise_power * pooled_quantile(options.false_alarm / static_cast<double>(n), pooled));

    est.threshold = std::max(options.threshold_factor * peak, floor);
    for (std::size_t k = 0; k < n; ++k) {
        if (est.spectrum[k] >= est.threshold && est.spectrum[k] > floor) {
            est.peak_lags.push_back(static_cast<int>(k));
            est.peak_values.push_back(est.spectrum[k]);
        }
    }
    est.order = static_cast<int>(est.peak_lags.size());
    return est;
}

OrderEstimate estimate_order(const ComplexSignal& received, const MSequence& local, const OrderOptions& options) {
    return estimate_order_pooled({received}, local, options);
}

// ---------------------------------------------------------------- spectra

double FrequencyData::m_energy() const {
    double e = 0.0;
    for (const cd& v : M) e += std::norm(v);
    return e;
}

FrequencyData probe_spectrum(const ComplexSignal& received, const MSequence& local) {
    const std::size_t n = local.period();
    require(received.size() % n == 0 && !received.samples.empty(), ErrorKind::Dimension,
            "received length " + std::to_string(received.size()) + " does not match period " + std::to_string(n));
    CVector avg = period_average(received, n);
    CVector r_hat = fft::forward(avg);
    CVector m_hat = fft::forward(local.as_signal());

    FrequencyData fd;
    fd.R.resize(n);
    fd.M.resize(n);
    fd.k.resize(n);
    const long first = -static_cast<long>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        long k = first + static_cast<long>(i);
        std::size_t bin = static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n));
        fd.k[i] = static_cast<int>(k);
        fd.R[i] = r_hat[bin];
        fd.M[i] = m_hat[bin];
    }
    return fd;
}

namespace {

// exp(-j 2 pi m / N) for m = 0..N-1, shared by all delay evaluations.
class PhaseTable {
public:
    explicit PhaseTable(std::size_t n) : n_(static_cast<long>(n)), table_(n) {
        for (std::size_t m = 0; m < n; ++m)
            table_[m] = std::polar(1.0, -2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n));
    }
    /// exp(-j 2 pi delay k / N)
    cd steering(int delay, int k) const {
        long idx = (static_cast<long>(delay) * k) % n_;
        if (idx < 0) idx += n_;
        return table_[static_cast<std::size_t>(idx)];
    }

private:
    long n_;
    CVector table_;
};

cd correlate(const FrequencyData& freq, const PhaseTable& phases, const CVector& residual, int delay) {
    cd acc{};
    for (std::size_t i = 0; i < freq.size(); ++i)
        acc += std::conj(phases.steering(delay, freq.k[i])) * std::conj(freq.M[i]) * residual[i];
    return acc;
}

// |alpha(tau)^H (M^* residual)|^2 for every tau in [0, N) with one inverse
// FFT; the centered bin order maps onto FFT bins by k mod N.
std::vector<double> correlation_power(const FrequencyData& freq, const CVector& residual) {
    const std::size_t n = freq.size();
    CVector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        long bin = freq.k[i] % static_cast<long>(n);
        if (bin < 0) bin += static_cast<long>(n);
        y[static_cast<std::size_t>(bin)] = std::conj(freq.M[i]) * residual[i];
    }
    CVector g = fft::backward(y);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = std::norm(g[t]);
    return out;
}

int argmax_delay(const FrequencyData& freq, const PhaseTable&, const CVector& residual,
                 const std::vector<int>& candidates) {
    const auto power = correlation_power(freq, residual);
    int best = candidates.front();
    double best_val = -1.0;
    // Values within FFT roundoff of each other are ties; the smaller delay wins.
    for (int d : candidates) {
        const double v = power[static_cast<std::size_t>(d)];
        const double tie = 1e-12 * std::max(v, best_val);
        if (v > best_val + tie || (std::abs(v - best_val) <= tie && d < best)) {
            best_val = std::max(v, best_val);
            best = d;
        }
    }
    return best;
}

void add_path(const FrequencyData& freq, const PhaseTable& phases, CVector& spectrum, const PathEstimate& p,
              double sign) {
    for (std::size_t i = 0; i < freq.size(); ++i)
        spectrum[i] += sign * p.amplitude * freq.M[i] * phases.steering(p.delay_units, freq.k[i]);
}

void check_residual(const FrequencyData& freq, const CVector& residual) {
    require(residual.size() == freq.size(), ErrorKind::Dimension,
            "residual has " + std::to_string(residual.size()) + " bins, expected " + std::to_string(freq.size()));
}

} // namespace

cd delay_correlation(const FrequencyData& freq, const CVector& residual, int delay) {
    check_residual(freq, residual);
    return correlate(freq, PhaseTable(freq.size()), residual, delay);
}

cd amplitude_given_delay(const FrequencyData& freq, const CVector& residual, int delay) {
    return delay_correlation(freq, residual, delay) / freq.m_energy();
}

int delay_argmax(const FrequencyData& freq, const CVector& residual, const std::vector<int>& candidates) {
    check_residual(freq, residual);
    require(!candidates.empty(), ErrorKind::InvalidArgument, "empty candidate delay range");
    for (int d : candidates)
        require(d >= 0 && d < static_cast<int>(freq.size()), ErrorKind::InvalidArgument,
                "candidate delay " + std::to_string(d) + " outside [0, N)");
    return argmax_delay(freq, PhaseTable(freq.size()), residual, candidates);
}

CVector model_spectrum(const FrequencyData& freq, const std::vector<PathEstimate>& paths) {
    PhaseTable phases(freq.size());
    CVector out(freq.size(), cd{});
    for (const auto& p : paths) add_path(freq, phases, out, p, 1.0);
    return out;
}

double relax_cost(const FrequencyData& freq, const std::vector<PathEstimate>& paths) {
    CVector model = model_spectrum(freq, paths);
    double cost = 0.0;
    for (std::size_t i = 0; i < freq.size(); ++i) cost += std::norm(freq.R[i] - model[i]);
    return cost;
}

std::vector<int> delay_range(int first, int last_exclusive) {
    std::vector<int> out;
    for (int d = first; d < last_exclusive; ++d) out.push_back(d);
    return out;
}

DelayAmplitudeEstimate relax_estimate(const FrequencyData& freq, int order, const std::vector<int>& candidates,
                                      const RelaxOptions& options) {
    require(order >= 1, ErrorKind::InvalidArgument, "order must be >= 1");
    require(options.tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
    require(options.max_outer_iters >= 1, ErrorKind::InvalidArgument, "max_outer_iters must be >= 1");
    std::vector<int> cands = candidates;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    require(!cands.empty(), ErrorKind::InvalidArgument, "empty candidate delay range");
    require(static_cast<std::size_t>(order) <= cands.size(), ErrorKind::InvalidArgument,
            "order " + std::to_string(order) + " exceeds the " + std::to_string(cands.size()) + " candidate delays");
    for (int d : cands)
        require(d >= 0 && d < static_cast<int>(freq.size()), ErrorKind::InvalidArgument,
                "candidate delay " + std::to_string(d) + " outside [0, N)");

    const PhaseTable phases(freq.size());
    const double m_energy = freq.m_energy();
    double r_energy = 0.0;
    for (const cd& v : freq.R) r_energy += std::norm(v);
    const double negligible = 1e-28 * std::max(r_energy, 1e-300);

    auto free_candidates = [&](const std::vector<PathEstimate>& paths, std::size_t skip) {
        std::vector<int> out;
        for (int d : cands) {
            bool taken = false;
            for (std::size_t j = 0; j < paths.size(); ++j)
                if (j != skip && paths[j].delay_units == d) taken = true;
            if (!taken) out.push_back(d);
        }
        return out;
    };
    auto cost_of = [&](const CVector& residual) {
        double c = 0.0;
        for (const cd& v : residual) c += std::norm(v);
        return c;
    };

    DelayAmplitudeEstimate est;
    std::vector<PathEstimate> paths;
    CVector residual = freq.R;
    double cost = r_energy;

    for (int stage = 1; stage <= order; ++stage) {
        // Grow: best new path against the current residual.
        auto open = free_candidates(paths, paths.size());
        PathEstimate fresh;
        fresh.delay_units = argmax_delay(freq, phases, residual, open);
        fresh.amplitude = correlate(freq, phases, residual, fresh.delay_units) / m_energy;
        paths.push_back(fresh);
        add_path(freq, phases, residual, fresh, -1.0);
        cost = cost_of(residual);
        est.sweep_costs.push_back(cost);
        if (stage == 1) continue;

        // Relax: re-fit each path against the residual of all the others.
        for (int sweep = 0; sweep < options.max_outer_iters; ++sweep) {
            const auto saved_paths = paths;
            const auto saved_residual = residual;
            for (std::size_t i = 0; i < paths.size(); ++i) {
                add_path(freq, phases, residual, paths[i], 1.0);
                auto open_i = free_candidates(paths, i);
                paths[i].delay_units = argmax_delay(freq, phases, residual, open_i);
                paths[i].amplitude = correlate(freq, phases, residual, paths[i].delay_units) / m_energy;
                add_path(freq, phases, residual, paths[i], -1.0);
            }
            ++est.iterations;
            double next = cost_of(residual);
            if (next > cost) {
                // Roundoff-level increase: keep the previous solution.
                paths = saved_paths;
                residual = saved_residual;
                break;
            }
            double decrease = (cost - next) / std::max(cost, 1e-300);
            cost = next;
            est.sweep_costs.push_back(cost);
            if (decrease < options.tol || cost <= negligible) break;
        }
    }

    std::sort(paths.begin(), paths.end(),
              [](const PathEstimate& a, const PathEstimate& b) { return a.delay_units < b.delay_units; });
    est.paths = std::move(paths);
    est.residual_cost = relax_cost(freq, est.paths);
    return est;
}

DelayProfile estimate_delay_profile(const std::vector<ComplexSignal>& probes, const MSequence& local,
                                    const OrderOptions& order_options, const RelaxOptions& relax_options) {
    DelayProfile out;
    out.detection = estimate_order_pooled(probes, local, order_options);
    const int order = out.detection.order;
    out.votes.assign(local.period(), 0);
    if (order == 0) return out;

    const auto lags = delay_range(0, static_cast<int>(local.period()));
    for (const auto& probe : probes) {
        auto fit = relax_estimate(probe_spectrum(probe, local), order, lags, relax_options);
        for (const auto& p : fit.paths) ++out.votes[static_cast<std::size_t>(p.delay_units)];
    }
    std::vector<int> ranked = lags;
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        if (out.votes[a] != out.votes[b]) return out.votes[a] > out.votes[b];
        return out.detection.spectrum[a] > out.detection.spectrum[b];
    });
    out.delays.assign(ranked.begin(), ranked.begin() + order);
    std::sort(out.delays.begin(), out.delays.end());
    return out;
}

} // namespace scenid
