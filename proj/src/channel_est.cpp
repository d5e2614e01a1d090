// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/channel_est.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <shared_mutex>
#include <tuple>

#include <lapacke.h>

#include "scenid/error.hpp"
#include "scenid/fft.hpp"
#include "scenid/rng.hpp"

namespace scenid {

// ------------------------------------------------------------------- DPSS

double band_concentration(const Eigen::VectorXd& seq, double half_bandwidth) {
    const auto n = static_cast<std::size_t>(seq.size());
    if (n == 0) return 0.0;
    // seq^T K seq = sum_d k(d) r(d), r the aperiodic autocorrelation (via FFT).
    std::size_t len = 1;
    while (len < 2 * n) len <<= 1;
    CVector padded(len, cd{});
    for (std::size_t i = 0; i < n; ++i) padded[i] = seq[static_cast<Eigen::Index>(i)];
    CVector spec = fft::forward(padded);
    for (cd& v : spec) v = std::norm(v);
    CVector acf = fft::backward(spec);
    const double w = half_bandwidth;
    double num = 2.0 * w * acf[0].real();
    for (std::size_t d = 1; d < n; ++d)
        num += 2.0 * std::sin(2.0 * M_PI * w * static_cast<double>(d)) / (M_PI * static_cast<double>(d)) * acf[d].real();
    return num / acf[0].real();
}

DPSSBasis generate_dpss(std::size_t length, double half_bandwidth, std::size_t count) {
    require(half_bandwidth > 0.0 && half_bandwidth < 0.5, ErrorKind::InvalidArgument,
            "DPSS half bandwidth must lie in (0, 0.5)");
    require(count >= 1 && count <= length, ErrorKind::InvalidArgument,
            "DPSS count must lie in [1, " + std::to_string(length) + "]");

    const auto n = static_cast<lapack_int>(length);
    std::vector<double> diag(length), off(length, 0.0);
    const double c = std::cos(2.0 * M_PI * half_bandwidth);
    for (std::size_t i = 0; i < length; ++i) {
        double h = (static_cast<double>(length) - 1.0 - 2.0 * static_cast<double>(i)) / 2.0;
        diag[i] = h * h * c;
    }
    for (std::size_t i = 1; i < length; ++i)
        off[i - 1] = 0.5 * static_cast<double>(i) * static_cast<double>(length - i);

    // Largest `count` eigenpairs; LAPACK returns them ascending.
    lapack_int found = 0;
    std::vector<double> evals(length);
    std::vector<double> evecs(length * count);
    std::vector<lapack_int> support(2 * count);
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0,
                                     n - static_cast<lapack_int>(count) + 1, n, 0.0, &found, evals.data(),
                                     evecs.data(), n, support.data());
    if (info != 0 || found != static_cast<lapack_int>(count))
        fail(ErrorKind::InvalidState, "tridiagonal eigensolver failed (info " + std::to_string(info) + ")");

    DPSSBasis basis;
    basis.length = length;
    basis.half_bandwidth = half_bandwidth;
    basis.count = count;
    basis.sequences.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(length));
    basis.concentrations.resize(count);
    for (std::size_t d = 0; d < count; ++d) {
        const double* col = evecs.data() + (count - 1 - d) * length;
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(col, n);
        v.normalize();
        const double vmax = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::abs(v[i]) > 1e-10 * vmax) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
        basis.sequences.row(static_cast<Eigen::Index>(d)) = v.transpose();
        double lambda = std::clamp(band_concentration(v, half_bandwidth), 0.0, 1.0);
        // Below ~1e-15 the quadratic form is roundoff; keep the order the
        // eigenvalues already established.
        if (d > 0) lambda = std::min(lambda, basis.concentrations[d - 1]);
        basis.concentrations[d] = lambda;
    }
    return basis;
}

std::shared_ptr<const DPSSBasis> cached_dpss(std::size_t length, double half_bandwidth, std::size_t count) {
    using Key = std::tuple<std::size_t, double, std::size_t>;
    static std::shared_mutex mu;
    static std::map<Key, std::shared_ptr<const DPSSBasis>> cache;
    const Key key{length, half_bandwidth, count};
    {
        std::shared_lock lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto basis = std::make_shared<const DPSSBasis>(generate_dpss(length, half_bandwidth, count));
    std::unique_lock lock(mu);
    return cache.emplace(key, std::move(basis)).first->second;
}

std::size_t basis_dimension(double normalized_doppler, std::size_t length) {
    require(normalized_doppler >= 0.0, ErrorKind::InvalidArgument, "normalized Doppler must be >= 0");
    return static_cast<std::size_t>(std::ceil(2.0 * normalized_doppler * static_cast<double>(length) - 1e-12)) + 3;
}

// ------------------------------------------------------------------ BEM-LS

PilotPattern PilotPattern::all_known(CVector symbols) {
    PilotPattern p;
    p.known.assign(symbols.size(), true);
    p.symbols = std::move(symbols);
    return p;
}

PilotPattern PilotPattern::from_positions(CVector symbols, const std::vector<std::size_t>& pilot_positions) {
    PilotPattern p;
    p.known.assign(symbols.size(), false);
    for (std::size_t i : pilot_positions) {
        require(i < symbols.size(), ErrorKind::InvalidArgument, "pilot position outside the frame");
        p.known[i] = true;
    }
    p.symbols = std::move(symbols);
    return p;
}

BemRegression bem_regression(const PilotPattern& pilots, std::size_t offset, std::size_t length,
                             const std::vector<int>& delay_grid, const DPSSBasis& basis) {
    require(basis.length == length, ErrorKind::Dimension,
            "basis length " + std::to_string(basis.length) + " differs from window length " + std::to_string(length));
    require(offset + length <= pilots.size(), ErrorKind::Dimension, "window runs past the transmitted frame");
    for (int d : delay_grid) require(d >= 0, ErrorKind::InvalidArgument, "negative delay in grid");

    const auto symbol_at = [&](long idx, bool& known) -> cd {
        if (idx < 0) {
            known = true;
            return {};
        }
        known = pilots.known[static_cast<std::size_t>(idx)];
        return pilots.symbols[static_cast<std::size_t>(idx)];
    };

    BemRegression reg;
    for (std::size_t i = 0; i < length; ++i) {
        bool usable = true;
        for (int d : delay_grid) {
            bool known = false;
            symbol_at(static_cast<long>(offset + i) - d, known);
            usable = usable && known;
        }
        if (usable) reg.rows.push_back(i);
    }

    const auto taps = static_cast<Eigen::Index>(delay_grid.size());
    const auto dims = static_cast<Eigen::Index>(basis.count);
    reg.design.resize(static_cast<Eigen::Index>(reg.rows.size()), taps * dims);
    for (std::size_t r = 0; r < reg.rows.size(); ++r) {
        const std::size_t i = reg.rows[r];
        for (Eigen::Index l = 0; l < taps; ++l) {
            bool known = false;
            cd x = symbol_at(static_cast<long>(offset + i) - delay_grid[static_cast<std::size_t>(l)], known);
            for (Eigen::Index d = 0; d < dims; ++d)
                reg.design(static_cast<Eigen::Index>(r), l * dims + d) =
                    basis.sequences(d, static_cast<Eigen::Index>(i)) * x;
        }
    }
    return reg;
}

namespace {

void check_identifiable(const BemRegression& reg, std::size_t taps, std::size_t dims, Eigen::Index rank) {
    const std::size_t unknowns = taps * dims;
    if (reg.rows.size() < unknowns || static_cast<std::size_t>(rank) < unknowns)
        fail(ErrorKind::Identifiability,
             std::to_string(reg.rows.size()) + " usable pilot samples (rank " + std::to_string(rank) + ") for " +
                 std::to_string(taps) + " delays x " + std::to_string(dims) + " basis functions = " +
                 std::to_string(unknowns) + " unknowns");
}

Eigen::MatrixXcd reconstruct(const Eigen::VectorXcd& c, std::size_t taps, const DPSSBasis& basis) {
    const auto dims = static_cast<Eigen::Index>(basis.count);
    Eigen::MatrixXcd coeffs(static_cast<Eigen::Index>(taps), dims);
    for (Eigen::Index l = 0; l < coeffs.rows(); ++l) coeffs.row(l) = c.segment(l * dims, dims).transpose();
    return coeffs;
}

} // namespace

std::pair<BEMCoefficients, CIREstimate> bem_ls_estimate(const ComplexSignal& received, const PilotPattern& pilots,
                                                         const std::vector<int>& delay_grid, const DPSSBasis& basis) {
    require(!delay_grid.empty(), ErrorKind::InvalidArgument, "empty delay grid");
    require(received.size() == basis.length, ErrorKind::Dimension,
            "received length " + std::to_string(received.size()) + " differs from basis length " +
                std::to_string(basis.length));
    require(pilots.size() == received.size(), ErrorKind::Dimension, "pilot frame and received lengths differ");

    BemRegression reg = bem_regression(pilots, 0, received.size(), delay_grid, basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(reg.design);
    check_identifiable(reg, delay_grid.size(), basis.count, qr.rank());

    Eigen::VectorXcd y(static_cast<Eigen::Index>(reg.rows.size()));
    for (std::size_t r = 0; r < reg.rows.size(); ++r) y[static_cast<Eigen::Index>(r)] = received.samples[reg.rows[r]];
    Eigen::VectorXcd c = qr.solve(y);

    BEMCoefficients coeffs{reconstruct(c, delay_grid.size(), basis)};
    CIREstimate cir;
    cir.gains = coeffs.coeffs * basis.sequences.cast<cd>();
    cir.delay_grid = delay_grid;
    cir.source = CIREstimate::Source::BemLs;
    return {std::move(coeffs), std::move(cir)};
}

struct BemLsEstimator::Solver {
    std::size_t length = 0;
    CVector context;
    std::vector<bool> context_known;
    std::shared_ptr<const DPSSBasis> basis;
    std::vector<std::size_t> rows;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
};

BemLsEstimator::BemLsEstimator(std::vector<int> delay_grid, double normalized_doppler, std::size_t window_length)
    : delay_grid_(std::move(delay_grid)), normalized_doppler_(normalized_doppler), window_length_(window_length) {
    require(!delay_grid_.empty(), ErrorKind::InvalidArgument, "empty delay grid");
    require(window_length_ >= 1, ErrorKind::InvalidArgument, "window length must be >= 1");
    require(normalized_doppler_ >= 0.0 && normalized_doppler_ < 0.5, ErrorKind::InvalidArgument,
            "normalized Doppler must lie in [0, 0.5)");
}

std::shared_ptr<const BemLsEstimator::Solver> BemLsEstimator::solver_for(const PilotPattern& pilots,
                                                                       std::size_t offset,
                                                                       std::size_t length) const {
    const int max_delay = *std::max_element(delay_grid_.begin(), delay_grid_.end());
    CVector context;
    std::vector<bool> known;
    for (long i = static_cast<long>(offset) - max_delay; i < static_cast<long>(offset + length); ++i) {
        if (i < 0) {
            context.emplace_back();
            known.push_back(true);
        } else {
            context.push_back(pilots.symbols[static_cast<std::size_t>(i)]);
            known.push_back(pilots.known[static_cast<std::size_t>(i)]);
        }
    }
    std::uint64_t key = fnv1a64(reinterpret_cast<const char*>(context.data()), context.size() * sizeof(cd));
    key = derive_seed(key, {length, static_cast<std::uint64_t>(std::count(known.begin(), known.end(), true))});

    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(key); it != cache_.end())
            for (const auto& s : it->second)
                if (s->length == length && s->context == context && s->context_known == known) return s;
    }

    // Guard W away from zero so the basis stays well defined for static channels.
    const double w = std::max(normalized_doppler_, 1.0 / static_cast<double>(length));
    const std::size_t dims = std::min(basis_dimension(normalized_doppler_, length), length);
    auto solver = std::make_shared<Solver>();
    solver->length = length;
    solver->basis = cached_dpss(length, std::min(w, 0.49), dims);
    BemRegression reg = bem_regression(pilots, offset, length, delay_grid_, *solver->basis);
    solver->qr.compute(reg.design);
    check_identifiable(reg, delay_grid_.size(), dims, solver->qr.rank());
    solver->rows = std::move(reg.rows);
    solver->context = std::move(context);
    solver->context_known = std::move(known);

    std::lock_guard lock(mu_);
    if (cached_ > 256) {
        cache_.clear();
        cached_ = 0;
    }
    cache_[key].push_back(solver);
    ++cached_;
    return solver;
}

CIREstimate BemLsEstimator::estimate(const ComplexSignal& received, const PilotPattern& pilots) const {
    const std::size_t n = received.size();
    require(n >= 1, ErrorKind::InsufficientData, "empty received signal");
    require(pilots.size() == n, ErrorKind::Dimension,
            "pilot frame has " + std::to_string(pilots.size()) + " symbols, received has " + std::to_string(n));

    // The last window absorbs any remainder.
    const std::size_t windows = std::max<std::size_t>(1, n / window_length_);
    CIREstimate cir;
    cir.delay_grid = delay_grid_;
    cir.source = CIREstimate::Source::BemLs;
    cir.gains.resize(static_cast<Eigen::Index>(delay_grid_.size()), static_cast<Eigen::Index>(n));

    for (std::size_t w = 0; w < windows; ++w) {
        const std::size_t offset = w * window_length_;
        const std::size_t length = (w + 1 == windows) ? n - offset : window_length_;
        auto solver = solver_for(pilots, offset, length);
        Eigen::VectorXcd y(static_cast<Eigen::Index>(solver->rows.size()));
        for (std::size_t r = 0; r < solver->rows.size(); ++r)
            y[static_cast<Eigen::Index>(r)] = received.samples[offset + solver->rows[r]];
        Eigen::VectorXcd c = solver->qr.solve(y);
        Eigen::MatrixXcd coeffs = reconstruct(c, delay_grid_.size(), *solver->basis);
        cir.gains.middleCols(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(length)) =
            coeffs * solver->basis->sequences.cast<cd>();
    }
    return cir;
}

double nmse(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth) {
    require(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(), ErrorKind::Dimension,
            "NMSE operands differ in shape");
    return (estimate - truth).squaredNorm() / truth.squaredNorm();
}

} // namespace scenid
