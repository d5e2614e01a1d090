// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/fft.hpp"

#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace scenid::fft {
namespace {

// The FFTW planner is not thread-safe; execution with the new-array
// interface is. Plans are created once per (size, sign) and never freed.
fftw_plan plan_for(int n, int sign) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    CVector a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(std::pair{n, sign}, p);
    return p;
}

CVector run(std::span<const cd> x, int sign) {
    CVector in(x.begin(), x.end());
    CVector out(x.size());
    if (x.empty()) return out;
    fftw_execute_dft(plan_for(static_cast<int>(x.size()), sign),
                     reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

CVector forward(std::span<const cd> x) { return run(x, FFTW_FORWARD); }

CVector backward(std::span<const cd> x) { return run(x, FFTW_BACKWARD); }

} // namespace scenid::fft
