// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <span>

#include "scenid/types.hpp"

namespace scenid::fft {

/// X[k] = sum_n x[n] exp(-j 2 pi k n / N), any N >= 1.
CVector forward(std::span<const cd> x);

/// x[n] = sum_k X[k] exp(+j 2 pi k n / N). No 1/N scaling.
CVector backward(std::span<const cd> x);

} // namespace scenid::fft
