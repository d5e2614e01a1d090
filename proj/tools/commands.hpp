// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scenid/types.hpp"

namespace scenid::cli {

/// Runs the command line `args` (program name excluded). Returns the exit
/// status: 0 when every output was written, 1 on a run error, 2 on a usage
/// error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CIR trace file: header `scenid-cir 1 rows=<L> samples=<N> sample_rate_hz=<fs>`,
/// a `delays` line with the L delay units, then one line per sample with
/// L `<re> <im>` pairs.
std::string format_cir(const Eigen::MatrixXcd& gains, const std::vector<int>& delays, double sample_rate_hz);

} // namespace scenid::cli
