// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "scenid/types.hpp"

namespace scenid::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole token; throws Parse with `context` on failure.
double parse_double(std::string_view token, std::string_view context);
std::uint64_t parse_u64(std::string_view token, std::string_view context);

std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames, so readers never see a
/// partial file.
void write_file(const std::string& path, std::string_view content);

/// Signal file: header `<sample_rate_hz> <count>`, then `count` lines of
/// `<re> <im>`.
std::string format_signal(const ComplexSignal& signal);
ComplexSignal parse_signal(std::string_view text);
ComplexSignal load_signal(const std::string& path);
void save_signal(const std::string& path, const ComplexSignal& signal);

} // namespace scenid::io
