// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#pragma once

#include <stdexcept>
#include <string>

namespace scenid {

enum class ErrorKind {
    InvalidArgument,
    NotFound,
    Dimension,
    DegenerateInput,
    Format,
    InvalidState,
    InsufficientData,
    InsufficientSignal,
    Identifiability,
    InvalidSplit,
    NoChannelDetected,
    Parse,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` lets callers branch
/// without a class hierarchy.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace scenid
