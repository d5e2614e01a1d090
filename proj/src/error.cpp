// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/error.hpp"

namespace scenid {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::DegenerateInput: return "degenerate input";
    case ErrorKind::Format: return "format error";
    case ErrorKind::InvalidState: return "invalid state";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::InsufficientSignal: return "insufficient signal";
    case ErrorKind::Identifiability: return "identifiability error";
    case ErrorKind::InvalidSplit: return "invalid split";
    case ErrorKind::NoChannelDetected: return "no channel detected";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "I/O error";
    }
    return "error";
}

} // namespace scenid
