// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scenid/error.hpp"

namespace scenid::io {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) fail(ErrorKind::Format, "cannot format number");
    return {buf, ptr};
}

double parse_double(std::string_view token, std::string_view context) {
    double v = 0.0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (token.empty() || ec != std::errc() || ptr != end)
        fail(ErrorKind::Parse, std::string(context) + ": bad number '" + std::string(token) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view token, std::string_view context) {
    std::uint64_t v = 0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (token.empty() || ec != std::errc() || ptr != end)
        fail(ErrorKind::Parse, std::string(context) + ": bad integer '" + std::string(token) + "'");
    return v;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::Io, "cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string format_signal(const ComplexSignal& signal) {
    std::string out = format_double(1.0 / signal.sample_period_s) + " " + std::to_string(signal.size()) + "\n";
    for (const cd& v : signal.samples) out += format_double(v.real()) + " " + format_double(v.imag()) + "\n";
    return out;
}

namespace {

// Whitespace tokenizer that remembers byte offsets for error messages.
class Tokens {
public:
    explicit Tokens(std::string_view text) : text_(text) {}

    bool next(std::string_view& token, std::size_t& offset) {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) return false;
        offset = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        token = text_.substr(offset, pos_ - offset);
        return true;
    }
    std::size_t position() const { return pos_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

ComplexSignal parse_signal(std::string_view text) {
    Tokens tok(text);
    std::string_view t;
    std::size_t off = 0;
    auto ctx = [&](std::size_t at) { return "signal file byte offset " + std::to_string(at); };

    if (!tok.next(t, off)) fail(ErrorKind::Parse, "signal file is empty");
    const double rate = parse_double(t, ctx(off));
    if (!(rate > 0.0)) fail(ErrorKind::Parse, ctx(off) + ": sample rate must be positive");
    if (!tok.next(t, off)) fail(ErrorKind::Parse, ctx(tok.position()) + ": missing sample count");
    const std::uint64_t count = parse_u64(t, ctx(off));

    ComplexSignal sig;
    sig.sample_period_s = 1.0 / rate;
    sig.samples.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        double parts[2];
        for (double& p : parts) {
            if (!tok.next(t, off))
                fail(ErrorKind::Parse, ctx(tok.position()) + ": truncated after " + std::to_string(i) + " of " +
                                           std::to_string(count) + " samples");
            p = parse_double(t, ctx(off));
        }
        sig.samples.emplace_back(parts[0], parts[1]);
    }
    if (tok.next(t, off)) fail(ErrorKind::Parse, ctx(off) + ": trailing data after " + std::to_string(count) + " samples");
    return sig;
}

ComplexSignal load_signal(const std::string& path) { return parse_signal(read_file(path)); }

void save_signal(const std::string& path, const ComplexSignal& signal) { write_file(path, format_signal(signal)); }

} // namespace scenid::io
