#pragma once

// Small strict text helpers shared by the readers.

#include "mandikin/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mandikin::io::detail {

struct Line {
    std::size_t number;  // 1-based
    std::string_view text;
};

// Splits on LF, dropping one trailing CR per line; a final empty line after
// the last LF is not reported.
inline std::vector<Line> split_lines(std::string_view bytes) {
    std::vector<Line> out;
    std::size_t start = 0;
    std::size_t number = 1;
    while (start < bytes.size()) {
        std::size_t end = bytes.find('\n', start);
        if (end == std::string_view::npos) {
            end = bytes.size();
        }
        std::string_view line = bytes.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.push_back({number++, line});
        start = end + 1;
    }
    return out;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

inline std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = s.find(sep, start);
        if (end == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
    throw IoError("line " + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || tok.empty()) {
        fail(line, "expected a number, got '" + std::string(tok.substr(0, 32)) + "'");
    }
    if (!std::isfinite(v)) {
        fail(line, "number is not finite");
    }
    return v;
}

inline long long parse_integer(std::string_view tok, std::size_t line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
        fail(line, "expected an integer, got '" + std::string(tok.substr(0, 32)) + "'");
    }
    return v;
}

inline std::size_t parse_count(std::string_view tok, std::size_t line) {
    const long long v = parse_integer(tok, line);
    if (v < 0) {
        fail(line, "count must be non-negative");
    }
    return static_cast<std::size_t>(v);
}

}  // namespace mandikin::io::detail
