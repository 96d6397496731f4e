#pragma once

// Small text helpers shared by the file readers/writers. Not part of the
// public API.

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace nupi::detail {

/// Formats a double with 17 significant digits (lossless round trip).
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

/// Drops everything from the first '#' on, then trims.
inline std::string strip_comment(std::string_view line) {
    auto pos = line.find('#');
    if (pos != std::string_view::npos) line = line.substr(0, pos);
    return trim(line);
}

/// Splits on whitespace and commas; empty tokens are skipped.
inline std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',' || c == '\r' || c == '\n') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace nupi::detail
