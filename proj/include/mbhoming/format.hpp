#pragma once

// Locale-independent number formatting for text files.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <system_error>

namespace mbhoming {

// Shortest text that parses back to exactly `v`.
inline std::string fmt_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Fixed decimals; NaN prints as "nan" and never as "-nan".
inline std::string fmt_fixed(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    // Collapse negative zero so output is byte-stable.
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

} // namespace mbhoming
