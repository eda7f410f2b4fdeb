#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

namespace golden {

struct Comparison {
    bool equal = true;
    std::string message;
};

// Compares two text files token by token. Numeric tokens may differ by a
// relative 1e-9 (last-digit noise from a different libm); everything else,
// including comment lines and layout, must match exactly.
inline Comparison compare(std::string_view expected, std::string_view actual, double rel = 1e-9) {
    auto is_num_char = [](char c) {
        return (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
    };
    if (expected.empty()) return {false, "golden file missing or empty"};
    std::size_t i = 0, j = 0, line = 1;
    while (i < expected.size() && j < actual.size()) {
        const bool num_start = (std::isdigit(static_cast<unsigned char>(expected[i])) || expected[i] == '-') &&
                               (std::isdigit(static_cast<unsigned char>(actual[j])) || actual[j] == '-');
        if (num_start) {
            std::size_t ie = i, je = j;
            while (ie < expected.size() && is_num_char(expected[ie])) ++ie;
            while (je < actual.size() && is_num_char(actual[je])) ++je;
            double a = 0.0, b = 0.0;
            const auto ra = std::from_chars(expected.data() + i, expected.data() + ie, a);
            const auto rb = std::from_chars(actual.data() + j, actual.data() + je, b);
            const bool parsed = ra.ec == std::errc() && rb.ec == std::errc() && ra.ptr == expected.data() + ie &&
                                rb.ptr == actual.data() + je;
            if (parsed) {
                if (std::abs(a - b) > rel * std::max({std::abs(a), std::abs(b), 1e-300}) && a != b) {
                    return {false, "line " + std::to_string(line) + ": expected " + std::string(expected.substr(i, ie - i)) +
                                       ", got " + std::string(actual.substr(j, je - j))};
                }
                i = ie;
                j = je;
                continue;
            }
            if (expected.substr(i, ie - i) != actual.substr(j, je - j)) {
                return {false, "line " + std::to_string(line) + ": token mismatch"};
            }
            i = ie;
            j = je;
            continue;
        }
        if (expected[i] != actual[j]) return {false, "line " + std::to_string(line) + ": text mismatch"};
        if (expected[i] == '\n') ++line;
        ++i;
        ++j;
    }
    if (i != expected.size() || j != actual.size()) return {false, "length mismatch near line " + std::to_string(line)};
    return {};
}

}  // namespace golden
