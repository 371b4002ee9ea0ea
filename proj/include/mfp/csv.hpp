#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mfp {

// Minimal delimited-text support: plain separators, no quoting or escapes.
// Market minute files in scope here never quote fields.

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* b = s.data();
    auto [p, ec] = std::from_chars(b, b + s.size(), out);
    return ec == std::errc{} && p == b + s.size();
}

inline bool parse_long(std::string_view s, long& out) {
    s = trim(s);
    if (s.empty()) return false;
    const char* b = s.data();
    auto [p, ec] = std::from_chars(b, b + s.size(), out);
    return ec == std::errc{} && p == b + s.size();
}

// Resolves a column selector against a header row: a selector that parses as a
// non-negative integer is a 0-based index, anything else is matched by name.
inline std::size_t resolve_column(std::span<const std::string_view> header,
                                  std::string_view selector) {
    long idx = 0;
    if (parse_long(selector, idx)) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= header.size())
            throw std::out_of_range("column index out of range: " + std::string(selector));
        return static_cast<std::size_t>(idx);
    }
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == selector) return i;
    throw std::out_of_range("column not found: " + std::string(selector));
}

// Line-by-line reader that tracks 1-based line numbers for error reporting.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    [[nodiscard]] std::size_t line_number() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

// All report output goes through one formatter so files are reproducible.
inline std::string format_num(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

// Fixture data needs round-trip precision: parsing the text must recover the
// exact double, or synthetic returns would be quantized by the report format.
inline std::string format_full(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline void write_row(std::ostream& os, std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

}  // namespace mfp
