#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfp {

// Calendar date with day-serial arithmetic. No timezone handling: minute bars
// carry a date plus an intraday rank, nothing here needs wall-clock time.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend auto operator<=>(const Date&, const Date&) = default;

    // Days since 1970-01-01 (proleptic Gregorian).
    [[nodiscard]] std::int64_t serial() const noexcept {
        std::int64_t y = year;
        const std::int64_t m = month;
        y -= m <= 2;
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const std::int64_t yoe = y - era * 400;
        const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
        const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + doe - 719468;
    }

    [[nodiscard]] static Date from_serial(std::int64_t z) noexcept {
        z += 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const std::int64_t doe = z - era * 146097;
        const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = yoe + era * 400;
        const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const std::int64_t mp = (5 * doy + 2) / 153;
        const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
        const std::int64_t m = mp + (mp < 10 ? 3 : -9);
        return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    [[nodiscard]] Date next_day() const noexcept { return from_serial(serial() + 1); }

    [[nodiscard]] bool valid() const noexcept {
        if (month < 1 || month > 12 || day < 1) return false;
        static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        int max_day = lengths[month - 1];
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        if (month == 2 && leap) max_day = 29;
        return day <= max_day;
    }

    // Parses "YYYY-MM-DD" (also accepts '/' separators). Throws std::invalid_argument.
    [[nodiscard]] static Date parse(std::string_view s) {
        Date d;
        if (!try_parse(s, d)) throw std::invalid_argument("bad date: " + std::string(s));
        return d;
    }

    [[nodiscard]] static bool try_parse(std::string_view s, Date& out) noexcept {
        if (s.size() != 10) return false;
        const char sep = s[4];
        if ((sep != '-' && sep != '/') || s[7] != sep) return false;
        auto field = [&](std::size_t pos, std::size_t len, int& v) {
            const char* b = s.data() + pos;
            auto [p, ec] = std::from_chars(b, b + len, v);
            return ec == std::errc{} && p == b + len;
        };
        Date d;
        if (!field(0, 4, d.year) || !field(5, 2, d.month) || !field(8, 2, d.day)) return false;
        if (!d.valid()) return false;
        out = d;
        return true;
    }

    [[nodiscard]] std::string to_string() const {
        char buf[11];
        buf[10] = '\0';
        auto put = [&](std::size_t pos, std::size_t len, int v) {
            for (std::size_t i = len; i-- > 0;) {
                buf[pos + i] = static_cast<char>('0' + v % 10);
                v /= 10;
            }
        };
        put(0, 4, year);
        buf[4] = '-';
        put(5, 2, month);
        buf[7] = '-';
        put(8, 2, day);
        return std::string(buf, 10);
    }
};

}  // namespace mfp
