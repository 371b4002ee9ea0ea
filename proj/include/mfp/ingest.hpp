#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfp/csv.hpp"
#include "mfp/date.hpp"

namespace mfp {

// One price observation. minute_index is the 1-based rank of the observation
// within its day after sorting; time_key is the raw intraday sort key
// (seconds since midnight for HH:MM[:SS] stamps, the bare value for integer
// stamps) and is kept so duplicate stamps can be detected downstream.
struct MinuteRecord {
    Date day;
    int minute_index = 0;
    long time_key = 0;
    double price = 0.0;
};

// A day accepted by clean_days: exactly the expected number of minutes.
struct TradingDay {
    Date day;
    std::vector<double> minute_returns;  // length minutes_per_day - 1
    double open_price = 0.0;
    double close_price = 0.0;
};

struct ReturnLabel {
    Date day;
    int minute_index = 0;  // 0 marks a day-level observation
};

struct ReturnSeries {
    std::vector<double> values;
    std::vector<ReturnLabel> labels;
};

struct RowIssue {
    std::size_t line = 0;  // 1-based input line
    std::string reason;
};

struct LoadResult {
    std::vector<MinuteRecord> records;  // sorted by (day, time_key), ranked
    std::size_t rows_read = 0;          // data rows seen (header excluded)
    std::size_t rows_rejected = 0;
    std::vector<RowIssue> issues;
};

struct IngestSchema {
    char delimiter = ',';
    bool has_header = true;
    // Column selectors: name (header lookup) or 0-based index as digits.
    std::string date_column = "date";
    std::string time_column = "time";
    std::string price_column = "price";
};

namespace detail {

// "HH:MM" or "HH:MM:SS" -> seconds since midnight; bare integers pass through.
inline bool parse_time_key(std::string_view s, long& out) {
    s = trim(s);
    if (parse_long(s, out)) return out >= 0;
    const std::size_t c1 = s.find(':');
    if (c1 == std::string_view::npos) return false;
    const std::size_t c2 = s.find(':', c1 + 1);
    long h = 0, m = 0, sec = 0;
    if (!parse_long(s.substr(0, c1), h)) return false;
    if (c2 == std::string_view::npos) {
        if (!parse_long(s.substr(c1 + 1), m)) return false;
    } else {
        if (!parse_long(s.substr(c1 + 1, c2 - c1 - 1), m)) return false;
        if (!parse_long(s.substr(c2 + 1), sec)) return false;
    }
    if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59) return false;
    out = h * 3600 + m * 60 + sec;
    return true;
}

}  // namespace detail

// Reads (date, time, price) rows. Malformed rows and non-positive prices are
// rejected and recorded with their line numbers, never silently dropped.
// Output is sorted by (day, time_key) with minute_index assigned by rank.
inline LoadResult load_minute_prices(std::istream& in, const IngestSchema& schema = {}) {
    LoadResult res;
    LineReader reader(in);
    std::string line;

    std::size_t date_col = 0, time_col = 1, price_col = 2;
    bool columns_resolved = !schema.has_header;
    if (!schema.has_header) {
        // Headerless input still honours numeric selectors.
        long idx = 0;
        if (parse_long(schema.date_column, idx) && idx >= 0) date_col = static_cast<std::size_t>(idx);
        if (parse_long(schema.time_column, idx) && idx >= 0) time_col = static_cast<std::size_t>(idx);
        if (parse_long(schema.price_column, idx) && idx >= 0) price_col = static_cast<std::size_t>(idx);
    }

    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, schema.delimiter);
        if (!columns_resolved) {
            date_col = resolve_column(fields, schema.date_column);
            time_col = resolve_column(fields, schema.time_column);
            price_col = resolve_column(fields, schema.price_column);
            columns_resolved = true;
            continue;
        }
        ++res.rows_read;
        const std::size_t need = std::max({date_col, time_col, price_col});
        auto reject = [&](const char* why) {
            ++res.rows_rejected;
            res.issues.push_back({reader.line_number(), why});
        };
        if (fields.size() <= need) {
            reject("too few fields");
            continue;
        }
        MinuteRecord rec;
        if (!Date::try_parse(trim(fields[date_col]), rec.day)) {
            reject("bad date");
            continue;
        }
        if (!detail::parse_time_key(fields[time_col], rec.time_key)) {
            reject("bad time");
            continue;
        }
        if (!parse_double(fields[price_col], rec.price) || !std::isfinite(rec.price)) {
            reject("bad price");
            continue;
        }
        if (rec.price <= 0.0) {
            reject("non-positive price");
            continue;
        }
        res.records.push_back(rec);
    }

    std::stable_sort(res.records.begin(), res.records.end(),
                     [](const MinuteRecord& a, const MinuteRecord& b) {
                         if (a.day != b.day) return a.day < b.day;
                         return a.time_key < b.time_key;
                     });
    int rank = 0;
    const Date* prev_day = nullptr;
    for (auto& r : res.records) {
        if (prev_day == nullptr || r.day != *prev_day) rank = 0;
        r.minute_index = ++rank;
        prev_day = &r.day;
    }
    return res;
}

// Log returns between successive prices of one day: length prices.size()-1.
inline std::vector<double> minute_returns(std::span<const double> prices) {
    std::vector<double> out;
    if (prices.size() < 2) return out;
    out.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i)
        out.push_back(std::log(prices[i] / prices[i - 1]));
    return out;
}

struct RejectedDay {
    Date day;
    std::string reason;
};

struct CleanResult {
    std::vector<TradingDay> days;  // chronological
    std::vector<RejectedDay> rejected;
};

// Keeps only days with exactly minutes_per_day observations and strictly
// increasing time keys. Returns never span the overnight gap: each day's
// return vector is built from that day's prices alone.
inline CleanResult clean_days(const std::vector<MinuteRecord>& records, int minutes_per_day) {
    CleanResult res;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        bool dup_key = false;
        while (j + 1 < records.size() && records[j + 1].day == records[i].day) {
            if (records[j + 1].time_key == records[j].time_key) dup_key = true;
            ++j;
        }
        const std::size_t count = j - i + 1;
        if (dup_key) {
            res.rejected.push_back({records[i].day, "duplicate time key"});
        } else if (count != static_cast<std::size_t>(minutes_per_day)) {
            res.rejected.push_back(
                {records[i].day, "minute count " + std::to_string(count) + ", expected " +
                                     std::to_string(minutes_per_day)});
        } else {
            std::vector<double> prices;
            prices.reserve(count);
            for (std::size_t k = i; k <= j; ++k) prices.push_back(records[k].price);
            TradingDay day;
            day.day = records[i].day;
            day.minute_returns = minute_returns(prices);
            day.open_price = prices.front();
            day.close_price = prices.back();
            res.days.push_back(std::move(day));
        }
        i = j + 1;
    }
    return res;
}

// Close-to-close log returns across accepted days, labelled by the later day.
inline ReturnSeries daily_returns(std::span<const TradingDay> days) {
    ReturnSeries s;
    if (days.size() < 2) return s;
    s.values.reserve(days.size() - 1);
    s.labels.reserve(days.size() - 1);
    for (std::size_t i = 1; i < days.size(); ++i) {
        s.values.push_back(std::log(days[i].close_price / days[i - 1].close_price));
        s.labels.push_back({days[i].day, 0});
    }
    return s;
}

// A rolling window of window_days consecutive accepted days, minute returns
// concatenated in day order. Overnight gaps contribute no observations, so
// the series length is window_days * (minutes_per_day - 1).
struct WindowSlice {
    int window_id = 0;  // 1-based
    std::size_t first_day_index = 0;
    std::size_t last_day_index = 0;
    Date first_day, last_day;
    std::vector<double> returns;
    double cum_return = 0.0;  // sum of the window's return observations
};

inline std::vector<std::pair<std::size_t, std::size_t>> window_bounds(std::size_t n_days,
                                                                      int window_days,
                                                                      int stride) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (window_days <= 0 || stride <= 0) return out;
    const auto w = static_cast<std::size_t>(window_days);
    for (std::size_t first = 0; first + w <= n_days; first += static_cast<std::size_t>(stride))
        out.emplace_back(first, first + w - 1);
    return out;
}

inline WindowSlice make_slice(std::span<const TradingDay> days, std::size_t first,
                              std::size_t last, int window_id) {
    WindowSlice s;
    s.window_id = window_id;
    s.first_day_index = first;
    s.last_day_index = last;
    s.first_day = days[first].day;
    s.last_day = days[last].day;
    std::size_t total = 0;
    for (std::size_t d = first; d <= last; ++d) total += days[d].minute_returns.size();
    s.returns.reserve(total);
    for (std::size_t d = first; d <= last; ++d)
        s.returns.insert(s.returns.end(), days[d].minute_returns.begin(),
                         days[d].minute_returns.end());
    for (double r : s.returns) s.cum_return += r;
    return s;
}

inline std::vector<WindowSlice> window_slices(std::span<const TradingDay> days, int window_days,
                                              int stride) {
    std::vector<WindowSlice> out;
    const auto bounds = window_bounds(days.size(), window_days, stride);
    out.reserve(bounds.size());
    int id = 0;
    for (const auto& [first, last] : bounds) out.push_back(make_slice(days, first, last, ++id));
    return out;
}

}  // namespace mfp
