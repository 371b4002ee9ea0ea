#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mfp/csv.hpp"
#include "mfp/date.hpp"
#include "mfp/ingest.hpp"
#include "mfp/mfdfa.hpp"
#include "mfp/panel.hpp"
#include "mfp/spectrum.hpp"
#include "mfp/stats.hpp"

namespace mfp {

// Exit-code contract: 0 ok, 2 bad configuration or usage, 3 unusable data,
// 4 numeric degeneracy that aborts the whole run.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::string input_path;
    char delimiter = ',';
    bool has_header = true;
    std::string date_column = "date";
    std::string time_column = "time";
    std::string price_column = "price";
    int minutes_per_day = 240;

    int window_days = 5;
    int stride = 1;

    double q_min = -4.0;
    double q_max = 8.0;
    double q_step = 0.25;
    int s_min = 20;
    double s_max_fraction = 0.25;
    int scale_count = 20;
    int poly_order = 1;
    double d_support = 1.0;
    double shape_tol = 0.01;

    std::string rf_file;       // optional per-day risk-free returns (date,value)
    double rf_constant = 0.0;  // used for days absent from rf_file

    int granger_lag = 1;
    std::vector<int> lb_lags = {30, 50};
    std::vector<int> arch_lags = {1, 5, 10, 15};
    int adf_max_lag = -1;  // -1 = automatic
    int nw_lag = -1;       // -1 = automatic

    std::size_t oos_initial = 600;
    std::vector<std::string> oos_schemes = {"expanding", "moving"};

    std::string dump_windows;  // "", "all", or comma-separated window ids

    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 12345;

    [[nodiscard]] MfdfaOptions mfdfa_options() const {
        MfdfaOptions opt;
        opt.q_min = q_min;
        opt.q_max = q_max;
        opt.q_step = q_step;
        opt.s_min = s_min;
        opt.s_max_fraction = s_max_fraction;
        opt.scale_count = scale_count;
        opt.poly_order = poly_order;
        opt.d_support = d_support;
        return opt;
    }
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (auto field : split_fields(s, ',')) {
        long v = 0;
        if (!parse_long(field, v)) throw config_error("bad integer list: " + s);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline std::vector<std::string> parse_string_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto field : split_fields(s, ',')) {
        const auto t = trim(field);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("bad boolean: " + s);
}

}  // namespace detail

// Flat `key = value` file, '#' starts a comment. Unknown keys are an error so
// typos never silently fall back to defaults.
inline PipelineConfig load_config(std::istream& in) {
    PipelineConfig cfg;
    LineReader reader(in);
    std::string line;
    while (reader.next(line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos)
            throw config_error("line " + std::to_string(reader.line_number()) +
                               ": expected key = value");
        const std::string key{trim(trimmed.substr(0, eq))};
        const std::string val{trim(trimmed.substr(eq + 1))};
        try {
            if (key == "input") cfg.input_path = val;
            else if (key == "delimiter") {
                if (val.size() != 1) throw config_error("delimiter must be one character");
                cfg.delimiter = val[0];
            }
            else if (key == "has_header") cfg.has_header = detail::parse_bool(val);
            else if (key == "date_column") cfg.date_column = val;
            else if (key == "time_column") cfg.time_column = val;
            else if (key == "price_column") cfg.price_column = val;
            else if (key == "minutes_per_day") cfg.minutes_per_day = std::stoi(val);
            else if (key == "window_days") cfg.window_days = std::stoi(val);
            else if (key == "stride") cfg.stride = std::stoi(val);
            else if (key == "q_min") cfg.q_min = std::stod(val);
            else if (key == "q_max") cfg.q_max = std::stod(val);
            else if (key == "q_step") cfg.q_step = std::stod(val);
            else if (key == "s_min") cfg.s_min = std::stoi(val);
            else if (key == "s_max_fraction") cfg.s_max_fraction = std::stod(val);
            else if (key == "scale_count") cfg.scale_count = std::stoi(val);
            else if (key == "poly_order") cfg.poly_order = std::stoi(val);
            else if (key == "d_support") cfg.d_support = std::stod(val);
            else if (key == "shape_tol") cfg.shape_tol = std::stod(val);
            else if (key == "rf_file") cfg.rf_file = val;
            else if (key == "rf_constant") cfg.rf_constant = std::stod(val);
            else if (key == "granger_lag") cfg.granger_lag = std::stoi(val);
            else if (key == "lb_lags") cfg.lb_lags = detail::parse_int_list(val);
            else if (key == "arch_lags") cfg.arch_lags = detail::parse_int_list(val);
            else if (key == "adf_max_lag") cfg.adf_max_lag = std::stoi(val);
            else if (key == "nw_lag") cfg.nw_lag = std::stoi(val);
            else if (key == "oos_initial") cfg.oos_initial = static_cast<std::size_t>(std::stoul(val));
            else if (key == "oos_schemes") cfg.oos_schemes = detail::parse_string_list(val);
            else if (key == "dump_windows") cfg.dump_windows = val;
            else if (key == "out_dir") cfg.out_dir = val;
            else if (key == "threads") cfg.threads = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else throw config_error("unknown config key: " + key);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("line " + std::to_string(reader.line_number()) +
                               ": bad value for " + key);
        }
    }
    return cfg;
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    return load_config(in);
}

inline void validate_config(const PipelineConfig& cfg) {
    if (cfg.minutes_per_day < 3) throw config_error("minutes_per_day must be at least 3");
    if (cfg.window_days < 1) throw config_error("window_days must be positive");
    if (cfg.stride < 1) throw config_error("stride must be positive");
    if (!(cfg.q_step > 0.0) || !(cfg.q_max > cfg.q_min)) throw config_error("bad q grid");
    if (cfg.s_min < cfg.poly_order + 2) throw config_error("s_min too small for poly_order");
    if (!(cfg.s_max_fraction > 0.0 && cfg.s_max_fraction <= 0.5))
        throw config_error("s_max_fraction must be in (0, 0.5]");
    if (cfg.scale_count < 3) throw config_error("scale_count must be at least 3");
    if (cfg.poly_order < 0 || cfg.poly_order > 5) throw config_error("poly_order out of range");
    if (!(cfg.shape_tol >= 0.0)) throw config_error("shape_tol must be non-negative");
    if (cfg.granger_lag < 1) throw config_error("granger_lag must be positive");
    for (int l : cfg.lb_lags)
        if (l < 1) throw config_error("lb_lags must be positive");
    for (int l : cfg.arch_lags)
        if (l < 1) throw config_error("arch_lags must be positive");
    if (cfg.oos_initial < 10) throw config_error("oos_initial must be at least 10");
    for (const auto& s : cfg.oos_schemes) {
        try {
            scheme_from_string(s);
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
    }
}

inline void echo_config(const PipelineConfig& cfg, std::ostream& os) {
    auto join_ints = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    auto join_strs = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    };
    os << "adf_max_lag = " << cfg.adf_max_lag << '\n'
       << "arch_lags = " << join_ints(cfg.arch_lags) << '\n'
       << "d_support = " << format_num(cfg.d_support) << '\n'
       << "date_column = " << cfg.date_column << '\n'
       << "delimiter = " << cfg.delimiter << '\n'
       << "dump_windows = " << cfg.dump_windows << '\n'
       << "granger_lag = " << cfg.granger_lag << '\n'
       << "has_header = " << (cfg.has_header ? "true" : "false") << '\n'
       << "input = " << cfg.input_path << '\n'
       << "lb_lags = " << join_ints(cfg.lb_lags) << '\n'
       << "minutes_per_day = " << cfg.minutes_per_day << '\n'
       << "nw_lag = " << cfg.nw_lag << '\n'
       << "oos_initial = " << cfg.oos_initial << '\n'
       << "oos_schemes = " << join_strs(cfg.oos_schemes) << '\n'
       << "out_dir = " << cfg.out_dir << '\n'
       << "poly_order = " << cfg.poly_order << '\n'
       << "price_column = " << cfg.price_column << '\n'
       << "q_max = " << format_num(cfg.q_max) << '\n'
       << "q_min = " << format_num(cfg.q_min) << '\n'
       << "q_step = " << format_num(cfg.q_step) << '\n'
       << "rf_constant = " << format_num(cfg.rf_constant) << '\n'
       << "rf_file = " << cfg.rf_file << '\n'
       << "s_max_fraction = " << format_num(cfg.s_max_fraction) << '\n'
       << "s_min = " << cfg.s_min << '\n'
       << "scale_count = " << cfg.scale_count << '\n'
       << "seed = " << cfg.seed << '\n'
       << "shape_tol = " << format_num(cfg.shape_tol) << '\n'
       << "stride = " << cfg.stride << '\n'
       << "threads = " << cfg.threads << '\n'
       << "time_column = " << cfg.time_column << '\n'
       << "window_days = " << cfg.window_days << '\n';
}

struct AnalysisAudit {
    std::size_t rows_read = 0;
    std::size_t rows_rejected = 0;
    std::vector<RowIssue> row_issues;
    std::size_t days_total = 0;
    std::size_t days_accepted = 0;
    std::vector<RejectedDay> days_rejected;
    std::size_t windows_total = 0;
    std::size_t windows_valid = 0;
};

struct AnalysisResult {
    AnalysisAudit audit;
    std::vector<TradingDay> days;
    std::vector<double> rf;  // one entry per accepted day; empty when unused
    std::vector<WindowCharacteristics> windows;
    std::map<int, AnalysisDetail> dumped;  // full detail for requested window ids
    CharacteristicPanel panel;
};

namespace detail {

inline std::vector<double> load_rf(const std::string& path, double fallback,
                                   std::span<const TradingDay> days) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open rf_file: " + path);
    std::map<Date, double> by_day;
    LineReader reader(in);
    std::string line;
    bool first = true;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, ',');
        if (fields.size() < 2) throw data_error("rf_file line " +
                                                std::to_string(reader.line_number()) +
                                                ": expected date,value");
        Date d;
        double v = 0.0;
        if (!Date::try_parse(trim(fields[0]), d)) {
            if (first) {  // tolerate a header row
                first = false;
                continue;
            }
            throw data_error("rf_file line " + std::to_string(reader.line_number()) +
                             ": bad date");
        }
        if (!parse_double(fields[1], v))
            throw data_error("rf_file line " + std::to_string(reader.line_number()) +
                             ": bad value");
        by_day[d] = v;
        first = false;
    }
    std::vector<double> rf;
    rf.reserve(days.size());
    for (const auto& day : days) {
        const auto it = by_day.find(day.day);
        rf.push_back(it == by_day.end() ? fallback : it->second);
    }
    return rf;
}

inline std::set<int> parse_dump_ids(const std::string& spec, std::size_t n_windows) {
    std::set<int> ids;
    if (spec.empty()) return ids;
    if (spec == "all") {
        for (std::size_t i = 1; i <= n_windows; ++i) ids.insert(static_cast<int>(i));
        return ids;
    }
    for (int v : parse_int_list(spec)) ids.insert(v);
    return ids;
}

}  // namespace detail

// Runs MF-DFA over every window, fanning windows across threads. Results are
// stored by window index, so the output is identical for any thread count.
inline void analyze_windows(std::span<const TradingDay> days, const PipelineConfig& cfg,
                            AnalysisResult& result) {
    const auto bounds = window_bounds(days.size(), cfg.window_days, cfg.stride);
    result.windows.assign(bounds.size(), {});
    const std::set<int> dump_ids = detail::parse_dump_ids(cfg.dump_windows, bounds.size());
    const MfdfaOptions opt = cfg.mfdfa_options();

    std::vector<std::optional<AnalysisDetail>> dumped(bounds.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= bounds.size()) return;
            try {
                const WindowSlice slice =
                    make_slice(days, bounds[i].first, bounds[i].second, static_cast<int>(i) + 1);
                auto& w = result.windows[i];
                w.window_id = slice.window_id;
                w.end_day_index = slice.last_day_index;
                w.end_day = slice.last_day;
                w.cum_return = slice.cum_return;
                w.realized_vol = realized_vol(slice.returns);
                try {
                    AnalysisDetail detail = analyze_detailed(slice.returns, opt);
                    w.alpha0 = detail.spectrum.points[detail.spectrum.q_zero_index()].alpha;
                    w.chars = characteristics(detail.spectrum);
                    if (dump_ids.contains(slice.window_id)) dumped[i] = std::move(detail);
                } catch (const degenerate_window_error& e) {
                    w.error = e.what();
                } catch (const degenerate_spectrum_error& e) {
                    w.error = e.what();
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int n_threads = cfg.threads;
    if (n_threads <= 0)
        n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_threads = std::min(n_threads, static_cast<int>(std::max<std::size_t>(bounds.size(), 1)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (dumped[i]) result.dumped.emplace(result.windows[i].window_id, std::move(*dumped[i]));
    result.audit.windows_total = result.windows.size();
    for (const auto& w : result.windows)
        if (w.chars) ++result.audit.windows_valid;
}

// Shared front half of every command: load, clean, analyze windows, build
// the prediction panel.
inline AnalysisResult run_analysis(const PipelineConfig& cfg) {
    validate_config(cfg);
    if (cfg.input_path.empty()) throw config_error("no input file configured");
    std::ifstream in(cfg.input_path);
    if (!in) throw data_error("cannot open input file: " + cfg.input_path);

    IngestSchema schema;
    schema.delimiter = cfg.delimiter;
    schema.has_header = cfg.has_header;
    schema.date_column = cfg.date_column;
    schema.time_column = cfg.time_column;
    schema.price_column = cfg.price_column;

    AnalysisResult result;
    LoadResult loaded;
    try {
        loaded = load_minute_prices(in, schema);
    } catch (const std::out_of_range& e) {
        // A configured column the file does not have is bad data, not a bug.
        throw data_error(cfg.input_path + ": " + e.what());
    }
    result.audit.rows_read = loaded.rows_read;
    result.audit.rows_rejected = loaded.rows_rejected;
    result.audit.row_issues = std::move(loaded.issues);
    if (loaded.records.empty()) throw data_error("no usable rows in " + cfg.input_path);

    CleanResult cleaned = clean_days(loaded.records, cfg.minutes_per_day);
    result.audit.days_total = cleaned.days.size() + cleaned.rejected.size();
    result.audit.days_accepted = cleaned.days.size();
    result.audit.days_rejected = std::move(cleaned.rejected);
    result.days = std::move(cleaned.days);
    if (result.days.size() < static_cast<std::size_t>(cfg.window_days))
        throw data_error("fewer accepted days than one window");

    if (!cfg.rf_file.empty())
        result.rf = detail::load_rf(cfg.rf_file, cfg.rf_constant, result.days);
    else if (cfg.rf_constant != 0.0)
        result.rf.assign(result.days.size(), cfg.rf_constant);

    analyze_windows(result.days, cfg, result);
    result.panel = build_panel(result.days, cfg.window_days, result.windows, result.rf);
    return result;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw data_error("cannot write " + (dir / name).string());
    return os;
}

inline std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

// Longest stretch of consecutive valid rows, for serial statistics that
// cannot tolerate gaps. Returns [begin, end) indices into panel.rows.
inline std::pair<std::size_t, std::size_t> longest_valid_run(const CharacteristicPanel& panel) {
    std::size_t best_b = 0, best_e = 0, b = 0;
    const auto& rows = panel.rows;
    for (std::size_t i = 0; i <= rows.size(); ++i) {
        if (i == rows.size() || !rows[i].valid) {
            if (i - b > best_e - best_b) {
                best_b = b;
                best_e = i;
            }
            b = i + 1;
        }
    }
    return {best_b, best_e};
}

}  // namespace detail

inline void write_windows_csv(const AnalysisResult& res, std::ostream& os) {
    os << "window_id,end_day,cum_return,delta_alpha,delta_f,B,alpha0,A,C,fit_r2,valid_flag\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& w : res.windows) {
        const bool ok = w.chars.has_value();
        os << w.window_id << ',' << w.end_day.to_string() << ',' << format_num(w.cum_return)
           << ',' << format_num(ok ? w.chars->delta_alpha : nan) << ','
           << format_num(ok ? w.chars->delta_f : nan) << ','
           << format_num(ok ? w.chars->B : nan) << ','
           << format_num(ok ? w.chars->alpha0 : nan) << ','
           << format_num(ok ? w.chars->A : nan) << ',' << format_num(ok ? w.chars->C : nan)
           << ',' << format_num(ok ? w.chars->fit_r2 : nan) << ',' << (ok ? 1 : 0) << '\n';
    }
}

inline void write_spectrum_csv(const SingularitySpectrum& spec, std::ostream& os) {
    os << "q,h,h_stderr,fit_r2,tau,alpha,f\n";
    for (const auto& p : spec.points)
        os << format_num(p.q) << ',' << format_num(p.h) << ',' << format_num(p.h_stderr) << ','
           << format_num(p.fit_r2) << ',' << format_num(p.tau) << ',' << format_num(p.alpha)
           << ',' << format_num(p.f) << '\n';
}

inline void write_fq_csv(const FluctuationSurface& surf, std::ostream& os) {
    os << "q,s,F,ln_s,ln_F\n";
    for (std::size_t iq = 0; iq < surf.qs.size(); ++iq)
        for (std::size_t is = 0; is < surf.scales.size(); ++is) {
            const double f = surf.at(iq, is);
            os << format_num(surf.qs[iq]) << ',' << surf.scales[is] << ',' << format_num(f)
               << ',' << format_num(std::log(static_cast<double>(surf.scales[is]))) << ','
               << format_num(std::log(f)) << '\n';
        }
}

inline void write_audit(const AnalysisResult& res, const PipelineConfig& cfg, std::ostream& os) {
    os << "rows_read = " << res.audit.rows_read << '\n'
       << "rows_rejected = " << res.audit.rows_rejected << '\n';
    const std::size_t show_rows = std::min<std::size_t>(res.audit.row_issues.size(), 50);
    for (std::size_t i = 0; i < show_rows; ++i)
        os << "  line " << res.audit.row_issues[i].line << ": " << res.audit.row_issues[i].reason
           << '\n';
    if (res.audit.row_issues.size() > show_rows)
        os << "  (+" << res.audit.row_issues.size() - show_rows << " more)\n";
    os << "days_total = " << res.audit.days_total << '\n'
       << "days_accepted = " << res.audit.days_accepted << '\n'
       << "days_rejected = " << res.audit.days_rejected.size() << '\n';
    for (const auto& d : res.audit.days_rejected)
        os << "  " << d.day.to_string() << ": " << d.reason << '\n';
    os << "windows_total = " << res.audit.windows_total << '\n'
       << "windows_valid = " << res.audit.windows_valid << '\n';
    for (const auto& w : res.windows)
        if (!w.chars)
            os << "  window " << w.window_id << " (" << w.end_day.to_string()
               << "): " << w.error << '\n';
    os << "panel_rows = " << res.panel.rows.size() << '\n'
       << "window_days = " << cfg.window_days << '\n'
       << "series_length = " << cfg.window_days * (cfg.minutes_per_day - 1) << '\n';
}

inline int cmd_analyze(const PipelineConfig& cfg) {
    const AnalysisResult res = run_analysis(cfg);
    const std::filesystem::path dir(cfg.out_dir);
    {
        auto os = detail::open_out(dir, "windows.csv");
        write_windows_csv(res, os);
    }
    for (const auto& [id, det] : res.dumped) {
        {
            auto os = detail::open_out(dir, "spectrum_" + std::to_string(id) + ".csv");
            write_spectrum_csv(det.spectrum, os);
        }
        auto os = detail::open_out(dir, "fq_surface_" + std::to_string(id) + ".csv");
        write_fq_csv(det.surface, os);
    }
    {
        auto os = detail::open_out(dir, "analysis_log.txt");
        write_audit(res, cfg, os);
    }
    {
        auto os = detail::open_out(dir, "config_echo.txt");
        echo_config(cfg, os);
    }
    std::printf("analyze: %zu days, %zu windows (%zu valid) -> %s\n", res.days.size(),
                res.audit.windows_total, res.audit.windows_valid, cfg.out_dir.c_str());
    return 0;
}

namespace detail {

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

inline void describe_block(std::ostream& os, std::span<const NamedSeries> series) {
    os << "# descriptive\n";
    os << "series,n,mean,stdev,skewness,kurtosis,min,max,median\n";
    for (const auto& s : series) {
        const SummaryStats d = describe(s.values);
        os << s.name << ',' << d.n << ',' << format_num(d.mean) << ',' << format_num(d.stdev)
           << ',' << format_num(d.skewness) << ',' << format_num(d.kurtosis) << ','
           << format_num(d.min) << ',' << format_num(d.max) << ',' << format_num(d.median)
           << '\n';
    }
}

}  // namespace detail

inline int cmd_stats(const PipelineConfig& cfg) {
    const AnalysisResult res = run_analysis(cfg);
    const auto valid = res.panel.valid_rows();
    if (valid.size() < 30) throw data_error("too few valid windows for the statistics report");

    auto col = [&](auto getter) {
        std::vector<double> v;
        v.reserve(valid.size());
        for (const PanelRow* r : valid) v.push_back(getter(*r));
        return v;
    };
    const std::vector<double> da = col([](const PanelRow& r) { return r.delta_alpha; });
    const std::vector<double> df = col([](const PanelRow& r) { return r.delta_f; });
    const std::vector<double> bb = col([](const PanelRow& r) { return r.B; });
    const std::vector<double> cum = col([](const PanelRow& r) { return r.cum_return; });
    const std::vector<double> rv = col([](const PanelRow& r) { return r.realized_vol; });
    const std::vector<double> nxt = col([](const PanelRow& r) { return r.next_day_excess; });

    // Serial tests need an unbroken stretch of consecutive windows.
    const auto [run_b, run_e] = detail::longest_valid_run(res.panel);
    auto run_col = [&](auto getter) {
        std::vector<double> v;
        v.reserve(run_e - run_b);
        for (std::size_t i = run_b; i < run_e; ++i) v.push_back(getter(res.panel.rows[i]));
        return v;
    };
    const std::vector<double> r_cum = run_col([](const PanelRow& r) { return r.cum_return; });
    const std::vector<double> r_da = run_col([](const PanelRow& r) { return r.delta_alpha; });
    const std::vector<double> r_df = run_col([](const PanelRow& r) { return r.delta_f; });
    const std::vector<double> r_bb = run_col([](const PanelRow& r) { return r.B; });
    const std::pair<const char*, const std::vector<double>*> serial_series[] = {
        {"cum_return", &r_cum}, {"delta_alpha", &r_da}, {"delta_f", &r_df}, {"B", &r_bb}};

    const std::filesystem::path dir(cfg.out_dir);
    auto os = detail::open_out(dir, "stats_report.csv");

    os << "# counts\n";
    os << "metric,value\n";
    os << "days_accepted," << res.audit.days_accepted << '\n';
    os << "windows_total," << res.audit.windows_total << '\n';
    os << "windows_valid," << res.audit.windows_valid << '\n';
    os << "panel_rows," << res.panel.rows.size() << '\n';
    os << "panel_valid," << valid.size() << '\n';
    os << "serial_run," << (run_e - run_b) << '\n';

    const detail::NamedSeries all_series[] = {
        {"cum_return", cum},   {"delta_alpha", da}, {"delta_f", df},
        {"B", bb},             {"realized_vol", rv}, {"next_day_excess", nxt},
    };
    detail::describe_block(os, all_series);

    os << "# correlations\n";
    os << "x,y,n,r,t,pvalue\n";
    const std::pair<const char*, const std::vector<double>*> named[] = {
        {"delta_alpha", &da}, {"delta_f", &df}, {"B", &bb}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            const TestResult t = pearson_with_p(*named[i].second, *named[j].second);
            os << named[i].first << ',' << named[j].first << ',' << valid.size() << ','
               << format_num(t.statistic) << ',' << format_num(t.aux.at("t")) << ','
               << format_num(t.pvalue) << '\n';
        }
    for (const auto& [name, series] : named) {
        const TestResult t = pearson_with_p(*series, nxt);
        os << name << ",next_day_excess," << valid.size() << ',' << format_num(t.statistic)
           << ',' << format_num(t.aux.at("t")) << ',' << format_num(t.pvalue) << '\n';
    }

    os << "# autocorrelation\n";
    os << "series,lag,rho,pvalue,band95\n";
    for (const auto& [name, series] : serial_series) {
        const double band = acf_band(series->size());
        for (int lag : {1, 5}) {
            const TestResult t = acf_test(*series, lag);
            os << name << ',' << lag << ',' << format_num(t.statistic) << ','
               << format_num(t.pvalue) << ',' << format_num(band) << '\n';
        }
    }

    os << "# ljung_box\n";
    os << "series,lags,statistic,pvalue\n";
    for (const auto& [name, series] : serial_series)
        for (int lags : cfg.lb_lags) {
            const TestResult t = ljung_box(*series, lags);
            os << name << ',' << lags << ',' << format_num(t.statistic) << ','
               << format_num(t.pvalue) << '\n';
        }

    os << "# adf\n";
    os << "series,lag,statistic,pvalue,nobs\n";
    for (const auto& [name, series] : serial_series) {
        const TestResult t = adf_test(*series, cfg.adf_max_lag);
        os << name << ',' << t.lags << ',' << format_num(t.statistic) << ','
           << format_num(t.pvalue) << ',' << format_num(t.aux.at("nobs")) << '\n';
    }

    os << "# arch_lm\n";
    os << "series,lags,statistic,pvalue\n";
    for (const auto& [name, series] : serial_series)
        for (int lags : cfg.arch_lags) {
            const TestResult t = arch_lm(*series, lags);
            os << name << ',' << lags << ',' << format_num(t.statistic) << ','
               << format_num(t.pvalue) << '\n';
        }

    {
        auto eos = detail::open_out(dir, "config_echo.txt");
        echo_config(cfg, eos);
    }
    std::printf("stats: %zu valid rows, serial run %zu -> %s\n", valid.size(), run_e - run_b,
                cfg.out_dir.c_str());
    return 0;
}

inline int cmd_regress(const PipelineConfig& cfg) {
    const AnalysisResult res = run_analysis(cfg);
    const auto valid = res.panel.valid_rows();
    if (valid.size() < 30) throw data_error("too few valid windows to regress");

    const std::filesystem::path dir(cfg.out_dir);
    {
        auto os = detail::open_out(dir, "insample.csv");
        os << "predictor,n,invalid,nw_lag,beta,beta_se,beta_t,beta_p,"
              "alpha_r,alpha_r_p,r2_adj,stars\n";
        for (Predictor p : kAllPredictors) {
            const RegressionFit fit = in_sample(res.panel, p, false, cfg.nw_lag);
            os << to_string(p) << ',' << fit.nobs << ',' << res.panel.invalid_count << ','
               << fit.nw_lag << ',' << format_num(fit.coef[1]) << ',' << format_num(fit.se[1])
               << ',' << format_num(fit.tstat[1]) << ',' << format_num(fit.pvalue[1]) << ','
               << format_num(fit.coef[0]) << ',' << format_num(fit.pvalue[0]) << ','
               << format_num(fit.r2_adj) << ',' << detail::stars(fit.pvalue[1]) << '\n';
        }
    }
    {
        auto os = detail::open_out(dir, "insample_vol.csv");
        os << "predictor,n,invalid,nw_lag,beta,beta_se,beta_t,beta_p,"
              "psi,psi_p,alpha_r,alpha_r_p,r2_adj,stars\n";
        for (Predictor p : kAllPredictors) {
            const RegressionFit fit = in_sample(res.panel, p, true, cfg.nw_lag);
            os << to_string(p) << ',' << fit.nobs << ',' << res.panel.invalid_count << ','
               << fit.nw_lag << ',' << format_num(fit.coef[1]) << ',' << format_num(fit.se[1])
               << ',' << format_num(fit.tstat[1]) << ',' << format_num(fit.pvalue[1]) << ','
               << format_num(fit.coef[2]) << ',' << format_num(fit.pvalue[2]) << ','
               << format_num(fit.coef[0]) << ',' << format_num(fit.pvalue[0]) << ','
               << format_num(fit.r2_adj) << ',' << detail::stars(fit.pvalue[1]) << '\n';
        }
    }
    {
        // Granger pairs need the characteristic and the excess return as two
        // same-day series: within the longest unbroken run, the value of row
        // t+1's characteristic shares a day with row t's next-day return.
        const auto [run_b, run_e] = detail::longest_valid_run(res.panel);
        if (run_e - run_b < static_cast<std::size_t>(2 * cfg.granger_lag + 12))
            throw data_error("valid-run too short for granger tests");
        auto shifted = [&](auto getter) {
            std::vector<double> v;
            v.reserve(run_e - 1 - run_b);
            for (std::size_t i = run_b + 1; i < run_e; ++i)
                v.push_back(getter(res.panel.rows[i]));
            return v;
        };
        std::vector<double> excess;
        excess.reserve(run_e - 1 - run_b);
        for (std::size_t i = run_b; i + 1 < run_e; ++i)
            excess.push_back(res.panel.rows[i].next_day_excess);
        const std::vector<double> g_da = shifted([](const PanelRow& r) { return r.delta_alpha; });
        const std::vector<double> g_df = shifted([](const PanelRow& r) { return r.delta_f; });
        const std::vector<double> g_bb = shifted([](const PanelRow& r) { return r.B; });

        auto os = detail::open_out(dir, "granger.csv");
        os << "cause,effect,lags,nobs,F,pvalue,stars\n";
        const std::pair<const char*, const std::vector<double>*> chars[] = {
            {"delta_alpha", &g_da}, {"delta_f", &g_df}, {"B", &g_bb}};
        for (const auto& [name, series] : chars) {
            const TestResult fwd = granger_test(*series, excess, cfg.granger_lag);
            const TestResult rev = granger_test(excess, *series, cfg.granger_lag);
            os << name << ",excess_return," << fwd.lags << ',' << format_num(fwd.aux.at("nobs"))
               << ',' << format_num(fwd.statistic) << ',' << format_num(fwd.pvalue) << ','
               << detail::stars(fwd.pvalue) << '\n';
            os << "excess_return," << name << ',' << rev.lags << ','
               << format_num(rev.aux.at("nobs")) << ',' << format_num(rev.statistic) << ','
               << format_num(rev.pvalue) << ',' << detail::stars(rev.pvalue) << '\n';
        }
    }
    {
        auto os = detail::open_out(dir, "bins.csv");
        os << "predictor,bin,lo,hi,count,fraction,mean_predictor,mean_excess,se_excess,t\n";
        for (Predictor p : kAllPredictors) {
            const BinSpec spec =
                p == Predictor::delta_alpha ? delta_alpha_bins() : quantile_bins(6);
            const BinSummary summary = bin_response(res.panel, p, spec);
            for (std::size_t b = 0; b < summary.bins.size(); ++b) {
                const Bin& bin = summary.bins[b];
                const double t = bin.count > 1 && bin.se_excess > 0.0
                                     ? bin.mean_excess / bin.se_excess
                                     : std::numeric_limits<double>::quiet_NaN();
                os << summary.predictor << ',' << b + 1 << ',' << format_num(bin.lo) << ','
                   << format_num(bin.hi) << ',' << bin.count << ',' << format_num(bin.fraction)
                   << ',' << format_num(bin.mean_predictor) << ','
                   << format_num(bin.mean_excess) << ',' << format_num(bin.se_excess) << ','
                   << format_num(t) << '\n';
            }
        }
    }
    {
        auto eos = detail::open_out(dir, "config_echo.txt");
        echo_config(cfg, eos);
    }
    std::printf("regress: %zu valid rows -> %s\n", valid.size(), cfg.out_dir.c_str());
    return 0;
}

inline int cmd_oos(const PipelineConfig& cfg) {
    const AnalysisResult res = run_analysis(cfg);
    const auto valid = res.panel.valid_rows();
    if (valid.size() <= cfg.oos_initial)
        throw data_error("panel shorter than the initial estimation window");

    const std::filesystem::path dir(cfg.out_dir);
    {
        auto os = detail::open_out(dir, "oos.csv");
        os << "predictor,scheme,initial,n_forecasts,r2_os_pct,cw_stat,cw_pvalue,"
              "cw_defined,stars\n";
        for (Predictor p : kAllPredictors) {
            for (const auto& scheme_name : cfg.oos_schemes) {
                const OosScheme scheme = scheme_from_string(scheme_name);
                const OosResult r = oos_run(res.panel, p, scheme, cfg.oos_initial);
                os << r.predictor << ',' << to_string(r.scheme) << ',' << r.initial << ','
                   << r.n_forecasts << ',' << format_num(100.0 * r.r2_os) << ','
                   << format_num(r.cw.statistic) << ',' << format_num(r.cw.pvalue) << ','
                   << (r.cw.defined ? 1 : 0) << ','
                   << (r.cw.defined ? detail::stars(r.cw.pvalue) : "") << '\n';
            }
        }
    }
    {
        auto eos = detail::open_out(dir, "config_echo.txt");
        echo_config(cfg, eos);
    }
    std::printf("oos: %zu valid rows, initial %zu -> %s\n", valid.size(), cfg.oos_initial,
                cfg.out_dir.c_str());
    return 0;
}

}  // namespace mfp
