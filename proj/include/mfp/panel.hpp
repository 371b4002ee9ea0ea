#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfp/date.hpp"
#include "mfp/dist.hpp"
#include "mfp/ingest.hpp"
#include "mfp/spectrum.hpp"
#include "mfp/stats.hpp"

namespace mfp {

// Sum of squared returns over a window.
inline double realized_vol(std::span<const double> returns) {
    double s = 0.0;
    for (double r : returns) s += r * r;
    return s;
}

// Per-window analysis output, produced upstream of the panel. A window whose
// spectrum is degenerate carries no characteristics, only the reason.
struct WindowCharacteristics {
    int window_id = 0;
    std::size_t end_day_index = 0;
    Date end_day;
    double cum_return = 0.0;
    double realized_vol = 0.0;
    std::optional<SpectrumCharacteristics> chars;
    double alpha0 = 0.0;
    std::string error;  // non-empty when chars is missing
};

enum class Predictor { delta_alpha, delta_f, B, da_df, da_B, df_B };

inline constexpr Predictor kAllPredictors[] = {Predictor::delta_alpha, Predictor::delta_f,
                                               Predictor::B,           Predictor::da_df,
                                               Predictor::da_B,        Predictor::df_B};

inline const char* to_string(Predictor p) {
    switch (p) {
        case Predictor::delta_alpha: return "delta_alpha";
        case Predictor::delta_f: return "delta_f";
        case Predictor::B: return "B";
        case Predictor::da_df: return "delta_alpha_x_delta_f";
        case Predictor::da_B: return "delta_alpha_x_B";
        default: return "delta_f_x_B";
    }
}

inline Predictor predictor_from_string(const std::string& s) {
    for (Predictor p : kAllPredictors)
        if (s == to_string(p)) return p;
    throw std::invalid_argument("unknown predictor: " + s);
}

// One prediction row: window ending on day d paired with day d+1 outcomes.
struct PanelRow {
    int window_id = 0;
    Date end_day;
    Date target_day;
    double cum_return = 0.0;
    double realized_vol = 0.0;
    double delta_alpha = 0.0;
    double delta_f = 0.0;
    double B = 0.0;
    double end_day_return = 0.0;   // close-to-close log return of the window's last day
    double next_day_return = 0.0;  // close-to-close log return of the target day
    double next_day_excess = 0.0;  // minus the risk-free return for that day
    bool valid = false;

    [[nodiscard]] double predictor(Predictor p) const {
        switch (p) {
            case Predictor::delta_alpha: return delta_alpha;
            case Predictor::delta_f: return delta_f;
            case Predictor::B: return B;
            case Predictor::da_df: return delta_alpha * delta_f;
            case Predictor::da_B: return delta_alpha * B;
            default: return delta_f * B;
        }
    }
};

struct CharacteristicPanel {
    std::vector<PanelRow> rows;  // chronological, one per window with a next day
    std::size_t invalid_count = 0;
    int window_days = 0;

    [[nodiscard]] std::vector<const PanelRow*> valid_rows() const {
        std::vector<const PanelRow*> out;
        out.reserve(rows.size());
        for (const auto& r : rows)
            if (r.valid) out.push_back(&r);
        return out;
    }
};

// Joins window characteristics with next-day returns. Windows whose end day
// is the last accepted day have no target and are dropped; windows with a
// degenerate spectrum stay as invalid rows so gap accounting is visible.
// `rf` holds one risk-free log return per accepted day (empty means zero).
inline CharacteristicPanel build_panel(std::span<const TradingDay> days, int window_days,
                                       std::span<const WindowCharacteristics> windows,
                                       std::span<const double> rf = {}) {
    if (!rf.empty() && rf.size() != days.size())
        throw std::invalid_argument("risk-free series must align with accepted days");
    CharacteristicPanel panel;
    panel.window_days = window_days;
    panel.rows.reserve(windows.size());
    for (const auto& w : windows) {
        const std::size_t target = w.end_day_index + 1;
        if (target >= days.size()) continue;
        PanelRow row;
        row.window_id = w.window_id;
        row.end_day = w.end_day;
        row.target_day = days[target].day;
        row.cum_return = w.cum_return;
        row.realized_vol = w.realized_vol;
        row.end_day_return =
            w.end_day_index > 0
                ? std::log(days[w.end_day_index].close_price /
                           days[w.end_day_index - 1].close_price)
                : std::numeric_limits<double>::quiet_NaN();
        row.next_day_return =
            std::log(days[target].close_price / days[w.end_day_index].close_price);
        row.next_day_excess = row.next_day_return - (rf.empty() ? 0.0 : rf[target]);
        if (w.chars) {
            row.delta_alpha = w.chars->delta_alpha;
            row.delta_f = w.chars->delta_f;
            row.B = w.chars->B;
            row.valid = true;
        } else {
            ++panel.invalid_count;
        }
        panel.rows.push_back(row);
    }
    return panel;
}

struct Bin {
    double lo = 0.0;  // exclusive, -inf for the first bin
    double hi = 0.0;  // inclusive, +inf for the last bin
    std::size_t count = 0;
    double fraction = 0.0;
    double mean_predictor = 0.0;
    double mean_excess = 0.0;
    double se_excess = 0.0;  // standard error of the bin mean
};

struct BinSummary {
    std::string predictor;
    std::vector<Bin> bins;
    std::size_t n = 0;
};

struct BinSpec {
    enum class Kind { fixed_edges, quantile } kind = Kind::quantile;
    std::vector<double> edges;  // interior boundaries for fixed_edges
    int n_bins = 6;
};

// The fixed width bins used for delta_alpha: open-ended at both extremes so
// every value lands somewhere.
inline BinSpec delta_alpha_bins() {
    BinSpec spec;
    spec.kind = BinSpec::Kind::fixed_edges;
    spec.edges = {0.05, 0.10, 0.15, 0.20, 0.25};
    spec.n_bins = 6;
    return spec;
}

inline BinSpec quantile_bins(int n = 6) {
    BinSpec spec;
    spec.kind = BinSpec::Kind::quantile;
    spec.n_bins = n;
    return spec;
}

// Mean next-day excess return per predictor bin over the valid rows.
inline BinSummary bin_response(const CharacteristicPanel& panel, Predictor predictor,
                               const BinSpec& spec) {
    const auto rows = panel.valid_rows();
    BinSummary out;
    out.predictor = to_string(predictor);
    out.n = rows.size();
    if (rows.empty()) throw std::invalid_argument("no valid rows to bin");

    std::vector<double> edges;
    if (spec.kind == BinSpec::Kind::fixed_edges) {
        edges = spec.edges;
        if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()))
            throw std::invalid_argument("fixed bin edges must be sorted and non-empty");
    } else {
        if (spec.n_bins < 2) throw std::invalid_argument("need at least 2 quantile bins");
        if (rows.size() < static_cast<std::size_t>(spec.n_bins))
            throw std::invalid_argument("fewer rows than quantile bins");
        std::vector<double> vals(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = rows[i]->predictor(predictor);
        std::sort(vals.begin(), vals.end());
        for (int b = 1; b < spec.n_bins; ++b) {
            const std::size_t pos = rows.size() * static_cast<std::size_t>(b) /
                                    static_cast<std::size_t>(spec.n_bins);
            edges.push_back(vals[pos - 1]);  // bin takes values <= its upper edge
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }

    const std::size_t nb = edges.size() + 1;
    out.bins.resize(nb);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nb; ++b) {
        out.bins[b].lo = b == 0 ? -inf : edges[b - 1];
        out.bins[b].hi = b == nb - 1 ? inf : edges[b];
    }
    std::vector<std::vector<double>> excess(nb);
    for (const PanelRow* row : rows) {
        const double v = row->predictor(predictor);
        // Bins are (lo, hi]: a value equal to an edge belongs below it, so the
        // bin index is the number of edges strictly less than v.
        const std::size_t b = static_cast<std::size_t>(
            std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
        auto& bin = out.bins[b];
        ++bin.count;
        bin.mean_predictor += v;
        excess[b].push_back(row->next_day_excess);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        auto& bin = out.bins[b];
        bin.fraction = static_cast<double>(bin.count) / static_cast<double>(rows.size());
        if (bin.count == 0) {
            bin.mean_predictor = std::numeric_limits<double>::quiet_NaN();
            bin.mean_excess = std::numeric_limits<double>::quiet_NaN();
            bin.se_excess = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        bin.mean_predictor /= static_cast<double>(bin.count);
        double m = 0.0;
        for (double e : excess[b]) m += e;
        m /= static_cast<double>(bin.count);
        bin.mean_excess = m;
        if (bin.count > 1) {
            double var = 0.0;
            for (double e : excess[b]) var += (e - m) * (e - m);
            var /= static_cast<double>(bin.count - 1);
            bin.se_excess = std::sqrt(var / static_cast<double>(bin.count));
        } else {
            bin.se_excess = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

// Predictive regression of next-day excess returns on one characteristic,
// optionally controlling for realized volatility. Newey-West errors.
inline RegressionFit in_sample(const CharacteristicPanel& panel, Predictor predictor,
                               bool with_vol = false, int nw_lag = -1) {
    const auto rows = panel.valid_rows();
    std::vector<double> y;
    std::vector<std::vector<double>> xcols(with_vol ? 2 : 1);
    std::vector<std::string> names{to_string(predictor)};
    if (with_vol) names.emplace_back("realized_vol");
    y.reserve(rows.size());
    for (const PanelRow* r : rows) {
        y.push_back(r->next_day_excess);
        xcols[0].push_back(r->predictor(predictor));
        if (with_vol) xcols[1].push_back(r->realized_vol);
    }
    return ols_hac(y, xcols, names, nw_lag);
}

struct CwResult {
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double pvalue = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
};

// Clark-West adjusted MSPE comparison of a model forecast against the
// historical-mean benchmark. One-sided upper-tail normal p-value.
inline CwResult clark_west(std::span<const double> actual, std::span<const double> benchmark,
                           std::span<const double> model) {
    const std::size_t n = actual.size();
    if (benchmark.size() != n || model.size() != n)
        throw std::invalid_argument("forecast length mismatch");
    if (n == 0) throw std::invalid_argument("no forecasts");
    if (n < 2) return {};  // one forecast: the t-ratio has no variance estimate
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double eb = actual[i] - benchmark[i];
        const double em = actual[i] - model[i];
        const double d = benchmark[i] - model[i];
        f[i] = eb * eb - em * em + d * d;
    }
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : f) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    CwResult res;
    if (var <= 0.0) return res;  // model coincides with the benchmark
    res.statistic = mean / std::sqrt(var / static_cast<double>(n));
    res.pvalue = normal_sf(res.statistic);
    res.defined = true;
    return res;
}

enum class OosScheme { expanding, moving };

inline const char* to_string(OosScheme s) {
    return s == OosScheme::expanding ? "expanding" : "moving";
}

inline OosScheme scheme_from_string(const std::string& s) {
    if (s == "expanding") return OosScheme::expanding;
    if (s == "moving") return OosScheme::moving;
    throw std::invalid_argument("unknown forecast scheme: " + s);
}

struct OosResult {
    std::string predictor;
    OosScheme scheme = OosScheme::expanding;
    double r2_os = std::numeric_limits<double>::quiet_NaN();
    CwResult cw;
    std::size_t n_forecasts = 0;
    std::size_t initial = 0;
};

// Out-of-sample evaluation over the valid rows in panel order. For each
// forecast origin t >= initial the model is refit on the estimation rows
// (all previous rows when expanding, the last `initial` when moving) and
// both the model and the mean benchmark predict row t's excess return.
//   R2_OS = 1 - SSE_model / SSE_benchmark.
inline OosResult oos_run(const CharacteristicPanel& panel, Predictor predictor,
                         OosScheme scheme, std::size_t initial) {
    const auto rows = panel.valid_rows();
    const std::size_t n = rows.size();
    if (initial < 10) throw std::invalid_argument("initial window too small");
    if (n <= initial) throw std::invalid_argument("panel too short for initial window");

    OosResult res;
    res.predictor = to_string(predictor);
    res.scheme = scheme;
    res.initial = initial;

    std::vector<double> actual, bench, model;
    actual.reserve(n - initial);
    bench.reserve(n - initial);
    model.reserve(n - initial);
    for (std::size_t t = initial; t < n; ++t) {
        const std::size_t lo = scheme == OosScheme::moving ? t - initial : 0;
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double m = static_cast<double>(t - lo);
        for (std::size_t i = lo; i < t; ++i) {
            const double xv = rows[i]->predictor(predictor);
            const double yv = rows[i]->next_day_excess;
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
        }
        const double mx = sx / m;
        const double my = sy / m;
        const double vxx = sxx - m * mx * mx;
        const double vxy = sxy - m * mx * my;
        const double x_t = rows[t]->predictor(predictor);
        double yhat = my;  // a flat predictor degrades to the mean forecast
        // Relative guard: a constant predictor leaves vxx at rounding level
        // (~eps * sxx), and dividing by it would fabricate a slope.
        if (vxx > sxx * 1e-12) {
            const double slope = vxy / vxx;
            yhat = (my - slope * mx) + slope * x_t;
        }
        actual.push_back(rows[t]->next_day_excess);
        bench.push_back(my);
        model.push_back(yhat);
    }
    res.n_forecasts = actual.size();

    double sse_model = 0.0, sse_bench = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sse_model += (actual[i] - model[i]) * (actual[i] - model[i]);
        sse_bench += (actual[i] - bench[i]) * (actual[i] - bench[i]);
    }
    if (sse_bench > 0.0) res.r2_os = 1.0 - sse_model / sse_bench;
    res.cw = clark_west(actual, bench, model);
    return res;
}

}  // namespace mfp
