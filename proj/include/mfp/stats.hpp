#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfp/dist.hpp"

namespace mfp {

class regression_error : public std::runtime_error {
public:
    explicit regression_error(const std::string& what, int column = -1)
        : std::runtime_error(what), column_(column) {}
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int column_;  // offending design column for collinearity, else -1
};

namespace detail {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd resid;
    double ssr = 0.0;
    Eigen::MatrixXd xtx_inv;
};

// Least squares with an explicit rank check. Collinear designs are an error
// that names the dependent column rather than a silently pinned coefficient.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("design and response length differ");
    if (X.rows() <= X.cols()) throw regression_error("not enough observations");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        const auto& piv = qr.colsPermutation().indices();
        const int offender = piv[qr.rank()];  // first column outside the independent set
        throw regression_error("collinear design column " + std::to_string(offender), offender);
    }
    OlsFit fit;
    fit.beta = qr.solve(y);
    fit.resid = y - X * fit.beta;
    fit.ssr = fit.resid.squaredNorm();
    fit.xtx_inv = (X.transpose() * X)
                      .ldlt()
                      .solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    return fit;
}

inline Eigen::VectorXd to_vector(std::span<const double> x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace detail

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stdev = 0.0;     // n-1 denominator
    double skewness = 0.0;  // m3 / m2^1.5, population moments
    double kurtosis = 0.0;  // m4 / m2^2, not excess
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    bool moments_defined = false;  // false when the series is constant
};

inline SummaryStats describe(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("describe needs at least 2 values");
    SummaryStats s;
    s.n = x.size();
    const double n = static_cast<double>(x.size());
    for (double v : x) s.mean += v;
    s.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    s.min = x[0];
    s.max = x[0];
    for (double v : x) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.stdev = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
        s.moments_defined = true;
    } else {
        s.skewness = std::numeric_limits<double>::quiet_NaN();
        s.kurtosis = std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

struct TestResult {
    double statistic = 0.0;
    double pvalue = 0.0;
    int lags = 0;
    std::map<std::string, double> aux;
};

// Pearson correlation with the exact t test: t = r sqrt((n-2)/(1-r^2)),
// p two-sided against Student t with n-2 degrees of freedom.
inline TestResult pearson_with_p(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("correlation needs at least 3 pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw regression_error("zero variance series");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    TestResult res;
    res.statistic = r;
    const double dof = static_cast<double>(n - 2);
    if (1.0 - r * r <= 0.0) {
        res.pvalue = 0.0;
        res.aux["t"] = std::copysign(std::numeric_limits<double>::infinity(), r);
    } else {
        const double t = r * std::sqrt(dof / (1.0 - r * r));
        res.pvalue = two_sided_t_pvalue(t, dof);
        res.aux["t"] = t;
    }
    res.aux["n"] = static_cast<double>(n);
    return res;
}

// Sample autocorrelations at lags 1..max_lag, overall-mean centring.
inline std::vector<double> acf(std::span<const double> x, int max_lag) {
    const std::size_t n = x.size();
    if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= n)
        throw std::invalid_argument("acf lag out of range");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (denom <= 0.0) throw regression_error("zero variance series");
    std::vector<double> rho(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t)
            num += (x[t] - mean) * (x[t - static_cast<std::size_t>(k)] - mean);
        rho[static_cast<std::size_t>(k - 1)] = num / denom;
    }
    return rho;
}

// Two-sided normal band for a sample autocorrelation under white noise.
inline double acf_band(std::size_t n, double level = 0.95) {
    const boost::math::normal dist;
    return boost::math::quantile(dist, 0.5 + level / 2.0) / std::sqrt(static_cast<double>(n));
}

inline double acf_value(std::span<const double> x, int lag) {
    if (lag == 0) return 1.0;
    return acf(x, lag)[static_cast<std::size_t>(lag - 1)];
}

// Single autocorrelation with its white-noise significance: the sample rho
// has standard error 1/sqrt(n) under the null, p two-sided normal.
inline TestResult acf_test(std::span<const double> x, int lag) {
    TestResult res;
    res.statistic = acf_value(x, lag);
    res.lags = lag;
    res.pvalue = lag == 0
                     ? 0.0
                     : two_sided_normal_pvalue(res.statistic *
                                               std::sqrt(static_cast<double>(x.size())));
    return res;
}

// Ljung-Box portmanteau test: Q = n (n+2) sum rho_k^2 / (n-k), chi^2(L).
inline TestResult ljung_box(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (lags < 1 || static_cast<std::size_t>(2 * lags) >= n)
        throw std::invalid_argument("ljung_box lags out of range");
    const std::vector<double> rho = acf(x, lags);
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        const double r = rho[static_cast<std::size_t>(k - 1)];
        q += r * r / static_cast<double>(n - static_cast<std::size_t>(k));
    }
    q *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);
    TestResult res;
    res.statistic = q;
    res.pvalue = chi_squared_sf(q, lags);
    res.lags = lags;
    return res;
}

namespace detail {

// MacKinnon approximate asymptotic p-value for the constant-only unit-root t
// statistic: response-surface polynomial fed through the normal CDF. The
// surface is only tabulated on a finite tau range, so the result is clamped
// to [0.001, 0.999] rather than reported with spurious precision.
inline double mackinnon_pvalue(double tau) {
    constexpr double tau_max = 2.74;
    constexpr double tau_min = -18.83;
    constexpr double tau_star = -1.61;
    double p = 0.0;
    if (tau > tau_max) {
        p = 1.0;
    } else if (tau < tau_min) {
        p = 0.0;
    } else {
        double z = 0.0;
        if (tau <= tau_star)
            z = 2.1659 + tau * (1.4412 + tau * 0.038269);
        else
            z = 1.7339 + tau * (0.93202 + tau * (-0.12745 + tau * (-0.010368)));
        p = normal_cdf(z);
    }
    return std::clamp(p, 0.001, 0.999);
}

struct AdfCandidate {
    double stat = 0.0;
    double sic = 0.0;
    std::size_t nobs = 0;
};

// Dickey-Fuller regression with `p` augmenting difference lags, rows
// restricted to t >= first_row (0-based index into the difference series).
inline AdfCandidate adf_regression(std::span<const double> x, int p, std::size_t first_row) {
    const std::size_t n = x.size();
    const std::size_t rows = n - 1 - first_row;
    const int k = p + 2;  // const + lagged level + p difference lags
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), k);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first_row + r + 1;  // index into x of the current value
        y(static_cast<Eigen::Index>(r)) = x[t] - x[t - 1];
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        X(static_cast<Eigen::Index>(r), 1) = x[t - 1];
        for (int j = 1; j <= p; ++j)
            X(static_cast<Eigen::Index>(r), 1 + j) =
                x[t - static_cast<std::size_t>(j)] - x[t - static_cast<std::size_t>(j) - 1];
    }
    const OlsFit fit = ols(X, y);
    const double sigma2 = fit.ssr / static_cast<double>(rows - static_cast<std::size_t>(k));
    AdfCandidate c;
    c.stat = fit.beta(1) / std::sqrt(sigma2 * fit.xtx_inv(1, 1));
    c.sic = std::log(fit.ssr / static_cast<double>(rows)) +
            static_cast<double>(k) * std::log(static_cast<double>(rows)) /
                static_cast<double>(rows);
    c.nobs = rows;
    return c;
}

}  // namespace detail

// Augmented Dickey-Fuller test with intercept. The lag order minimises SIC
// over 0..max_lag on the common sample that supports max_lag, then the chosen
// order is re-estimated on the full available sample. max_lag < 0 selects the
// usual 12 (n/100)^(1/4) rule.
inline TestResult adf_test(std::span<const double> x, int max_lag = -1) {
    const std::size_t n = x.size();
    if (max_lag < 0)
        max_lag = static_cast<int>(
            std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    if (n < static_cast<std::size_t>(max_lag) + 10)
        throw std::invalid_argument("series too short for adf max_lag");

    int best_p = 0;
    double best_sic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= max_lag; ++p) {
        try {
            const auto cand =
                detail::adf_regression(x, p, static_cast<std::size_t>(max_lag));
            if (cand.sic < best_sic) {
                best_sic = cand.sic;
                best_p = p;
            }
        } catch (const regression_error&) {
            // A singular candidate (for instance an exactly linear stretch)
            // simply drops out of the selection.
        }
    }
    if (!std::isfinite(best_sic)) throw regression_error("all adf candidate fits singular");

    const auto fit = detail::adf_regression(x, best_p, static_cast<std::size_t>(best_p));
    TestResult res;
    res.statistic = fit.stat;
    res.pvalue = detail::mackinnon_pvalue(fit.stat);
    res.lags = best_p;
    res.aux["nobs"] = static_cast<double>(fit.nobs);
    return res;
}

// Engle's ARCH-LM test in F form: demean, regress the squared series on its
// own lags, F(L, n - 2L - 1) on the R^2 of that auxiliary regression.
inline TestResult arch_lm(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (lags < 1) throw std::invalid_argument("arch_lm needs at least 1 lag");
    if (n < static_cast<std::size_t>(2 * lags) + 3)
        throw std::invalid_argument("series too short for arch_lm lags");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (x[i] - mean) * (x[i] - mean);

    const std::size_t rows = n - static_cast<std::size_t>(lags);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), lags + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + static_cast<std::size_t>(lags);
        y(static_cast<Eigen::Index>(r)) = sq[t];
        X(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (int j = 1; j <= lags; ++j)
            X(static_cast<Eigen::Index>(r), j) = sq[t - static_cast<std::size_t>(j)];
    }
    const auto fit = detail::ols(X, y);
    const double ymean = y.mean();
    double sst = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sst += (y(i) - ymean) * (y(i) - ymean);
    if (sst <= 0.0) throw regression_error("squared series has zero variance");
    const double r2 = 1.0 - fit.ssr / sst;
    const double df2 = static_cast<double>(rows) - static_cast<double>(lags) - 1.0;
    if (df2 <= 0.0) throw std::invalid_argument("arch_lm has no residual degrees of freedom");
    TestResult res;
    res.statistic = (r2 / static_cast<double>(lags)) / ((1.0 - r2) / df2);
    res.pvalue = f_sf(res.statistic, static_cast<double>(lags), df2);
    res.lags = lags;
    res.aux["r2"] = r2;
    res.aux["df2"] = df2;
    return res;
}

// Tests whether x Granger-causes y: F test of the x lags in a regression of
// y_t on a constant, lagged y, and lagged x.
inline TestResult granger_test(std::span<const double> x, std::span<const double> y, int lags) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    const std::size_t n = y.size();
    if (lags < 1) throw std::invalid_argument("granger needs at least 1 lag");
    const std::size_t rows = n - static_cast<std::size_t>(lags);
    const double df2 = static_cast<double>(rows) - 2.0 * lags - 1.0;
    if (df2 <= 0.0) throw std::invalid_argument("series too short for granger lags");

    Eigen::MatrixXd Xr(static_cast<Eigen::Index>(rows), lags + 1);
    Eigen::MatrixXd Xu(static_cast<Eigen::Index>(rows), 2 * lags + 1);
    Eigen::VectorXd yy(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + static_cast<std::size_t>(lags);
        yy(static_cast<Eigen::Index>(r)) = y[t];
        Xr(static_cast<Eigen::Index>(r), 0) = 1.0;
        Xu(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (int j = 1; j <= lags; ++j) {
            const double ylag = y[t - static_cast<std::size_t>(j)];
            const double xlag = x[t - static_cast<std::size_t>(j)];
            Xr(static_cast<Eigen::Index>(r), j) = ylag;
            Xu(static_cast<Eigen::Index>(r), j) = ylag;
            Xu(static_cast<Eigen::Index>(r), lags + j) = xlag;
        }
    }
    const auto restricted = detail::ols(Xr, yy);
    const auto unrestricted = detail::ols(Xu, yy);
    if (unrestricted.ssr <= 0.0) throw regression_error("perfect fit in granger regression");
    TestResult res;
    res.statistic =
        ((restricted.ssr - unrestricted.ssr) / static_cast<double>(lags)) /
        (unrestricted.ssr / df2);
    res.pvalue = f_sf(res.statistic, static_cast<double>(lags), df2);
    res.lags = lags;
    res.aux["df2"] = df2;
    res.aux["nobs"] = static_cast<double>(rows);
    return res;
}

struct RegressionFit {
    std::vector<std::string> names;  // "const" first
    std::vector<double> coef;
    std::vector<double> se;      // Newey-West
    std::vector<double> tstat;
    std::vector<double> pvalue;  // two-sided normal
    double r2 = 0.0;
    double r2_adj = 0.0;
    std::size_t nobs = 0;
    int nw_lag = 0;
};

// Bartlett-kernel truncation lag, the standard 4 (n/100)^(2/9) rule.
inline int nw_auto_lag(std::size_t n) {
    return static_cast<int>(
        std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

// OLS with Newey-West (HAC) standard errors. An intercept is always included
// as the first column; nw_lag < 0 selects the automatic truncation lag.
inline RegressionFit ols_hac(std::span<const double> y,
                             const std::vector<std::vector<double>>& xcols,
                             const std::vector<std::string>& names, int nw_lag = -1) {
    if (xcols.size() != names.size()) throw std::invalid_argument("names/columns mismatch");
    const std::size_t n = y.size();
    for (const auto& c : xcols)
        if (c.size() != n) throw std::invalid_argument("regressor length mismatch");
    const int k = static_cast<int>(xcols.size()) + 1;
    if (n <= static_cast<std::size_t>(k) + 1) throw regression_error("not enough observations");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), k);
    for (std::size_t i = 0; i < n; ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t j = 0; j < xcols.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = xcols[j][i];
    }
    const Eigen::VectorXd yv = detail::to_vector(y);
    detail::OlsFit fit;
    try {
        fit = detail::ols(X, yv);
    } catch (const regression_error& e) {
        if (e.column() >= 0) {
            const std::string name = e.column() == 0 ? "const" : names[e.column() - 1];
            throw regression_error("collinear regressor: " + name, e.column());
        }
        throw;
    }

    const int lag = nw_lag < 0 ? nw_auto_lag(n) : nw_lag;
    std::vector<Eigen::VectorXd> u(n);
    for (std::size_t t = 0; t < n; ++t)
        u[t] = X.row(static_cast<Eigen::Index>(t)).transpose() * fit.resid(static_cast<Eigen::Index>(t));
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t t = 0; t < n; ++t) B += u[t] * u[t].transpose();
    for (int j = 1; j <= lag; ++j) {
        const double w = 1.0 - static_cast<double>(j) / (static_cast<double>(lag) + 1.0);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t)
            g += u[t] * u[t - static_cast<std::size_t>(j)].transpose();
        B += w * (g + g.transpose());
    }
    const Eigen::MatrixXd V = fit.xtx_inv * B * fit.xtx_inv;

    RegressionFit out;
    out.names.reserve(static_cast<std::size_t>(k));
    out.names.emplace_back("const");
    for (const auto& nm : names) out.names.push_back(nm);
    out.nobs = n;
    out.nw_lag = lag;
    const double ymean = yv.mean();
    double sst = 0.0;
    for (Eigen::Index i = 0; i < yv.size(); ++i) sst += (yv(i) - ymean) * (yv(i) - ymean);
    out.r2 = sst > 0.0 ? 1.0 - fit.ssr / sst : 0.0;
    out.r2_adj = 1.0 - (1.0 - out.r2) * (static_cast<double>(n) - 1.0) /
                           (static_cast<double>(n) - static_cast<double>(k));
    for (int j = 0; j < k; ++j) {
        const double se = std::sqrt(std::max(0.0, V(j, j)));
        const double b = fit.beta(j);
        out.coef.push_back(b);
        out.se.push_back(se);
        const double t = se > 0.0 ? b / se : std::numeric_limits<double>::quiet_NaN();
        out.tstat.push_back(t);
        out.pvalue.push_back(two_sided_normal_pvalue(t));
    }
    return out;
}

}  // namespace mfp
