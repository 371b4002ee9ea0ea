#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfp {

// Thrown when a detrending box has zero residual variance, which makes the
// generalized mean blow up for q <= 0. Callers treat the window as invalid.
class degenerate_window_error : public std::runtime_error {
public:
    explicit degenerate_window_error(int scale)
        : std::runtime_error("zero box fluctuation at scale " + std::to_string(scale)),
          scale_(scale) {}
    [[nodiscard]] int scale() const noexcept { return scale_; }

private:
    int scale_;
};

// Cumulative sum of the series, anchored at zero: y has n+1 points with
// y[0] = 0 and y[i] - y[i-1] equal to the i-th return exactly. The anchor is
// what makes time reversal an exact permutation of the dual box tilings
// (start boxes of the reversed walk mirror onto end boxes of the original);
// without it the mirrored boxes land one index off whenever s does not divide
// n. The per-box polynomial fit removes local trends, so no global demeaning.
struct Profile {
    std::vector<double> y;
};

inline Profile profile(std::span<const double> x) {
    Profile p;
    p.y.reserve(x.size() + 1);
    p.y.push_back(0.0);
    double acc = 0.0;
    for (double v : x) {
        acc += v;
        p.y.push_back(acc);
    }
    return p;
}

struct ScaleGrid {
    std::vector<int> scales;  // strictly increasing
};

// Roughly `count` log-spaced integer scales in [s_min, floor(n * max_fraction)].
// Duplicates after rounding are merged, so fewer may come back.
inline ScaleGrid make_scale_grid(std::size_t n, int s_min, double max_fraction, int count) {
    if (s_min < 2) throw std::invalid_argument("s_min must be at least 2");
    if (count < 3) throw std::invalid_argument("scale grid needs at least 3 points");
    const int s_max = static_cast<int>(static_cast<double>(n) * max_fraction);
    if (s_max < s_min) throw std::invalid_argument("series too short for scale grid");
    ScaleGrid g;
    if (s_max == s_min) throw std::invalid_argument("scale range is a single point");
    const double lo = std::log(static_cast<double>(s_min));
    const double hi = std::log(static_cast<double>(s_max));
    for (int i = 0; i < count; ++i) {
        const double t = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        const int s = static_cast<int>(std::lround(std::exp(t)));
        if (g.scales.empty() || s > g.scales.back()) g.scales.push_back(s);
    }
    if (g.scales.size() < 3) throw std::invalid_argument("scale grid collapsed below 3 points");
    return g;
}

// Powers of two in [s_min, floor(n * max_fraction)]. For series built from
// dyadic cell structure (cascade benchmarks) box edges then align with cells
// and the scaling fit is clean; log-spaced grids mix cell phases and bias h.
inline ScaleGrid dyadic_scale_grid(std::size_t n, int s_min, double max_fraction) {
    const int s_max = static_cast<int>(static_cast<double>(n) * max_fraction);
    ScaleGrid g;
    for (int s = 1; s <= s_max && s > 0; s *= 2)
        if (s >= s_min) g.scales.push_back(s);
    if (g.scales.size() < 3) throw std::invalid_argument("series too short for dyadic scales");
    return g;
}

struct QGrid {
    std::vector<double> qs;  // uniform ascending grid
    double step = 0.0;

    [[nodiscard]] std::optional<std::size_t> q_zero_index() const {
        for (std::size_t i = 0; i < qs.size(); ++i)
            if (std::abs(qs[i]) < 1e-12) return i;
        return std::nullopt;
    }
};

inline QGrid make_q_grid(double q_min, double q_max, double step) {
    if (!(step > 0.0) || !(q_max > q_min)) throw std::invalid_argument("bad q grid");
    QGrid g;
    g.step = step;
    const int count = static_cast<int>(std::lround((q_max - q_min) / step)) + 1;
    if (count < 3) throw std::invalid_argument("q grid needs at least 3 points");
    g.qs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) g.qs.push_back(q_min + step * i);
    return g;
}

// Root mean squared residual of an order-`order` polynomial fit, one value per
// box. Boxes tile from both ends: k = 0..Ns-1 from the start, then the same
// count from the end, so 2*Ns values cover every point when n % scale != 0.
inline std::vector<double> box_fluctuations(const Profile& p, int scale, int order) {
    const std::size_t n = p.y.size();
    if (order < 0) throw std::invalid_argument("negative detrending order");
    if (scale < order + 2) throw std::invalid_argument("scale too small for detrending order");
    if (static_cast<std::size_t>(scale) > n) throw std::invalid_argument("scale exceeds series length");

    const std::size_t s = static_cast<std::size_t>(scale);
    const std::size_t ns = n / s;

    // Abscissa scaled to [-1, 1] keeps the Vandermonde basis well conditioned.
    Eigen::MatrixXd X(s, order + 1);
    for (std::size_t t = 0; t < s; ++t) {
        const double x = s == 1 ? 0.0 : (2.0 * static_cast<double>(t) - (s - 1.0)) / (s - 1.0);
        double pw = 1.0;
        for (int j = 0; j <= order; ++j) {
            X(static_cast<Eigen::Index>(t), j) = pw;
            pw *= x;
        }
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(s), order + 1);

    std::vector<double> out;
    out.reserve(2 * ns);
    auto box_rms = [&](std::size_t start) {
        const Eigen::Map<const Eigen::VectorXd> seg(p.y.data() + start,
                                                    static_cast<Eigen::Index>(s));
        const Eigen::VectorXd coef = Q.transpose() * seg;
        const double ssr = (seg - Q * coef).squaredNorm();
        return std::sqrt(ssr / static_cast<double>(s));
    };
    for (std::size_t k = 0; k < ns; ++k) out.push_back(box_rms(k * s));
    for (std::size_t k = 0; k < ns; ++k) out.push_back(box_rms(n - (k + 1) * s));
    return out;
}

struct FluctuationSurface {
    std::vector<double> qs;
    std::vector<int> scales;
    std::vector<double> F;  // row-major [q][scale], strictly positive

    [[nodiscard]] double at(std::size_t iq, std::size_t is) const {
        return F[iq * scales.size() + is];
    }
};

// Generalized mean of the box values for every (q, scale) pair:
//   F_q(s) = (mean F_k^q)^(1/q),  F_0(s) = exp(mean ln F_k).
// Computed through log-sum-exp so |q| = 8 with tiny box values stays finite.
// A zero box value is fatal when the grid reaches q <= 0; for q > 0 it simply
// contributes nothing, but an all-zero scale is degenerate either way.
inline FluctuationSurface fluctuation_function(const std::vector<std::vector<double>>& boxes,
                                               const ScaleGrid& scales, const QGrid& qgrid) {
    if (boxes.size() != scales.scales.size())
        throw std::invalid_argument("box values and scale grid size mismatch");
    const bool has_nonpositive_q =
        std::any_of(qgrid.qs.begin(), qgrid.qs.end(), [](double q) { return q <= 1e-12; });

    FluctuationSurface surf;
    surf.qs = qgrid.qs;
    surf.scales = scales.scales;
    surf.F.assign(qgrid.qs.size() * scales.scales.size(), 0.0);

    std::vector<double> logs;
    for (std::size_t is = 0; is < boxes.size(); ++is) {
        const auto& fk = boxes[is];
        if (fk.empty()) throw std::invalid_argument("empty box list");
        const std::size_t m = fk.size();
        logs.clear();
        logs.reserve(m);
        std::size_t zeros = 0;
        for (double v : fk) {
            if (v <= 0.0) {
                ++zeros;
                logs.push_back(-std::numeric_limits<double>::infinity());
            } else {
                logs.push_back(std::log(v));
            }
        }
        if (zeros == m || (zeros > 0 && has_nonpositive_q))
            throw degenerate_window_error(scales.scales[is]);

        for (std::size_t iq = 0; iq < qgrid.qs.size(); ++iq) {
            const double q = qgrid.qs[iq];
            double val = 0.0;
            if (std::abs(q) < 1e-12) {
                double sum = 0.0;
                for (double l : logs) sum += l;
                val = std::exp(sum / static_cast<double>(m));
            } else {
                double zmax = -std::numeric_limits<double>::infinity();
                for (double l : logs)
                    if (std::isfinite(l)) zmax = std::max(zmax, q * l);
                double acc = 0.0;
                for (double l : logs)
                    if (std::isfinite(l)) acc += std::exp(q * l - zmax);
                val = std::exp((zmax + std::log(acc / static_cast<double>(m))) / q);
            }
            surf.F[iq * scales.scales.size() + is] = val;
        }
    }
    return surf;
}

struct ScalingFit {
    double h = 0.0;         // slope of ln F against ln s
    double intercept = 0.0;
    double stderr_h = 0.0;
    double r2 = 0.0;
};

inline std::vector<ScalingFit> fit_hurst(const FluctuationSurface& surf) {
    const std::size_t m = surf.scales.size();
    if (m < 3) throw std::invalid_argument("need at least 3 scales to fit");
    std::vector<double> lx(m);
    for (std::size_t i = 0; i < m; ++i) lx[i] = std::log(static_cast<double>(surf.scales[i]));
    const double mx = [&] {
        double s = 0.0;
        for (double v : lx) s += v;
        return s / static_cast<double>(m);
    }();
    double sxx = 0.0;
    for (double v : lx) sxx += (v - mx) * (v - mx);

    std::vector<ScalingFit> fits(surf.qs.size());
    for (std::size_t iq = 0; iq < surf.qs.size(); ++iq) {
        double my = 0.0;
        for (std::size_t i = 0; i < m; ++i) my += std::log(surf.at(iq, i));
        my /= static_cast<double>(m);
        double sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double dy = std::log(surf.at(iq, i)) - my;
            sxy += (lx[i] - mx) * dy;
            syy += dy * dy;
        }
        ScalingFit f;
        f.h = sxy / sxx;
        f.intercept = my - f.h * mx;
        double ssr = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::log(surf.at(iq, i)) - (f.intercept + f.h * lx[i]);
            ssr += e * e;
        }
        f.stderr_h = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
        f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
        fits[iq] = f;
    }
    return fits;
}

// Mass exponents tau(q) = q h(q) - d, with d the support dimension (1 for a
// time series).
inline std::vector<double> scaling_exponents(const QGrid& qgrid, std::span<const double> h,
                                             double d_support = 1.0) {
    if (h.size() != qgrid.qs.size()) throw std::invalid_argument("h size mismatch");
    std::vector<double> tau(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) tau[i] = qgrid.qs[i] * h[i] - d_support;
    return tau;
}

struct SpectrumPoint {
    double q = 0.0;
    double h = std::numeric_limits<double>::quiet_NaN();
    double tau = 0.0;
    double alpha = 0.0;
    double f = 0.0;
    double h_stderr = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
};

struct SingularitySpectrum {
    std::vector<SpectrumPoint> points;  // ordered by q
    double d_support = 1.0;

    [[nodiscard]] std::size_t q_zero_index() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < points.size(); ++i)
            if (std::abs(points[i].q) < std::abs(points[best].q)) best = i;
        return best;
    }
};

// Legendre transform on a uniform q grid: alpha = dtau/dq by central
// differences, second-order one-sided stencils at the ends, f = q alpha - tau.
inline SingularitySpectrum legendre_spectrum(const QGrid& qgrid, std::span<const double> tau,
                                             double d_support = 1.0) {
    const std::size_t m = qgrid.qs.size();
    if (tau.size() != m) throw std::invalid_argument("tau size mismatch");
    if (m < 3) throw std::invalid_argument("need at least 3 q points");
    const double dq = qgrid.step;
    for (std::size_t i = 1; i < m; ++i)
        if (std::abs((qgrid.qs[i] - qgrid.qs[i - 1]) - dq) > 1e-9 * std::max(1.0, dq))
            throw std::invalid_argument("q grid must be uniform");

    SingularitySpectrum spec;
    spec.d_support = d_support;
    spec.points.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double alpha = 0.0;
        if (i == 0)
            alpha = (-3.0 * tau[0] + 4.0 * tau[1] - tau[2]) / (2.0 * dq);
        else if (i == m - 1)
            alpha = (3.0 * tau[m - 1] - 4.0 * tau[m - 2] + tau[m - 3]) / (2.0 * dq);
        else
            alpha = (tau[i + 1] - tau[i - 1]) / (2.0 * dq);
        auto& p = spec.points[i];
        p.q = qgrid.qs[i];
        p.tau = tau[i];
        p.alpha = alpha;
        p.f = p.q * alpha - tau[i];
    }
    return spec;
}

struct MfdfaOptions {
    double q_min = -4.0;
    double q_max = 8.0;
    double q_step = 0.25;
    int s_min = 20;
    double s_max_fraction = 0.25;
    int scale_count = 20;
    int poly_order = 1;
    double d_support = 1.0;
    std::optional<std::vector<int>> scales;  // explicit grid overrides the log-spaced one
};

struct AnalysisDetail {
    SingularitySpectrum spectrum;
    FluctuationSurface surface;
};

// Full pipeline for one series: profile, per-scale box fluctuations,
// generalized means, scaling fits, mass exponents, Legendre transform.
inline AnalysisDetail analyze_detailed(std::span<const double> returns,
                                       const MfdfaOptions& opt = {}) {
    const QGrid qgrid = make_q_grid(opt.q_min, opt.q_max, opt.q_step);
    ScaleGrid grid;
    if (opt.scales) {
        grid.scales = *opt.scales;
        if (grid.scales.size() < 3) throw std::invalid_argument("need at least 3 scales");
        if (!std::is_sorted(grid.scales.begin(), grid.scales.end()))
            throw std::invalid_argument("explicit scales must be ascending");
    } else {
        grid = make_scale_grid(returns.size(), opt.s_min, opt.s_max_fraction, opt.scale_count);
    }

    const Profile prof = profile(returns);
    std::vector<std::vector<double>> boxes;
    boxes.reserve(grid.scales.size());
    for (int s : grid.scales) boxes.push_back(box_fluctuations(prof, s, opt.poly_order));

    AnalysisDetail out;
    out.surface = fluctuation_function(boxes, grid, qgrid);
    const std::vector<ScalingFit> fits = fit_hurst(out.surface);
    std::vector<double> h(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) h[i] = fits[i].h;
    const std::vector<double> tau = scaling_exponents(qgrid, h, opt.d_support);

    out.spectrum = legendre_spectrum(qgrid, tau, opt.d_support);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out.spectrum.points[i].h = fits[i].h;
        out.spectrum.points[i].h_stderr = fits[i].stderr_h;
        out.spectrum.points[i].fit_r2 = fits[i].r2;
    }
    return out;
}

inline SingularitySpectrum analyze(std::span<const double> returns,
                                   const MfdfaOptions& opt = {}) {
    return analyze_detailed(returns, opt).spectrum;
}

}  // namespace mfp
