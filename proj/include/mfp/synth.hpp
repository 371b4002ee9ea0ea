#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfp/mfdfa.hpp"

namespace mfp {

// Decorrelates per-trial seeds derived from one base seed (splitmix64 step).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// mt19937_64 with an explicit Box-Muller transform. std::normal_distribution
// is implementation-defined, this keeps fixtures bit-identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct GeneratorSpec {
    std::string kind;  // gaussian_iid | random_walk | ar1 | garch11 | binomial_cascade
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;
};

namespace detail {

inline double param_or(const GeneratorSpec& s, const std::string& key, double fallback) {
    const auto it = s.params.find(key);
    return it == s.params.end() ? fallback : it->second;
}

inline double param_req(const GeneratorSpec& s, const std::string& key) {
    const auto it = s.params.find(key);
    if (it == s.params.end())
        throw std::invalid_argument("generator '" + s.kind + "' needs parameter '" + key + "'");
    return it->second;
}

}  // namespace detail

// Deterministic binomial cascade measure of length 2^levels: cell i receives
// p^popcount(i) * (1-p)^(levels - popcount(i)). Cell masses sum to 1 exactly.
inline std::vector<double> binomial_cascade(int levels, double p) {
    if (levels < 1 || levels > 30) throw std::invalid_argument("cascade levels out of range");
    if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument("cascade p must be in (0, 0.5]");
    const std::size_t n = std::size_t{1} << levels;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = std::popcount(i);
        out[i] = std::pow(p, k) * std::pow(1.0 - p, levels - k);
    }
    return out;
}

// Closed-form spectrum of the binomial cascade on the given q grid.
//   h(q) = 1/q - log2(p^q + (1-p)^q) / q,   h(0) = -(ln p + ln(1-p)) / (2 ln 2)
//   tau  = q h - 1
//   alpha = -(p^q ln p + (1-p)^q ln(1-p)) / ((p^q + (1-p)^q) ln 2)
inline SingularitySpectrum cascade_oracle(double p, const QGrid& qgrid) {
    if (!(p > 0.0 && p <= 0.5)) throw std::invalid_argument("cascade p must be in (0, 0.5]");
    const double lp = std::log(p);
    const double lq = std::log(1.0 - p);
    const double ln2 = std::numbers::ln2;
    SingularitySpectrum spec;
    spec.points.resize(qgrid.qs.size());
    for (std::size_t i = 0; i < qgrid.qs.size(); ++i) {
        const double q = qgrid.qs[i];
        auto& pt = spec.points[i];
        pt.q = q;
        const double pq = std::exp(q * lp);
        const double qq = std::exp(q * lq);
        if (std::abs(q) < 1e-12) {
            pt.h = -(lp + lq) / (2.0 * ln2);
        } else {
            pt.h = 1.0 / q - std::log(pq + qq) / (q * ln2);
        }
        pt.tau = q * pt.h - 1.0;
        pt.alpha = -(pq * lp + qq * lq) / ((pq + qq) * ln2);
        pt.f = q * pt.alpha - pt.tau;
    }
    return spec;
}

// Draws one series. Identical specs produce bit-identical output.
inline std::vector<double> generate(const GeneratorSpec& spec) {
    if (spec.length == 0) throw std::invalid_argument("generator length must be positive");
    Rng rng(spec.seed);
    std::vector<double> out;
    out.reserve(spec.length);

    if (spec.kind == "gaussian_iid") {
        const double sigma = detail::param_or(spec, "sigma", 1.0);
        if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
        for (std::size_t i = 0; i < spec.length; ++i) out.push_back(sigma * rng.normal());
        return out;
    }
    if (spec.kind == "random_walk") {
        const double sigma = detail::param_or(spec, "sigma", 1.0);
        if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
        double level = detail::param_or(spec, "start", 0.0);
        for (std::size_t i = 0; i < spec.length; ++i) {
            level += sigma * rng.normal();
            out.push_back(level);
        }
        return out;
    }
    if (spec.kind == "ar1") {
        const double phi = detail::param_req(spec, "phi");
        const double sigma = detail::param_or(spec, "sigma", 1.0);
        if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("ar1 needs |phi| < 1");
        if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
        const auto burn = static_cast<std::size_t>(detail::param_or(spec, "burn_in", 1000.0));
        double x = 0.0;
        for (std::size_t i = 0; i < burn; ++i) x = phi * x + sigma * rng.normal();
        for (std::size_t i = 0; i < spec.length; ++i) {
            x = phi * x + sigma * rng.normal();
            out.push_back(x);
        }
        return out;
    }
    if (spec.kind == "garch11") {
        const double omega = detail::param_req(spec, "omega");
        const double alpha = detail::param_req(spec, "alpha");
        const double beta = detail::param_req(spec, "beta");
        if (!(omega > 0.0) || alpha < 0.0 || beta < 0.0 || alpha + beta >= 1.0)
            throw std::invalid_argument("garch11 needs omega > 0, alpha, beta >= 0, alpha + beta < 1");
        const auto burn = static_cast<std::size_t>(detail::param_or(spec, "burn_in", 1000.0));
        double var = omega / (1.0 - alpha - beta);
        double eps = 0.0;
        for (std::size_t i = 0; i < burn + spec.length; ++i) {
            if (i > 0) var = omega + alpha * eps * eps + beta * var;
            eps = std::sqrt(var) * rng.normal();
            if (i >= burn) out.push_back(eps);
        }
        return out;
    }
    if (spec.kind == "binomial_cascade") {
        const double p = detail::param_req(spec, "p");
        if (!std::has_single_bit(spec.length))
            throw std::invalid_argument("cascade length must be a power of two");
        const int levels = std::countr_zero(spec.length);
        return binomial_cascade(levels, p);
    }
    throw std::invalid_argument("unknown generator kind: " + spec.kind);
}

}  // namespace mfp
