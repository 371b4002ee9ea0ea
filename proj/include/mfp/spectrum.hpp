#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "mfp/mfdfa.hpp"

namespace mfp {

// Thrown when the singularity spectrum has no usable width, e.g. a
// monofractal window where every alpha coincides.
class degenerate_spectrum_error : public std::runtime_error {
public:
    explicit degenerate_spectrum_error(const std::string& what) : std::runtime_error(what) {}
};

// Summary numbers for one spectrum:
//   delta_alpha  width alpha_max - alpha_min
//   delta_f      f(alpha_min) - f(alpha_max); positive means the right tail
//                of the return distribution dominates the scaling
//   A, B, C      quadratic fit f = A (alpha-alpha0)^2 + B (alpha-alpha0) + C
//                with alpha0 pinned at alpha(q=0), so B measures asymmetry
struct SpectrumCharacteristics {
    double delta_alpha = 0.0;
    double delta_f = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double alpha0 = 0.0;
    double fit_r2 = 0.0;
};

enum class SpectrumShape { left_hooked, right_hooked, symmetric };

inline const char* to_string(SpectrumShape s) {
    switch (s) {
        case SpectrumShape::left_hooked: return "left_hooked";
        case SpectrumShape::right_hooked: return "right_hooked";
        default: return "symmetric";
    }
}

inline SpectrumCharacteristics characteristics(const SingularitySpectrum& spec) {
    const auto& pts = spec.points;
    if (pts.size() < 5) throw std::invalid_argument("spectrum too small to summarise");
    for (const auto& p : pts)
        if (!std::isfinite(p.alpha) || !std::isfinite(p.f))
            throw degenerate_spectrum_error("non-finite spectrum point");

    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].alpha < pts[imin].alpha) imin = i;
        if (pts[i].alpha > pts[imax].alpha) imax = i;
    }
    SpectrumCharacteristics c;
    c.delta_alpha = pts[imax].alpha - pts[imin].alpha;
    if (c.delta_alpha < 1e-12)
        throw degenerate_spectrum_error("spectrum width is zero");
    c.delta_f = pts[imin].f - pts[imax].f;
    c.alpha0 = pts[spec.q_zero_index()].alpha;

    Eigen::MatrixXd X(static_cast<Eigen::Index>(pts.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = pts[i].alpha - c.alpha0;
        X(static_cast<Eigen::Index>(i), 0) = d * d;
        X(static_cast<Eigen::Index>(i), 1) = d;
        X(static_cast<Eigen::Index>(i), 2) = 1.0;
        y(static_cast<Eigen::Index>(i)) = pts[i].f;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < 3) throw degenerate_spectrum_error("alpha values nearly collinear");
    const Eigen::VectorXd beta = qr.solve(y);
    c.A = beta(0);
    c.B = beta(1);
    c.C = beta(2);

    const double ssr = (y - X * beta).squaredNorm();
    const double mean = y.mean();
    double sst = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sst += (y(i) - mean) * (y(i) - mean);
    c.fit_r2 = sst > 0.0 ? 1.0 - ssr / sst : (ssr <= 1e-30 ? 1.0 : 0.0);
    return c;
}

// Sign of the linear term splits the shapes: B > tol bends left (right tail
// truncated), B < -tol bends right, in between counts as symmetric.
inline SpectrumShape classify_shape(const SpectrumCharacteristics& c, double tol = 0.01) {
    if (c.B > tol) return SpectrumShape::left_hooked;
    if (c.B < -tol) return SpectrumShape::right_hooked;
    return SpectrumShape::symmetric;
}

}  // namespace mfp
