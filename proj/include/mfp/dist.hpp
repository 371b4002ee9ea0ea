#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace mfp {

// Thin wrappers so the rest of the library never touches distribution objects
// directly and non-finite statistics map to the obvious tail limits.

inline double normal_cdf(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    static const boost::math::normal dist;
    return boost::math::cdf(dist, z);
}

inline double normal_sf(double z) { return normal_cdf(-z); }

inline double two_sided_normal_pvalue(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * normal_sf(std::abs(z));
}

inline double student_t_sf(double t, double dof) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const boost::math::students_t dist(dof);
    return boost::math::cdf(boost::math::complement(dist, t));
}

inline double two_sided_t_pvalue(double t, double dof) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * student_t_sf(std::abs(t), dof);
}

inline double chi_squared_sf(double x, double dof) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, x));
}

inline double f_sf(double x, double d1, double d2) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const boost::math::fisher_f dist(d1, d2);
    return boost::math::cdf(boost::math::complement(dist, x));
}

}  // namespace mfp
