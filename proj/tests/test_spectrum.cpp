#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mfp/mfdfa.hpp"
#include "mfp/spectrum.hpp"

namespace {

using namespace mfp;

// Spectrum whose f is an exact quadratic in alpha, alpha linear in q so the
// apex alpha0 sits exactly at q = 0.
SingularitySpectrum quadratic_spectrum(double A, double B, double C, double alpha0) {
    SingularitySpectrum s;
    for (double q = -2.0; q <= 2.0 + 1e-9; q += 0.5) {
        SpectrumPoint p;
        p.q = q;
        p.alpha = alpha0 - 0.1 * q;
        const double d = p.alpha - alpha0;
        p.f = A * d * d + B * d + C;
        s.points.push_back(p);
    }
    return s;
}

TEST(Characteristics, RecoversExactQuadratic) {
    const double A = -4.0, B = 0.05, C = 1.0, alpha0 = 1.2;
    const SingularitySpectrum s = quadratic_spectrum(A, B, C, alpha0);
    const SpectrumCharacteristics c = characteristics(s);

    EXPECT_NEAR(c.A, A, 1e-10);
    EXPECT_NEAR(c.B, B, 1e-10);
    EXPECT_NEAR(c.C, C, 1e-10);
    EXPECT_NEAR(c.alpha0, alpha0, 1e-12);
    EXPECT_NEAR(c.fit_r2, 1.0, 1e-10);

    // alpha spans alpha0 +- 0.2; extremes sit at q = +-2.
    EXPECT_NEAR(c.delta_alpha, 0.4, 1e-12);
    const double f_min = A * 0.04 - B * 0.2 + C;  // alpha_min = alpha0 - 0.2
    const double f_max = A * 0.04 + B * 0.2 + C;  // alpha_max = alpha0 + 0.2
    EXPECT_NEAR(c.delta_f, f_min - f_max, 1e-12);
    EXPECT_NEAR(c.delta_f, -2.0 * B * 0.2, 1e-12);
}

TEST(Characteristics, OrderOfPointsDoesNotMatter) {
    SingularitySpectrum s = quadratic_spectrum(-3.0, -0.08, 0.9, 1.1);
    const SpectrumCharacteristics base = characteristics(s);
    std::reverse(s.points.begin(), s.points.end());
    const SpectrumCharacteristics rev = characteristics(s);
    EXPECT_NEAR(rev.delta_alpha, base.delta_alpha, 1e-12);
    EXPECT_NEAR(rev.delta_f, base.delta_f, 1e-12);
    EXPECT_NEAR(rev.B, base.B, 1e-10);
    EXPECT_NEAR(rev.alpha0, base.alpha0, 1e-12);
}

TEST(Characteristics, WidthIsNonNegativeByConstruction) {
    const SpectrumCharacteristics c = characteristics(quadratic_spectrum(-2.0, 0.3, 0.8, 0.9));
    EXPECT_GE(c.delta_alpha, 0.0);
}

TEST(Characteristics, DegenerateSpectraAreRejected) {
    // Zero width: every alpha identical.
    SingularitySpectrum flat;
    for (double q = -2.0; q <= 2.0 + 1e-9; q += 0.5) {
        SpectrumPoint p;
        p.q = q;
        p.alpha = 0.5;
        p.f = 1.0;
        flat.points.push_back(p);
    }
    EXPECT_THROW(characteristics(flat), degenerate_spectrum_error);

    SingularitySpectrum nan_spec = quadratic_spectrum(-4.0, 0.0, 1.0, 1.2);
    nan_spec.points[3].alpha = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(characteristics(nan_spec), degenerate_spectrum_error);

    SingularitySpectrum tiny;
    tiny.points.resize(4);
    EXPECT_THROW(characteristics(tiny), std::invalid_argument);
}

TEST(ClassifyShape, SignBandsWithTolerance) {
    SpectrumCharacteristics c;
    c.B = 0.02;
    EXPECT_EQ(classify_shape(c), SpectrumShape::left_hooked);
    c.B = -0.02;
    EXPECT_EQ(classify_shape(c), SpectrumShape::right_hooked);
    c.B = -0.003;
    EXPECT_EQ(classify_shape(c), SpectrumShape::symmetric);
    c.B = 0.01;  // boundary is inclusive for symmetric
    EXPECT_EQ(classify_shape(c), SpectrumShape::symmetric);
    c.B = 0.02;
    EXPECT_EQ(classify_shape(c, 0.05), SpectrumShape::symmetric);
    EXPECT_STREQ(to_string(SpectrumShape::left_hooked), "left_hooked");
    EXPECT_STREQ(to_string(SpectrumShape::right_hooked), "right_hooked");
    EXPECT_STREQ(to_string(SpectrumShape::symmetric), "symmetric");
}

}  // namespace
