#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>

#include "mfp/synth.hpp"

namespace {

using namespace mfp;

GeneratorSpec make_spec(const char* kind, std::size_t n, std::uint64_t seed) {
    GeneratorSpec s;
    s.kind = kind;
    s.length = n;
    s.seed = seed;
    return s;
}

TEST(Rng, SeedStreamsAreDistinct) {
    EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
    EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
    EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(Rng, NormalMomentsAtFixedSeed) {
    Rng rng(2024);
    const std::size_t n = 100000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(sd, 1.0, 0.02);
}

TEST(Generate, DeterministicPerSeed) {
    auto spec = make_spec("gaussian_iid", 64, 99);
    const auto a = generate(spec);
    const auto b = generate(spec);
    EXPECT_EQ(a, b);
    spec.seed = 100;
    const auto c = generate(spec);
    EXPECT_NE(a, c);
}

TEST(Generate, GaussianSigmaScalesDraws) {
    auto spec = make_spec("gaussian_iid", 128, 5);
    const auto unit = generate(spec);
    spec.params["sigma"] = 2.5;
    const auto scaled = generate(spec);
    for (std::size_t i = 0; i < unit.size(); ++i) EXPECT_DOUBLE_EQ(scaled[i], 2.5 * unit[i]);
}

TEST(Generate, RandomWalkAccumulatesGaussianSteps) {
    auto spec = make_spec("gaussian_iid", 50, 7);
    const auto steps = generate(spec);
    spec.kind = "random_walk";
    const auto walk = generate(spec);
    double level = 0.0;
    for (std::size_t i = 0; i < walk.size(); ++i) {
        level += steps[i];
        EXPECT_DOUBLE_EQ(walk[i], level);
    }
}

TEST(Generate, Ar1IsStationaryAndValidated) {
    auto spec = make_spec("ar1", 20000, 11);
    spec.params["phi"] = 0.6;
    const auto x = generate(spec);
    double s = 0.0, s2 = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i];
        s2 += x[i] * x[i];
        if (i) cross += x[i] * x[i - 1];
    }
    const double mean = s / static_cast<double>(x.size());
    const double var = s2 / static_cast<double>(x.size()) - mean * mean;
    EXPECT_NEAR(var, 1.0 / (1.0 - 0.36), 0.15);  // sigma^2/(1-phi^2)
    EXPECT_NEAR(cross / s2, 0.6, 0.03);

    spec.params["phi"] = 1.0;
    EXPECT_THROW(generate(spec), std::invalid_argument);
    spec.params.erase("phi");
    EXPECT_THROW(generate(spec), std::invalid_argument);  // phi is required
}

TEST(Generate, Garch11ClustersAndValidates) {
    auto spec = make_spec("garch11", 20000, 13);
    spec.params["omega"] = 0.1;
    spec.params["alpha"] = 0.1;
    spec.params["beta"] = 0.85;
    const auto x = generate(spec);
    double s2 = 0.0, c = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s2 += x[i] * x[i];
        m4 += x[i] * x[i] * x[i] * x[i];
        if (i) c += x[i] * x[i] * x[i - 1] * x[i - 1];
    }
    const double var = s2 / static_cast<double>(x.size());
    EXPECT_NEAR(var, 0.1 / (1.0 - 0.95), 0.4);  // unconditional variance
    EXPECT_GT(m4 / static_cast<double>(x.size()) / (var * var), 3.2);  // fat tails
    EXPECT_GT(c / static_cast<double>(x.size() - 1), var * var);       // vol clustering

    spec.params["beta"] = 0.95;
    EXPECT_THROW(generate(spec), std::invalid_argument);  // alpha + beta >= 1
    spec.params["beta"] = 0.85;
    spec.params["omega"] = 0.0;
    EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(Cascade, MassConservesAndValidates) {
    const auto x = binomial_cascade(10, 0.3);
    ASSERT_EQ(x.size(), 1024u);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), 1.0, 1e-12);
    for (double v : x) EXPECT_GT(v, 0.0);

    const auto flat = binomial_cascade(4, 0.5);
    for (double v : flat) EXPECT_DOUBLE_EQ(v, 1.0 / 16.0);

    EXPECT_THROW(binomial_cascade(0, 0.3), std::invalid_argument);
    EXPECT_THROW(binomial_cascade(31, 0.3), std::invalid_argument);
    EXPECT_THROW(binomial_cascade(8, 0.0), std::invalid_argument);
    EXPECT_THROW(binomial_cascade(8, 0.6), std::invalid_argument);
    EXPECT_THROW(binomial_cascade(8, -0.1), std::invalid_argument);

    auto spec = make_spec("binomial_cascade", 100, 0);  // not a power of two
    spec.params["p"] = 0.3;
    EXPECT_THROW(generate(spec), std::invalid_argument);
    spec.length = 128;
    EXPECT_EQ(generate(spec), binomial_cascade(7, 0.3));
}

TEST(CascadeOracle, FrozenValuesAtP03) {
    const QGrid grid = make_q_grid(-4.0, 8.0, 0.25);
    const SingularitySpectrum s = cascade_oracle(0.3, grid);
    ASSERT_EQ(s.points.size(), grid.qs.size());

    auto h_at = [&](double q) {
        for (const auto& pt : s.points)
            if (std::abs(pt.q - q) < 1e-12) return pt.h;
        ADD_FAILURE() << "q " << q << " missing";
        return 0.0;
    };
    // Independently computed closed-form values.
    EXPECT_NEAR(h_at(-4.0), 1.4989325221411913, 1e-12);
    EXPECT_NEAR(h_at(-2.0), 1.358601169672388, 1e-12);
    EXPECT_NEAR(h_at(0.0), 1.1257693834979823, 1e-12);
    EXPECT_NEAR(h_at(2.0), 0.8929375973235764, 1e-12);
    EXPECT_NEAR(h_at(4.0), 0.7526062448547732, 1e-12);
    EXPECT_NEAR(h_at(8.0), 0.639368045631403, 1e-12);

    for (const auto& pt : s.points) {
        EXPECT_NEAR(pt.tau, pt.q * pt.h - 1.0, 1e-12);
        EXPECT_NEAR(pt.f, pt.q * pt.alpha - pt.tau, 1e-12);
        EXPECT_GE(pt.f, -1e-12);
        EXPECT_LE(pt.f, 1.0 + 1e-12);
    }
    for (std::size_t i = 1; i < s.points.size(); ++i)
        EXPECT_LT(s.points[i].alpha, s.points[i - 1].alpha);  // alpha falls as q grows
    const auto& q0 = s.points[s.q_zero_index()];
    EXPECT_NEAR(q0.f, 1.0, 1e-12);

    EXPECT_THROW(cascade_oracle(0.0, grid), std::invalid_argument);
    EXPECT_THROW(cascade_oracle(0.7, grid), std::invalid_argument);
}

TEST(CascadeOracle, BalancedCascadeIsMonofractal) {
    const QGrid grid = make_q_grid(-4.0, 4.0, 0.5);
    const SingularitySpectrum s = cascade_oracle(0.5, grid);
    for (const auto& pt : s.points) {
        EXPECT_NEAR(pt.h, 1.0, 1e-12);
        EXPECT_NEAR(pt.alpha, 1.0, 1e-12);
    }
}

}  // namespace
