#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "qsd/dynamics.hpp"
#include "qsd/errors.hpp"

using namespace qsd;

TEST(EulerStep, Examples) {
    EXPECT_EQ(euler_step(SdeModel::brownian(1.0), Point{0.5}, 0.01, Point{0.0})[0], 0.5);
    EXPECT_DOUBLE_EQ(euler_step(SdeModel::ornstein_uhlenbeck(1.0, Point{0.0}, 1.0), Point{1.0}, 0.1, Point{0.0})[0], 0.9);
    EXPECT_DOUBLE_EQ(euler_step(SdeModel::brownian(2.0), Point{0.0}, 1.0, Point{0.3})[0], 0.6);
}

TEST(EulerStep, NonFiniteInput) {
    const auto m = SdeModel::brownian(1.0);
    EXPECT_THROW(euler_step(m, Point{std::numeric_limits<double>::quiet_NaN()}, 0.1, Point{0.0}), NumericError);
    EXPECT_THROW(euler_step(m, Point{0.0}, 0.1, Point{std::numeric_limits<double>::infinity()}), NumericError);
}

TEST(EulerStep, AffineInNoiseForConstantSigma) {
    const double A[] = {-1.0, 0.5, 0.0, -2.0};
    const double S[] = {1.0, 0.0, 0.3, 0.7};
    const auto m = SdeModel::affine(A, Point{0.1, -0.2}, S);
    const Point x{0.3, 0.4}, u{0.25, -0.5}, v{0.125, 0.75};
    const double a = 2.0, dt = 0.01;
    Point au_v(2);
    for (std::size_t i = 0; i < 2; ++i) au_v[i] = a * u[i] + v[i];
    Point au(2);
    for (std::size_t i = 0; i < 2; ++i) au[i] = a * u[i];
    const Point lhs = euler_step(m, x, dt, au_v);
    const Point base = euler_step(m, x, dt, v);
    const Point sig = m.diffuse(x, au);
    // dyadic inputs keep every product exact
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(lhs[i], base[i] + sig[i], 1e-15);
    const auto bm = SdeModel::brownian(0.5, 2);
    const Point l2 = euler_step(bm, x, dt, au_v), b2 = euler_step(bm, x, dt, v), s2 = bm.diffuse(x, au);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(l2[i], b2[i] + s2[i]);
}

TEST(SdeModel, EllipticityChecked) {
    const double A[] = {0.0};
    const double degenerate[] = {0.0, 0.0, 0.0, 1.0};
    const double A2[] = {0.0, 0.0, 0.0, 0.0};
    EXPECT_THROW(SdeModel::affine(A2, Point{0.0, 0.0}, degenerate), DomainError);
    const double s1[] = {2.0};
    EXPECT_NEAR(SdeModel::affine(A, Point{0.0}, s1).ellipticity(), 4.0, 1e-12);
    EXPECT_THROW(SdeModel::brownian(0.0), DomainError);
}

TEST(ReferencePath, GridCount) {
    RngStream rng(1, 0);
    const auto p = reference_path(SdeModel::brownian(1.0), Point{0.0}, 1.0, 0.5, rng);
    ASSERT_EQ(p.times.size(), 3u);
    EXPECT_EQ(p.times[0], 0.0);
    EXPECT_EQ(p.times[1], 0.5);
    EXPECT_EQ(p.times[2], 1.0);
    EXPECT_EQ(p.increments.size(), 2u);
}

TEST(ReferencePath, PairAggregationGivesCoarseNoise) {
    RngStream rng(2, 0);
    const auto m = SdeModel::brownian(1.0);
    const auto p = reference_path(m, Point{0.0}, 1.0, 0.5, rng);
    const auto coarse = aggregate_increments(p.increments, 2);
    ASSERT_EQ(coarse.size(), 1u);
    EXPECT_EQ(coarse[0][0], p.increments[0][0] + p.increments[1][0]);
    const auto cp = euler_path_from_increments(m, Point{0.0}, 1.0, coarse);
    EXPECT_EQ(cp.values.back()[0], p.values.back()[0]);
}

TEST(ReferencePath, IncrementVariance) {
    RngStream rng(3, 0);
    const double dt = 1e-3;
    const auto p = reference_path(SdeModel::brownian(1.0), Point{0.0}, 100.0, dt, rng);
    ASSERT_EQ(p.increments.size(), 100000u);
    double s = 0, s2 = 0;
    for (const auto& inc : p.increments) {
        s += inc[0];
        s2 += inc[0] * inc[0];
    }
    const double n = static_cast<double>(p.increments.size());
    const double var = (s2 - s * s / n) / (n - 1.0);
    EXPECT_NEAR(var / dt, 1.0, 0.05);
}

TEST(ReferencePath, NonMultipleHorizonRejected) {
    RngStream rng(1, 0);
    EXPECT_THROW(reference_path(SdeModel::brownian(1.0), Point{0.0}, 1.0, 0.3, rng), DomainError);
}

TEST(ReferencePath, SameSeedSamePath) {
    RngStream a(77, 5), b(77, 5);
    const auto m = SdeModel::ornstein_uhlenbeck(1.5, Point{0.2}, 0.8);
    const auto p = reference_path(m, Point{0.1}, 1.0, 1e-3, a);
    const auto q = reference_path(m, Point{0.1}, 1.0, 1e-3, b);
    EXPECT_EQ(p.values.back()[0], q.values.back()[0]);
}

namespace {
double strong_error(const SdeModel& m, std::size_t factor, double fine_dt, int n_paths) {
    double acc = 0.0;
    for (int r = 0; r < n_paths; ++r) {
        RngStream rng(2024, static_cast<std::uint64_t>(r));
        const auto fine = reference_path(m, Point{0.3}, 1.0, fine_dt, rng);
        const auto inc = aggregate_increments(fine.increments, factor);
        const auto coarse = euler_path_from_increments(m, Point{0.3}, fine_dt * static_cast<double>(factor), inc);
        acc += std::abs(fine.values.back()[0] - coarse.values.back()[0]);
    }
    return acc / n_paths;
}
}  // namespace

TEST(StrongError, BrownianEulerIsExactOnCoarseGrid) {
    EXPECT_LE(strong_error(SdeModel::brownian(1.0), 100, 1e-4, 20), 1e-12);
}

TEST(StrongError, OrnsteinUhlenbeckRate) {
    const auto m = SdeModel::ornstein_uhlenbeck(2.0, Point{0.0}, 1.0);
    const double fine = 1e-5;
    const std::vector<double> dts{1e-2, 1e-3, 1e-4};
    std::vector<double> err;
    for (double dt : dts) err.push_back(strong_error(m, static_cast<std::size_t>(std::lround(dt / fine)), fine, 100));
    for (std::size_t i = 0; i < dts.size(); ++i) EXPECT_LE(err[i], 2.0 * std::sqrt(dts[i])) << dts[i];
    // least-squares slope of log err vs log dt
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double x = std::log(dts[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(dts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_GE(slope, 0.45);
}
