#include <gtest/gtest.h>

#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/schedules.hpp"

using namespace qsd;

TEST(Schedule, PolynomialValues) {
    const auto s = StepSchedule::polynomial(1.0, 0.5);
    EXPECT_DOUBLE_EQ(s.gamma(4), 0.5);
    const auto t = StepSchedule::polynomial(0.1, 0.7);
    EXPECT_NEAR(t.gamma(10), 0.019953, 1e-6);
    EXPECT_DOUBLE_EQ(t.gamma(10), 0.1 * std::pow(10.0, -0.7));
}

TEST(Schedule, ConstantValues) {
    const auto s = StepSchedule::constant(0.01);
    EXPECT_EQ(s.gamma(999), 0.01);
    EXPECT_NEAR(s.big_gamma(100), 1.0, 1e-14);
}

TEST(Schedule, GammaZeroIsDomainError) {
    const auto s = StepSchedule::constant(0.01);
    EXPECT_THROW(s.gamma(0), DomainError);
}

TEST(Schedule, NonPositiveStepIsRejected) {
    const auto s = StepSchedule::custom([](std::uint64_t n) { return n < 3 ? 1.0 : -1.0; });
    EXPECT_NO_THROW(s.gamma(2));
    EXPECT_THROW(s.gamma(3), InvalidScheduleError);
}

TEST(Schedule, BigGammaSums) {
    const auto s = StepSchedule::polynomial(1.0, 0.5);
    EXPECT_EQ(s.big_gamma(0), 0.0);
    EXPECT_NEAR(s.big_gamma(4), 1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5, 1e-14);
    EXPECT_NEAR(s.big_gamma(4), 2.78446, 1e-5);
}

TEST(Schedule, BigGammaBeyondCacheMatchesIncrements) {
    const auto s = StepSchedule::polynomial(0.1, 0.7, 1000);
    for (std::uint64_t n : {0ull, 1ull, 999ull, 1000ull, 1001ull, 5000ull, 123457ull}) {
        const double d = s.big_gamma(n + 1) - s.big_gamma(n);
        EXPECT_NEAR(d, s.gamma(n + 1), 1e-12 * s.big_gamma(n + 1)) << n;
    }
    // cache boundary is invisible
    const auto big = StepSchedule::polynomial(0.1, 0.7, 200000);
    EXPECT_DOUBLE_EQ(s.big_gamma(150000), big.big_gamma(150000));
}

TEST(Schedule, IndexOfTime) {
    const auto c = StepSchedule::constant(0.01);
    EXPECT_EQ(c.index_of_time(0.995), 99u);
    EXPECT_EQ(c.index_of_time(0.0), 0u);
    const auto p = StepSchedule::polynomial(1.0, 0.5);
    EXPECT_EQ(p.index_of_time(2.78446), 4u);
    EXPECT_THROW(c.index_of_time(-1.0), DomainError);
}

TEST(Schedule, IndexOfTimeInvertsBigGamma) {
    for (const auto& s : {StepSchedule::polynomial(0.1, 0.7, 512), StepSchedule::polynomial(1.0, 0.3, 0),
                          StepSchedule::constant(0.003)}) {
        for (std::uint64_t n = 0; n < 3000; n += 7) EXPECT_EQ(s.index_of_time(s.big_gamma(n)), n);
    }
}

TEST(Schedule, StepRatioBound) {
    const double rho = 0.7;
    const auto s = StepSchedule::polynomial(0.1, rho);
    for (std::uint64_t n = 1; n < 100000; n += 13) {
        const double r = s.gamma(n) / s.gamma(n + 1);
        EXPECT_NEAR(r, std::pow(1.0 + 1.0 / static_cast<double>(n), rho), 1e-12);
        EXPECT_LE(r, std::pow(2.0, rho) + 1e-15);
    }
}

TEST(Schedule, CursorMatchesBigGamma) {
    const auto s = StepSchedule::polynomial(0.1, 0.7, 64);
    PartialSumCursor cur(s);
    for (int i = 0; i < 500; ++i) cur.advance();
    EXPECT_EQ(cur.index(), 500u);
    EXPECT_DOUBLE_EQ(cur.time(), s.big_gamma(500));
}

TEST(ScheduleValidation, PolynomialPassesAnalytically) {
    const auto r = validate_h3(StepSchedule::polynomial(1.0, 0.7), 1000);
    EXPECT_TRUE(r.all_hold());
    for (const auto& c : r.clauses) EXPECT_EQ(c.basis, ClauseBasis::Analytic) << c.clause;
}

TEST(ScheduleValidation, ConstantFailsFirstClause) {
    const auto r = validate_h3(StepSchedule::constant(0.01), 1000);
    EXPECT_FALSE(r.all_hold());
    EXPECT_EQ(r.clause("H3.a").verdict, ClauseVerdict::Fails);
    EXPECT_EQ(r.clause("H3.c").verdict, ClauseVerdict::Holds);
}

TEST(ScheduleValidation, GeometricCustomFailsFirstClause) {
    const auto s = StepSchedule::custom([](std::uint64_t n) { return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(n, 1000))); },
                                        "geometric");
    const auto r = validate_h3(s, 200);
    EXPECT_EQ(r.clause("H3.a").verdict, ClauseVerdict::Fails);
    EXPECT_EQ(r.clause("H3.a").basis, ClauseBasis::FiniteHorizon);
    EXPECT_FALSE(r.caveat.empty());
}

TEST(ScheduleValidation, CustomPolynomialLooksFine) {
    const auto s = StepSchedule::custom([](std::uint64_t n) { return 0.5 / std::sqrt(static_cast<double>(n)); });
    const auto r = validate_h3(s, 1 << 16);
    EXPECT_TRUE(r.all_hold());
}

TEST(ScheduleValidation, HorizonTooShort) {
    EXPECT_THROW(validate_h3(StepSchedule::constant(0.1), 1), DomainError);
}
