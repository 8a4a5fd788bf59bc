#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>

#include "qsd/errors.hpp"
#include "qsd/measures.hpp"
#include "qsd/redistribution.hpp"

using namespace qsd;
using std::numbers::pi;

namespace {
std::shared_ptr<const Domain> unit_interval() { return std::make_shared<const Domain>(Domain::interval(0.0, 1.0)); }
}  // namespace

TEST(Redistribution, FullSingleAtom) {
    RedistributionState s(RedistributionPolicy::full(), unit_interval(), Point{0.9});
    s.record_visit(Point{0.5}, 1.0);
    RngStream rng(1, 0);
    for (std::uint64_t k = 0; k < 100; ++k) EXPECT_EQ(s.sample_restart(rng, k)[0], 0.5);
    EXPECT_DOUBLE_EQ(s.integrate([](const Point& x) { return x[0]; }), 0.5);
}

TEST(Redistribution, EmptyFallsBackToStart) {
    RedistributionState s(RedistributionPolicy::full(), unit_interval(), Point{0.9});
    RngStream rng(1, 0);
    EXPECT_EQ(s.sample_restart(rng, 0)[0], 0.9);
    RedistributionState q(RedistributionPolicy::quantized(0.25), unit_interval(), Point{0.7});
    EXPECT_EQ(q.sample_restart(rng, 0)[0], 0.7);
}

TEST(Redistribution, OutsidePointIsContractViolation) {
    RedistributionState s(RedistributionPolicy::full(), unit_interval(), Point{0.5});
    EXPECT_THROW(s.record_visit(Point{1.0}, 1.0), ContractViolation);
    EXPECT_THROW(s.record_visit(Point{0.5}, 0.0), DomainError);
}

TEST(Redistribution, QuantizedBinning) {
    RedistributionState s(RedistributionPolicy::quantized(0.25), unit_interval(), Point{0.5});
    s.record_visit(Point{0.1}, 2.0);
    s.record_visit(Point{0.6}, 1.0);
    EXPECT_EQ(s.raw_cell_weights(), (std::vector<double>{2.0, 0.0, 1.0, 0.0}));
    const auto w = s.normalized_cell_weights();
    EXPECT_DOUBLE_EQ(w[0], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(w[2], 1.0 / 3.0);
    EXPECT_EQ(w[1], 0.0);
}

TEST(Redistribution, QuantizedDiracDrawsChiSquared) {
    RedistributionState s(RedistributionPolicy::quantized(0.25), unit_interval(), Point{0.5});
    s.record_visit(Point{0.1}, 2.0);
    s.record_visit(Point{0.6}, 1.0);
    RngStream rng(12, 0);
    double c0 = 0, c2 = 0;
    for (std::uint64_t k = 0; k < 100000; ++k) {
        const double u = s.sample_restart(rng, k)[0];
        if (u == 0.125) ++c0;
        else if (u == 0.625) ++c2;
        else FAIL() << "draw off the representatives: " << u;
    }
    const double counts[] = {c0, c2}, probs[] = {2.0 / 3.0, 1.0 / 3.0};
    EXPECT_GT(chi_squared_test(counts, probs).p_value, 0.01);
}

TEST(Redistribution, FixedUniformPassesKs) {
    RedistributionState s(RedistributionPolicy::fixed_law(FixedLaw::uniform_box(Point{0.0}, Point{1.0})),
                          unit_interval(), Point{0.5});
    RngStream rng(13, 0);
    std::vector<double> xs;
    for (std::uint64_t k = 0; k < 100000; ++k) {
        const double u = s.sample_restart(rng, k)[0];
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        xs.push_back(u);
    }
    EXPECT_GT(kolmogorov_smirnov_test(xs, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 0.01);
}

TEST(Redistribution, WindowOfWidthOneIsLastPoint) {
    auto rule = WindowRule::from([](std::uint64_t n) { return n - 1; });
    RedistributionState s(RedistributionPolicy::sliding_window(rule), unit_interval(), Point{0.5});
    s.record_visit(Point{0.2}, 1.0);
    s.record_visit(Point{0.4}, 1.0);
    s.record_visit(Point{0.7}, 1.0);
    RngStream rng(3, 0);
    for (std::uint64_t k = 0; k < 50; ++k) EXPECT_EQ(s.sample_restart(rng, k)[0], 0.7);
    EXPECT_DOUBLE_EQ(s.integrate([](const Point& x) { return x[0]; }), 0.7);
}

TEST(Redistribution, WindowLawMatchesFormula) {
    // t(n) = floor(sqrt n): law over records [t(n), n)
    RedistributionState s(RedistributionPolicy::sliding_window(WindowRule::sqrt()), unit_interval(), Point{0.5});
    std::vector<double> xs, ws;
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 5000; ++i) {
        xs.push_back(u(g));
        ws.push_back(0.1 * std::pow(i + 1.0, -0.7));
        s.record_visit(Point{xs.back()}, ws.back());
    }
    const std::size_t t = static_cast<std::size_t>(std::floor(std::sqrt(5000.0)));
    double num = 0, den = 0;
    for (std::size_t k = t; k < xs.size(); ++k) {
        num += ws[k] * xs[k];
        den += ws[k];
    }
    EXPECT_NEAR(s.integrate([](const Point& x) { return x[0]; }), num / den, 1e-12);
    const auto [b, e] = s.window_range();
    EXPECT_EQ(b, t);
    EXPECT_EQ(e, 5000u);
    const std::set<double> allowed(xs.begin() + static_cast<std::ptrdiff_t>(t), xs.end());
    RngStream rng(5, 0);
    for (std::uint64_t k = 0; k < 2000; ++k) EXPECT_TRUE(allowed.count(s.sample_restart(rng, k)[0]));
}

TEST(Redistribution, WindowRuleStartIsClamped) {
    EXPECT_EQ(WindowRule::sqrt().start(1), 0u);
    EXPECT_EQ(WindowRule::sqrt().start(100), 10u);
    EXPECT_EQ(WindowRule::fraction(0.5).start(11), 5u);
    EXPECT_EQ(WindowRule::from([](std::uint64_t n) { return n + 5; }).start(10), 9u);
    for (std::uint64_t n = 1; n < 10000; ++n) EXPECT_LE(WindowRule::sqrt().start(n), WindowRule::sqrt().start(n + 1));
}

TEST(Redistribution, FullOccupationDrawsOnlyRecordedPoints) {
    RedistributionState s(RedistributionPolicy::full(), unit_interval(), Point{0.5});
    std::set<double> rec;
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 300; ++i) {
        const double x = u(g);
        rec.insert(x);
        s.record_visit(Point{x}, 0.5 + u(g));
    }
    RngStream rng(6, 0);
    for (std::uint64_t k = 0; k < 3000; ++k) EXPECT_TRUE(rec.count(s.sample_restart(rng, k)[0]));
}

TEST(H4, ExamplesAndTrivialCases) {
    WeightedEmpiricalMeasure mu(1);
    mu.record(Point{0.1}, 1.0);
    RedistributionState q(RedistributionPolicy::quantized(0.25), unit_interval(), Point{0.5});
    q.record_visit(Point{0.1}, 1.0);
    const std::vector<TestFunction> id{[](const Point& x) { return x[0]; }};
    EXPECT_NEAR(std::abs(q.h4_discrepancy(mu, id)[0]), 0.025, 1e-15);

    RedistributionState f(RedistributionPolicy::full(), unit_interval(), Point{0.5});
    RedistributionState w(RedistributionPolicy::sliding_window(WindowRule::from([](std::uint64_t) { return 0; })),
                          unit_interval(), Point{0.5});
    WeightedEmpiricalMeasure m(1);
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 500; ++i) {
        const Point x{u(g)};
        const double wt = u(g);
        m.record(x, wt);
        f.record_visit(x, wt);
        w.record_visit(x, wt);
    }
    const std::vector<TestFunction> fns{[](const Point& x) { return x[0]; },
                                        [](const Point& x) { return std::sin(pi * x[0]); }};
    for (double d : f.h4_discrepancy(m, fns)) EXPECT_EQ(d, 0.0);
    for (double d : w.h4_discrepancy(m, fns)) EXPECT_EQ(d, 0.0);
}

TEST(H4Property, QuantizedLipschitzBound) {
    struct Lip {
        TestFunction f;
        double lip;
    };
    const std::vector<Lip> fns{{[](const Point& x) { return x[0]; }, 1.0},
                               {[](const Point& x) { return std::sin(pi * x[0]); }, pi},
                               {[](const Point& x) { return std::abs(x[0] - 0.3); }, 1.0}};
    std::vector<TestFunction> only;
    for (const auto& l : fns) only.push_back(l.f);
    std::mt19937_64 g(2718);
    std::size_t violations = 0;
    for (int h = 0; h < 100; ++h) {
        const double eps = std::vector<double>{0.01, 0.05, 0.1, 0.25, 0.3}[h % 5];
        const CellLaw law = h % 2 ? CellLaw::Dirac : CellLaw::Uniform;
        RedistributionState q(RedistributionPolicy::quantized(eps, law), unit_interval(), Point{0.5});
        WeightedEmpiricalMeasure m(1);
        std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9), w(1e-3, 1.0);
        const int n = 1 + static_cast<int>(g() % 2000);
        const double centre = u(g), spread = 0.02 + 0.5 * u(g);
        for (int i = 0; i < n; ++i) {
            double x = centre + spread * (u(g) - 0.5);
            x = std::clamp(x, 1e-9, 1.0 - 1e-9);
            const double wt = w(g);
            m.record(Point{x}, wt);
            q.record_visit(Point{x}, wt);
        }
        const auto d = q.h4_discrepancy(m, only);
        for (std::size_t j = 0; j < fns.size(); ++j)
            if (std::abs(d[j]) > fns[j].lip * eps + 1e-12) ++violations;
    }
    EXPECT_EQ(violations, 0u);
}

TEST(WindowCondition, PrefixRatioTrend) {
    const auto s = StepSchedule::polynomial(0.1, 0.7);
    std::vector<double> sq, half;
    for (std::uint64_t n : {1000ull, 10000ull, 100000ull, 1000000ull}) {
        sq.push_back(window_prefix_ratio(s, WindowRule::sqrt(), n));
        half.push_back(window_prefix_ratio(s, WindowRule::fraction(0.5), n));
    }
    for (std::size_t i = 1; i < sq.size(); ++i) EXPECT_LT(sq[i], sq[i - 1]);
    // the half-window ratio settles instead of vanishing
    EXPECT_LT(std::abs(half[3] - half[2]), std::abs(half[1] - half[0]));
    EXPECT_GT(half.back(), 0.5);
}

TEST(FixedLaw, MixtureDistance) {
    const auto base = FixedLaw::dirac(Point{0.5});
    const auto mix = FixedLaw::mixture(base, Point{0.0}, Point{1.0}, 0.2);
    EXPECT_NEAR(mix.wasserstein1_to_uniform(0.0, 1.0), 0.8 * base.wasserstein1_to_uniform(0.0, 1.0), 1e-14);
    EXPECT_NEAR(base.wasserstein1_to_uniform(0.0, 1.0), 0.25, 1e-15);
    EXPECT_NEAR(mix.integrate([](const Point& x) { return x[0]; }), 0.5, 1e-14);
}

TEST(FixedLaw, ReferenceSamplesInside) {
    const auto law = FixedLaw::reference(ReferenceQsd::bm_interval(0.0, 1.0, 1.0));
    RngStream rng(2, 0);
    std::vector<double> xs;
    for (std::uint64_t k = 0; k < 20000; ++k) {
        const double x = law.sample(rng, k)[0];
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
        xs.push_back(x);
    }
    const auto ref = ReferenceQsd::bm_interval(0.0, 1.0, 1.0);
    EXPECT_GT(kolmogorov_smirnov_test(xs, [&](double x) { return ref.cdf(x); }).p_value, 0.01);
}

TEST(Redistribution, UniformCellsOnBallRejected) {
    auto ball = std::make_shared<const Domain>(Domain::ball(Point{0.0, 0.0}, 1.0));
    EXPECT_THROW(RedistributionState(RedistributionPolicy::quantized(0.2, CellLaw::Uniform), ball, Point{0.0, 0.0}),
                 ConfigError);
}

TEST(Redistribution, BallQuantizedRepresentativesInDomain) {
    auto ball = std::make_shared<const Domain>(Domain::ball(Point{0.0, 0.0}, 1.0));
    RedistributionState q(RedistributionPolicy::quantized(0.3), ball, Point{0.0, 0.0});
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const Point x{u(g), u(g)};
        if (ball->contains(x)) q.record_visit(x, 1.0);
    }
    for (std::size_t c = 0; c < q.partition()->size(); ++c) {
        const auto rep = q.representative(c);
        if (q.raw_cell_weights()[c] > 0.0) {
            ASSERT_TRUE(rep.has_value());
            EXPECT_TRUE(ball->contains(*rep));
            EXPECT_EQ(q.partition()->cell_of(*rep), c);
        }
    }
}
