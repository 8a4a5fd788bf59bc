#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "qsd/errors.hpp"
#include "qsd/estimator.hpp"

using namespace qsd;
using std::numbers::pi;

namespace {
std::shared_ptr<const Domain> unit_interval() { return std::make_shared<const Domain>(Domain::interval(0.0, 1.0)); }

SdeModel forced_exit() {
    const double A[] = {0.0}, S[] = {1e-5};
    return SdeModel::affine(A, Point{100.0}, S);
}
}  // namespace

TEST(SurvivalRate, Ratios) {
    EXPECT_EQ(survival_rate(0, 10.0), 0.0);
    EXPECT_EQ(survival_rate(5, 2.5), 2.0);
    EXPECT_THROW(survival_rate(1, 0.0), DomainError);
}

TEST(RenewalMeasure, Examples) {
    std::vector<Renewal> one{{3, 0.3, Point{0.4}}};
    const auto a = renewal_measure(one);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a.atoms()[0], 0.4);
    std::vector<Renewal> two{{3, 0.3, Point{0.2}}, {5, 0.5, Point{0.6}}};
    const auto b = renewal_measure(two);
    EXPECT_EQ(b.weights(), (std::vector<double>{0.5, 0.5}));
    EXPECT_THROW(renewal_measure({}), DomainError);
}

TEST(Tightness, Examples) {
    const auto d = Domain::interval(0, 1);
    WeightedEmpiricalMeasure a(1), b(1), c(1);
    a.record(Point{0.5}, 1.0);
    b.record(Point{0.05}, 1.0);
    c.record(Point{0.05}, 2.0);
    c.record(Point{0.5}, 2.0);
    EXPECT_EQ(tightness_profile(a, d, {0.1})[0], 0.0);
    EXPECT_EQ(tightness_profile(b, d, {0.1})[0], 1.0);
    EXPECT_EQ(tightness_profile(c, d, {0.1})[0], 0.5);
    const auto p = tightness_profile(c, d, {0.01, 0.1, 0.6});
    EXPECT_LE(p[0], p[1]);
    EXPECT_LE(p[1], p[2]);
}

TEST(Checkpoints, Geometric) {
    const auto cps = geometric_checkpoints(1000, 100, 1.5);
    EXPECT_EQ(cps.front(), 100u);
    EXPECT_EQ(cps.back(), 1000u);
    EXPECT_EQ(cps[1], 150u);
    EXPECT_EQ(cps[2], 225u);
    for (std::size_t i = 1; i < cps.size(); ++i) EXPECT_GT(cps[i], cps[i - 1]);
}

TEST(Run, SingleStepNoKill) {
    const auto m = SdeModel::brownian(1e-9);
    const auto s = StepSchedule::polynomial(0.1, 0.7);
    RunOptions o;
    o.checkpoints = {1};
    const auto r = run(m, unit_interval(), s, RedistributionPolicy::full(), Point{0.5}, 1, o, RngStream(1, 0));
    EXPECT_EQ(r.kills, 0u);
    ASSERT_TRUE(r.occupation.has_value());
    // mu_1 = delta_{x0}; the state after the step is also recorded
    EXPECT_EQ(r.occupation->point(0)[0], 0.5);
    EXPECT_EQ(r.occupation->weight(0), s.gamma(1));
    EXPECT_EQ(r.checkpoints.size(), 1u);
    EXPECT_EQ(r.checkpoints[0].lambda_hat, 0.0);
}

TEST(Run, ForcedExitKillsEveryStep) {
    const auto s = StepSchedule::constant(0.1);
    RunOptions o;
    o.record_trace = true;
    const auto r = run(forced_exit(), unit_interval(), s, RedistributionPolicy::full(), Point{0.9}, 100, o, RngStream(1, 0));
    EXPECT_EQ(r.kills, 100u);
    EXPECT_NEAR(r.lambda_hat, 10.0, 1e-12);
    EXPECT_NEAR(r.lambda_hat * r.final_time, 100.0, 1e-9);
    ASSERT_EQ(r.renewals.size(), 100u);
    for (std::size_t j = 0; j < r.renewals.size(); ++j) {
        EXPECT_EQ(r.renewals[j].step, j + 1);
        EXPECT_DOUBLE_EQ(r.renewals[j].time, s.big_gamma(j + 1));
    }
    // with only x0 recorded before the first kill, the first landing is x0
    EXPECT_EQ(r.renewals[0].landing[0], 0.9);
}

TEST(Run, PolynomialForcedExit) {
    // steps stay above 0.4, so the drift alone carries every proposal out
    const auto s = StepSchedule::polynomial(1.0, 0.1);
    RunOptions o;
    const auto r = run(forced_exit(), unit_interval(), s, RedistributionPolicy::full(), Point{0.9}, 5000, o, RngStream(2, 0));
    EXPECT_EQ(r.kills, 5000u);
    EXPECT_NEAR(r.lambda_hat * s.big_gamma(5000), 5000.0, 1e-8);
}

TEST(Run, StartOutsideIsConfigError) {
    RunOptions o;
    EXPECT_THROW(run(SdeModel::brownian(1.0), unit_interval(), StepSchedule::constant(0.1), RedistributionPolicy::full(),
                     Point{1.0}, 10, o, RngStream(1, 0)),
                 ConfigError);
    EXPECT_THROW(run(SdeModel::brownian(1.0), unit_interval(), StepSchedule::constant(0.1), RedistributionPolicy::full(),
                     Point{0.5}, 0, o, RngStream(1, 0)),
                 ConfigError);
}

TEST(Run, NonFiniteStateAborts) {
    const auto m = SdeModel::callback(
        1, [](const Point& x) { return Point{x[0] > 0.6 ? std::numeric_limits<double>::infinity() : 0.0}; },
        [](const Point&, const Point& n) { return n; });
    RunOptions o;
    try {
        run(m, unit_interval(), StepSchedule::constant(0.01), RedistributionPolicy::full(), Point{0.7}, 10, o, RngStream(1, 4));
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.step(), 1u);
        EXPECT_EQ(e.chain(), 4u);
    }
}

class ChainInvariants : public ::testing::TestWithParam<int> {};

TEST_P(ChainInvariants, Bookkeeping) {
    const int which = GetParam();
    const auto policy = which == 0   ? RedistributionPolicy::full()
                        : which == 1 ? RedistributionPolicy::quantized(0.05)
                        : which == 2 ? RedistributionPolicy::sliding_window(WindowRule::sqrt())
                                     : RedistributionPolicy::fixed_law(FixedLaw::uniform_box(Point{0.0}, Point{1.0}));
    const auto s = StepSchedule::polynomial(0.1, 0.5);
    const auto m = SdeModel::brownian(1.0);
    auto d = unit_interval();
    QsdChain chain(m, d, s, policy, Point{0.5}, RngStream(99, 0), true, true);
    chain.advance(20000);
    EXPECT_EQ(chain.kills(), chain.renewals().size());
    EXPECT_GT(chain.kills(), 10u);
    EXPECT_TRUE(d->contains(chain.state()));
    for (const auto& r : chain.renewals()) EXPECT_EQ(r.time, s.big_gamma(r.step));
    const auto* occ = chain.occupation();
    ASSERT_NE(occ, nullptr);
    EXPECT_EQ(occ->size(), 20001u);
    EXPECT_NEAR(occ->total_weight(), s.big_gamma(20001), 1e-10 * s.big_gamma(20001));
    const double mean = occ->integrate([](const Point& x) { return x[0]; });
    EXPECT_GT(mean, 0.0);
    EXPECT_LT(mean, 1.0);
    for (std::size_t k = 0; k < occ->size(); ++k) ASSERT_TRUE(d->contains(occ->point(k)));

    const auto rep = replay_trace(m, d, s, policy, Point{0.5}, RngStream(99, 0), chain.trace());
    EXPECT_EQ(rep.steps_checked, 20000u);
    EXPECT_EQ(rep.mismatches, 0u);
    // every non-kill landing equals its proposal
    for (const auto& e : chain.trace())
        if (!e.killed) EXPECT_EQ(e.landing, e.proposal);
}

INSTANTIATE_TEST_SUITE_P(Policies, ChainInvariants, ::testing::Values(0, 1, 2, 3));

TEST(Replay, DetectsTampering) {
    const auto s = StepSchedule::polynomial(0.1, 0.5);
    const auto m = SdeModel::brownian(1.0);
    QsdChain chain(m, unit_interval(), s, RedistributionPolicy::full(), Point{0.5}, RngStream(5, 0), false, true);
    chain.advance(5000);
    auto trace = chain.trace();
    std::size_t k = 0;
    while (!trace[k].killed) ++k;
    trace[k].landing = Point{0.123};
    const auto rep = replay_trace(m, unit_interval(), s, RedistributionPolicy::full(), Point{0.5}, RngStream(5, 0), trace);
    EXPECT_GE(rep.mismatches, 1u);
    ASSERT_TRUE(rep.first_mismatch.has_value());
    EXPECT_EQ(*rep.first_mismatch, k + 1);
}

TEST(Run, Deterministic) {
    const auto s = StepSchedule::polynomial(0.1, 0.7);
    RunOptions o;
    o.reference = ReferenceQsd::bm_interval(0, 1, 1);
    const auto a = run(SdeModel::brownian(1.0), unit_interval(), s, RedistributionPolicy::quantized(0.01), Point{0.5}, 50000, o, RngStream(7, 0));
    const auto b = run(SdeModel::brownian(1.0), unit_interval(), s, RedistributionPolicy::quantized(0.01), Point{0.5}, 50000, o, RngStream(7, 0));
    EXPECT_EQ(a.kills, b.kills);
    EXPECT_EQ(a.end_state, b.end_state);
    EXPECT_EQ(a.cell_weights, b.cell_weights);
    EXPECT_EQ(*a.w1_final, *b.w1_final);
    const auto c = run(SdeModel::brownian(1.0), unit_interval(), s, RedistributionPolicy::quantized(0.01), Point{0.5}, 50000, o, RngStream(8, 0));
    EXPECT_NE(a.end_state, c.end_state);
}

TEST(Run, CheckpointLambdaIsExactRatio) {
    const auto s = StepSchedule::polynomial(0.1, 0.7);
    RunOptions o;
    o.checkpoints = geometric_checkpoints(100000);
    const auto r = run(SdeModel::brownian(1.0), unit_interval(), s, RedistributionPolicy::full(), Point{0.5}, 100000, o, RngStream(3, 0));
    for (const auto& c : r.checkpoints) {
        EXPECT_EQ(c.lambda_hat, static_cast<double>(c.kills) / c.time);
        EXPECT_NEAR(c.time, s.big_gamma(c.step), 1e-12 * c.time);
    }
}

TEST(Run, RenewalMeasureTracksOccupation) {
    // shorter than the acceptance run; loose bound
    const auto s = StepSchedule::polynomial(0.1, 0.7);
    RunOptions o;
    o.reference = ReferenceQsd::bm_interval(0, 1, 1);
    const auto r = run(SdeModel::brownian(1.0), unit_interval(), s, RedistributionPolicy::full(), Point{0.5}, 2000000, o, RngStream(11, 0));
    const auto occ = EmpiricalLaw::from_measure(*r.occupation);
    EXPECT_LE(wasserstein1_1d(renewal_measure(r.renewals), occ), 0.05);
    EXPECT_GT(r.lambda_hat, 0.5 * pi * pi / 2.0);
    EXPECT_LT(r.lambda_hat, 1.5 * pi * pi / 2.0);
}
