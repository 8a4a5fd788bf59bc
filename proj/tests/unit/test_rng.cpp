#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qsd/rng.hpp"

using namespace qsd;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(ones, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, PureFunctionOfIndices) {
    RngStream a(42, 3), b(42, 3);
    std::vector<double> fwd, rev;
    for (std::uint64_t k = 0; k < 100; ++k) fwd.push_back(a.gaussian(k, 0));
    for (std::uint64_t k = 100; k-- > 0;) rev.push_back(b.gaussian(k, 0));
    for (std::size_t k = 0; k < 100; ++k) EXPECT_EQ(fwd[k], rev[99 - k]);
    EXPECT_EQ(a.uniform(7, 3), b.uniform(7, 3));
}

TEST(RngStream, ChainsAndLanesDiffer) {
    RngStream a(42, 0), b(42, 1), c(43, 0);
    EXPECT_NE(a.gaussian(0, 0), b.gaussian(0, 0));
    EXPECT_NE(a.gaussian(0, 0), c.gaussian(0, 0));
    EXPECT_NE(a.uniform(5, 0, Lane::Restart), a.uniform(5, 0, Lane::Auxiliary));
    EXPECT_NE(a.uniform(5, 0), a.uniform(5, 1));
}

TEST(RngStream, UnitConversionsStayInRange) {
    EXPECT_EQ(RngStream::to_unit(0), 0.0);
    EXPECT_LT(RngStream::to_unit(~0ull), 1.0);
    EXPECT_GT(RngStream::to_open_unit(0), 0.0);
    EXPECT_LT(RngStream::to_open_unit(~0ull), 1.0);
}

TEST(RngStream, GaussianMoments) {
    RngStream r(1, 0);
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int k = 0; k < n; ++k) {
        for (std::uint32_t c = 0; c < 2; ++c) {
            const double g = r.gaussian(static_cast<std::uint64_t>(k), c);
            s += g;
            s2 += g * g;
            s4 += g * g * g * g;
        }
    }
    const double m = 2.0 * n;
    EXPECT_NEAR(s / m, 0.0, 0.01);
    EXPECT_NEAR(s2 / m, 1.0, 0.01);
    EXPECT_NEAR(s4 / m, 3.0, 0.05);
}

TEST(RngStream, UniformMean) {
    RngStream r(9, 2);
    double s = 0;
    for (std::uint64_t k = 0; k < 100000; ++k) s += r.uniform(k, 0);
    EXPECT_NEAR(s / 100000, 0.5, 0.005);
}

TEST(SequentialRng, Reproducible) {
    SequentialRng a(5, 1), b(5, 1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        seen.insert(x);
    }
    EXPECT_EQ(seen.size(), 1000u);
}
