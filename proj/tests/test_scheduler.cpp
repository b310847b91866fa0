#include "pnash/scheduler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace pnash;

TEST(ActivationDist, RejectsInvalidProbabilities) {
    EXPECT_THROW(ActivationDist({}), std::invalid_argument);
    EXPECT_THROW(ActivationDist({0.5, 0.4}), std::invalid_argument);
    EXPECT_THROW(ActivationDist({1.0, 0.0}), std::invalid_argument);
    EXPECT_NO_THROW(ActivationDist({0.25, 0.75}));
}

TEST(ActivationDist, SinglePlayerAlwaysDrawn) {
    const auto d = ActivationDist::uniform(1);
    Stream s(1);
    for (int t = 0; t < 100; ++t) EXPECT_EQ(draw_player(d, s).index, 0);
}

TEST(ActivationDist, UniformFrequenciesWithinThreeSigma) {
    const auto d = ActivationDist::uniform(8);
    Stream s(2);
    const int n = 100000;
    std::vector<int> hits(8, 0);
    for (int t = 0; t < n; ++t) ++hits[static_cast<std::size_t>(draw_player(d, s).index)];
    const double p = 1.0 / 8.0, sd = std::sqrt(n * p * (1 - p));
    for (int h : hits) EXPECT_NEAR(h, n * p, 3.0 * sd);
}

TEST(ActivationDist, NonuniformFrequencies) {
    const ActivationDist d({0.1, 0.6, 0.3});
    Stream s(3);
    const int n = 100000;
    std::vector<int> hits(3, 0);
    for (int t = 0; t < n; ++t) ++hits[static_cast<std::size_t>(draw_player(d, s).index)];
    for (int i = 0; i < 3; ++i) {
        const double p = d.prob(i);
        EXPECT_NEAR(hits[static_cast<std::size_t>(i)], n * p, 3.0 * std::sqrt(n * p * (1 - p)));
    }
}

TEST(ActivationDist, SameStreamSameSequence) {
    const auto d = ActivationDist::uniform(5);
    Stream a(9), b(9);
    for (int t = 0; t < 1000; ++t) EXPECT_EQ(draw_player(d, a).index, draw_player(d, b).index);
}

TEST(DelayModel, SamplesStayInRange) {
    EXPECT_THROW(DelayModel(-1), std::invalid_argument);
    const DelayModel m(4);
    Stream s(4);
    std::vector<int> hits(5, 0);
    for (int t = 0; t < 50000; ++t) {
        const int d = m.sample(s);
        ASSERT_GE(d, 0);
        ASSERT_LE(d, 4);
        ++hits[static_cast<std::size_t>(d)];
    }
    for (int h : hits) EXPECT_NEAR(h, 10000, 3.0 * std::sqrt(50000 * 0.2 * 0.8));
}

TEST(HistoryBuffer, RetainsLastTauPlusOne) {
    StrategyProfile x({1});
    HistoryBuffer buf(x, 2);
    for (int k = 1; k <= 5; ++k) {
        x.flat()[0] = k;
        buf.push(x);
    }
    EXPECT_EQ(buf.latest(), 5);
    EXPECT_DOUBLE_EQ(buf.at(5).flat()[0], 5.0);
    EXPECT_DOUBLE_EQ(buf.at(3).flat()[0], 3.0);
    EXPECT_DOUBLE_EQ(buf.at(-2).flat()[0], 0.0);
    EXPECT_THROW(buf.at(2), std::out_of_range);
    EXPECT_THROW(buf.at(6), std::out_of_range);
}

namespace {

// History x(t) = t in every block for t = 0..k.
HistoryBuffer linear_history(int players, int tau, int k) {
    StrategyProfile x(std::vector<int>(static_cast<std::size_t>(players), 1));
    HistoryBuffer buf(x, tau);
    for (int t = 1; t <= k; ++t) {
        x.flat().setConstant(t);
        buf.push(x);
    }
    return buf;
}

}  // namespace

TEST(DelayedView, ZeroTauIsCurrentProfile) {
    const auto buf = linear_history(4, 0, 7);
    Stream s(5);
    const auto v = assemble_view(buf, DelayModel(0), PlayerId(2), 7, s);
    EXPECT_TRUE(v.profile.flat().isApprox(Vector::Constant(4, 7.0)));
    for (int d : v.delays) EXPECT_EQ(d, 0);
}

TEST(DelayedView, RivalBlocksMatchSampledDelays) {
    const auto buf = linear_history(6, 4, 20);
    Stream s(6);
    for (int trial = 0; trial < 200; ++trial) {
        const PlayerId i(trial % 6);
        const auto v = assemble_view(buf, DelayModel(4), i, 20, s);
        EXPECT_EQ(v.delays[static_cast<std::size_t>(i.index)], 0);
        for (int j = 0; j < 6; ++j) {
            const int d = v.delays[static_cast<std::size_t>(j)];
            ASSERT_GE(d, 0);
            ASSERT_LE(d, 4);
            ASSERT_DOUBLE_EQ(v.profile.block(j)[0], 20.0 - d);
        }
    }
}

TEST(DelayedView, EarlyIterationsFallBackToInitialProfile) {
    const auto buf = linear_history(3, 4, 0);
    Stream s(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = assemble_view(buf, DelayModel(4), PlayerId(0), 0, s);
        EXPECT_TRUE(v.profile.flat().isZero());
    }
    const auto buf2 = linear_history(3, 4, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = assemble_view(buf2, DelayModel(4), PlayerId(1), 2, s);
        for (int j = 0; j < 3; ++j)
            EXPECT_DOUBLE_EQ(v.profile.block(j)[0], std::max(0, 2 - v.delays[static_cast<std::size_t>(j)]));
    }
}

TEST(InnerSchedule, CubicGrowthAtHalfDelta) {
    LocalCounters c(2, 0.5);
    EXPECT_EQ(inner_step_schedule(c, PlayerId(0)).steps, 1);
    c.gamma[0] = 3;
    EXPECT_EQ(inner_step_schedule(c, PlayerId(0)).steps, 27);
    c.gamma[0] = 10;
    EXPECT_EQ(inner_step_schedule(c, PlayerId(0)).steps, 1000);
    EXPECT_FALSE(inner_step_schedule(c, PlayerId(0)).capped);
}

TEST(InnerSchedule, CapIsReported) {
    LocalCounters c(1, 0.5);
    c.gamma[0] = 200;
    const auto s = inner_step_schedule(c, PlayerId(0), 1'000'000);
    EXPECT_EQ(s.steps, 1'000'000);
    EXPECT_TRUE(s.capped);
    EXPECT_THROW(LocalCounters(1, 0.0), std::invalid_argument);
}

TEST(LocalCounters, ActivationsSumToIteration) {
    const auto d = ActivationDist::uniform(8);
    LocalCounters c(8, 0.5);
    Stream s(8);
    for (std::int64_t k = 1; k <= 5000; ++k) {
        c.record_activation(draw_player(d, s));
        const auto sum = std::accumulate(c.gamma.begin(), c.gamma.end(), std::int64_t{0});
        ASSERT_EQ(sum - 8, k);
    }
}

// Gamma_i(k) - 1 ~ Binomial(k, p_i): at k = 1e4 it clears k p_i / 2 + 1 on every seed.
TEST(LocalCounters, GrowLinearlyInIterations) {
    const auto d = ActivationDist::uniform(8);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        LocalCounters c(8, 0.5);
        Stream s(seed);
        for (int k = 0; k < 10000; ++k) c.record_activation(draw_player(d, s));
        for (auto g : c.gamma) ASSERT_GE(static_cast<double>(g), 10000.0 / 8.0 / 2.0 + 1.0) << "seed " << seed;
    }
}
