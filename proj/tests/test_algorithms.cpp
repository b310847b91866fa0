#include "pnash/algorithms.hpp"
#include "pnash/games/congestion.hpp"
#include "pnash/games/cournot.hpp"
#include "pnash/games/toy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace pnash;
using namespace pnash::games;

namespace {

const Vector kToyNe = Vector::Constant(2, 1.0 / 3.0);

RunConfig toy_config(Algorithm a, double mu, std::int64_t K) {
    RunConfig c;
    c.algorithm = a;
    c.mu = {mu};
    c.horizon = K;
    c.max_inner_steps = 10000;
    return c;
}

CournotInstance quiet_single_firm() {
    CournotInstance inst;
    inst.network.markets = 1;
    inst.network.firm_markets = {{0}};
    inst.cost = {Vector::Constant(1, 2.0)};
    inst.capacity = {Vector::Constant(1, 8.0)};
    inst.a_true = Vector::Constant(1, 5.0);
    inst.b_true = Vector::Constant(1, 0.3);
    inst.cost_noise = 0.0;
    inst.price_noise = 0.0;
    return inst;
}

// Sum of |x(k+1) - x(k)| over logged snapshots with k in [from, to).
double movement(const RunTrace& t, std::int64_t from, std::int64_t to) {
    double acc = 0.0;
    for (std::size_t r = 1; r < t.rows.size(); ++r)
        if (t.rows[r].k > from && t.rows[r].k <= to) acc += (t.rows[r].x->flat() - t.rows[r - 1].x->flat()).norm();
    return acc;
}

}  // namespace

TEST(ProxBR, ToyReachesEquilibrium) {
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 500);
    const auto t = run_prox_br(make_toy(), cfg);
    EXPECT_LE((t.final_x.flat() - kToyNe).norm(), 1e-6);
    EXPECT_EQ(t.rows.size(), 501u);
    EXPECT_EQ(t.rows.back().comm_cum, 500);
}

TEST(ProxBR, EquilibriumStartStaysPut) {
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 50);
    cfg.initial = StrategyProfile({1, 1}, kToyNe);
    cfg.thinning = 1;
    const auto t = run_prox_br(make_toy(), cfg);
    for (const auto& row : t.rows) {
        ASSERT_TRUE(row.x.has_value());
        ASSERT_LE((row.x->flat() - kToyNe).norm(), 1e-12);
    }
}

TEST(ProxBR, ExactInnerSolvesDescendPotential) {
    const GameModel g = make_toy();
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 200);
    cfg.inner_mode = InnerMode::Exact;
    cfg.thinning = 1;
    const auto t = run_prox_br(g, cfg);
    for (std::size_t r = 1; r < t.rows.size(); ++r)
        ASSERT_LE(potential_value(g, *t.rows[r].x), potential_value(g, *t.rows[r - 1].x) + 1e-14);
    EXPECT_EQ(t.rows.back().grad_steps_cum, 0);

    const auto mg = make_cournot(standard_cournot_network(), CournotLaws{}, 2);
    RunConfig c;
    c.mu = {5.0};
    c.horizon = 300;
    c.thinning = 1;
    c.inner_mode = InnerMode::Exact;
    const auto tc = run_prox_br(mg.game, c);
    for (std::size_t r = 1; r < tc.rows.size(); ++r)
        ASSERT_LE(potential_value(mg.game, *tc.rows[r].x), potential_value(mg.game, *tc.rows[r - 1].x) + 1e-9);
}

TEST(ProxBR, CongestionStabilizes) {
    RunConfig c;
    c.mu = {1.0};
    c.tau = 4;
    c.horizon = 300;
    c.thinning = 1;
    c.compute_gap = false;
    const auto t = run_prox_br(make_congestion(standard_congestion()), c);
    const double early = movement(t, 0, 30), late = movement(t, 270, 300);
    EXPECT_GT(early, 0.0);
    EXPECT_LE(late, 0.01 * early);
}

TEST(GradientResponse, ToyReachesEquilibrium) {
    auto cfg = toy_config(Algorithm::GradResponse, 5.0, 1000);
    const auto t = run_gradient_response(make_toy(), cfg);
    EXPECT_LE((t.final_x.flat() - kToyNe).norm(), 1e-6);
}

TEST(PureBR, ExactReachesEquilibrium) {
    auto cfg = toy_config(Algorithm::PureBR, 1.0, 200);
    cfg.inner_mode = InnerMode::Exact;
    const auto t = run_pure_br(make_toy(), cfg);
    EXPECT_LE((t.final_x.flat() - kToyNe).norm(), 1e-9);
}

TEST(PureBR, InjectedSummableErrorsStillConverge) {
    auto cfg = toy_config(Algorithm::PureBR, 1.0, 200);
    cfg.inner_mode = InnerMode::Exact;
    cfg.inject_noise = true;
    const auto t = run_pure_br(make_toy(), cfg);
    EXPECT_LE((t.final_x.flat() - kToyNe).norm(), 1e-3);
    EXPECT_GT((t.final_x.flat() - kToyNe).norm(), 0.0);
}

TEST(PureBR, DelaysAreRejected) {
    auto cfg = toy_config(Algorithm::PureBR, 1.0, 10);
    cfg.tau = 1;
    EXPECT_THROW(run_pure_br(make_toy(), cfg), ConfigError);
    cfg.algorithm = Algorithm::AsyncSG;
    EXPECT_THROW(run_async_sg_baseline(make_toy(), cfg), ConfigError);
}

TEST(BrLearning, TrueBeliefsWithoutNoiseStayPut) {
    CournotLaws laws;
    laws.price_noise = 0.0;
    const auto mg = make_cournot(standard_cournot_network(), laws, 3);
    RunConfig c;
    c.algorithm = Algorithm::ProxBRLearning;
    c.mu = {5.0};
    c.horizon = 100;
    c.max_inner_steps = 1000;
    c.theta_initial = mg.learning.theta_true;
    const auto t = run_br_learning(mg, c);
    for (std::size_t i = 0; i < t.final_theta.size(); ++i)
        EXPECT_LE((t.final_theta[i] - mg.learning.theta_true[i]).norm(), 1e-12);
    EXPECT_LE(*t.rows.back().theta_err_max, 1e-12);
}

TEST(BrLearning, SingleFirmLearnsAndReachesMonopolyOutput) {
    const auto mg = make_cournot(quiet_single_firm());
    RunConfig c;
    c.algorithm = Algorithm::ProxBRLearning;
    c.mu = {5.0};
    c.horizon = 300;
    c.max_inner_steps = 20000;
    c.beta_rule = BetaRule::fixed(0.1);
    const auto t = run_br_learning(mg, c);
    EXPECT_NEAR(t.final_x.flat()[0], 5.0, 1e-3);
    EXPECT_LE(*t.rows.back().theta_err_max, 1e-3);
    EXPECT_GT(t.capped_solves, 0);
    EXPECT_FALSE(t.warnings.empty());
}

TEST(AsyncSG, StepIsInverseCounterPower) {
    const GameModel g = make_toy();
    RunConfig c;
    c.algorithm = Algorithm::AsyncSG;
    c.horizon = 400;
    c.initial = StrategyProfile({1, 1}, Vector::Constant(2, 0.9));
    int checked = 0;
    const auto t = run_async_sg_baseline(g, c, [&](const StepEvent& e) {
        const int i = e.player.index;
        const double gamma = std::pow(static_cast<double>(e.counters.of(e.player) - 1), -0.6);
        const double grad = toy_gradient(i, e.view.profile.flat()[0], e.view.profile.flat()[1]);
        const double expect = std::clamp(e.before.flat()[i] - gamma * grad, 0.0, 1.0);
        ASSERT_DOUBLE_EQ(e.after.flat()[i], expect) << "k = " << e.k;
        ++checked;
    });
    EXPECT_EQ(checked, 400);
    EXPECT_EQ(t.rows.back().comm_cum, 400);
    EXPECT_EQ(t.rows.back().grad_steps_cum, 400);
    EXPECT_NEAR(std::pow(32.0, -0.6), 0.125, 1e-12);
}

TEST(AsyncSG, LearningVariantUpdatesBeliefs) {
    const auto mg = make_cournot(standard_cournot_network(), CournotLaws{}, 4);
    RunConfig c;
    c.algorithm = Algorithm::AsyncSG;
    c.horizon = 20000;
    c.thinning = 1000;
    c.compute_gap = false;
    const auto t = run_async_sg_baseline(mg, c);
    EXPECT_LT(*t.rows.back().theta_err_max, *t.rows.front().theta_err_max);
}

TEST(Engine, SameSeedSameTrace) {
    const auto mg = make_cournot(standard_cournot_network(), CournotLaws{}, 5);
    RunConfig c;
    c.algorithm = Algorithm::ProxBRLearning;
    c.mu = {5.0};
    c.tau = 4;
    c.horizon = 60;
    c.thinning = 7;
    c.max_inner_steps = 2000;
    c.seed = 11;
    const auto a = run_br_learning(mg, c), b = run_br_learning(mg, c);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        EXPECT_EQ(a.rows[r].player, b.rows[r].player);
        EXPECT_EQ(a.rows[r].delays, b.rows[r].delays);
        EXPECT_EQ(a.rows[r].gap, b.rows[r].gap);
    }
    EXPECT_EQ(a.final_x.flat(), b.final_x.flat());
    c.replication = 1;
    const auto d = run_br_learning(mg, c);
    EXPECT_NE(a.final_x.flat(), d.final_x.flat());
}

TEST(Engine, ThinningKeepsCountersOnEveryRow) {
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 25);
    cfg.thinning = 10;
    const auto t = run_prox_br(make_toy(), cfg);
    ASSERT_EQ(t.rows.size(), 26u);
    for (const auto& row : t.rows) {
        const bool logged = row.k % 10 == 0 || row.k == 25;
        EXPECT_EQ(row.x.has_value(), logged) << row.k;
        EXPECT_EQ(row.comm_cum, row.k);
    }
    cfg.every_row = false;
    const auto s = run_prox_br(make_toy(), cfg);
    ASSERT_EQ(s.rows.size(), 4u);
    EXPECT_EQ(s.rows[3].k, 25);
}

TEST(Engine, ThresholdWarningsAreAdvisory) {
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 5);
    EXPECT_FALSE(run_prox_br(make_toy(), cfg).warnings.empty());
    cfg.mu = {3.0};
    EXPECT_TRUE(run_prox_br(make_toy(), cfg).warnings.empty());
    const auto b = mu_threshold_potential({2.0, 2.0}, 1);
    EXPECT_NEAR(b[0], 1.0 + std::sqrt(2.0) * 2.0, 1e-12);
    EXPECT_NEAR(mu_threshold_learning(2.0, 1), 1.0 + 2.0 * std::sqrt(3.0), 1e-12);
}

TEST(Engine, InfeasibilityAbortsWithPartialTrace) {
    GameModel g = make_toy();
    int calls = 0;
    g.grad_oracle = [&calls](PlayerId i, const StrategyProfile& x, const Vector&, Stream&) {
        if (++calls > 30) throw InfeasibleError("oracle left its domain");
        return Vector::Constant(1, toy_gradient(i.index, x.flat()[0], x.flat()[1]));
    };
    auto cfg = toy_config(Algorithm::ProxBR, 1.0, 100);
    cfg.thinning = 1;
    try {
        run_prox_br(g, cfg);
        FAIL() << "expected RunAborted";
    } catch (const RunAborted& e) {
        EXPECT_GT(e.partial().rows.size(), 1u);
        EXPECT_LT(e.partial().rows.size(), 101u);
        EXPECT_NE(std::string(e.what()).find("oracle left its domain"), std::string::npos);
    }
}

// Full audit: feasibility, one block per iteration, counter sum, delay range.
TEST(Engine, AsynchronyInvariantsOnCongestion) {
    const GameModel g = make_congestion(standard_congestion());
    RunConfig c;
    c.mu = {1.0};
    c.tau = 4;
    c.horizon = 150;
    c.compute_gap = false;
    std::int64_t seen = 0;
    run_prox_br(g, c, [&](const StepEvent& e) {
        ASSERT_EQ(e.k, seen++);
        ASSERT_TRUE(g.joint_set.contains(e.after.flat(), 1e-9));
        ASSERT_TRUE(e.player_set.contains(e.after.block(e.player)));
        for (int j = 0; j < e.after.players(); ++j)
            if (j != e.player.index) ASSERT_EQ(e.after.block(j), e.before.block(j));
        const auto sum = std::accumulate(e.counters.gamma.begin(), e.counters.gamma.end(), std::int64_t{0});
        ASSERT_EQ(sum - g.players(), e.k + 1);
        for (int d : e.view.delays) {
            ASSERT_GE(d, 0);
            ASSERT_LE(d, e.tau);
        }
    });
    EXPECT_EQ(seen, 150);
}
