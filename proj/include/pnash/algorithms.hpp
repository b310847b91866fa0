#pragma once

#include "pnash/game_model.hpp"
#include "pnash/inner_solvers.hpp"
#include "pnash/metrics.hpp"
#include "pnash/scheduler.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pnash {

enum class Algorithm { ProxBR, GradResponse, PureBR, ProxBRLearning, AsyncSG };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::ProxBR: return "prox-br";
        case Algorithm::GradResponse: return "gradient-response";
        case Algorithm::PureBR: return "pure-br";
        case Algorithm::ProxBRLearning: return "prox-br-learning";
        case Algorithm::AsyncSG: return "async-sg";
    }
    return "?";
}

/// Step size of the belief update.
struct BetaRule {
    enum class Kind { Fixed, InvLg, StableRange };
    Kind kind = Kind::Fixed;
    double value = 0.1;  // Fixed: beta itself; StableRange: fraction of 2 mu_g / L_g^2 in (0, 1)

    static BetaRule fixed(double b) { return {Kind::Fixed, b}; }
    static BetaRule inv_lg() { return {Kind::InvLg, 0.0}; }
    static BetaRule stable_range(double fraction = 0.5) { return {Kind::StableRange, fraction}; }

    double resolve(double mu_g, double L_g) const {
        switch (kind) {
            case Kind::Fixed:
                if (!(value > 0.0)) throw ConfigError("beta must be positive");
                return value;
            case Kind::InvLg: return 1.0 / L_g;
            case Kind::StableRange:
                if (!(value > 0.0 && value < 1.0)) throw ConfigError("beta range fraction must lie in (0, 1)");
                return value * 2.0 * mu_g / (L_g * L_g);
        }
        return value;
    }
};

enum class InnerMode { Sampled, Exact };

struct RunConfig {
    Algorithm algorithm = Algorithm::ProxBR;
    std::int64_t horizon = 100;
    std::vector<double> mu{1.0};  // one entry per player, or a single shared value
    double delta = 0.5;
    int tau = 0;
    std::optional<ActivationDist> activation;  // uniform when absent
    BetaRule beta_rule;
    std::uint64_t seed = 1;
    std::uint64_t replication = 0;
    std::int64_t thinning = 10;  // metrics and snapshots every `thinning` iterations
    std::int64_t max_inner_steps = 1'000'000;
    InnerMode inner_mode = InnerMode::Sampled;
    bool inject_noise = false;  // pure BR: add an error of norm (k + 1)^-1.5
    bool compute_gap = true;
    bool snapshots = true;
    bool every_row = true;        // false keeps only the rows that carry metrics
    bool sets_from_view = false;  // coupled sets from the delayed view instead of x(k)
    double sg_exponent = 0.6;     // async SG step Gamma^-exponent
    std::optional<StrategyProfile> initial;
    std::optional<std::vector<Vector>> theta_initial;
    std::optional<StrategyProfile> reference;  // known x*
};

struct TraceRow {
    std::int64_t k = 0;
    int player = -1;  // activated at iteration k - 1; -1 on the initial row
    std::vector<int> delays;
    std::int64_t inner_steps = 0;
    std::int64_t gamma = 0;  // Gamma of the activated player after the update
    std::optional<StrategyProfile> x;
    std::optional<double> gap;
    std::optional<double> dist_to_ref;
    std::optional<double> theta_err_max;
    std::vector<double> theta_err;  // per player, learning runs only
    std::int64_t grad_steps_cum = 0;
    std::int64_t comm_cum = 0;
};

struct RunTrace {
    std::vector<TraceRow> rows;  // k = 0..K
    std::vector<std::string> warnings;
    StrategyProfile final_x;
    std::vector<Vector> final_theta;
    std::vector<std::int64_t> final_gamma;
    std::int64_t capped_solves = 0;
};

/// Everything that happens in one iteration, handed to an optional observer.
struct StepEvent {
    std::int64_t k;
    PlayerId player;
    const DelayedView& view;
    const StrategyProfile& before;
    const StrategyProfile& after;
    const FeasibleSet& player_set;
    const LocalCounters& counters;
    int tau;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// Thrown when a run cannot continue; carries the rows logged so far.
class RunAborted : public InfeasibleError {
public:
    RunAborted(const std::string& what, RunTrace partial) : InfeasibleError(what), partial_(std::move(partial)) {}
    const RunTrace& partial() const { return partial_; }

private:
    RunTrace partial_;
};

// ---------------------------------------------------------------------------
// Sufficient proximal weights.

inline double average(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

/// mu_i > L_i/2 + (sqrt2 tau L_i / 2)(L_i/L_ave + L_ave/L_i).
inline std::vector<double> mu_threshold_potential(const std::vector<double>& L, int tau) {
    const double Lave = average(L);
    std::vector<double> out;
    for (double Li : L) out.push_back(Li / 2.0 + std::sqrt(2.0) * tau * Li / 2.0 * (Li / Lave + Lave / Li));
    return out;
}

/// Weighted version: ratios use L_i w_i against L_ave w_ave.
inline std::vector<double> mu_threshold_weighted(const std::vector<double>& L, const std::vector<double>& w, int tau) {
    const double Lave = average(L);
    const double wave = average(w);
    std::vector<double> out;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double r = L[i] * w[i] / (Lave * wave);
        out.push_back(L[i] / 2.0 + std::sqrt(2.0) * tau * L[i] / 2.0 * (1.0 / r + r));
    }
    return out;
}

/// mu > L_x/2 + sqrt3 L_x tau for the learning scheme.
inline double mu_threshold_learning(double L_x, int tau) { return L_x / 2.0 + std::sqrt(3.0) * L_x * tau; }

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline std::vector<double> expand_mu(const std::vector<double>& mu, int n) {
    if (mu.size() == 1) return std::vector<double>(static_cast<std::size_t>(n), mu[0]);
    if (static_cast<int>(mu.size()) != n) throw ConfigError("algo.mu: need one value or one per player");
    return mu;
}

inline void threshold_warnings(const GameModel& game, const MisspecifiedGameModel* mg, const RunConfig& cfg,
                               const std::vector<double>& mu, std::vector<std::string>& out) {
    if (cfg.algorithm == Algorithm::PureBR || cfg.algorithm == Algorithm::AsyncSG) return;
    if (mg && cfg.algorithm == Algorithm::ProxBRLearning) {
        const double bound = mu_threshold_learning(mg->learning.L_x, cfg.tau);
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (!(mu[i] > bound)) {
                out.push_back("mu = " + fmt(mu[i]) + " is below the sufficient learning bound " + fmt(bound) +
                              " (L_x = " + fmt(mg->learning.L_x) + ", tau = " + std::to_string(cfg.tau) + ")");
                break;
            }
        return;
    }
    const auto bound = game.weights ? mu_threshold_weighted(game.lipschitz, *game.weights, cfg.tau)
                                    : mu_threshold_potential(game.lipschitz, cfg.tau);
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (!(mu[i] > bound[i]))
            out.push_back("player " + std::to_string(i) + ": mu = " + fmt(mu[i]) + " is below the sufficient bound " +
                          fmt(bound[i]) + (game.weights ? " (weighted)" : ""));
}

inline Vector random_direction(Stream& s, Eigen::Index dim) {
    Vector v(dim);
    std::normal_distribution<double> n(0.0, 1.0);
    do {
        for (Eigen::Index j = 0; j < dim; ++j) v[j] = n(s);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

inline RunTrace run_engine(const GameModel& game, const MisspecifiedGameModel* mg, const RunConfig& cfg,
                           const StepObserver& observer) {
    const int N = game.players();
    if (cfg.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    if (cfg.tau < 0) throw ConfigError("algo.tau must be >= 0");
    if (cfg.thinning < 1) throw ConfigError("run.thinning must be >= 1");
    if (cfg.max_inner_steps < 1) throw ConfigError("max_inner_steps must be >= 1");
    const std::vector<double> mu = expand_mu(cfg.mu, N);
    for (double m : mu)
        if (!(m > 0.0)) throw ConfigError("algo.mu must be positive");
    const bool learning = cfg.algorithm == Algorithm::ProxBRLearning || (cfg.algorithm == Algorithm::AsyncSG && mg);
    if (cfg.algorithm == Algorithm::ProxBRLearning && !mg)
        throw ConfigError("prox-br-learning needs a misspecified game");
    if ((cfg.algorithm == Algorithm::PureBR || cfg.algorithm == Algorithm::AsyncSG) && cfg.tau != 0)
        throw ConfigError(std::string(to_string(cfg.algorithm)) + " requires the delay-free regime (tau = 0)");
    if (cfg.algorithm == Algorithm::PureBR && cfg.inner_mode == InnerMode::Exact && !game.exact_best_response)
        throw UnsupportedError(game.name + ": no closed-form best response");
    if (cfg.algorithm != Algorithm::PureBR && cfg.inner_mode == InnerMode::Exact && !game.exact_prox)
        throw UnsupportedError(game.name + ": no closed-form proximal map");
    const ActivationDist act = cfg.activation ? *cfg.activation : ActivationDist::uniform(N);
    if (act.players() != N) throw ConfigError("activation law has the wrong number of players");

    RunTrace trace;
    threshold_warnings(game, mg, cfg, mu, trace.warnings);

    const Stream root = Stream(cfg.seed).split("replication", cfg.replication);
    Stream s_act = root.split("activation");
    Stream s_delay = root.split("delay");

    StrategyProfile x = cfg.initial ? *cfg.initial : game.zero_profile();
    check_profile(game, x, "run");
    if (!game.joint_set.contains(x.flat(), 1e-12)) throw ConfigError("initial profile is infeasible");

    std::vector<Vector> theta;
    double beta = 0.0;
    if (learning) {
        const auto& lm = mg->learning;
        beta = cfg.beta_rule.resolve(lm.mu_g, lm.L_g);
        if (cfg.theta_initial) {
            if (static_cast<int>(cfg.theta_initial->size()) != N) throw ConfigError("theta initial: wrong player count");
            theta = *cfg.theta_initial;
        } else {
            for (int i = 0; i < N; ++i) {
                Stream s = root.split("theta-init", static_cast<std::uint64_t>(i));
                const Box& b = lm.theta_init_box[static_cast<std::size_t>(i)];
                Vector t(b.lo.size());
                for (Eigen::Index j = 0; j < t.size(); ++j) t[j] = b.lo[j] == b.hi[j] ? b.lo[j] : s.uniform(b.lo[j], b.hi[j]);
                theta.push_back(t);
            }
        }
        for (int i = 0; i < N; ++i)
            if (!lm.theta_sets[static_cast<std::size_t>(i)].contains(theta[static_cast<std::size_t>(i)]))
                throw ConfigError("initial belief of player " + std::to_string(i) + " lies outside Theta");
    }

    std::optional<GapEvaluator> gap_ev;
    if (cfg.compute_gap && game.exact_grad) gap_ev = make_gap_evaluator(game);

    HistoryBuffer buf(x, cfg.tau);
    const DelayModel delays(cfg.tau);
    LocalCounters counters(N, cfg.delta);
    std::int64_t grad_steps = 0, comm = 0;

    auto log_row = [&](TraceRow row, bool metrics) {
        if (!metrics && !cfg.every_row) return;
        row.grad_steps_cum = grad_steps;
        row.comm_cum = comm;
        if (metrics) {
            if (cfg.snapshots) row.x = x;
            if (gap_ev) row.gap = gap_value(*gap_ev, x);
            if (cfg.reference) row.dist_to_ref = (x.flat() - cfg.reference->flat()).norm();
            if (learning) {
                ThetaError te = theta_error(theta, mg->learning.theta_true);
                row.theta_err_max = te.max;
                row.theta_err = std::move(te.per_player);
            }
        }
        trace.rows.push_back(std::move(row));
    };
    log_row(TraceRow{}, true);

    for (std::int64_t k = 0; k < cfg.horizon; ++k) try {
        const PlayerId i = draw_player(act, s_act);
        const DelayedView view = assemble_view(buf, delays, i, k, s_delay);
        const std::size_t ui = static_cast<std::size_t>(i.index);
        const FeasibleSet set = game.generalized() ? game.player_set(i, cfg.sets_from_view ? view.profile : x)
                                                   : game.sets[ui];
        const Vector theta_i = learning ? theta[ui] : Vector();
        Stream s_inner = root.split("inner", static_cast<std::uint64_t>(k));

        const InnerSteps sched = inner_step_schedule(counters, i, cfg.max_inner_steps);
        if (sched.capped) ++trace.capped_solves;
        const Vector anchor = x.block(i);
        Vector next;
        std::int64_t used = 0;

        switch (cfg.algorithm) {
            case Algorithm::ProxBR:
            case Algorithm::ProxBRLearning: {
                if (cfg.inner_mode == InnerMode::Exact) {
                    next = project(set, game.exact_prox(i, view.profile, mu[ui], theta_i));
                } else {
                    ProxSolveSpec spec{mu[ui], sched.steps, anchor, view.profile, theta_i, set};
                    next = sa_prox_solve(game, i, spec, s_inner);
                    used = sched.steps;
                }
                if (cfg.algorithm == Algorithm::ProxBRLearning) {
                    Stream s_learn = root.split("learning", static_cast<std::uint64_t>(k));
                    theta[ui] = theta_batch_update(*mg, i, theta[ui], beta, sched.steps, s_learn);
                }
                ++comm;
                break;
            }
            case Algorithm::GradResponse:
                next = batch_gradient_step(game, i, anchor, view.profile, mu[ui], sched.steps, s_inner, theta_i, set);
                used = sched.steps;
                ++comm;
                break;
            case Algorithm::PureBR: {
                if (cfg.inner_mode == InnerMode::Exact) {
                    next = project(set, game.exact_best_response(i, view.profile, theta_i));
                } else {
                    ProxSolveSpec spec{0.0, sched.steps, anchor, view.profile, theta_i, set};
                    next = sa_best_response_solve(game, i, spec, s_inner);
                    used = sched.steps;
                }
                if (cfg.inject_noise) {
                    Stream s_eps = root.split("injected", static_cast<std::uint64_t>(k));
                    const double size = std::pow(static_cast<double>(k + 1), -1.5);
                    next = project(set, next + size * random_direction(s_eps, next.size()));
                }
                ++comm;
                break;
            }
            case Algorithm::AsyncSG: {
                const double gamma = std::pow(static_cast<double>(counters.of(i)), -cfg.sg_exponent);
                StrategyProfile y = view.profile;
                const Vector g = game.grad_oracle(i, y, theta_i, s_inner);
                next = project(set, anchor - gamma * g);
                if (learning) {
                    Stream s_learn = root.split("learning", static_cast<std::uint64_t>(k));
                    const Vector gg = mg->learning.grad_oracle(i, theta[ui], s_learn);
                    theta[ui] = project(mg->learning.theta_sets[ui], theta[ui] - beta * gamma * gg);
                }
                used = 1;
                ++comm;
                break;
            }
        }
        grad_steps += used;

        const StrategyProfile before = x;
        x.block(i) = next;
        counters.record_activation(i);
        buf.push(x);
        if (observer) observer(StepEvent{k, i, view, before, x, set, counters, cfg.tau});

        TraceRow row;
        row.k = k + 1;
        row.player = i.index;
        row.delays = view.delays;
        row.inner_steps = sched.steps;
        row.gamma = counters.of(i);
        log_row(std::move(row), (k + 1) % cfg.thinning == 0 || k + 1 == cfg.horizon);
    } catch (const InfeasibleError& e) {
        trace.final_x = x;
        trace.final_theta = theta;
        trace.final_gamma = counters.gamma;
        throw RunAborted("iteration " + std::to_string(k) + ": " + e.what(), std::move(trace));
    }

    if (trace.capped_solves > 0)
        trace.warnings.push_back(std::to_string(trace.capped_solves) + " inner solves hit max_inner_steps = " +
                                 std::to_string(cfg.max_inner_steps) + "; the error schedule is no longer summable");
    trace.final_x = x;
    trace.final_theta = theta;
    trace.final_gamma = counters.gamma;
    return trace;
}

}  // namespace detail

inline RunConfig with_algorithm(RunConfig cfg, Algorithm a) {
    cfg.algorithm = a;
    return cfg;
}

/// Asynchronous inexact proximal best-response scheme.
inline RunTrace run_prox_br(const GameModel& game, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(game, nullptr, with_algorithm(cfg, Algorithm::ProxBR), obs);
}

/// Variable sample-size projected gradient response.
inline RunTrace run_gradient_response(const GameModel& game, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(game, nullptr, with_algorithm(cfg, Algorithm::GradResponse), obs);
}

/// Asynchronous inexact (pure) best-response scheme; delay-free only.
inline RunTrace run_pure_br(const GameModel& game, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(game, nullptr, with_algorithm(cfg, Algorithm::PureBR), obs);
}

/// Proximal best response with online learning of theta.
inline RunTrace run_br_learning(const MisspecifiedGameModel& mg, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(mg.game, &mg, with_algorithm(cfg, Algorithm::ProxBRLearning), obs);
}

/// Asynchronous stochastic gradient baseline, learning theta alongside x.
inline RunTrace run_async_sg_baseline(const MisspecifiedGameModel& mg, const RunConfig& cfg,
                                      const StepObserver& obs = {}) {
    return detail::run_engine(mg.game, &mg, with_algorithm(cfg, Algorithm::AsyncSG), obs);
}

/// Asynchronous stochastic gradient baseline on a fully specified game.
inline RunTrace run_async_sg_baseline(const GameModel& game, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(game, nullptr, with_algorithm(cfg, Algorithm::AsyncSG), obs);
}

/// Dispatch on cfg.algorithm.
inline RunTrace run(const GameModel& game, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(game, nullptr, cfg, obs);
}

inline RunTrace run(const MisspecifiedGameModel& mg, const RunConfig& cfg, const StepObserver& obs = {}) {
    return detail::run_engine(mg.game, &mg, cfg, obs);
}

}  // namespace pnash
