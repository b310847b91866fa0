#pragma once

#include "pnash/game_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace pnash {

/// One proximal subproblem  min_y f_i(y, view_-i) + mu/2 |y - anchor|^2.
struct ProxSolveSpec {
    double mu = 1.0;
    std::int64_t steps = 1;
    Vector anchor;
    StrategyProfile view;
    Vector theta;                    // empty for fully specified games
    std::optional<FeasibleSet> set;  // defaults to the player's declared set
};

/// Called with (t, z_{t+1}) after inner update t = 1..steps.
using InnerCallback = std::function<void(std::int64_t, const Vector&)>;

namespace detail {

inline const FeasibleSet& resolve_set(const GameModel& game, PlayerId player, const std::optional<FeasibleSet>& set) {
    return set ? *set : game.sets.at(static_cast<std::size_t>(player.index));
}

// z_{t+1} = Pi[z_t - (grad psi(z_t, view_-i) + mu (z_t - anchor)) / (modulus (t + 1))], z_1 = anchor.
inline Vector sa_iterate(const GameModel& game, PlayerId player, const ProxSolveSpec& spec, double modulus,
                         Stream& stream, const InnerCallback& cb) {
    const FeasibleSet& set = resolve_set(game, player, spec.set);
    check_dim(set, spec.anchor, "sa_prox_solve");
    Vector z = spec.anchor;
    if (game.block_oracle) {
        const auto oracle = game.block_oracle(player, spec.view, spec.theta);
        Vector g(z.size());
        for (std::int64_t t = 1; t <= spec.steps; ++t) {
            oracle(z, stream, g);
            const double gamma = 1.0 / (modulus * static_cast<double>(t + 1));
            z -= gamma * (g + spec.mu * (z - spec.anchor));
            project_into(set, z);
            if (cb) cb(t, z);
        }
        return z;
    }
    StrategyProfile y = spec.view;
    for (std::int64_t t = 1; t <= spec.steps; ++t) {
        y.block(player) = z;
        const Vector g = game.grad_oracle(player, y, spec.theta, stream);
        const double gamma = 1.0 / (modulus * static_cast<double>(t + 1));
        z = project(set, z - gamma * (g + spec.mu * (z - spec.anchor)));
        if (cb) cb(t, z);
    }
    return z;
}

inline void check_spec(const GameModel& game, PlayerId player, const ProxSolveSpec& spec, const char* op) {
    check_profile(game, spec.view, op);
    if (spec.steps < 1) throw std::invalid_argument(std::string(op) + ": steps must be >= 1");
    if (spec.anchor.size() != spec.view.dim(player))
        throw std::invalid_argument(std::string(op) + ": anchor dimension mismatch");
}

}  // namespace detail

/// Stochastic-approximation estimate of the proximal best response T_i.
inline Vector sa_prox_solve(const GameModel& game, PlayerId player, const ProxSolveSpec& spec, Stream& stream,
                            const InnerCallback& cb = {}) {
    detail::check_spec(game, player, spec, "sa_prox_solve");
    if (!(spec.mu > 0.0)) throw std::invalid_argument("sa_prox_solve: mu must be positive");
    return detail::sa_iterate(game, player, spec, spec.mu, stream, cb);
}

/// Stochastic-approximation estimate of the pure best response, with step
/// 1/(m (t + 1)) for the declared own-block strong convexity modulus m.
inline Vector sa_best_response_solve(const GameModel& game, PlayerId player, ProxSolveSpec spec, Stream& stream,
                                     const InnerCallback& cb = {}) {
    detail::check_spec(game, player, spec, "sa_best_response_solve");
    if (game.strong_convexity.empty())
        throw UnsupportedError(game.name + ": pure best response needs a strong convexity modulus");
    const double m = game.strong_convexity[static_cast<std::size_t>(player.index)];
    if (!(m > 0.0)) throw UnsupportedError(game.name + ": strong convexity modulus must be positive");
    spec.mu = 0.0;
    return detail::sa_iterate(game, player, spec, m, stream, cb);
}

/// x_i <- Pi[x_i - (1/mu) * mean of `batch` sampled gradients at the view].
inline Vector batch_gradient_step(const GameModel& game, PlayerId player, const Vector& x_i,
                                  const StrategyProfile& view, double mu, std::int64_t batch, Stream& stream,
                                  const Vector& theta = Vector(), const std::optional<FeasibleSet>& set = {}) {
    check_profile(game, view, "batch_gradient_step");
    if (batch < 1) throw std::invalid_argument("batch_gradient_step: batch must be >= 1");
    if (!(mu > 0.0)) throw std::invalid_argument("batch_gradient_step: mu must be positive");
    Vector mean = Vector::Zero(x_i.size());
    if (game.block_oracle) {
        const auto oracle = game.block_oracle(player, view, theta);
        Vector g(x_i.size());
        for (std::int64_t b = 0; b < batch; ++b) {
            oracle(x_i, stream, g);
            mean += g;
        }
        mean /= static_cast<double>(batch);
        return project(detail::resolve_set(game, player, set), x_i - mean / mu);
    }
    StrategyProfile y = view;
    y.block(player) = x_i;
    for (std::int64_t b = 0; b < batch; ++b) mean += game.grad_oracle(player, y, theta, stream);
    mean /= static_cast<double>(batch);
    return project(detail::resolve_set(game, player, set), x_i - mean / mu);
}

/// theta <- Pi_Theta[theta - beta * mean of `batch` sampled grad g].
inline Vector theta_batch_update(const MisspecifiedGameModel& mg, PlayerId player, const Vector& theta, double beta,
                                 std::int64_t batch, Stream& stream) {
    if (batch < 1) throw std::invalid_argument("theta_batch_update: batch must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("theta_batch_update: beta must be positive");
    Vector mean = Vector::Zero(theta.size());
    if (mg.learning.batch_mean) {
        mg.learning.batch_mean(player, theta, batch, stream, mean);
    } else {
        for (std::int64_t b = 0; b < batch; ++b) mean += mg.learning.grad_oracle(player, theta, stream);
        mean /= static_cast<double>(batch);
    }
    return project(mg.learning.theta_sets.at(static_cast<std::size_t>(player.index)), theta - beta * mean);
}

/// Residual lhs - rhs of the projected-gradient descent inequality
///   g(theta+) - g(y) <= c^T (theta - y) - |c|^2 / (2 L_g) - u^T (theta+ - y) - mu_g/2 |theta - y|^2,
/// theta+ = Pi[theta - (grad g(theta) + u) / L_g], c = L_g (theta - theta+).
/// Nonpositive whenever g is mu_g-strongly convex and L_g-smooth on Theta.
inline double projection_descent_residual(const std::function<double(const Vector&)>& g,
                                          const std::function<Vector(const Vector&)>& grad_g,
                                          const FeasibleSet& theta_set, const Vector& theta, const Vector& u,
                                          double L_g, double mu_g, const Vector& y) {
    const Vector plus = project(theta_set, theta - (grad_g(theta) + u) / L_g);
    const Vector c = L_g * (theta - plus);
    const double lhs = g(plus) - g(y);
    const double rhs = c.dot(theta - y) - c.squaredNorm() / (2.0 * L_g) - u.dot(plus - y) -
                       0.5 * mu_g * (theta - y).squaredNorm();
    return lhs - rhs;
}

}  // namespace pnash
