#pragma once

#include "pnash/errors.hpp"
#include "pnash/feasible_sets.hpp"
#include "pnash/profile.hpp"
#include "pnash/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pnash {

/// A player-indexed bundle of strategy sets, stochastic first-order oracles
/// and (optional) potential. Immutable after construction; every callable is
/// pure given its explicit RNG stream, so a model can be shared across threads.
///
/// Oracles take a parameter vector `theta`. Fully specified games ignore it
/// (pass an empty vector); misspecified games interpret it as the calling
/// player's belief restricted to the coordinates that player observes.
struct GameModel {
    using GradOracle = std::function<Vector(PlayerId, const StrategyProfile&, const Vector& theta, Stream&)>;
    using ExactGrad = std::function<Vector(PlayerId, const StrategyProfile&, const Vector& theta)>;
    using Objective = std::function<double(PlayerId, const StrategyProfile&, const Vector& theta)>;
    using Potential = std::function<double(const StrategyProfile&)>;
    using CoupledSet = std::function<FeasibleSet(PlayerId, const StrategyProfile&)>;
    using ProxMap = std::function<Vector(PlayerId, const StrategyProfile&, double mu, const Vector& theta)>;
    using BestResponse = std::function<Vector(PlayerId, const StrategyProfile&, const Vector& theta)>;
    // Oracle with the rival blocks and theta frozen: writes the sample at own
    // block `own` into `out`, drawing from the stream exactly as grad_oracle does.
    using BlockOracle = std::function<void(const Vector& own, Stream&, Vector& out)>;
    using BlockOracleFactory = std::function<BlockOracle(PlayerId, const StrategyProfile& view, const Vector& theta)>;

    std::string name;
    std::vector<int> dims;
    std::vector<FeasibleSet> sets;  // X_i (the box part for generalized games)
    FeasibleSet joint_set;          // X used by the gap function

    GradOracle grad_oracle;
    ExactGrad exact_grad;    // optional: gradient of the expectation
    Objective objective;     // optional: f_i
    Potential potential;     // optional: P
    CoupledSet coupled_set;  // optional: X_i(x_{-i}) for generalized games
    ProxMap exact_prox;      // optional: closed-form proximal best response
    BestResponse exact_best_response;  // optional: closed-form pure best response
    BlockOracleFactory block_oracle;   // optional: allocation-free inner-loop oracle

    std::vector<double> lipschitz;         // L_i
    std::vector<double> strong_convexity;  // optional own-block moduli (pure BR)
    std::optional<std::vector<double>> weights;
    double grad_bound = 0.0;  // M

    int players() const { return static_cast<int>(dims.size()); }

    StrategyProfile zero_profile() const { return StrategyProfile(dims); }

    bool generalized() const { return static_cast<bool>(coupled_set); }

    /// Strategy set of player i given the (current) rival profile.
    FeasibleSet player_set(PlayerId i, const StrategyProfile& x) const {
        if (coupled_set) return coupled_set(i, x);
        return sets.at(static_cast<std::size_t>(i.index));
    }

    void validate() const {
        const auto n = dims.size();
        if (n < 1) throw std::invalid_argument(name + ": game needs at least one player");
        if (sets.size() != n || lipschitz.size() != n)
            throw std::invalid_argument(name + ": per-player data has wrong length");
        for (std::size_t i = 0; i < n; ++i) {
            if (sets[i].dim() != dims[i]) throw std::invalid_argument(name + ": set dimension mismatch");
            if (!(lipschitz[i] > 0.0)) throw std::invalid_argument(name + ": L_i must be positive");
        }
        if (weights) {
            if (weights->size() != n) throw std::invalid_argument(name + ": weight vector has wrong length");
            for (double w : *weights)
                if (!(w > 0.0)) throw std::invalid_argument(name + ": weights must be positive");
        }
        if (!strong_convexity.empty() && strong_convexity.size() != n)
            throw std::invalid_argument(name + ": strong convexity vector has wrong length");
        if (!grad_oracle) throw std::invalid_argument(name + ": missing gradient oracle");
    }
};

/// Estimation side of a misspecified game: each player learns its restricted
/// copy of theta* by minimizing g(theta) = E[g(theta; eta)] over Theta.
struct LearningModel {
    using GradOracle = std::function<Vector(PlayerId, const Vector& theta, Stream&)>;
    using Objective = std::function<double(PlayerId, const Vector& theta)>;
    using ExactGrad = std::function<Vector(PlayerId, const Vector& theta)>;
    // Mean of n oracle draws, consuming the stream as n grad_oracle calls would.
    using BatchMean = std::function<void(PlayerId, const Vector& theta, std::int64_t n, Stream&, Vector& mean)>;

    std::vector<Vector> theta_true;       // per player; hidden from the algorithms
    std::vector<FeasibleSet> theta_sets;  // Theta restricted per player
    std::vector<Box> theta_init_box;      // default law of theta_i(0): uniform on this box
    GradOracle grad_oracle;               // grad g(theta; eta)
    BatchMean batch_mean;                 // optional fast path for grad_oracle averages
    Objective objective;                  // exact g (optional)
    ExactGrad exact_grad;                 // exact grad g (optional)
    double mu_g = 0.0;
    double L_g = 0.0;
    double L_x = 0.0;  // Lipschitz constant of grad_{x_i} f_i(.; theta*) in x

    int theta_dim(int i) const { return static_cast<int>(theta_true.at(static_cast<std::size_t>(i)).size()); }
};

struct MisspecifiedGameModel {
    GameModel game;
    LearningModel learning;

    void validate() const {
        game.validate();
        const auto n = static_cast<std::size_t>(game.players());
        if (learning.theta_true.size() != n || learning.theta_sets.size() != n ||
            learning.theta_init_box.size() != n)
            throw std::invalid_argument(game.name + ": learning data has wrong length");
        if (!(learning.mu_g > 0.0) || learning.mu_g > learning.L_g)
            throw std::invalid_argument(game.name + ": need 0 < mu_g <= L_g");
        for (std::size_t i = 0; i < n; ++i)
            if (!learning.theta_sets[i].contains(learning.theta_true[i]))
                throw std::invalid_argument(game.name + ": theta* outside Theta");
        if (!learning.grad_oracle) throw std::invalid_argument(game.name + ": missing learning oracle");
    }
};

inline void check_profile(const GameModel& game, const StrategyProfile& x, const char* op) {
    if (x.dims() != game.dims)
        throw std::invalid_argument(std::string(op) + ": profile layout does not match game " + game.name);
}

/// One draw of grad_{x_i} psi_i(view; xi) with xi taken from `stream`.
inline Vector sample_gradient(const GameModel& game, PlayerId player, const StrategyProfile& view,
                              const Vector& theta, Stream& stream) {
    check_profile(game, view, "sample_gradient");
    Vector g = game.grad_oracle(player, view, theta, stream);
    if (g.size() != view.dim(player)) throw std::logic_error("sample_gradient: oracle returned wrong dimension");
    return g;
}

inline Vector sample_gradient(const GameModel& game, PlayerId player, const StrategyProfile& view, Stream& stream) {
    return sample_gradient(game, player, view, Vector(), stream);
}

inline Vector exact_gradient(const GameModel& game, PlayerId player, const StrategyProfile& x,
                             const Vector& theta = Vector()) {
    check_profile(game, x, "exact_gradient");
    if (!game.exact_grad) throw UnsupportedError(game.name + ": no exact gradient declared");
    return game.exact_grad(player, x, theta);
}

inline double potential_value(const GameModel& game, const StrategyProfile& x) {
    check_profile(game, x, "potential_value");
    if (!game.potential) throw UnsupportedError(game.name + ": no potential declared");
    return game.potential(x);
}

inline double objective_value(const GameModel& game, PlayerId player, const StrategyProfile& x,
                              const Vector& theta = Vector()) {
    check_profile(game, x, "objective_value");
    if (!game.objective) throw UnsupportedError(game.name + ": no objective declared");
    return game.objective(player, x, theta);
}

/// Stacked exact gradient (grad_{x_1} f_1, ..., grad_{x_N} f_N) = grad P for potential games.
inline Vector stacked_exact_gradient(const GameModel& game, const StrategyProfile& x,
                                     const std::vector<Vector>& thetas = {}) {
    Vector out(x.total_dim());
    for (int i = 0; i < game.players(); ++i) {
        const Vector theta = thetas.empty() ? Vector() : thetas[static_cast<std::size_t>(i)];
        out.segment(x.offset(i), x.dim(i)) = exact_gradient(game, PlayerId(i), x, theta);
    }
    return out;
}

}  // namespace pnash
