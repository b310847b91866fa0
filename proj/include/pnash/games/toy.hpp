#pragma once

#include "pnash/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pnash::games {

// Two scalar players on [0, 1] sharing the objective
//   P(x) = (x1 + x2 - 1)^2 + x1^2 + x2^2,
// unique equilibrium (1/3, 1/3). Every quantity the algorithms touch has a
// closed form here, which makes it the reference instance for oracle tests.

inline double toy_potential(double x1, double x2) {
    const double s = x1 + x2 - 1.0;
    return s * s + x1 * x1 + x2 * x2;
}

inline double toy_gradient(int i, double x1, double x2) {
    const double own = i == 0 ? x1 : x2;
    return 2.0 * (x1 + x2 - 1.0) + 2.0 * own;
}

/// T_i(x) = clamp((2(1 - x_{-i}) + mu x_i) / (4 + mu), 0, 1).
inline double toy_prox(int i, double x1, double x2, double mu) {
    const double own = i == 0 ? x1 : x2;
    const double rival = i == 0 ? x2 : x1;
    return std::clamp((2.0 * (1.0 - rival) + mu * own) / (4.0 + mu), 0.0, 1.0);
}

inline double toy_best_response(int i, double x1, double x2) {
    const double rival = i == 0 ? x2 : x1;
    return std::clamp((1.0 - rival) / 2.0, 0.0, 1.0);
}

/// sigma is the standard deviation of additive Gaussian gradient noise.
inline GameModel make_toy(double sigma = 0.0) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("make_toy: sigma must be >= 0");
    GameModel g;
    g.name = "toy";
    g.dims = {1, 1};
    g.sets = {FeasibleSet::interval(0.0, 1.0), FeasibleSet::interval(0.0, 1.0)};
    g.joint_set = FeasibleSet::box(Vector::Zero(2), Vector::Ones(2));

    g.exact_grad = [](PlayerId i, const StrategyProfile& x, const Vector&) {
        return Vector::Constant(1, toy_gradient(i, x.flat()[0], x.flat()[1]));
    };
    g.grad_oracle = [sigma](PlayerId i, const StrategyProfile& x, const Vector&, Stream& s) {
        double v = toy_gradient(i, x.flat()[0], x.flat()[1]);
        if (sigma > 0.0) v += sigma * std::normal_distribution<double>(0.0, 1.0)(s);
        return Vector::Constant(1, v);
    };
    g.objective = [](PlayerId, const StrategyProfile& x, const Vector&) {
        return toy_potential(x.flat()[0], x.flat()[1]);
    };
    g.potential = [](const StrategyProfile& x) { return toy_potential(x.flat()[0], x.flat()[1]); };
    g.exact_prox = [](PlayerId i, const StrategyProfile& x, double mu, const Vector&) {
        return Vector::Constant(1, toy_prox(i, x.flat()[0], x.flat()[1], mu));
    };
    g.exact_best_response = [](PlayerId i, const StrategyProfile& x, const Vector&) {
        return Vector::Constant(1, toy_best_response(i, x.flat()[0], x.flat()[1]));
    };

    // grad_{x_i} f_i = (4, 2) . x - 2 up to ordering, so L_i = |(4, 2)| = sqrt(20).
    g.lipschitz = {std::sqrt(20.0), std::sqrt(20.0)};
    g.strong_convexity = {4.0, 4.0};
    // |grad| <= 4 on [0,1]^2 (attained at (1,1)); second moment adds sigma^2.
    g.grad_bound = std::sqrt(16.0 + sigma * sigma);
    g.validate();
    return g;
}

}  // namespace pnash::games
