#pragma once

#include "pnash/game_model.hpp"

namespace pnash::games {

/// Scales player i's objective by 1/w_i, so that the base potential P is a
/// weighted potential: P(y_i, x_-i) - P(x) = w_i (f_i(y_i, x_-i) - f_i(x)).
inline GameModel make_weighted(const GameModel& base, const std::vector<double>& w) {
    if (static_cast<int>(w.size()) != base.players())
        throw std::invalid_argument("make_weighted: need one weight per player");
    for (double v : w)
        if (!(v > 0.0)) throw std::invalid_argument("make_weighted: weights must be positive");

    GameModel g = base;
    g.name = base.name + "-weighted";
    g.weights = w;
    for (std::size_t i = 0; i < w.size(); ++i) g.lipschitz[i] = base.lipschitz[i] / w[i];
    if (!g.strong_convexity.empty())
        for (std::size_t i = 0; i < w.size(); ++i) g.strong_convexity[i] = base.strong_convexity[i] / w[i];
    double wmin = w[0];
    for (double v : w) wmin = std::min(wmin, v);
    g.grad_bound = base.grad_bound / wmin;

    auto inv = [w](PlayerId i) { return 1.0 / w[static_cast<std::size_t>(i.index)]; };
    g.grad_oracle = [f = base.grad_oracle, inv](PlayerId i, const StrategyProfile& x, const Vector& th, Stream& s) {
        return Vector(inv(i) * f(i, x, th, s));
    };
    if (base.block_oracle)
        g.block_oracle = [f = base.block_oracle, inv](PlayerId i, const StrategyProfile& x,
                                                      const Vector& th) -> GameModel::BlockOracle {
            return [o = f(i, x, th), s_i = inv(i)](const Vector& own, Stream& s, Vector& out) {
                o(own, s, out);
                out *= s_i;
            };
        };
    if (base.exact_grad)
        g.exact_grad = [f = base.exact_grad, inv](PlayerId i, const StrategyProfile& x, const Vector& th) {
            return Vector(inv(i) * f(i, x, th));
        };
    if (base.objective)
        g.objective = [f = base.objective, inv](PlayerId i, const StrategyProfile& x, const Vector& th) {
            return inv(i) * f(i, x, th);
        };
    // argmin f_i / w_i + mu/2 |y - x_i|^2 = argmin f_i + (mu w_i)/2 |y - x_i|^2
    if (base.exact_prox)
        g.exact_prox = [f = base.exact_prox, w](PlayerId i, const StrategyProfile& x, double mu, const Vector& th) {
            return f(i, x, mu * w[static_cast<std::size_t>(i.index)], th);
        };
    g.validate();
    return g;
}

}  // namespace pnash::games
