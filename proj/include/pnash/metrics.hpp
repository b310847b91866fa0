#pragma once

#include "pnash/game_model.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace pnash {

/// G(x) = sup_{y in X} F(x)^T (x - y) with F the stacked potential gradient.
struct GapEvaluator {
    FeasibleSet set;
    std::function<Vector(const StrategyProfile&)> grad;
};

/// Gap evaluator of a game at the true parameters. For weighted games the
/// per-player gradients are rescaled by w_i so that F = grad P.
inline GapEvaluator make_gap_evaluator(const GameModel& game) {
    if (!game.exact_grad) throw UnsupportedError(game.name + ": gap function needs an exact gradient");
    GapEvaluator ev;
    ev.set = game.joint_set;
    ev.grad = [game](const StrategyProfile& x) {
        Vector F = stacked_exact_gradient(game, x);
        if (game.weights)
            for (int i = 0; i < x.players(); ++i)
                F.segment(x.offset(i), x.dim(i)) *= (*game.weights)[static_cast<std::size_t>(i)];
        return F;
    };
    return ev;
}

inline double gap_value(const GapEvaluator& ev, const StrategyProfile& x) {
    const Vector F = ev.grad(x);
    if (F.size() != x.total_dim()) throw std::logic_error("gap_value: gradient dimension mismatch");
    const LinearMinimum lm = linear_minimize(ev.set, F);
    const double g = F.dot(x.flat()) - lm.value;
    if (g >= 0.0) return g;
    if (g >= -1e-9) return 0.0;
    throw std::domain_error("gap_value: negative gap " + std::to_string(g) + " (point outside the feasible set?)");
}

struct ThetaError {
    std::vector<double> per_player;
    double max = 0.0;
    double mean = 0.0;
};

inline ThetaError theta_error(const std::vector<Vector>& beliefs, const std::vector<Vector>& truth, bool scaled = false) {
    if (beliefs.size() != truth.size() || beliefs.empty())
        throw std::invalid_argument("theta_error: belief and truth lists differ in length");
    ThetaError out;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        if (beliefs[i].size() != truth[i].size()) throw std::invalid_argument("theta_error: dimension mismatch");
        double e = (beliefs[i] - truth[i]).norm();
        if (scaled) e /= 1.0 + truth[i].norm();
        out.per_player.push_back(e);
        out.max = std::max(out.max, e);
        out.mean += e;
    }
    out.mean /= static_cast<double>(beliefs.size());
    return out;
}

/// A logged column: values at iterations k.
struct Series {
    std::vector<std::int64_t> k;
    std::vector<double> values;
};

struct MeanSeries {
    std::vector<std::int64_t> k;
    std::vector<double> mean;
    std::vector<double> stderr_;
};

/// Pointwise mean and standard error over replications sharing one grid.
inline MeanSeries replication_mean(const std::vector<Series>& runs) {
    if (runs.empty()) throw std::invalid_argument("replication_mean: no replications");
    MeanSeries out;
    out.k = runs.front().k;
    const std::size_t n = out.k.size();
    for (const auto& r : runs)
        if (r.k != out.k || r.values.size() != n)
            throw std::invalid_argument("replication_mean: replications use different logging grids");
    const double R = static_cast<double>(runs.size());
    out.mean.assign(n, 0.0);
    out.stderr_.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        for (const auto& r : runs) s += r.values[t];
        const double m = s / R;
        double ss = 0.0;
        for (const auto& r : runs) ss += (r.values[t] - m) * (r.values[t] - m);
        out.mean[t] = m;
        out.stderr_[t] = runs.size() > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
    }
    return out;
}

struct ReferenceSolution {
    StrategyProfile x;
    double residual = 0.0;  // |x - Pi_X[x - s F(x)]| / s at termination
    std::int64_t iterations = 0;
};

/// Deterministic projected-gradient run x <- Pi_X[x - s grad P(x)] on a
/// product set, from `start`, until the fixed-point residual drops below tol.
/// The default step 1 / sqrt(sum L_i^2) bounds the Jacobian norm.
inline ReferenceSolution reference_equilibrium(const GameModel& game, const StrategyProfile& start,
                                               double tol = 1e-12, std::int64_t max_iter = 2'000'000,
                                               double step = 0.0) {
    if (game.generalized()) throw UnsupportedError("reference_equilibrium: product sets only");
    if (step <= 0.0) {
        double s = 0.0;
        for (double L : game.lipschitz) s += L * L;
        step = 1.0 / std::sqrt(s);
    }
    ReferenceSolution out{start, 0.0, 0};
    for (; out.iterations < max_iter; ++out.iterations) {
        const Vector F = stacked_exact_gradient(game, out.x);
        StrategyProfile next = out.x;
        for (int i = 0; i < game.players(); ++i)
            next.block(i) = project(game.sets[static_cast<std::size_t>(i)],
                                    out.x.block(i) - step * F.segment(out.x.offset(i), out.x.dim(i)));
        out.residual = (next.flat() - out.x.flat()).norm() / step;
        out.x = std::move(next);
        if (out.residual < tol) break;
    }
    return out;
}

}  // namespace pnash
