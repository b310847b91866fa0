#pragma once

#include "pnash/game_model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pnash::games {

/// Link with price a / (b - load) and capacity c < b.
struct CongestionLink {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// User sending flow x in [0, x_max] along `path` (0-based link indices).
/// Utility xi * log(1 + x + zeta) with xi ~ U[xi_lo, xi_hi], zeta ~ U[zeta_lo, zeta_hi].
struct CongestionUser {
    std::vector<int> path;
    double xi_lo = 10.0, xi_hi = 12.0;
    double zeta_lo = 0.0, zeta_hi = 1.0;
    double x_max = 1.0;
    double p = 0.0;  // activation probability used by presets
};

struct CongestionConfig {
    std::vector<CongestionLink> links;
    std::vector<CongestionUser> users;
};

/// 8-node, 12-link network with 8 users (link table and user table of the
/// congestion-control study). Paths are 0-based.
inline CongestionConfig standard_congestion() {
    CongestionConfig cfg;
    const double a[12] = {5, 4, 3, 5, 4, 3, 5, 4, 3, 5, 4, 3};
    const double b[12] = {6, 10, 8, 6, 9, 5, 6, 5, 6, 6, 8, 9};
    const double c[12] = {5, 8, 6, 5, 8, 4, 5, 4, 4, 5, 7, 8};
    for (int l = 0; l < 12; ++l) cfg.links.push_back({a[l], b[l], c[l]});
    const std::vector<std::vector<int>> paths = {
        {1, 2, 12}, {3, 4, 5}, {10, 11, 12}, {6, 9, 12}, {5, 8}, {1, 2, 7}, {3, 10, 11}, {6}};
    const double x_max[8] = {3, 4, 4, 3, 5, 3, 4, 3};
    for (int i = 0; i < 8; ++i) {
        CongestionUser u;
        for (int l : paths[static_cast<std::size_t>(i)]) u.path.push_back(l - 1);
        u.x_max = x_max[i];
        u.p = 1.0 / 8.0;
        cfg.users.push_back(u);
    }
    return cfg;
}

namespace detail {

// u log u - u, antiderivative of log u.
inline double xlogx_minus_x(double u) { return u * std::log(u) - u; }

// E_zeta[log(1 + x + zeta)], zeta ~ U[lo, hi].
inline double expected_log_utility(double x, double lo, double hi) {
    if (hi == lo) return std::log(1.0 + x + lo);
    return (xlogx_minus_x(1.0 + x + hi) - xlogx_minus_x(1.0 + x + lo)) / (hi - lo);
}

// d/dx E_zeta[log(1 + x + zeta)] = E[1 / (1 + x + zeta)].
inline double expected_log_utility_slope(double x, double lo, double hi) {
    if (hi == lo) return 1.0 / (1.0 + x + lo);
    return (std::log(1.0 + x + hi) - std::log(1.0 + x + lo)) / (hi - lo);
}

}  // namespace detail

/// Builds the (generalized) congestion game. Player sets X_i(x_{-i}) are the
/// capacity-limited flow intervals; the joint set for the gap function is the
/// polytope {0 <= x <= x_max, A x <= c}.
inline GameModel make_congestion(const CongestionConfig& cfg) {
    const int L = static_cast<int>(cfg.links.size());
    const int N = static_cast<int>(cfg.users.size());
    if (L < 1 || N < 1) throw std::invalid_argument("make_congestion: need at least one link and one user");
    for (int l = 0; l < L; ++l) {
        const auto& k = cfg.links[static_cast<std::size_t>(l)];
        if (!(k.a > 0.0) || !(k.c > 0.0) || !(k.c < k.b))
            throw std::invalid_argument("make_congestion: link " + std::to_string(l + 1) +
                                        " needs a > 0 and 0 < c < b");
    }

    RoutingData routing;
    routing.routing = Matrix::Zero(L, N);
    routing.capacity.resize(L);
    routing.x_max.resize(N);
    for (int l = 0; l < L; ++l) routing.capacity[l] = cfg.links[static_cast<std::size_t>(l)].c;
    for (int i = 0; i < N; ++i) {
        const auto& u = cfg.users[static_cast<std::size_t>(i)];
        if (u.path.empty()) throw std::invalid_argument("make_congestion: user with empty path");
        if (!(u.x_max > 0.0) || u.xi_lo > u.xi_hi || u.zeta_lo > u.zeta_hi || u.zeta_lo <= -1.0)
            throw std::invalid_argument("make_congestion: invalid user parameters");
        for (int l : u.path) {
            if (l < 0 || l >= L) throw std::invalid_argument("make_congestion: path references unknown link");
            routing.routing(l, i) = 1.0;
        }
        routing.x_max[i] = u.x_max;
    }

    GameModel g;
    g.name = "congestion";
    g.dims.assign(static_cast<std::size_t>(N), 1);
    for (int i = 0; i < N; ++i) g.sets.push_back(FeasibleSet::interval(0.0, routing.x_max[i]));
    g.joint_set = FeasibleSet::polytope(routing.routing, routing.capacity, Vector::Zero(N), routing.x_max);

    const auto links = cfg.links;
    const auto users = cfg.users;
    const Matrix A = routing.routing;

    // Price derivative a / (b - S)^2 summed over the user's path.
    auto path_price_slope = [links, A](int i, const Vector& x) {
        const Vector load = A * x;
        double acc = 0.0;
        for (Eigen::Index l = 0; l < A.rows(); ++l) {
            if (A(l, i) == 0.0) continue;
            const auto& k = links[static_cast<std::size_t>(l)];
            const double slack = k.b - load[l];
            if (!(slack > 0.0))
                throw InfeasibleError("congestion: load " + std::to_string(load[l]) + " on link " +
                                      std::to_string(l + 1) + " reaches the price pole b = " + std::to_string(k.b));
            acc += k.a / (slack * slack);
        }
        return acc;
    };

    g.grad_oracle = [path_price_slope, users](PlayerId i, const StrategyProfile& x, const Vector&, Stream& s) {
        const auto& u = users[static_cast<std::size_t>(i.index)];
        const double xi = u.xi_lo == u.xi_hi ? u.xi_lo : s.uniform(u.xi_lo, u.xi_hi);
        const double zeta = u.zeta_lo == u.zeta_hi ? u.zeta_lo : s.uniform(u.zeta_lo, u.zeta_hi);
        const double own = x.flat()[i.index];
        return Vector::Constant(1, path_price_slope(i, x.flat()) - xi / (1.0 + own + zeta));
    };
    g.block_oracle = [links, users, A](PlayerId i, const StrategyProfile& x, const Vector&) -> GameModel::BlockOracle {
        // Per path link: (a, b - rival load).
        const Vector load = A * x.flat();
        const double own0 = x.flat()[i.index];
        std::vector<std::pair<double, double>> path;
        for (Eigen::Index l = 0; l < A.rows(); ++l)
            if (A(l, i.index) != 0.0) {
                const auto& k = links[static_cast<std::size_t>(l)];
                path.emplace_back(k.a, k.b - (load[l] - own0));
            }
        const auto u = users[static_cast<std::size_t>(i.index)];
        return [path = std::move(path), u](const Vector& own, Stream& s, Vector& out) {
            const double xi = u.xi_lo == u.xi_hi ? u.xi_lo : s.uniform(u.xi_lo, u.xi_hi);
            const double zeta = u.zeta_lo == u.zeta_hi ? u.zeta_lo : s.uniform(u.zeta_lo, u.zeta_hi);
            double acc = 0.0;
            for (const auto& [a, room] : path) {
                const double slack = room - own[0];
                if (!(slack > 0.0)) throw InfeasibleError("congestion: link load reaches the price pole");
                acc += a / (slack * slack);
            }
            out[0] = acc - xi / (1.0 + own[0] + zeta);
        };
    };
    g.exact_grad = [path_price_slope, users](PlayerId i, const StrategyProfile& x, const Vector&) {
        const auto& u = users[static_cast<std::size_t>(i.index)];
        const double mean_xi = 0.5 * (u.xi_lo + u.xi_hi);
        const double own = x.flat()[i.index];
        return Vector::Constant(
            1, path_price_slope(i, x.flat()) - mean_xi * detail::expected_log_utility_slope(own, u.zeta_lo, u.zeta_hi));
    };

    auto link_price = [links](int l, double load) {
        const auto& k = links[static_cast<std::size_t>(l)];
        if (!(k.b - load > 0.0)) throw InfeasibleError("congestion: link load reaches the price pole");
        return k.a / (k.b - load);
    };
    auto expected_utility = [users](int i, double own) {
        const auto& u = users[static_cast<std::size_t>(i)];
        return 0.5 * (u.xi_lo + u.xi_hi) * detail::expected_log_utility(own, u.zeta_lo, u.zeta_hi);
    };
    g.objective = [A, link_price, expected_utility](PlayerId i, const StrategyProfile& x, const Vector&) {
        const Vector load = A * x.flat();
        double acc = 0.0;
        for (Eigen::Index l = 0; l < A.rows(); ++l)
            if (A(l, i.index) != 0.0) acc += link_price(static_cast<int>(l), load[l]);
        return acc - expected_utility(i, x.flat()[i.index]);
    };
    g.potential = [A, link_price, expected_utility](const StrategyProfile& x) {
        const Vector load = A * x.flat();
        double acc = 0.0;
        for (Eigen::Index l = 0; l < A.rows(); ++l) acc += link_price(static_cast<int>(l), load[l]);
        for (int i = 0; i < x.players(); ++i) acc -= expected_utility(i, x.flat()[i]);
        return acc;
    };
    g.coupled_set = [routing](PlayerId i, const StrategyProfile& x) {
        return feasible_interval_congestion(routing, i, x);
    };

    // Lipschitz bound of grad_{x_i} f_i over X: loads never exceed c_l, so
    // |d/dx_j grad_i| <= sum_{l in P_i and P_j} 2 a_l / (b_l - c_l)^3, plus the
    // utility curvature E[xi] / ((1 + zeta_lo)(1 + zeta_hi)) on the diagonal.
    double M = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto& u = users[static_cast<std::size_t>(i)];
        double sq = 0.0;
        for (int j = 0; j < N; ++j) {
            double entry = 0.0;
            for (int l = 0; l < L; ++l) {
                if (A(l, i) == 0.0 || A(l, j) == 0.0) continue;
                const auto& k = links[static_cast<std::size_t>(l)];
                entry += 2.0 * k.a / std::pow(k.b - k.c, 3);
            }
            if (j == i) entry += 0.5 * (u.xi_lo + u.xi_hi) / ((1.0 + u.zeta_lo) * (1.0 + u.zeta_hi));
            sq += entry * entry;
        }
        g.lipschitz.push_back(std::sqrt(sq));

        double bound = u.xi_hi / (1.0 + u.zeta_lo);
        for (int l : u.path) {
            const auto& k = links[static_cast<std::size_t>(l)];
            bound += k.a / ((k.b - k.c) * (k.b - k.c));
        }
        M = std::max(M, bound);
    }
    g.grad_bound = M;
    g.validate();
    return g;
}

/// Routing matrix and capacities of a congestion config (for audits).
inline RoutingData congestion_routing(const CongestionConfig& cfg) {
    const int L = static_cast<int>(cfg.links.size());
    const int N = static_cast<int>(cfg.users.size());
    RoutingData r;
    r.routing = Matrix::Zero(L, N);
    r.capacity.resize(L);
    r.x_max.resize(N);
    for (int l = 0; l < L; ++l) r.capacity[l] = cfg.links[static_cast<std::size_t>(l)].c;
    for (int i = 0; i < N; ++i) {
        for (int l : cfg.users[static_cast<std::size_t>(i)].path) r.routing(l, i) = 1.0;
        r.x_max[i] = cfg.users[static_cast<std::size_t>(i)].x_max;
    }
    return r;
}

}  // namespace pnash::games
