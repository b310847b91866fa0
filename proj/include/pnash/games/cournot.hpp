#pragma once

#include "pnash/game_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

namespace pnash::games {

/// Firm -> market adjacency (0-based markets).
struct CournotNetwork {
    int markets = 0;
    std::vector<std::vector<int>> firm_markets;
};

/// 13 firms selling into 7 markets (networked Cournot study).
inline CournotNetwork standard_cournot_network() {
    CournotNetwork net;
    net.markets = 7;
    const std::vector<std::vector<int>> one_based = {
        {1, 2},       // C1
        {2, 3},       // C2
        {3},          // C3
        {1},          // C4
        {1, 2, 3, 4}, // C5
        {3, 4, 5},    // C6
        {3, 5},       // C7
        {1, 4, 6},    // C8
        {5},          // C9
        {5, 7},       // C10
        {6, 7},       // C11
        {6, 7},       // C12
        {5, 7},       // C13
    };
    for (const auto& row : one_based) {
        std::vector<int> m;
        for (int j : row) m.push_back(j - 1);
        net.firm_markets.push_back(m);
    }
    return net;
}

/// Uniform laws of the instance parameters and noises.
struct CournotLaws {
    double cap_lo = 5.0, cap_hi = 8.0;
    double cost_lo = 2.0, cost_hi = 4.0;
    double a_lo = 4.0, a_hi = 6.0;
    double b_lo = 0.2, b_hi = 0.4;
    double cost_noise = 1.0 / 8.0;   // xi ~ U[-c * cost_noise, c * cost_noise]
    double price_noise = 1.0 / 8.0;  // zeta ~ U[-a* * price_noise, a* * price_noise]
    double sales_lo = 0.0, sales_hi = 5.0;  // historic aggregate sales S_j
};

/// A concrete instance: per-firm per-market cost and capacity, true pricing
/// parameters, noise scales and the prior box of theta_i(0).
struct CournotInstance {
    CournotNetwork network;
    std::vector<Vector> cost;      // c_i, one entry per connected market
    std::vector<Vector> capacity;  // cap_i
    Vector a_true;
    Vector b_true;
    double cost_noise = 1.0 / 8.0;
    double price_noise = 1.0 / 8.0;
    double sales_lo = 0.0, sales_hi = 5.0;
    double theta0_a_lo = 4.0, theta0_a_hi = 6.0;
    double theta0_b_lo = 0.2, theta0_b_hi = 0.4;
};

/// Draws every parameter from `laws` under `seed`.
inline CournotInstance draw_cournot(const CournotNetwork& net, const CournotLaws& laws, std::uint64_t seed) {
    CournotInstance inst;
    inst.network = net;
    Stream root = Stream(seed).split("cournot-instance");
    Stream market_stream = root.split("markets");
    inst.a_true.resize(net.markets);
    inst.b_true.resize(net.markets);
    for (int j = 0; j < net.markets; ++j) {
        inst.a_true[j] = market_stream.uniform(laws.a_lo, laws.a_hi);
        inst.b_true[j] = market_stream.uniform(laws.b_lo, laws.b_hi);
    }
    for (std::size_t i = 0; i < net.firm_markets.size(); ++i) {
        Stream fs = root.split("firm", i);
        const auto n = static_cast<Eigen::Index>(net.firm_markets[i].size());
        Vector cap(n), cost(n);
        for (Eigen::Index p = 0; p < n; ++p) {
            cap[p] = fs.uniform(laws.cap_lo, laws.cap_hi);
            cost[p] = fs.uniform(laws.cost_lo, laws.cost_hi);
        }
        inst.capacity.push_back(cap);
        inst.cost.push_back(cost);
    }
    inst.cost_noise = laws.cost_noise;
    inst.price_noise = laws.price_noise;
    inst.sales_lo = laws.sales_lo;
    inst.sales_hi = laws.sales_hi;
    inst.theta0_a_lo = laws.a_lo;
    inst.theta0_a_hi = laws.a_hi;
    inst.theta0_b_lo = laws.b_lo;
    inst.theta0_b_hi = laws.b_hi;
    return inst;
}

/// Curvature of the per-market learning objective E[(a - b S - p)^2]:
/// 2 [[1, -E S], [-E S, E S^2]] for S ~ U[lo, hi]. Returns (mu_g, L_g).
inline std::pair<double, double> cournot_learning_curvature(double sales_lo, double sales_hi) {
    const double m1 = 0.5 * (sales_lo + sales_hi);
    const double m2 = (sales_hi * sales_hi + sales_hi * sales_lo + sales_lo * sales_lo) / 3.0;
    Eigen::Matrix2d H;
    H << 2.0, -2.0 * m1, -2.0 * m1, 2.0 * m2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
    return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

/// Builds the misspecified Cournot game. Beliefs theta_i are laid out as
/// (a_j, b_j) pairs over the markets firm i is connected to, in the order of
/// `firm_markets[i]`; Theta is the nonnegative orthant.
inline MisspecifiedGameModel make_cournot(const CournotInstance& inst) {
    const auto& net = inst.network;
    const int N = static_cast<int>(net.firm_markets.size());
    const int L = net.markets;
    if (N < 1 || L < 1) throw std::invalid_argument("make_cournot: empty network");
    if (static_cast<int>(inst.cost.size()) != N || static_cast<int>(inst.capacity.size()) != N ||
        inst.a_true.size() != L || inst.b_true.size() != L)
        throw std::invalid_argument("make_cournot: parameter arrays do not match the network");
    for (int i = 0; i < N; ++i) {
        const auto& m = net.firm_markets[static_cast<std::size_t>(i)];
        if (m.empty()) throw std::invalid_argument("make_cournot: firm without markets");
        for (std::size_t p = 0; p < m.size(); ++p) {
            if (m[p] < 0 || m[p] >= L) throw std::invalid_argument("make_cournot: unknown market");
            for (std::size_t q = 0; q < p; ++q)
                if (m[q] == m[p]) throw std::invalid_argument("make_cournot: duplicate market for a firm");
        }
        if (inst.cost[static_cast<std::size_t>(i)].size() != static_cast<Eigen::Index>(m.size()) ||
            inst.capacity[static_cast<std::size_t>(i)].size() != static_cast<Eigen::Index>(m.size()))
            throw std::invalid_argument("make_cournot: cost/capacity length mismatch");
    }
    if ((inst.a_true.array() < 0.0).any() || (inst.b_true.array() <= 0.0).any())
        throw std::invalid_argument("make_cournot: need a* >= 0 and b* > 0");

    const auto markets = net.firm_markets;
    const Vector a_true = inst.a_true;
    const Vector b_true = inst.b_true;
    const auto cost = inst.cost;
    const double cost_noise = inst.cost_noise;
    const double price_noise = inst.price_noise;
    const double s_lo = inst.sales_lo, s_hi = inst.sales_hi;

    MisspecifiedGameModel mg;
    GameModel& g = mg.game;
    g.name = "cournot";
    for (int i = 0; i < N; ++i) {
        g.dims.push_back(static_cast<int>(markets[static_cast<std::size_t>(i)].size()));
        const Vector& cap = inst.capacity[static_cast<std::size_t>(i)];
        g.sets.push_back(FeasibleSet::box(Vector::Zero(cap.size()), cap));
    }
    {
        StrategyProfile lo(g.dims), hi(g.dims);
        for (int i = 0; i < N; ++i) hi.block(i) = inst.capacity[static_cast<std::size_t>(i)];
        g.joint_set = FeasibleSet::box(lo.flat(), hi.flat());
    }

    // Aggregate sales S = sum_i A_i x_i.
    auto sales = [markets, L](const StrategyProfile& x) {
        Vector S = Vector::Zero(L);
        for (int i = 0; i < x.players(); ++i) {
            const auto& m = markets[static_cast<std::size_t>(i)];
            for (std::size_t p = 0; p < m.size(); ++p) S[m[p]] += x.block(i)[static_cast<Eigen::Index>(p)];
        }
        return S;
    };
    // Belief of firm i: given theta (pairs) or theta* when empty.
    auto belief = [markets, a_true, b_true](int i, const Vector& theta, std::size_t p) {
        const int j = markets[static_cast<std::size_t>(i)][p];
        if (theta.size() == 0) return std::pair<double, double>{a_true[j], b_true[j]};
        return std::pair<double, double>{theta[static_cast<Eigen::Index>(2 * p)],
                                         theta[static_cast<Eigen::Index>(2 * p + 1)]};
    };

    // grad_{x_i} psi_i = (c_i + xi_i) - A_i^T (a + zeta - B S) + A_i^T B A_i x_i
    g.grad_oracle = [=](PlayerId i, const StrategyProfile& x, const Vector& theta, Stream& s) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        const Vector S = sales(x);
        Vector out(static_cast<Eigen::Index>(m.size()));
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(p);
            const int j = m[p];
            const auto [a, b] = belief(i, theta, p);
            const double c = cost[static_cast<std::size_t>(i.index)][e];
            const double xi = cost_noise > 0.0 ? s.uniform(-c * cost_noise, c * cost_noise) : 0.0;
            const double zeta =
                price_noise > 0.0 ? s.uniform(-a_true[j] * price_noise, a_true[j] * price_noise) : 0.0;
            out[e] = c + xi - (a + zeta - b * S[j]) + b * x.block(i)[e];
        }
        return out;
    };
    g.block_oracle = [=](PlayerId i, const StrategyProfile& x, const Vector& theta) -> GameModel::BlockOracle {
        struct Term {
            double c, c_half, a, b, rival, a_half;
        };
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        const Vector S = sales(x);
        std::vector<Term> terms;
        terms.reserve(m.size());
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(p);
            const int j = m[p];
            const auto [a, b] = belief(i, theta, p);
            const double c = cost[static_cast<std::size_t>(i.index)][e];
            terms.push_back({c, c * cost_noise, a, b, S[j] - x.block(i)[e], a_true[j] * price_noise});
        }
        return [terms = std::move(terms)](const Vector& own, Stream& s, Vector& out) {
            for (std::size_t p = 0; p < terms.size(); ++p) {
                const Term& t = terms[p];
                const auto e = static_cast<Eigen::Index>(p);
                const double xi = t.c_half > 0.0 ? s.uniform(-t.c_half, t.c_half) : 0.0;
                const double zeta = t.a_half > 0.0 ? s.uniform(-t.a_half, t.a_half) : 0.0;
                out[e] = t.c + xi - (t.a + zeta - t.b * (t.rival + own[e])) + t.b * own[e];
            }
        };
    };
    g.exact_grad = [=](PlayerId i, const StrategyProfile& x, const Vector& theta) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        const Vector S = sales(x);
        Vector out(static_cast<Eigen::Index>(m.size()));
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(p);
            const auto [a, b] = belief(i, theta, p);
            out[e] = cost[static_cast<std::size_t>(i.index)][e] - (a - b * S[m[p]]) + b * x.block(i)[e];
        }
        return out;
    };
    g.objective = [=](PlayerId i, const StrategyProfile& x, const Vector& theta) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        const Vector S = sales(x);
        double acc = 0.0;
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(p);
            const auto [a, b] = belief(i, theta, p);
            const double q = x.block(i)[e];
            acc += cost[static_cast<std::size_t>(i.index)][e] * q - q * a + q * b * S[m[p]];
        }
        return acc;
    };
    // P(x) = sum c_i^T x_i - S^T a* + col{A_i x_i}^T chi col{A_i x_i},
    // chi = (I + J)/2 (x) B*, i.e. 1/2 sum_i |A_i x_i|_B^2 + 1/2 |S|_B^2.
    g.potential = [=](const StrategyProfile& x) {
        const Vector S = sales(x);
        double acc = -S.dot(a_true) + 0.5 * S.dot(b_true.cwiseProduct(S));
        for (int i = 0; i < x.players(); ++i) {
            const auto& m = markets[static_cast<std::size_t>(i)];
            for (std::size_t p = 0; p < m.size(); ++p) {
                const double q = x.block(i)[static_cast<Eigen::Index>(p)];
                acc += cost[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(p)] * q;
                acc += 0.5 * b_true[m[p]] * q * q;
            }
        }
        return acc;
    };
    // The proximal subproblem separates across markets:
    //   y_p = clamp((a_j - c_p - b_j S_{-i,j} + mu x_p) / (2 b_j + mu), 0, cap_p).
    const auto capacity = inst.capacity;
    g.exact_prox = [=](PlayerId i, const StrategyProfile& x, double mu, const Vector& theta) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        const Vector S = sales(x);
        Vector out(static_cast<Eigen::Index>(m.size()));
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(p);
            const auto [a, b] = belief(i, theta, p);
            const double own = x.block(i)[e];
            const double rivals = S[m[p]] - own;
            const double c = cost[static_cast<std::size_t>(i.index)][e];
            out[e] = std::clamp((a - c - b * rivals + mu * own) / (2.0 * b + mu), 0.0,
                                capacity[static_cast<std::size_t>(i.index)][e]);
        }
        return out;
    };
    g.exact_best_response = [proximal = g.exact_prox](PlayerId i, const StrategyProfile& x, const Vector& theta) {
        return proximal(i, x, 0.0, theta);
    };

    // Jacobian of the stacked gradient at theta*: entry ((i,p),(k,q)) is
    // b_j [m_kq = j] + b_j [(k,q) = (i,p)] with j = m_ip.
    const int n = [&] {
        int t = 0;
        for (int d : g.dims) t += d;
        return t;
    }();
    Matrix J = Matrix::Zero(n, n);
    std::vector<int> market_of;
    for (int i = 0; i < N; ++i)
        for (int j : markets[static_cast<std::size_t>(i)]) market_of.push_back(j);
    for (int r = 0; r < n; ++r) {
        const int j = market_of[static_cast<std::size_t>(r)];
        for (int c = 0; c < n; ++c)
            if (market_of[static_cast<std::size_t>(c)] == j) J(r, c) += b_true[j];
        J(r, r) += b_true[j];
    }
    double L_x = 0.0;
    double M = 0.0;
    int row = 0;
    for (int i = 0; i < N; ++i) {
        const int d = g.dims[static_cast<std::size_t>(i)];
        const Matrix block = J.middleRows(row, d);
        const double Li = Eigen::JacobiSVD<Matrix>(block).singularValues()[0];
        g.lipschitz.push_back(Li);
        g.strong_convexity.push_back(2.0 * b_true.minCoeff());
        L_x = std::max(L_x, Li);

        // |grad_p| <= c (1 + noise) + a* (1 + noise) + b* (total capacity into j + own capacity)
        double sq = 0.0;
        for (int p = 0; p < d; ++p) {
            const int j = market_of[static_cast<std::size_t>(row + p)];
            double inflow = 0.0;
            for (int k = 0; k < N; ++k) {
                const auto& mk = markets[static_cast<std::size_t>(k)];
                for (std::size_t q = 0; q < mk.size(); ++q)
                    if (mk[q] == j) inflow += capacity[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(q)];
            }
            const double bound = cost[static_cast<std::size_t>(i)][p] * (1.0 + cost_noise) +
                                 a_true[j] * (1.0 + price_noise) +
                                 b_true[j] * (inflow + capacity[static_cast<std::size_t>(i)][p]);
            sq += bound * bound;
        }
        M = std::max(M, std::sqrt(sq));
        row += d;
    }
    g.grad_bound = M;

    // Learning: per connected market, S ~ U[s_lo, s_hi], p = a* + zeta - b* S,
    // sampled gradient 2 (a - b S - p) (1, -S).
    LearningModel& lm = mg.learning;
    for (int i = 0; i < N; ++i) {
        const auto& m = markets[static_cast<std::size_t>(i)];
        const auto d = static_cast<Eigen::Index>(2 * m.size());
        Vector truth(d), lo(d), hi(d);
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(2 * p);
            truth[e] = a_true[m[p]];
            truth[e + 1] = b_true[m[p]];
            lo[e] = inst.theta0_a_lo;
            hi[e] = inst.theta0_a_hi;
            lo[e + 1] = inst.theta0_b_lo;
            hi[e + 1] = inst.theta0_b_hi;
        }
        lm.theta_true.push_back(truth);
        lm.theta_sets.push_back(FeasibleSet::orthant(static_cast<int>(d)));
        lm.theta_init_box.push_back(Box{lo, hi});
    }
    lm.grad_oracle = [=](PlayerId i, const Vector& theta, Stream& s) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        Vector out(theta.size());
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(2 * p);
            const int j = m[p];
            const double S = s_hi > s_lo ? s.uniform(s_lo, s_hi) : s_lo;
            const double zeta =
                price_noise > 0.0 ? s.uniform(-a_true[j] * price_noise, a_true[j] * price_noise) : 0.0;
            const double price = a_true[j] + zeta - b_true[j] * S;
            const double r = theta[e] - theta[e + 1] * S - price;
            out[e] = 2.0 * r;
            out[e + 1] = -2.0 * r * S;
        }
        return out;
    };
    lm.batch_mean = [=](PlayerId i, const Vector& theta, std::int64_t n, Stream& s, Vector& mean) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        mean.setZero(theta.size());
        for (std::int64_t t = 0; t < n; ++t) {
            for (std::size_t p = 0; p < m.size(); ++p) {
                const auto e = static_cast<Eigen::Index>(2 * p);
                const int j = m[p];
                const double S = s_hi > s_lo ? s.uniform(s_lo, s_hi) : s_lo;
                const double zeta =
                    price_noise > 0.0 ? s.uniform(-a_true[j] * price_noise, a_true[j] * price_noise) : 0.0;
                const double price = a_true[j] + zeta - b_true[j] * S;
                const double r = theta[e] - theta[e + 1] * S - price;
                mean[e] += 2.0 * r;
                mean[e + 1] -= 2.0 * r * S;
            }
        }
        mean /= static_cast<double>(n);
    };
    const double m1 = 0.5 * (s_lo + s_hi);
    const double m2 = (s_hi * s_hi + s_hi * s_lo + s_lo * s_lo) / 3.0;
    lm.objective = [=](PlayerId i, const Vector& theta) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        double acc = 0.0;
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(2 * p);
            const int j = m[p];
            const double da = theta[e] - a_true[j];
            const double db = theta[e + 1] - b_true[j];
            const double h = a_true[j] * price_noise;
            acc += da * da - 2.0 * da * db * m1 + db * db * m2 + h * h / 3.0;
        }
        return acc;
    };
    lm.exact_grad = [=](PlayerId i, const Vector& theta) {
        const auto& m = markets[static_cast<std::size_t>(i.index)];
        Vector out(theta.size());
        for (std::size_t p = 0; p < m.size(); ++p) {
            const auto e = static_cast<Eigen::Index>(2 * p);
            const double da = theta[e] - a_true[m[p]];
            const double db = theta[e + 1] - b_true[m[p]];
            out[e] = 2.0 * da - 2.0 * db * m1;
            out[e + 1] = -2.0 * da * m1 + 2.0 * db * m2;
        }
        return out;
    };
    std::tie(lm.mu_g, lm.L_g) = cournot_learning_curvature(s_lo, s_hi);
    lm.L_x = L_x;

    mg.validate();
    return mg;
}

inline MisspecifiedGameModel make_cournot(const CournotNetwork& net, const CournotLaws& laws, std::uint64_t seed) {
    return make_cournot(draw_cournot(net, laws, seed));
}

}  // namespace pnash::games
