#pragma once

#include "pnash/errors.hpp"
#include "pnash/profile.hpp"
#include "pnash/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

namespace pnash {

struct Box {
    Vector lo;
    Vector hi;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct NonnegOrthant {
    int dim = 1;
};

/// {x : A x <= c, lo <= x <= hi}
struct Polytope {
    Matrix A;
    Vector c;
    Vector lo;
    Vector hi;
};

/// Closed convex set used as a strategy or parameter set.
class FeasibleSet {
public:
    using Variant = std::variant<Box, Interval, NonnegOrthant, Polytope>;

    FeasibleSet() : v_(Interval{0.0, 0.0}) {}

    static FeasibleSet box(Vector lo, Vector hi) {
        if (lo.size() != hi.size() || lo.size() == 0) throw std::invalid_argument("Box: bad dimensions");
        if ((lo.array() > hi.array()).any()) throw std::invalid_argument("Box: lo > hi");
        return FeasibleSet(Box{std::move(lo), std::move(hi)});
    }

    static FeasibleSet interval(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
        return FeasibleSet(Interval{lo, hi});
    }

    static FeasibleSet orthant(int dim) {
        if (dim < 1) throw std::invalid_argument("NonnegOrthant: dim must be >= 1");
        return FeasibleSet(NonnegOrthant{dim});
    }

    /// Validates nonemptiness with one Phase I solve.
    static FeasibleSet polytope(Matrix A, Vector c, Vector lo, Vector hi) {
        if (lo.size() != hi.size() || A.cols() != lo.size() || A.rows() != c.size())
            throw std::invalid_argument("Polytope: inconsistent dimensions");
        if ((lo.array() > hi.array()).any()) throw std::invalid_argument("Polytope: lo > hi");
        if (!lp_feasible(A, c, lo, hi)) throw InfeasibleError("Polytope: empty region");
        return FeasibleSet(Polytope{std::move(A), std::move(c), std::move(lo), std::move(hi)});
    }

    const Variant& variant() const { return v_; }

    int dim() const {
        return std::visit(
            [](const auto& s) -> int {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Interval>) return 1;
                else if constexpr (std::is_same_v<S, NonnegOrthant>) return s.dim;
                else return static_cast<int>(s.lo.size());
            },
            v_);
    }

    bool contains(const Vector& x, double tol = 0.0) const {
        if (x.size() != dim()) return false;
        return std::visit(
            [&](const auto& s) -> bool {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Interval>) return x[0] >= s.lo - tol && x[0] <= s.hi + tol;
                else if constexpr (std::is_same_v<S, NonnegOrthant>) return (x.array() >= -tol).all();
                else if constexpr (std::is_same_v<S, Box>)
                    return (x.array() >= s.lo.array() - tol).all() && (x.array() <= s.hi.array() + tol).all();
                else
                    return (x.array() >= s.lo.array() - tol).all() && (x.array() <= s.hi.array() + tol).all() &&
                           ((s.A * x - s.c).array() <= tol).all();
            },
            v_);
    }

    /// Euclidean diameter; infinite for the orthant.
    double diameter() const {
        return std::visit(
            [](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Interval>) return s.hi - s.lo;
                else if constexpr (std::is_same_v<S, NonnegOrthant>) return std::numeric_limits<double>::infinity();
                else return (s.hi - s.lo).norm();  // bounding box for polytopes
            },
            v_);
    }

private:
    explicit FeasibleSet(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

inline void check_dim(const FeasibleSet& set, const Vector& v, const char* op) {
    if (v.size() != set.dim())
        throw std::invalid_argument(std::string(op) + ": dimension " + std::to_string(v.size()) +
                                    " does not match set dimension " + std::to_string(set.dim()));
}

/// Euclidean projection onto a box, interval, or orthant.
inline Vector project(const FeasibleSet& set, const Vector& v) {
    check_dim(set, v, "project");
    return std::visit(
        [&](const auto& s) -> Vector {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Interval>) {
                Vector out(1);
                out[0] = std::clamp(v[0], s.lo, s.hi);
                return out;
            } else if constexpr (std::is_same_v<S, NonnegOrthant>) {
                return v.cwiseMax(0.0);
            } else if constexpr (std::is_same_v<S, Box>) {
                return v.cwiseMax(s.lo).cwiseMin(s.hi);
            } else {
                throw UnsupportedError("project: polytope projection is not supported");
            }
        },
        set.variant());
}

/// In-place projection for the hot loops; same sets as `project`.
inline void project_into(const FeasibleSet& set, Vector& v) {
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Interval>) v[0] = std::clamp(v[0], s.lo, s.hi);
            else if constexpr (std::is_same_v<S, NonnegOrthant>) v = v.cwiseMax(0.0);
            else if constexpr (std::is_same_v<S, Box>) v = v.cwiseMax(s.lo).cwiseMin(s.hi);
            else throw UnsupportedError("project: polytope projection is not supported");
        },
        set.variant());
}

struct LinearMinimum {
    Vector argmin;
    double value = 0.0;
};

/// Exact minimizer of cost^T y over the set. Box-like sets pick lo where
/// cost > 0, hi where cost < 0 and lo on ties; polytopes go through the simplex.
inline LinearMinimum linear_minimize(const FeasibleSet& set, const Vector& cost) {
    check_dim(set, cost, "linear_minimize");
    auto vertex = [&](const Vector& lo, const Vector& hi) {
        LinearMinimum out;
        out.argmin = lo;
        for (Eigen::Index j = 0; j < cost.size(); ++j)
            if (cost[j] < 0.0) out.argmin[j] = hi[j];
        out.value = cost.dot(out.argmin);
        return out;
    };
    return std::visit(
        [&](const auto& s) -> LinearMinimum {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Interval>) {
                return vertex(Vector::Constant(1, s.lo), Vector::Constant(1, s.hi));
            } else if constexpr (std::is_same_v<S, NonnegOrthant>) {
                if ((cost.array() < 0.0).any())
                    throw UnsupportedError("linear_minimize: unbounded below on the nonnegative orthant");
                return LinearMinimum{Vector::Zero(cost.size()), 0.0};
            } else if constexpr (std::is_same_v<S, Box>) {
                return vertex(s.lo, s.hi);
            } else {
                LpSolution sol = solve_lp(LinearProgram{cost, s.A, s.c, s.lo, s.hi});
                return LinearMinimum{std::move(sol.argmin), sol.value};
            }
        },
        set.variant());
}

/// Link-capacity data of a single-path routing game.
struct RoutingData {
    Matrix routing;  // L x N, entries in {0, 1}
    Vector capacity;  // c_l
    Vector x_max;     // per-user box bound
};

/// Player i's admissible flow interval [0, min(x_max_i, min_{l in path_i} c_l - sum_{j != i} A_lj x_j)].
inline FeasibleSet feasible_interval_congestion(const RoutingData& data, PlayerId player,
                                                const StrategyProfile& rivals) {
    const int i = player.index;
    const auto L = data.routing.rows();
    if (rivals.total_dim() != data.routing.cols())
        throw std::invalid_argument("feasible_interval_congestion: profile dimension mismatch");
    double upper = data.x_max[i];
    for (Eigen::Index l = 0; l < L; ++l) {
        if (data.routing(l, i) == 0.0) continue;
        double load = 0.0;
        for (Eigen::Index j = 0; j < data.routing.cols(); ++j)
            if (j != i) load += data.routing(l, j) * rivals.flat()[j];
        upper = std::min(upper, data.capacity[l] - load);
    }
    if (upper < 0.0)
        throw InfeasibleError("infeasible rival profile: player " + std::to_string(i) +
                              " has upper flow bound " + std::to_string(upper) + " < 0");
    return FeasibleSet::interval(0.0, upper);
}

}  // namespace pnash
