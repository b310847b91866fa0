#pragma once

#include "pnash/errors.hpp"
#include "pnash/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pnash {

/// min cost^T y  s.t.  A y <= rhs,  lo <= y <= hi.
struct LinearProgram {
    Vector cost;
    Matrix A;
    Vector rhs;
    Vector lo;
    Vector hi;
};

struct LpSolution {
    Vector argmin;
    double value = 0.0;
    int pivots = 0;
};

namespace detail {

/// Dense tableau simplex with Bland's rule and a slack/artificial Phase I.
///
/// Variables are shifted to u = y - lo so every column is nonnegative; upper
/// bounds become explicit rows. Column layout: [u (n) | slack (R) | artificial
/// (one per row with negative right-hand side)]. The last column is the rhs.
class DenseSimplex {
public:
    explicit DenseSimplex(const LinearProgram& lp) : lp_(lp) {
        n_ = static_cast<int>(lp.lo.size());
        m_ = static_cast<int>(lp.A.rows());
        if (lp.hi.size() != n_ || (m_ > 0 && lp.A.cols() != n_) || lp.rhs.size() != m_)
            throw std::invalid_argument("LinearProgram: inconsistent dimensions");
        if (lp.cost.size() != 0 && lp.cost.size() != n_)
            throw std::invalid_argument("LinearProgram: cost dimension mismatch");
        for (int j = 0; j < n_; ++j)
            if (!(lp.lo[j] <= lp.hi[j])) throw std::invalid_argument("LinearProgram: lo > hi");

        rows_ = m_ + n_;
        Vector shifted_rhs(rows_);
        if (m_ > 0) shifted_rhs.head(m_) = lp.rhs - lp.A * lp.lo;
        shifted_rhs.tail(n_) = lp.hi - lp.lo;

        std::vector<int> negative;
        for (int r = 0; r < rows_; ++r)
            if (shifted_rhs[r] < 0.0) negative.push_back(r);
        art_ = static_cast<int>(negative.size());
        cols_ = n_ + rows_ + art_;
        T_ = Matrix::Zero(rows_, cols_ + 1);
        basis_.assign(static_cast<std::size_t>(rows_), -1);

        for (int r = 0; r < rows_; ++r) {
            if (r < m_) T_.row(r).head(n_) = lp.A.row(r);
            else T_(r, r - m_) = 1.0;
            T_(r, n_ + r) = 1.0;
            T_(r, cols_) = shifted_rhs[r];
            basis_[static_cast<std::size_t>(r)] = n_ + r;
        }
        for (int a = 0; a < art_; ++a) {
            const int r = negative[static_cast<std::size_t>(a)];
            T_.row(r) *= -1.0;
            T_(r, n_ + rows_ + a) = 1.0;
            basis_[static_cast<std::size_t>(r)] = n_ + rows_ + a;
        }
        pivot_cap_ = 10 * (rows_ + cols_);
    }

    /// Runs Phase I; returns false if the region is empty.
    bool phase_one() {
        if (art_ == 0) return true;
        Vector c = Vector::Zero(cols_);
        c.tail(art_).setOnes();
        run(c, cols_);
        double infeas = 0.0;
        for (int r = 0; r < rows_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= n_ + rows_) infeas += T_(r, cols_);
        if (infeas > kFeasTol) return false;
        // Drive zero-valued artificials out of the basis.
        for (int r = 0; r < rows_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < n_ + rows_) continue;
            for (int j = 0; j < n_ + rows_; ++j) {
                if (std::abs(T_(r, j)) > kPivotTol) {
                    pivot(r, j);
                    break;
                }
            }
        }
        return true;
    }

    LpSolution phase_two() {
        Vector c = Vector::Zero(cols_);
        c.head(n_) = lp_.cost;
        run(c, n_ + rows_);
        LpSolution sol;
        Vector u = Vector::Zero(n_);
        for (int r = 0; r < rows_; ++r) {
            const int b = basis_[static_cast<std::size_t>(r)];
            if (b < n_) u[b] = T_(r, cols_);
        }
        sol.argmin = (lp_.lo + u).cwiseMax(lp_.lo).cwiseMin(lp_.hi);
        sol.value = lp_.cost.dot(sol.argmin);
        sol.pivots = pivots_;
        return sol;
    }

    int pivots() const { return pivots_; }

private:
    static constexpr double kPivotTol = 1e-11;
    static constexpr double kCostTol = 1e-11;
    static constexpr double kFeasTol = 1e-9;

    // Minimizes c^T v over the current tableau, allowing entering columns < limit.
    void run(const Vector& c, int limit) {
        for (;;) {
            // Reduced costs d_j = c_j - c_B^T column_j.
            int entering = -1;
            for (int j = 0; j < limit; ++j) {
                if (is_basic(j)) continue;
                double d = c[j];
                for (int r = 0; r < rows_; ++r) d -= c[basis_[static_cast<std::size_t>(r)]] * T_(r, j);
                if (d < -kCostTol) {
                    entering = j;  // Bland: lowest index
                    break;
                }
            }
            if (entering < 0) return;

            int leaving = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < rows_; ++r) {
                const double a = T_(r, entering);
                if (a <= kPivotTol) continue;
                const double ratio = std::max(0.0, T_(r, cols_)) / a;
                if (leaving < 0 || ratio < best - 1e-12) {
                    best = ratio;
                    leaving = r;
                } else if (ratio <= best + 1e-12 &&
                           basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leaving)]) {
                    best = std::min(best, ratio);
                    leaving = r;
                }
            }
            if (leaving < 0) throw LpError("simplex: unbounded direction in a bounded program (numerical breakdown)");
            if (pivots_ >= pivot_cap_)
                throw LpError("simplex: pivot cap " + std::to_string(pivot_cap_) + " exceeded (rows=" +
                              std::to_string(rows_) + ", cols=" + std::to_string(cols_) +
                              "); degenerate or cycling tableau");
            pivot(leaving, entering);
        }
    }

    bool is_basic(int j) const {
        for (int b : basis_)
            if (b == j) return true;
        return false;
    }

    void pivot(int r, int j) {
        T_.row(r) /= T_(r, j);
        for (int q = 0; q < rows_; ++q) {
            if (q == r) continue;
            const double f = T_(q, j);
            if (f != 0.0) T_.row(q) -= f * T_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = j;
        ++pivots_;
    }

    const LinearProgram& lp_;
    int n_ = 0, m_ = 0, rows_ = 0, cols_ = 0, art_ = 0;
    int pivots_ = 0, pivot_cap_ = 0;
    Matrix T_;
    std::vector<int> basis_;
};

}  // namespace detail

/// Solves the program exactly (up to round-off). Throws LpError on pivot-cap
/// exhaustion and InfeasibleError when the region is empty.
inline LpSolution solve_lp(const LinearProgram& lp) {
    detail::DenseSimplex s(lp);
    if (!s.phase_one()) throw InfeasibleError("simplex: feasible region is empty");
    return s.phase_two();
}

/// Phase I only.
inline bool lp_feasible(const Matrix& A, const Vector& rhs, const Vector& lo, const Vector& hi) {
    LinearProgram lp{Vector::Zero(lo.size()), A, rhs, lo, hi};
    detail::DenseSimplex s(lp);
    return s.phase_one();
}

}  // namespace pnash
