#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnash {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Index of a player in [0, N).
struct PlayerId {
    int index = 0;

    constexpr PlayerId() = default;
    constexpr explicit PlayerId(int i) : index(i) {}
    constexpr operator int() const { return index; }
};

/// Concatenated decision vector x = (x_1, ..., x_N) with per-player block
/// boundaries. Block i occupies [offset(i), offset(i) + dim(i)).
class StrategyProfile {
public:
    StrategyProfile() = default;

    explicit StrategyProfile(std::vector<int> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw std::invalid_argument("StrategyProfile: need at least one block");
        offsets_.resize(dims_.size());
        int off = 0;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (dims_[i] < 1) throw std::invalid_argument("StrategyProfile: block dimension must be >= 1");
            offsets_[i] = off;
            off += dims_[i];
        }
        data_ = Vector::Zero(off);
    }

    StrategyProfile(std::vector<int> dims, const Vector& flat) : StrategyProfile(std::move(dims)) {
        if (flat.size() != data_.size())
            throw std::invalid_argument("StrategyProfile: flat vector has dimension " +
                                        std::to_string(flat.size()) + ", expected " +
                                        std::to_string(data_.size()));
        data_ = flat;
    }

    int players() const { return static_cast<int>(dims_.size()); }
    int total_dim() const { return static_cast<int>(data_.size()); }
    int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
    int offset(int i) const { return offsets_.at(static_cast<std::size_t>(i)); }
    const std::vector<int>& dims() const { return dims_; }

    auto block(int i) { return data_.segment(offset(i), dim(i)); }
    auto block(int i) const { return data_.segment(offset(i), dim(i)); }

    void set_block(int i, const Vector& v) {
        if (v.size() != dim(i)) throw std::invalid_argument("StrategyProfile::set_block: dimension mismatch");
        block(i) = v;
    }

    const Vector& flat() const { return data_; }
    Vector& flat() { return data_; }

    bool finite() const { return data_.allFinite(); }

    bool same_layout(const StrategyProfile& other) const { return dims_ == other.dims_; }

    friend bool operator==(const StrategyProfile& a, const StrategyProfile& b) {
        return a.dims_ == b.dims_ && a.data_ == b.data_;
    }

private:
    std::vector<int> dims_;
    std::vector<int> offsets_;
    Vector data_;
};

}  // namespace pnash
