#pragma once

#include "pnash/profile.hpp"
#include "pnash/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <vector>

namespace pnash {

/// Categorical law of the activated player.
class ActivationDist {
public:
    explicit ActivationDist(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw std::invalid_argument("ActivationDist: no players");
        double total = 0.0;
        for (double p : probs_) {
            if (!(p > 0.0)) throw std::invalid_argument("ActivationDist: probabilities must be positive");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ActivationDist: probabilities must sum to 1");
    }

    static ActivationDist uniform(int n) { return ActivationDist(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n)); }

    int players() const { return static_cast<int>(probs_.size()); }
    double prob(int i) const { return probs_.at(static_cast<std::size_t>(i)); }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
};

inline PlayerId draw_player(const ActivationDist& dist, Stream& stream) {
    if (dist.players() == 1) return PlayerId(0);
    const double u = stream.uniform(0.0, 1.0);
    double acc = 0.0;
    for (int i = 0; i < dist.players(); ++i) {
        acc += dist.prob(i);
        if (u < acc) return PlayerId(i);
    }
    return PlayerId(dist.players() - 1);
}

/// Bounded delays d_ij in {0, ..., tau}, d_ii = 0, drawn i.i.d. uniform.
struct DelayModel {
    int tau = 0;

    explicit DelayModel(int t = 0) : tau(t) {
        if (tau < 0) throw std::invalid_argument("DelayModel: tau must be >= 0");
    }

    int sample(Stream& stream) const {
        if (tau == 0) return 0;
        return std::uniform_int_distribution<int>(0, tau)(stream);
    }
};

/// Last tau + 1 profiles indexed by iteration. Lookups before iteration 0
/// return the initial profile.
class HistoryBuffer {
public:
    HistoryBuffer(const StrategyProfile& initial, int tau) : initial_(initial), tau_(tau) {
        if (tau < 0) throw std::invalid_argument("HistoryBuffer: tau must be >= 0");
        ring_.push_back(initial);
    }

    /// Appends x(k + 1) after iteration k.
    void push(const StrategyProfile& x) {
        ring_.push_back(x);
        ++latest_;
        while (static_cast<int>(ring_.size()) > tau_ + 1) ring_.pop_front();
    }

    std::int64_t latest() const { return latest_; }

    const StrategyProfile& at(std::int64_t iter) const {
        if (iter < 0) return initial_;
        const std::int64_t first = latest_ - static_cast<std::int64_t>(ring_.size()) + 1;
        if (iter > latest_ || iter < first)
            throw std::out_of_range("HistoryBuffer: iteration " + std::to_string(iter) + " not retained");
        return ring_[static_cast<std::size_t>(iter - first)];
    }

    const StrategyProfile& current() const { return ring_.back(); }

private:
    StrategyProfile initial_;
    int tau_;
    std::deque<StrategyProfile> ring_;
    std::int64_t latest_ = 0;
};

struct DelayedView {
    StrategyProfile profile;
    std::vector<int> delays;  // d_ij(k), own entry 0
};

/// y^i(k): rival j's block taken from x(k - d_ij(k)), own block from x(k).
inline DelayedView assemble_view(const HistoryBuffer& buf, const DelayModel& model, PlayerId i, std::int64_t k,
                                 Stream& stream) {
    const StrategyProfile& now = buf.at(k);
    DelayedView v{now, std::vector<int>(static_cast<std::size_t>(now.players()), 0)};
    if (model.tau == 0) return v;
    for (int j = 0; j < now.players(); ++j) {
        if (j == i.index) continue;
        const int d = model.sample(stream);
        v.delays[static_cast<std::size_t>(j)] = d;
        if (d > 0) v.profile.block(j) = buf.at(k - d).block(j);
    }
    return v;
}

/// Local activation counts Gamma_i and the schedule exponent delta.
struct LocalCounters {
    std::vector<std::int64_t> gamma;
    double delta = 0.5;

    LocalCounters(int players, double d) : gamma(static_cast<std::size_t>(players), 1), delta(d) {
        if (!(delta > 0.0)) throw std::invalid_argument("LocalCounters: delta must be positive");
    }

    void record_activation(PlayerId i) { ++gamma.at(static_cast<std::size_t>(i.index)); }

    std::int64_t of(PlayerId i) const { return gamma.at(static_cast<std::size_t>(i.index)); }
};

struct InnerSteps {
    std::int64_t steps = 1;
    bool capped = false;
};

/// max(1, floor(Gamma_i^{2(1 + delta)})), capped at max_steps.
inline InnerSteps inner_step_schedule(const LocalCounters& c, PlayerId i, std::int64_t max_steps = 1'000'000) {
    const double raw = std::floor(std::pow(static_cast<double>(c.of(i)), 2.0 * (1.0 + c.delta)) + 1e-9);
    if (raw >= static_cast<double>(max_steps)) return {max_steps, raw > static_cast<double>(max_steps)};
    return {std::max<std::int64_t>(1, static_cast<std::int64_t>(raw)), false};
}

}  // namespace pnash
