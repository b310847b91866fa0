#pragma once

#include "pnash/algorithms.hpp"
#include "pnash/games/congestion.hpp"
#include "pnash/games/cournot.hpp"
#include "pnash/games/toy.hpp"
#include "pnash/games/weighted.hpp"
#include "pnash/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace pnash::cli {

// ---------------------------------------------------------------------------
// Config text: one `key = value` per line, `#` starts a comment.

class ConfigMap {
public:
    static ConfigMap parse(std::string_view text, const std::string& origin = "<config>") {
        ConfigMap m;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (m.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
            m.values_[key] = value;
        }
        return m;
    }

    static ConfigMap load(const std::filesystem::path& p) {
        std::ifstream f(p);
        if (!f) throw ConfigError("cannot open config file " + p.string());
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), p.string());
    }

    bool has(const std::string& k) const { return values_.count(k) > 0; }
    void set(const std::string& k, const std::string& v) { values_[k] = v; }

    const std::string& get(const std::string& k) const {
        used_.insert(k);
        auto it = values_.find(k);
        if (it == values_.end()) throw ConfigError("missing required key " + k);
        return it->second;
    }

    std::string get_or(const std::string& k, const std::string& def) const { return has(k) ? get(k) : def; }

    double number(const std::string& k) const { return to_number(k, get(k)); }
    double number_or(const std::string& k, double def) const { return has(k) ? number(k) : def; }
    std::int64_t integer(const std::string& k) const { return to_integer(k, get(k)); }
    std::int64_t integer_or(const std::string& k, std::int64_t def) const { return has(k) ? integer(k) : def; }

    bool flag_or(const std::string& k, bool def) const {
        if (!has(k)) return def;
        const std::string& v = get(k);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(k + ": expected true or false, got `" + v + "`");
    }

    std::vector<double> numbers(const std::string& k) const {
        std::vector<double> out;
        for (const auto& item : split_list(get(k))) out.push_back(to_number(k, item));
        if (out.empty()) throw ConfigError(k + ": empty list");
        return out;
    }

    void reject_unknown() const {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError("unknown key " + k);
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    static std::string trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return std::string(s.substr(b, e - b + 1));
    }

    static std::vector<std::string> split_list(const std::string& v) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(v);
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

private:
    static double to_number(const std::string& k, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(k + ": expected a number, got `" + v + "`");
        }
    }

    static std::int64_t to_integer(const std::string& k, const std::string& v) {
        const double d = to_number(k, v);
        if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(k + ": expected an integer, got `" + v + "`");
        return static_cast<std::int64_t>(d);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------

enum class GameKind { Toy, Congestion, Cournot };

struct ComparisonSpec {
    Algorithm baseline = Algorithm::AsyncSG;
    std::int64_t baseline_horizon = 100000;
    std::int64_t baseline_thinning = 100;
    std::vector<double> eps;
};

struct ExperimentConfig {
    GameKind game = GameKind::Toy;
    double toy_sigma = 0.0;
    std::optional<std::vector<double>> weights;
    std::string cournot_network = "standard";
    std::optional<std::uint64_t> game_seed;  // instance draw; defaults to run.seed
    double cournot_cost_noise = 1.0 / 8.0;
    double cournot_price_noise = 1.0 / 8.0;
    RunConfig run;
    bool reference_auto = false;
    std::int64_t replications = 1;
    std::filesystem::path out_dir = "out";
    std::optional<ComparisonSpec> comparison;
};

inline Algorithm parse_algorithm(const std::string& v) {
    for (Algorithm a : {Algorithm::ProxBR, Algorithm::GradResponse, Algorithm::PureBR, Algorithm::ProxBRLearning,
                        Algorithm::AsyncSG})
        if (v == to_string(a)) return a;
    throw ConfigError("algo.kind: unknown algorithm `" + v +
                      "` (prox-br, gradient-response, pure-br, prox-br-learning, async-sg)");
}

/// fixed:<beta> | <beta> | inv-lg | stable-range[:<fraction>]
inline BetaRule parse_beta_rule(const std::string& v) {
    const auto colon = v.find(':');
    const std::string head = v.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : v.substr(colon + 1);
    auto num = [&](const std::string& s) {
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ConfigError("algo.beta_rule: bad number in `" + v + "`");
        }
    };
    if (head == "inv-lg") return BetaRule::inv_lg();
    if (head == "stable-range") return BetaRule::stable_range(arg.empty() ? 0.5 : num(arg));
    if (head == "fixed") return BetaRule::fixed(arg.empty() ? 0.1 : num(arg));
    return BetaRule::fixed(num(v));
}

inline ExperimentConfig parse_experiment(const ConfigMap& m) {
    ExperimentConfig c;
    const std::string g = m.get("game.kind");
    if (g == "toy") c.game = GameKind::Toy;
    else if (g == "congestion") c.game = GameKind::Congestion;
    else if (g == "cournot") c.game = GameKind::Cournot;
    else throw ConfigError("game.kind: unknown game `" + g + "` (toy, congestion, cournot)");
    c.toy_sigma = m.number_or("game.sigma", 0.0);
    if (m.has("game.weights")) c.weights = m.numbers("game.weights");
    c.cournot_network = m.get_or("game.network", "standard");
    if (c.cournot_network != "standard" && c.cournot_network != "single")
        throw ConfigError("game.network: expected standard or single");
    if (m.has("game.seed")) c.game_seed = static_cast<std::uint64_t>(m.integer("game.seed"));
    c.cournot_cost_noise = m.number_or("game.cost_noise", 1.0 / 8.0);
    c.cournot_price_noise = m.number_or("game.price_noise", 1.0 / 8.0);

    RunConfig& r = c.run;
    r.algorithm = parse_algorithm(m.get("algo.kind"));
    r.mu = m.numbers("algo.mu");
    r.delta = m.number("algo.delta");
    if (!(r.delta > 0.0)) throw ConfigError("algo.delta must be positive");
    r.tau = static_cast<int>(m.integer("algo.tau"));
    r.beta_rule = parse_beta_rule(m.get("algo.beta_rule"));
    if (m.has("algo.activation") && m.get("algo.activation") != "uniform")
        r.activation = ActivationDist(m.numbers("algo.activation"));
    r.max_inner_steps = m.integer_or("algo.max_inner_steps", 1'000'000);
    const std::string inner = m.get_or("algo.inner", "sampled");
    if (inner == "sampled") r.inner_mode = InnerMode::Sampled;
    else if (inner == "exact") r.inner_mode = InnerMode::Exact;
    else throw ConfigError("algo.inner: expected sampled or exact");
    r.inject_noise = m.flag_or("algo.inject_noise", false);
    r.sg_exponent = m.number_or("algo.sg_exponent", 0.6);

    r.horizon = m.integer("run.horizon");
    r.seed = static_cast<std::uint64_t>(m.integer("run.seed"));
    c.replications = m.integer("run.replications");
    if (c.replications < 1) throw ConfigError("run.replications must be >= 1");
    r.thinning = m.integer("run.thinning");
    r.snapshots = m.flag_or("run.snapshots", true);
    r.compute_gap = m.flag_or("run.gap", true);
    const std::string ref = m.get_or("run.reference", "none");
    if (ref == "auto") c.reference_auto = true;
    else if (ref != "none") throw ConfigError("run.reference: expected none or auto");
    c.out_dir = m.get("out.dir");

    if (m.has("compare.baseline")) {
        ComparisonSpec s;
        s.baseline = parse_algorithm(m.get("compare.baseline"));
        s.baseline_horizon = m.integer_or("compare.baseline_horizon", 100000);
        s.baseline_thinning = m.integer_or("compare.baseline_thinning", 100);
        s.eps = m.has("compare.eps") ? m.numbers("compare.eps") : std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4, 1e-5};
        c.comparison = s;
    }
    m.reject_unknown();
    return c;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
    std::string name;
    std::string description;
    std::string text;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = {
        {"toy", "two-player quadratic game, proximal BR, single path",
         "game.kind = toy\n"
         "algo.kind = prox-br\nalgo.mu = 1\nalgo.delta = 0.5\nalgo.tau = 0\nalgo.beta_rule = fixed:0.1\n"
         "algo.max_inner_steps = 10000\n"
         "run.horizon = 500\nrun.seed = 1\nrun.replications = 1\nrun.thinning = 1\nrun.reference = auto\n"
         "out.dir = out/toy\n"},
        {"congestion-path", "congestion control, flow-rate trajectories of one sample path",
         "game.kind = congestion\n"
         "algo.kind = prox-br\nalgo.mu = 1\nalgo.delta = 0.5\nalgo.tau = 4\nalgo.beta_rule = fixed:0.1\n"
         "run.horizon = 300\nrun.seed = 1\nrun.replications = 1\nrun.thinning = 1\n"
         "out.dir = out/congestion-path\n"},
        {"congestion-mean", "congestion control, mean gap over 50 sample paths",
         "game.kind = congestion\n"
         "algo.kind = prox-br\nalgo.mu = 1\nalgo.delta = 0.5\nalgo.tau = 4\nalgo.beta_rule = fixed:0.1\n"
         "run.horizon = 300\nrun.seed = 1\nrun.replications = 50\nrun.thinning = 5\n"
         "out.dir = out/congestion-mean\n"},
        {"cournot-learning", "networked Cournot with learning, scaled errors of a, b and x",
         "game.kind = cournot\n"
         "algo.kind = prox-br-learning\nalgo.mu = 5\nalgo.delta = 0.5\nalgo.tau = 4\nalgo.beta_rule = fixed:0.1\n"
         "run.horizon = 500\nrun.seed = 1\nrun.replications = 1\nrun.thinning = 5\nrun.reference = auto\n"
         "out.dir = out/cournot-learning\n"},
        {"cournot-compare", "delay-free Cournot, proximal BR with learning against asynchronous SG",
         "game.kind = cournot\n"
         "algo.kind = prox-br-learning\nalgo.mu = 5\nalgo.delta = 0.5\nalgo.tau = 0\nalgo.beta_rule = fixed:0.1\n"
         "run.horizon = 1800\nrun.seed = 1\nrun.replications = 5\nrun.thinning = 1\nrun.gap = false\n"
         "run.snapshots = false\nrun.reference = auto\n"
         "compare.baseline = async-sg\ncompare.baseline_horizon = 10000000\ncompare.baseline_thinning = 1000\n"
         "compare.eps = 1, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 0.0001\n"
         "out.dir = out/cournot-compare\n"},
        {"toy-compare", "noise-free toy game, proximal BR against asynchronous SG",
         "game.kind = toy\n"
         "algo.kind = prox-br\nalgo.mu = 1\nalgo.delta = 0.5\nalgo.tau = 0\nalgo.beta_rule = fixed:0.1\n"
         "algo.max_inner_steps = 10000\n"
         "run.horizon = 200\nrun.seed = 1\nrun.replications = 1\nrun.thinning = 1\nrun.gap = false\n"
         "run.snapshots = false\nrun.reference = auto\n"
         "compare.baseline = async-sg\ncompare.baseline_horizon = 20000\ncompare.baseline_thinning = 1\n"
         "compare.eps = 0.1, 0.01, 0.001, 0.0001, 0.00001\n"
         "out.dir = out/toy-compare\n"},
    };
    return all;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Game construction

struct BuiltGame {
    GameModel game;
    std::optional<MisspecifiedGameModel> misspecified;
};

inline games::CournotInstance single_firm_cournot() {
    games::CournotInstance inst;
    inst.network.markets = 1;
    inst.network.firm_markets = {{0}};
    inst.cost = {Vector::Constant(1, 2.0)};
    inst.capacity = {Vector::Constant(1, 8.0)};
    inst.a_true = Vector::Constant(1, 5.0);
    inst.b_true = Vector::Constant(1, 0.3);
    return inst;
}

inline BuiltGame build_game(const ExperimentConfig& c) {
    BuiltGame b;
    switch (c.game) {
        case GameKind::Toy: b.game = games::make_toy(c.toy_sigma); break;
        case GameKind::Congestion: b.game = games::make_congestion(games::standard_congestion()); break;
        case GameKind::Cournot: {
            games::CournotInstance inst;
            if (c.cournot_network == "single") {
                inst = single_firm_cournot();
            } else {
                games::CournotLaws laws;
                laws.cost_noise = c.cournot_cost_noise;
                laws.price_noise = c.cournot_price_noise;
                inst = games::draw_cournot(games::standard_cournot_network(), laws, c.game_seed.value_or(c.run.seed));
            }
            inst.cost_noise = c.cournot_cost_noise;
            inst.price_noise = c.cournot_price_noise;
            b.misspecified = games::make_cournot(inst);
            b.game = b.misspecified->game;
            break;
        }
    }
    if (c.weights) {
        if (b.misspecified) throw ConfigError("game.weights is only supported for fully specified games");
        b.game = games::make_weighted(b.game, *c.weights);
    }
    return b;
}

inline RunTrace run_built(const BuiltGame& b, const RunConfig& cfg, const StepObserver& obs = {}) {
    return b.misspecified ? run(*b.misspecified, cfg, obs) : run(b.game, cfg, obs);
}

/// Reference x* from a deterministic projected-gradient run at the true parameters.
inline ReferenceSolution compute_reference(const GameModel& game) {
    return reference_equilibrium(game, game.zero_profile(), 1e-12, 5'000'000);
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_header(const StrategyProfile& layout, bool snapshots, int belief_players = 0) {
    std::string h = "k,player,gap,dist_to_ref,theta_err_max,grad_steps_cum,comm_cum";
    for (int i = 0; i < belief_players; ++i) h += ",theta_err" + std::to_string(i + 1);
    if (snapshots)
        for (int i = 0; i < layout.players(); ++i) {
            if (layout.dim(i) == 1) h += ",x" + std::to_string(i + 1);
            else
                for (int p = 0; p < layout.dim(i); ++p) h += ",x" + std::to_string(i + 1) + "_" + std::to_string(p + 1);
        }
    return h + "\n";
}

/// Logged rows only (those carrying metrics), one per line.
inline void write_trace_csv(std::ostream& os, const RunTrace& t, const StrategyProfile& layout, bool snapshots) {
    const int beliefs = static_cast<int>(t.final_theta.size());
    os << csv_header(layout, snapshots, beliefs);
    auto opt = [](const std::optional<double>& v) { return v ? num17(*v) : std::string(); };
    for (const auto& r : t.rows) {
        const bool logged = r.x || r.gap || r.dist_to_ref || r.theta_err_max || r.k == 0;
        if (!logged) continue;
        os << r.k << ',' << (r.player >= 0 ? std::to_string(r.player + 1) : std::string()) << ',' << opt(r.gap) << ','
           << opt(r.dist_to_ref) << ',' << opt(r.theta_err_max) << ',' << r.grad_steps_cum << ',' << r.comm_cum;
        for (int i = 0; i < beliefs; ++i) {
            os << ',';
            if (static_cast<std::size_t>(i) < r.theta_err.size()) os << num17(r.theta_err[static_cast<std::size_t>(i)]);
        }
        if (snapshots) {
            for (Eigen::Index j = 0; j < layout.total_dim(); ++j) {
                os << ',';
                if (r.x) os << num17(r.x->flat()[j]);
            }
        }
        os << '\n';
    }
}

inline Series column(const RunTrace& t, std::optional<double> TraceRow::*field) {
    Series s;
    for (const auto& r : t.rows)
        if (r.*field) {
            s.k.push_back(r.k);
            s.values.push_back(*(r.*field));
        }
    return s;
}

inline Series counter_column(const RunTrace& t, std::int64_t TraceRow::*field, std::optional<double> TraceRow::*grid) {
    Series s;
    for (const auto& r : t.rows)
        if (r.*grid) {
            s.k.push_back(r.k);
            s.values.push_back(static_cast<double>(r.*field));
        }
    return s;
}

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
/// after all workers finish.
template <class Fn>
void parallel_for(std::int64_t n, int jobs, Fn fn) {
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (std::int64_t r; (r = next.fetch_add(1)) < n;) {
            try {
                fn(r);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct ExperimentResult {
    std::vector<RunTrace> traces;
    std::vector<std::string> files;
    std::optional<ReferenceSolution> reference;
};

inline std::string trace_name(std::int64_t r) { return "trace_r" + std::to_string(r) + ".csv"; }

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

/// Per-replication traces, the replication mean and a summary under out_dir.
/// The observer sees every iteration of every replication; with jobs > 1 it
/// is called concurrently.
inline ExperimentResult run_experiment(const ExperimentConfig& c, int jobs = 1, std::ostream* log = nullptr,
                                       const StepObserver& obs = {}) {
    const BuiltGame b = build_game(c);
    RunConfig base = c.run;
    ExperimentResult res;
    if (c.reference_auto) {
        res.reference = compute_reference(b.game);
        base.reference = res.reference->x;
    }
    std::filesystem::create_directories(c.out_dir);
    const StrategyProfile layout = b.game.zero_profile();

    res.traces.resize(static_cast<std::size_t>(c.replications));
    std::vector<std::optional<std::string>> failures(static_cast<std::size_t>(c.replications));
    parallel_for(c.replications, jobs, [&](std::int64_t r) {
        RunConfig cfg = base;
        cfg.replication = static_cast<std::uint64_t>(r);
        RunTrace t;
        try {
            t = run_built(b, cfg, obs);
        } catch (const RunAborted& e) {
            t = e.partial();
            failures[static_cast<std::size_t>(r)] = e.what();
        }
        std::ostringstream os;
        write_trace_csv(os, t, layout, cfg.snapshots);
        write_file(c.out_dir / trace_name(r), os.str());
        res.traces[static_cast<std::size_t>(r)] = std::move(t);
    });
    for (std::int64_t r = 0; r < c.replications; ++r) res.files.push_back((c.out_dir / trace_name(r)).string());
    for (std::int64_t r = 0; r < c.replications; ++r)
        if (failures[static_cast<std::size_t>(r)])
            throw RunAborted("replication " + std::to_string(r) + " aborted at " + *failures[static_cast<std::size_t>(r)],
                             res.traces[static_cast<std::size_t>(r)]);

    // Replication mean of every metric present.
    struct Col {
        const char* name;
        std::optional<double> TraceRow::*field;
    };
    const Col cols[] = {{"gap", &TraceRow::gap}, {"dist_to_ref", &TraceRow::dist_to_ref},
                        {"theta_err_max", &TraceRow::theta_err_max}};
    std::vector<std::pair<std::string, MeanSeries>> means;
    std::vector<std::int64_t> grid;
    for (const auto& col : cols) {
        std::vector<Series> runs;
        for (const auto& t : res.traces) runs.push_back(column(t, col.field));
        if (runs.front().k.empty()) continue;
        MeanSeries ms = replication_mean(runs);
        grid = ms.k;
        means.emplace_back(col.name, std::move(ms));
    }
    if (!means.empty()) {
        std::ostringstream os;
        os << "k";
        for (const auto& [name, ms] : means) os << ",mean_" << name << ",stderr_" << name;
        os << '\n';
        for (std::size_t t = 0; t < grid.size(); ++t) {
            os << grid[t];
            for (const auto& [name, ms] : means) os << ',' << num17(ms.mean[t]) << ',' << num17(ms.stderr_[t]);
            os << '\n';
        }
        write_file(c.out_dir / "mean.csv", os.str());
        res.files.push_back((c.out_dir / "mean.csv").string());
    }

    std::ostringstream sum;
    sum << "game " << b.game.name << ", algorithm " << to_string(c.run.algorithm) << ", replications "
        << c.replications << ", horizon " << c.run.horizon << ", seed " << c.run.seed << '\n';
    if (res.reference)
        sum << "reference x*: residual " << num17(res.reference->residual) << " after " << res.reference->iterations
            << " projected-gradient iterations\n";
    for (const auto& w : res.traces.front().warnings) sum << "warning: " << w << '\n';
    for (const auto& [name, ms] : means)
        sum << "final mean " << name << ' ' << num17(ms.mean.back()) << " (stderr " << num17(ms.stderr_.back()) << ")\n";
    write_file(c.out_dir / "summary.txt", sum.str());
    res.files.push_back((c.out_dir / "summary.txt").string());
    if (log) *log << sum.str();
    return res;
}

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonEntry {
    double eps = 0.0;
    std::string method;
    bool reached = false;
    std::int64_t k = 0;
    double grad_steps = 0.0;  // replication mean at k
    double comm = 0.0;
};

struct ComparisonResult {
    std::vector<ComparisonEntry> entries;
    ReferenceSolution reference;
    std::vector<std::string> files;

    const ComparisonEntry* find(const std::string& method, double eps) const {
        for (const auto& e : entries)
            if (e.method == method && std::abs(e.eps - eps) <= 1e-12 * std::max(1.0, eps)) return &e;
        return nullptr;
    }
};

/// First logged k at which the replication mean of |x_k - x*| / (1 + |x*|)
/// drops below each eps, with the mean counters at that k.
inline std::vector<ComparisonEntry> first_crossings(const std::vector<RunTrace>& traces, double ref_norm,
                                                    const std::vector<double>& eps, const std::string& method) {
    std::vector<Series> dist, grads, comms;
    for (const auto& t : traces) {
        dist.push_back(column(t, &TraceRow::dist_to_ref));
        grads.push_back(counter_column(t, &TraceRow::grad_steps_cum, &TraceRow::dist_to_ref));
        comms.push_back(counter_column(t, &TraceRow::comm_cum, &TraceRow::dist_to_ref));
    }
    const MeanSeries d = replication_mean(dist), g = replication_mean(grads), cm = replication_mean(comms);
    std::vector<ComparisonEntry> out;
    for (double e : eps) {
        ComparisonEntry ce{e, method, false, 0, 0.0, 0.0};
        for (std::size_t t = 0; t < d.k.size(); ++t)
            if (d.mean[t] / (1.0 + ref_norm) < e) {
                ce.reached = true;
                ce.k = d.k[t];
                ce.grad_steps = g.mean[t];
                ce.comm = cm.mean[t];
                break;
            }
        out.push_back(ce);
    }
    return out;
}

inline ComparisonResult run_comparison(const ExperimentConfig& c, int jobs = 1, std::ostream* log = nullptr,
                                       const StepObserver& obs = {}) {
    if (!c.comparison) throw ConfigError("compare needs compare.baseline");
    const auto& spec = *c.comparison;
    if (spec.eps.empty()) throw ConfigError("compare.eps: empty grid");
    const double lo = *std::min_element(spec.eps.begin(), spec.eps.end());
    const double hi = *std::max_element(spec.eps.begin(), spec.eps.end());
    if (!(lo > 0.0) || hi / lo < 1e4 * (1.0 - 1e-9)) throw ConfigError("compare.eps must span at least four decades");

    const BuiltGame b = build_game(c);
    ComparisonResult res;
    res.reference = compute_reference(b.game);
    const double ref_norm = res.reference.x.flat().norm();
    std::filesystem::create_directories(c.out_dir);

    auto run_method = [&](RunConfig cfg) {
        cfg.reference = res.reference.x;
        cfg.compute_gap = false;
        cfg.snapshots = false;
        cfg.every_row = false;
        std::vector<RunTrace> traces(static_cast<std::size_t>(c.replications));
        parallel_for(c.replications, jobs, [&](std::int64_t r) {
            RunConfig rc = cfg;
            rc.replication = static_cast<std::uint64_t>(r);
            traces[static_cast<std::size_t>(r)] = run_built(b, rc, obs);
        });
        return traces;
    };

    RunConfig primary = c.run;
    RunConfig baseline = c.run;
    baseline.algorithm = spec.baseline;
    baseline.horizon = spec.baseline_horizon;
    baseline.thinning = spec.baseline_thinning;

    const auto tp = run_method(primary);
    const auto tb = run_method(baseline);
    for (auto& e : first_crossings(tp, ref_norm, spec.eps, to_string(primary.algorithm))) res.entries.push_back(e);
    for (auto& e : first_crossings(tb, ref_norm, spec.eps, to_string(baseline.algorithm))) res.entries.push_back(e);

    std::ostringstream os;
    os << "eps,method,reached,k,grad_steps,comm\n";
    for (const auto& e : res.entries)
        os << num17(e.eps) << ',' << e.method << ',' << (e.reached ? "yes" : "unreached") << ','
           << (e.reached ? std::to_string(e.k) : "") << ',' << (e.reached ? num17(e.grad_steps) : "") << ','
           << (e.reached ? num17(e.comm) : "") << '\n';
    write_file(c.out_dir / "comparison.csv", os.str());
    res.files.push_back((c.out_dir / "comparison.csv").string());

    std::ostringstream sum;
    sum << "comparison on " << b.game.name << ": " << to_string(primary.algorithm) << " vs "
        << to_string(baseline.algorithm) << ", replications " << c.replications << '\n';
    sum << "reference x*: residual " << num17(res.reference.residual) << " after " << res.reference.iterations
        << " projected-gradient iterations\n";
    for (double e : spec.eps) {
        const auto* a = res.find(to_string(primary.algorithm), e);
        const auto* s = res.find(to_string(baseline.algorithm), e);
        sum << "eps " << e << ": ";
        if (a->reached && s->reached && a->comm == 0.0)
            sum << "met by the initial profile";
        else if (a->reached && s->reached)
            sum << "comm ratio " << s->comm / a->comm << ", gradient-step ratio " << a->grad_steps / s->grad_steps;
        else
            sum << (a->reached ? "" : to_string(primary.algorithm)) << (a->reached || s->reached ? "" : " and ")
                << (s->reached ? "" : to_string(baseline.algorithm)) << " unreached";
        sum << '\n';
    }
    write_file(c.out_dir / "summary.txt", sum.str());
    res.files.push_back((c.out_dir / "summary.txt").string());
    if (log) *log << sum.str();
    return res;
}

}  // namespace pnash::cli
