#include "pnash/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

namespace {

using namespace pnash;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int jobs = 1;
};

cli::ConfigMap load_config(const std::string& arg) {
    if (std::filesystem::exists(arg)) return cli::ConfigMap::load(arg);
    if (const auto* p = cli::find_preset(arg)) return cli::ConfigMap::parse(p->text, "preset " + p->name);
    throw ConfigError("no config file or preset named `" + arg + "`");
}

cli::ExperimentConfig prepare(const std::string& arg, const Overrides& o) {
    cli::ConfigMap m = load_config(arg);
    if (o.seed) m.set("run.seed", std::to_string(*o.seed));
    if (o.out) m.set("out.dir", *o.out);
    return cli::parse_experiment(m);
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const RunAborted& e) {
        std::cerr << "error: run aborted: " << e.what() << " (partial traces written)\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nash equilibria of stochastic potential games by asynchronous inexact best response"};
    app.require_subcommand(1);

    Overrides o;
    std::string config;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "config file or preset name")->required();
        sub->add_option("--seed", o.seed, "override run.seed");
        sub->add_option("--out", o.out, "override out.dir");
        sub->add_option("--jobs", o.jobs, "replications run concurrently")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run replications and write CSV traces");
    add_common(run);
    auto* compare = app.add_subcommand("compare", "compare proximal BR against a baseline");
    add_common(compare);
    auto* presets = app.add_subcommand("presets", "built-in experiment configs");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "list presets");
    std::string show_name;
    auto* show = presets->add_subcommand("show", "print a preset config");
    show->add_option("name", show_name)->required();

    CLI11_PARSE(app, argc, argv);

    if (*run)
        return guarded([&] {
            const auto cfg = prepare(config, o);
            const auto res = cli::run_experiment(cfg, o.jobs, &std::cout);
            for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
            return 0;
        });
    if (*compare)
        return guarded([&] {
            const auto cfg = prepare(config, o);
            const auto res = cli::run_comparison(cfg, o.jobs, &std::cout);
            for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
            return 0;
        });
    if (*list) {
        for (const auto& p : cli::presets()) std::cout << p.name << "\t" << p.description << '\n';
        return 0;
    }
    if (*show)
        return guarded([&] {
            const auto* p = cli::find_preset(show_name);
            if (!p) throw ConfigError("unknown preset " + show_name);
            std::cout << p->text;
            return 0;
        });
    return 0;
}
