#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "qsd/errors.hpp"
#include "qsd_app/config.hpp"
#include "qsd_app/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheck = 4;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> discard_prefix;
    bool check = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "TOML or JSON experiment config");
    sub->add_option("--seed", f.seed, "Seed (replaces the config seed list)");
    sub->add_option("--steps", f.steps, "Number of steps");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--threads", f.threads, "Worker threads");
    sub->add_option("--discard-prefix", f.discard_prefix,
                    "Drop early atoms from reported diagnostics; the scheme itself is unaffected");
    sub->add_flag("--check", f.check, "Exit with status 4 if a headline check fails");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-stationary distribution simulator"};
    app.set_version_flag("--version", qsd::app::version_string() + " (" + qsd::app::git_stamp() + ")");
    app.require_subcommand(1);

    const std::map<std::string, std::string> commands{
        {"run", "qsd_run"},
        {"replica-histogram", "replica_histogram"},
        {"operator-a", "operator_a"},
        {"weak-error", "weak_error"},
        {"exit-tail", "exit_tail"},
        {"policy-compare", "policy_compare"},
    };
    Flags flags;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, kind] : commands) {
        auto* sub = app.add_subcommand(name, "Run a " + kind + " experiment");
        add_flags(sub, flags);
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    std::string kind;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) kind = commands.at(name);

    try {
        qsd::app::ExperimentConfig cfg;
        if (!flags.config.empty()) cfg = qsd::app::load_config(flags.config);
        cfg.kind = kind;
        if (flags.seed) cfg.seeds = {*flags.seed};
        if (flags.steps) cfg.steps = *flags.steps;
        if (flags.out) cfg.out = *flags.out;
        if (flags.threads) cfg.threads = *flags.threads;
        if (flags.discard_prefix) cfg.discard_prefix = *flags.discard_prefix;

        const auto outcome = qsd::app::run_experiment(cfg);
        std::cout << outcome.summary.dump(2) << "\n";
        if (flags.check && !outcome.checks_passed) {
            std::cerr << "qsd-sim: check failed\n";
            return kExitCheck;
        }
        return 0;
    } catch (const qsd::ConfigError& e) {
        std::cerr << "qsd-sim: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qsd::NumericError& e) {
        std::cerr << "qsd-sim: numeric abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const qsd::DomainError& e) {
        std::cerr << "qsd-sim: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "qsd-sim: " << e.what() << "\n";
        return 1;
    }
}
