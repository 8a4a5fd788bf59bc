#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsd/errors.hpp"
#include "qsd_app/config.hpp"
#include "qsd_app/experiment.hpp"

using namespace qsd;
using namespace qsd::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qsd_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig busy_config() {
    ExperimentConfig c;
    c.kind = "policy_compare";
    c.model.kind = "ou";
    c.model.theta = 0.7;
    c.model.scale = 0.3;
    c.domain.a = -1.0;
    c.domain.b = 2.5;
    c.schedule.c = 0.1;
    c.schedule.rho = 0.55;
    c.x0 = {0.1};
    c.steps = 12345;
    c.seeds = {3, 1, 4};
    c.checkpoints = {10, 100, 1000};
    c.operator_a.etas = {1e-2, 1e-3};
    c.weak_error.mu.kind = "uniform";
    c.weak_error.etas = {0.1, 0.03};
    c.weak_error.perturbation = 0.05;
    PolicyConfig q;
    q.kind = "quantized";
    q.eps = 0.02;
    q.cell_law = "uniform";
    PolicyConfig w;
    w.kind = "window";
    w.rule = "fraction";
    w.param = 0.25;
    PolicyConfig f;
    f.kind = "fixed";
    f.law.kind = "uniform";
    c.policies = {q, w, f};
    return c;
}

ExperimentConfig small_run(const fs::path& out) {
    ExperimentConfig c;
    c.steps = 5000;
    c.out = out.string();
    return c;
}

}  // namespace

TEST(Config, DefaultsResolve) {
    ExperimentConfig c;
    resolve(c);
    EXPECT_EQ(c.x0, std::vector<double>{0.5});
    EXPECT_EQ(c.weak_error.mu.point, std::vector<double>{0.5});
}

TEST(Config, JsonRoundTrip) {
    for (auto c : {ExperimentConfig{}, busy_config()}) {
        resolve(c);
        EXPECT_EQ(parse_json(serialize_json(c)), c);
    }
}

TEST(Config, TomlRoundTrip) {
    for (auto c : {ExperimentConfig{}, busy_config()}) {
        resolve(c);
        const std::string text = serialize_toml(c);
        EXPECT_EQ(parse_toml(text), c) << text;
    }
}

TEST(Config, TomlAndJsonAgree) {
    const std::string toml = R"(
kind = "qsd_run"
steps = 1000
seeds = [5, 6]
[model]
kind = "brownian"
scale = 2
[redistribution]
kind = "window"
rule = "power"
param = 0.3
)";
    const std::string json = R"({"kind": "qsd_run", "steps": 1000, "seeds": [5, 6],
        "model": {"kind": "brownian", "scale": 2.0},
        "redistribution": {"kind": "window", "rule": "power", "param": 0.3}})";
    EXPECT_EQ(parse_toml(toml), parse_json(json));
}

TEST(Config, HashIsStable) {
    ExperimentConfig a, b;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.steps += 1;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, UnknownKeyNamesFieldAndLine) {
    try {
        parse_toml("steps = 10\n[model]\nkind = \"brownian\"\nscael = 2\n", "cfg.toml");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("model.scael"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    }
}

TEST(Config, TypeErrorsAndSyntaxErrors) {
    EXPECT_THROW(parse_toml("steps = \"many\"\n"), ConfigError);
    EXPECT_THROW(parse_toml("steps = -3\n"), ConfigError);
    EXPECT_THROW(parse_toml("steps = [\n"), ConfigError);
    EXPECT_THROW(parse_json("{\"steps\": }"), ConfigError);
    EXPECT_THROW(parse_json("{\"bogus\": 1}"), ConfigError);
}

TEST(Config, ValidationRejectsBadValues) {
    auto bad = [](auto mutate) {
        ExperimentConfig c;
        mutate(c);
        EXPECT_THROW(resolve(c), ConfigError);
    };
    bad([](ExperimentConfig& c) { c.seeds = {1, 1}; });
    bad([](ExperimentConfig& c) { c.seeds = {}; });
    bad([](ExperimentConfig& c) { c.kind = "nope"; });
    bad([](ExperimentConfig& c) { c.domain.b = c.domain.a; });
    bad([](ExperimentConfig& c) { c.schedule.rho = 1.5; });
    bad([](ExperimentConfig& c) { c.x0 = {0.5, 0.5}; });
    bad([](ExperimentConfig& c) { c.checkpoints = {c.steps + 1}; });
    bad([](ExperimentConfig& c) { c.weak_error.etas = {0.01, 0.05}; });
    bad([](ExperimentConfig& c) { c.redistribution.kind = "quantized"; c.redistribution.eps = 0.0; });
    bad([](ExperimentConfig& c) { c.domain.kind = "ball"; });
}

TEST(Config, UnwritableOutputIsConfigError) {
    const fs::path base = scratch("unwritable");
    fs::create_directories(base);
    std::ofstream(base / "file") << "x";
    ExperimentConfig c = small_run(base / "file" / "sub");
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Config, LoadByExtension) {
    const fs::path dir = scratch("load");
    fs::create_directories(dir);
    std::ofstream(dir / "a.json") << R"({"steps": 77})";
    std::ofstream(dir / "a.toml") << "steps = 77\n";
    EXPECT_EQ(load_config(dir / "a.json").steps, 77u);
    EXPECT_EQ(load_config(dir / "a.toml").steps, 77u);
    EXPECT_THROW(load_config(dir / "missing.toml"), ConfigError);
}

TEST(Experiment, DeclaredFilesExistAndAreNonEmpty) {
    const fs::path out = scratch("files");
    ExperimentConfig c = small_run(out);
    c.seeds = {7, 8};
    const RunOutcome o = run_experiment(c);
    const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
    ASSERT_FALSE(meta["files"].empty());
    for (const auto& f : meta["files"]) {
        const fs::path p = out / f.get<std::string>();
        ASSERT_TRUE(fs::exists(p)) << p;
        EXPECT_GT(fs::file_size(p), 0u) << p;
    }
    EXPECT_TRUE(fs::exists(out / "seed_7" / "lambda.csv"));
    EXPECT_TRUE(meta.contains("config_hash"));
    EXPECT_TRUE(meta.contains("git"));
    EXPECT_EQ(from_json(meta["config"]).seeds, (std::vector<std::uint64_t>{7, 8}));
    EXPECT_TRUE(o.summary.contains("lambda_hat_mean"));
}

TEST(Experiment, RerunsAreByteIdentical) {
    for (const std::string kind : {"qsd_run", "policy_compare", "operator_a", "exit_tail"}) {
        const fs::path da = scratch("rerun_a"), db = scratch("rerun_b");
        ExperimentConfig c = small_run(da);
        c.kind = kind;
        c.operator_a.replicas = 50;
        c.operator_a.etas = {0.01};
        c.exit_tail.replicas = 200;
        c.exit_tail.eta = 0.01;
        c.redistribution.kind = "quantized";
        const RunOutcome a = run_experiment(c);
        c.out = db.string();
        c.threads = 3;
        const RunOutcome b = run_experiment(c);
        ASSERT_EQ(a.files, b.files) << kind;
        for (const auto& f : a.files) {
            if (f == "meta.json") continue;
            EXPECT_EQ(slurp(da / f), slurp(db / f)) << kind << " " << f;
        }
    }
}

TEST(Config, ShippedConfigsResolve) {
    std::size_t seen = 0;
    for (const auto& e : fs::directory_iterator(QSD_CONFIG_DIR)) {
        ExperimentConfig c = load_config(e.path());
        EXPECT_NO_THROW(resolve(c)) << e.path();
        ++seen;
    }
    EXPECT_GE(seen, 2u);
}
