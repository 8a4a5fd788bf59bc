#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace qsd::app {

struct ModelConfig {
    std::string kind = "brownian";   // brownian | ou | affine
    double scale = 1.0;
    std::size_t dim = 1;
    double theta = 1.0;
    std::vector<double> mean;          // ou; defaults to the domain centre
    std::vector<double> drift_matrix;  // affine, row-major d x d
    std::vector<double> drift_vector;  // affine
    std::vector<double> sigma;         // affine, row-major d x d
    bool operator==(const ModelConfig&) const = default;
};

struct DomainConfig {
    std::string kind = "interval";   // interval | box | ball
    double a = 0.0;
    double b = 1.0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> center;
    double radius = 1.0;
    bool operator==(const DomainConfig&) const = default;
};

struct ScheduleConfig {
    std::string kind = "polynomial";  // polynomial | constant
    double c = 0.1;
    double rho = 0.7;
    double gamma = 0.01;
    bool operator==(const ScheduleConfig&) const = default;
};

/// A fixed probability law on D.
struct LawConfig {
    std::string kind = "dirac";   // dirac | uniform | qsd | measure_csv
    std::vector<double> point;    // dirac; defaults to x0
    std::vector<double> lo;       // uniform; defaults to the domain bounding box
    std::vector<double> hi;
    std::string path;             // measure_csv
    bool operator==(const LawConfig&) const = default;
};

struct PolicyConfig {
    std::string kind = "full";    // full | window | quantized | fixed
    std::string rule = "sqrt";    // window: sqrt | power | fraction
    double param = 0.5;
    double eps = 0.01;
    std::string cell_law = "dirac";  // dirac | uniform
    LawConfig law;                   // fixed
    bool operator==(const PolicyConfig&) const = default;
};

struct ReferenceConfig {
    std::string kind = "auto";    // auto | none | bm_interval | finite_difference
    std::size_t intervals = 4000;
    bool operator==(const ReferenceConfig&) const = default;
};

struct OperatorAConfig {
    std::vector<double> points{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> etas{1e-2, 1e-3, 1e-4};
    std::uint64_t replicas = 100000;
    bool operator==(const OperatorAConfig&) const = default;
};

struct WeakErrorConfig {
    LawConfig mu;
    LawConfig mu0;
    double horizon = 1.0;
    std::vector<double> etas{0.05, 0.01, 0.002};
    double eta_ref = 0.0;   // 0: min(etas) / 20
    std::uint64_t replicas = 10000;
    std::size_t n_times = 20;
    double perturbation = 0.0;
    bool operator==(const WeakErrorConfig&) const = default;
};

struct ExitTailConfig {
    double eta = 1e-3;
    std::uint64_t replicas = 100000;
    std::size_t n_starts = 64;
    double t_max = 0.0;
    std::size_t n_points = 60;
    bool operator==(const ExitTailConfig&) const = default;
};

struct HistogramConfig {
    std::uint64_t chains = 200;
    std::size_t bins = 10;
    bool operator==(const HistogramConfig&) const = default;
};

struct ExperimentConfig {
    std::string kind = "qsd_run";  // qsd_run | replica_histogram | operator_a | weak_error | exit_tail | policy_compare
    ModelConfig model;
    DomainConfig domain;
    ScheduleConfig schedule;
    PolicyConfig redistribution;
    std::vector<double> x0;         // defaults to the domain centre
    std::uint64_t steps = 2000000;
    std::vector<std::uint64_t> seeds{42};
    std::vector<std::uint64_t> checkpoints;   // empty: geometric
    std::string out = "results";
    unsigned threads = 1;
    std::uint64_t discard_prefix = 0;         // diagnostics only; the restart law always sees the full history
    ReferenceConfig reference;
    OperatorAConfig operator_a;
    WeakErrorConfig weak_error;
    ExitTailConfig exit_tail;
    HistogramConfig replica_histogram;
    std::vector<PolicyConfig> policies;       // policy_compare
    bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& experiment_kinds();

/// Fills the defaults that depend on other fields (x0, OU mean, law points,
/// policy list) and validates every sub-config. Throws ConfigError naming the field.
void resolve(ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected.
ExperimentConfig from_json(const nlohmann::json& j);

std::string serialize_json(const ExperimentConfig& cfg);
std::string serialize_toml(const ExperimentConfig& cfg);
ExperimentConfig parse_json(const std::string& text);
ExperimentConfig parse_toml(const std::string& text, const std::string& source = "config");
/// By extension: .json is JSON, anything else TOML.
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON serialization, without `out` and `threads`.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace qsd::app
