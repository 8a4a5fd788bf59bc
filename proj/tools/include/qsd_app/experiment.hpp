#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsd/domain.hpp"
#include "qsd/dynamics.hpp"
#include "qsd/measures.hpp"
#include "qsd/redistribution.hpp"
#include "qsd/schedules.hpp"
#include "qsd_app/config.hpp"

namespace qsd::app {

struct RunOutcome {
    /// Files written, relative to the output directory, in write order.
    std::vector<std::string> files;
    nlohmann::json summary;
    /// All headline checks passed (only meaningful when they were evaluated).
    bool checks_passed = true;
};

/// Runs the experiment described by a resolved config and writes its CSVs,
/// summary.json and meta.json under cfg.out. Throws ConfigError for invalid
/// input and NumericError on a numeric abort.
RunOutcome run_experiment(const ExperimentConfig& cfg);

// Builders shared with the tests.
SdeModel make_model(const ExperimentConfig& cfg);
std::shared_ptr<const Domain> make_domain(const DomainConfig& d);
StepSchedule make_schedule(const ScheduleConfig& s);
std::optional<ReferenceQsd> make_reference(const ExperimentConfig& cfg, const SdeModel& model);
FixedLaw make_law(const LawConfig& l, const std::optional<ReferenceQsd>& ref);
RedistributionPolicy make_policy(const PolicyConfig& p, const std::optional<ReferenceQsd>& ref);

/// measure.csv: one row per atom, coordinates then weight.
void write_measure_csv(const std::filesystem::path& path, const WeightedEmpiricalMeasure& m);
WeightedEmpiricalMeasure read_measure_csv(const std::filesystem::path& path);

/// "%.17g".
std::string fmt(double x);

std::string version_string();
std::string git_stamp();

}  // namespace qsd::app
