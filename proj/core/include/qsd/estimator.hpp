#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/dynamics.hpp"
#include "qsd/empirical.hpp"
#include "qsd/measures.hpp"
#include "qsd/redistribution.hpp"
#include "qsd/rng.hpp"
#include "qsd/schedules.hpp"

namespace qsd {

/// Kill event: the proposal at step `step` left D and the chain restarted at `landing`.
struct Renewal {
    std::uint64_t step = 0;   // discrete renewal time n_j
    double time = 0.0;        // s_j = Gamma_{n_j}
    Point landing;            // X_{s_j}
};

struct TraceEntry {
    Point proposal;
    bool killed = false;
    Point landing;
};

/// The self-interacting Euler scheme with decreasing steps.
///
/// State after n completed steps: X_{Gamma_n} in D, the clock Gamma_n, the kill
/// count sum theta_k and the renewal log. X_{Gamma_k} is recorded with weight
/// gamma_{k+1}, so x0 is recorded with gamma_1 at construction.
class QsdChain {
public:
    QsdChain(const SdeModel& model, std::shared_ptr<const Domain> domain, const StepSchedule& schedule,
             RedistributionPolicy policy, const Point& x0, RngStream rng, bool track_occupation = true,
             bool record_trace = false);

    /// One iteration: propose, test theta, redistribute or move, record.
    void step();
    void advance(std::uint64_t n) {
        for (std::uint64_t i = 0; i < n; ++i) step();
    }

    std::uint64_t steps() const noexcept { return n_; }
    double clock() const noexcept { return clock_.value(); }
    std::uint64_t kills() const noexcept { return kills_; }
    const Point& state() const noexcept { return x_; }
    const Point& initial_state() const noexcept { return x0_; }
    const std::vector<Renewal>& renewals() const noexcept { return renewals_; }
    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
    const RedistributionState& policy_state() const noexcept { return policy_; }
    const RngStream& rng() const noexcept { return rng_; }

    /// Occupation measure of X_{Gamma_0..Gamma_n}, or null if not tracked.
    const WeightedEmpiricalMeasure* occupation() const noexcept;
    /// Move the occupation measure out (leaves the chain unusable for sampling).
    std::optional<WeightedEmpiricalMeasure> release_occupation();

    /// sum theta_k / Gamma_n.
    double survival_rate() const;

private:
    const SdeModel* model_;
    std::shared_ptr<const Domain> domain_;
    const StepSchedule* schedule_;
    RedistributionState policy_;
    RngStream rng_;
    Point x0_;
    Point x_;
    std::uint64_t n_ = 0;
    std::uint64_t kills_ = 0;
    CompensatedSum clock_;
    double next_gamma_ = 0.0;
    std::optional<WeightedEmpiricalMeasure> occupation_;   // used when the policy holds no full measure
    bool full_policy_ = false;
    bool record_trace_ = false;
    std::vector<Renewal> renewals_;
    std::vector<TraceEntry> trace_;
};

/// kills / Gamma. Throws DomainError when Gamma <= 0 (no step taken yet).
double survival_rate(std::uint64_t kills, double gamma_n);

/// theta_l: uniform empirical law over post-kill landing points (first coordinate).
/// Throws DomainError if no renewal occurred.
EmpiricalLaw renewal_measure(const std::vector<Renewal>& renewals);

/// mu(D \ K_eta) for each eta: mass within distance eta of the boundary.
std::vector<double> tightness_profile(const WeightedEmpiricalMeasure& measure, const Domain& domain,
                                      const std::vector<double>& etas);

struct Checkpoint {
    std::uint64_t step = 0;
    double time = 0.0;
    std::uint64_t kills = 0;
    double lambda_hat = 0.0;
    double w1_to_reference = std::numeric_limits<double>::quiet_NaN();
};

/// Steps n = ceil(first * ratio^j) up to n_steps, plus n_steps itself, merged with `extra`.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_steps, std::uint64_t first = 100,
                                                 double ratio = 1.5, const std::vector<std::uint64_t>& extra = {});

struct RunOptions {
    std::vector<std::uint64_t> checkpoints;            // empty: geometric default
    std::optional<ReferenceQsd> reference;             // W1 at checkpoints when 1-d
    std::vector<double> tightness_etas{0.01, 0.02, 0.05, 0.1};
    bool track_occupation = true;
    bool keep_occupation = true;
    bool record_trace = false;
    bool checkpoint_w1 = true;
    /// Drop atoms [0, discard_prefix) from reported diagnostics only. Not part
    /// of the analyzed scheme; the restart law is unaffected.
    std::uint64_t discard_prefix = 0;
};

struct QsdRunResult {
    std::uint64_t seed = 0;
    std::uint64_t chain = 0;
    std::uint64_t steps = 0;
    std::uint64_t kills = 0;
    double final_time = 0.0;   // Gamma_N
    double lambda_hat = 0.0;
    std::optional<double> w1_final;
    std::optional<WeightedEmpiricalMeasure> occupation;   // X_{Gamma_0..Gamma_N}, weights gamma_1..gamma_{N+1}
    std::vector<double> cell_weights;                     // quantized policy only, normalized
    std::vector<Point> cell_representatives;
    std::vector<Checkpoint> checkpoints;
    std::vector<Renewal> renewals;
    std::vector<std::pair<double, double>> tightness;    // (eta, mu(D \ K_eta))
    Point end_state;
    std::vector<TraceEntry> trace;
    std::string policy;
    double wall_seconds = 0.0;
};

/// Run the scheme for exactly n_steps iterations. Throws ConfigError if x0 is
/// not in D and NumericError (with step index) on a non-finite state.
QsdRunResult run(const SdeModel& model, std::shared_ptr<const Domain> domain, const StepSchedule& schedule,
                 const RedistributionPolicy& policy, const Point& x0, std::uint64_t n_steps,
                 const RunOptions& options, RngStream rng);

struct ReplayReport {
    std::uint64_t steps_checked = 0;
    std::uint64_t mismatches = 0;
    std::optional<std::uint64_t> first_mismatch;
};

/// Recompute every proposal, kill decision and restart draw from the seed and
/// compare with a recorded trace.
ReplayReport replay_trace(const SdeModel& model, std::shared_ptr<const Domain> domain,
                          const StepSchedule& schedule, const RedistributionPolicy& policy, const Point& x0,
                          RngStream rng, const std::vector<TraceEntry>& trace);

}  // namespace qsd
