#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/dynamics.hpp"
#include "qsd/measures.hpp"
#include "qsd/point.hpp"
#include "qsd/redistribution.hpp"
#include "qsd/rng.hpp"
#include "qsd/schedules.hpp"

namespace qsd {

/// Euler scheme restarted from a fixed law mu at every grid exit.
struct ReturnProcessConfig {
    std::shared_ptr<const FixedLaw> mu;
    double horizon = 1.0;
    /// Sampling instants in [0, horizon]; the state recorded at t is the
    /// post-jump value at the last grid time <= t.
    std::vector<double> instants;
    /// If > 0, each restart is drawn from nu_n = (1 - w_n) mu + w_n U(box of D)
    /// with w_n uniform in [0, w_max] and W1(nu_n, mu) <= radius. 1-d only.
    double perturbation_radius = 0.0;
    bool record_jumps = true;
};

struct Jump {
    std::uint64_t step;
    double time;
    Point landing;
};

struct ReturnTrajectory {
    std::vector<Jump> jumps;
    std::vector<Point> samples;  // one per instant
    Point start;
    Point end_state;
    std::uint64_t steps = 0;
    double end_time = 0.0;
};

/// Largest mixing weight with W1((1-w) mu + w U(a,b), mu) <= radius, capped at 1.
double perturbation_weight(const FixedLaw& mu, double a, double b, double radius);

ReturnTrajectory simulate_return_chain(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                       const ReturnProcessConfig& cfg, const Point& x0, RngStream rng);
/// Start drawn from `initial` (Auxiliary lane, step 0).
ReturnTrajectory simulate_return_chain(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                       const ReturnProcessConfig& cfg, const FixedLaw& initial, RngStream rng);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_half_width = 0.0;  // 1.96 standard errors
    std::uint64_t replicas = 0;
};

struct ReplicaOptions {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    /// Per-replica step budget; exceeding it is a numeric abort.
    std::uint64_t max_steps = 500'000'000;
};

/// Monte Carlo estimate of E_x[sum_k eta_{k+1} f(Y_{t_k})] over the pre-exit grid,
/// for several f on the same replicas. Replica r uses RngStream(seed, r).
std::vector<McEstimate> estimate_A(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                   const std::vector<TestFunction>& fns, const Point& x, std::uint64_t n_replicas,
                                   const ReplicaOptions& opts = {});
McEstimate estimate_A(const SdeModel& model, const Domain& domain, const StepSchedule& eta, const TestFunction& f,
                      const Point& x, std::uint64_t n_replicas, const ReplicaOptions& opts = {});

struct RatioEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double ci_half_width = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double denominator_ci_half_width = 0.0;
    /// Denominator CI reaches 0.
    bool unreliable = false;
    std::uint64_t replicas = 0;
};

/// mu(A f) / mu(A 1) with each replica started from its own draw of mu and both
/// sums taken on the same path. Delta-method CI.
RatioEstimate estimate_Pi(const SdeModel& model, const Domain& domain, const StepSchedule& eta, const FixedLaw& mu,
                          const TestFunction& f, std::uint64_t n_replicas, const ReplicaOptions& opts = {});

struct WeakErrorRow {
    double eta;
    std::vector<double> w1;  // per t in the table's grid
    double sup_w1;
};

struct WeakErrorTable {
    std::vector<double> times;
    double eta_ref = 0.0;
    /// sup_t W1 between the two halves of the reference batch.
    double noise_floor = 0.0;
    std::vector<double> noise_floor_by_time;
    std::vector<WeakErrorRow> rows;
};

struct WeakErrorOptions {
    std::uint64_t n_replicas = 10'000;
    std::size_t n_times = 20;
    /// 0 means min(eta_list) / 20.
    double eta_ref = 0.0;
    double perturbation_radius = 0.0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Compares constant-step schemes with redistribution against a fine-step
/// reference return process. eta_list must be strictly decreasing.
WeakErrorTable weak_error_curve(const SdeModel& model, const Domain& domain, const FixedLaw& mu,
                                const FixedLaw& mu0, double horizon, const std::vector<double>& eta_list,
                                const WeakErrorOptions& opts = {});

/// W1 between the time-t laws (sample j of each trajectory) of two batches, per instant.
std::vector<double> time_law_distances(const std::vector<ReturnTrajectory>& a, const std::vector<ReturnTrajectory>& b);

/// Runs n replicas of the return chain, replica r on RngStream(seed, r).
std::vector<ReturnTrajectory> simulate_batch(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                             const ReturnProcessConfig& cfg, const FixedLaw& initial,
                                             std::uint64_t n_replicas, std::uint64_t seed, unsigned threads);

struct TailPoint {
    double time;
    double survival;
    double ci_low;
    double ci_high;
    std::uint64_t survivors;
};

struct ExitTailTable {
    std::vector<TailPoint> points;
    std::vector<double> exit_times;  // +inf when censored
    double slope = 0.0;              // of log P(tau > t) against t
    double slope_std_error = 0.0;
    double intercept = 0.0;
    double fit_start = 0.0;
    double fit_end = 0.0;
    std::size_t fit_points = 0;
    std::uint64_t replicas = 0;
};

struct ExitTailOptions {
    std::size_t n_starts = 64;
    double t_max = 0.0;       // 0: run every replica to exit
    std::size_t n_points = 60;
    /// Fit on times where survival <= fit_survival_max and survivors >= min_survivors.
    double fit_survival_max = 0.3;
    std::uint64_t min_survivors = 50;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::uint64_t max_steps = 500'000'000;
};

/// Grid of start points covering D: cell midpoints of a regular grid on the
/// bounding box, kept if inside D.
std::vector<Point> start_grid(const Domain& domain, std::size_t n_target);

/// Empirical survival function of the grid exit time from starts spread over D,
/// with Wilson 95% bands and a weighted log-linear tail fit.
ExitTailTable exit_time_tail(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                             std::uint64_t n_replicas, const ExitTailOptions& opts = {});

struct RenewalSplit {
    double direct = 0.0;
    double before_first_jump = 0.0;
    double after_first_jump = 0.0;
    std::uint64_t replicas_before = 0;
};

/// E[f(X_t)] over a batch, and its split by whether the first jump happened by t.
/// Both parts are normalized by the batch size so they add up to `direct`.
RenewalSplit renewal_split(const std::vector<ReturnTrajectory>& batch, const std::vector<double>& instants,
                           std::size_t instant_index, const TestFunction& f);

}  // namespace qsd
