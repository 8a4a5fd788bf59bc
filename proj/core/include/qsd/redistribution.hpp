#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsd/domain.hpp"
#include "qsd/empirical.hpp"
#include "qsd/measures.hpp"
#include "qsd/rng.hpp"
#include "qsd/schedules.hpp"

namespace qsd {

/// Left end t(n) of the sliding window over the first n recorded states.
/// Always nondecreasing with 0 <= t(n) <= n - 1.
struct WindowRule {
    enum class Kind { Power, Fraction, Custom };

    Kind kind = Kind::Power;
    double param = 0.5;   // exponent kappa for Power, fraction for Fraction
    std::function<std::uint64_t(std::uint64_t)> custom;

    static WindowRule sqrt() { return {Kind::Power, 0.5, {}}; }
    static WindowRule power(double kappa) { return {Kind::Power, kappa, {}}; }
    static WindowRule fraction(double f) { return {Kind::Fraction, f, {}}; }
    static WindowRule from(std::function<std::uint64_t(std::uint64_t)> t) { return {Kind::Custom, 0.0, std::move(t)}; }

    std::uint64_t start(std::uint64_t n) const;
    std::string describe() const;
};

/// Gamma_{t(n)} / Gamma_n; tends to 0 exactly when the window satisfies the
/// vanishing-prefix condition for the given schedule.
double window_prefix_ratio(const StepSchedule& schedule, const WindowRule& rule, std::uint64_t n);

/// A probability measure on D that does not depend on the run's history.
class FixedLaw {
public:
    enum class Kind { Dirac, UniformBox, Reference, Empirical, Mixture };

    static FixedLaw dirac(const Point& x);
    /// Uniform on the open box (lo, hi).
    static FixedLaw uniform_box(const Point& lo, const Point& hi);
    static FixedLaw reference(const ReferenceQsd& ref);
    /// Frozen copy of a weighted measure (e.g. a converged run's occupation measure).
    static FixedLaw empirical(const WeightedEmpiricalMeasure& m);
    /// (1 - weight) * base + weight * uniform(lo, hi).
    static FixedLaw mixture(const FixedLaw& base, const Point& lo, const Point& hi, double weight);

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }

    /// Draw for (step); uses uniforms (step, slot_base + i) of `lane`.
    Point sample(const RngStream& rng, std::uint64_t step, Lane lane = Lane::Restart,
                 std::uint32_t slot_base = 0) const;
    double integrate(const std::function<double(const Point&)>& f) const;
    /// One-dimensional view as a CDF-bearing law, for W1 against other laws.
    double wasserstein1_to(const EmpiricalLaw& other) const;
    double wasserstein1_to_uniform(double a, double b) const;

    std::string describe() const;

private:
    FixedLaw() = default;

    Kind kind_ = Kind::Dirac;
    std::size_t dim_ = 1;
    Point point_;
    Point lo_, hi_;
    std::shared_ptr<const ReferenceQsd> reference_;
    std::shared_ptr<const WeightedEmpiricalMeasure> empirical_;
    std::shared_ptr<const FixedLaw> base_;
    double weight_ = 0.0;
};

enum class CellLaw { Dirac, Uniform };

/// Rule choosing the measure p_n the scheme restarts from after a kill.
struct RedistributionPolicy {
    enum class Kind { FullOccupation, SlidingWindow, Quantized, Fixed };

    Kind kind = Kind::FullOccupation;
    WindowRule window;            // SlidingWindow
    double eps = 0.01;            // Quantized
    CellLaw cell_law = CellLaw::Dirac;
    std::shared_ptr<const FixedLaw> fixed;   // Fixed

    static RedistributionPolicy full() { return {}; }
    static RedistributionPolicy sliding_window(WindowRule rule) {
        RedistributionPolicy p;
        p.kind = Kind::SlidingWindow;
        p.window = std::move(rule);
        return p;
    }
    static RedistributionPolicy quantized(double eps, CellLaw law = CellLaw::Dirac) {
        RedistributionPolicy p;
        p.kind = Kind::Quantized;
        p.eps = eps;
        p.cell_law = law;
        return p;
    }
    static RedistributionPolicy fixed_law(FixedLaw law) {
        RedistributionPolicy p;
        p.kind = Kind::Fixed;
        p.fixed = std::make_shared<const FixedLaw>(std::move(law));
        return p;
    }

    std::string describe() const;
};

using TestFunction = std::function<double(const Point&)>;

/// Mutable state of a redistribution policy: the data p_n is built from.
/// Single owner; mutated only by its chain.
class RedistributionState {
public:
    /// `fallback` is returned by sample_restart while nothing has been recorded.
    RedistributionState(RedistributionPolicy policy, std::shared_ptr<const Domain> domain, Point fallback);

    const RedistributionPolicy& policy() const noexcept { return policy_; }
    const Domain& domain() const noexcept { return *domain_; }

    /// Record X_{Gamma_k} with weight gamma_{k+1}. x must lie in D.
    void record_visit(const Point& x, double weight);

    /// Draw U_{n+1} from p_{n+1}, built from everything recorded so far.
    Point sample_restart(const RngStream& rng, std::uint64_t step);

    /// p_n(f) for the current state.
    double integrate(const TestFunction& f) const;

    /// mu_n(f) - p_n(f) for each f, with mu_n the normalized full measure.
    std::vector<double> h4_discrepancy(const WeightedEmpiricalMeasure& full_measure,
                                       const std::vector<TestFunction>& fns) const;

    std::uint64_t recorded() const noexcept { return recorded_; }
    double total_weight() const noexcept { return total_.value(); }

    /// Occupation measure held by FullOccupation/SlidingWindow policies, else null.
    const WeightedEmpiricalMeasure* measure() const noexcept {
        return measure_ ? &*measure_ : nullptr;
    }
    /// Index range [begin, end) of the sliding window law.
    std::pair<std::size_t, std::size_t> window_range() const;

    /// Quantized policy data; null otherwise.
    const Partition* partition() const noexcept { return partition_.get(); }
    /// Normalized cell weights a_{l,n} (Quantized only).
    std::vector<double> normalized_cell_weights() const;
    const std::vector<double>& raw_cell_weights() const noexcept { return cell_weight_; }
    /// Representative of a cell, if it has one yet.
    std::optional<Point> representative(std::size_t cell) const;

private:
    void rebuild_cumulative();
    Point sample_in_cell(std::size_t cell, const RngStream& rng, std::uint64_t step) const;
    double cell_integral(std::size_t cell, const TestFunction& f) const;

    RedistributionPolicy policy_;
    std::shared_ptr<const Domain> domain_;
    Point fallback_;
    std::uint64_t recorded_ = 0;
    CompensatedSum total_;

    std::optional<WeightedEmpiricalMeasure> measure_;

    std::shared_ptr<const Partition> partition_;
    std::vector<double> cell_weight_;
    std::vector<CompensatedSum> cell_acc_;
    std::vector<Point> reps_;
    std::vector<char> has_rep_;
    std::vector<double> cumulative_;
    bool cumulative_dirty_ = true;
};

}  // namespace qsd
