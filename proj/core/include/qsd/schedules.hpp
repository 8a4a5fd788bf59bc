#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qsd/numeric.hpp"

namespace qsd {

/// Decreasing (or constant) step sequence gamma_1, gamma_2, ... together with
/// its partial sums Gamma_n = gamma_1 + ... + gamma_n, Gamma_0 = 0.
///
/// Partial sums are compensated. The first `cache_horizon` of them are built
/// once at construction; beyond that they are continued on demand with the same
/// recurrence, so every caller (including `PartialSumCursor`) sees bit-identical
/// values for a given n.
class StepSchedule {
public:
    enum class Kind { Polynomial, Constant, Custom };
    using Generator = std::function<double(std::uint64_t)>;

    static constexpr std::uint64_t kDefaultCacheHorizon = 1u << 16;

    /// gamma_n = c * n^(-rho).
    static StepSchedule polynomial(double c, double rho,
                                   std::uint64_t cache_horizon = kDefaultCacheHorizon);
    static StepSchedule constant(double gamma,
                                 std::uint64_t cache_horizon = kDefaultCacheHorizon);
    /// Arbitrary positive sequence; `generator(n)` must be pure. No prefix is
    /// cached by default since the generator may be expensive or underflow.
    static StepSchedule custom(Generator generator, std::string label = "custom",
                               std::uint64_t cache_horizon = 0);

    Kind kind() const noexcept { return kind_; }
    double c() const noexcept { return c_; }
    double rho() const noexcept { return rho_; }
    const std::string& label() const noexcept { return label_; }

    /// gamma_n for n >= 1. Throws DomainError on n = 0 and InvalidScheduleError
    /// if the sequence produces a non-positive value.
    double gamma(std::uint64_t n) const;

    /// Gamma_n; Gamma_0 = 0.
    double big_gamma(std::uint64_t n) const;

    /// max{n : Gamma_n <= t}.
    std::uint64_t index_of_time(double t) const;

    /// sup_n gamma_n; exact for Polynomial/Constant, cached-prefix maximum for Custom.
    double sup_step() const;

private:
    struct Cache {
        std::vector<double> sums;   // Gamma_0..Gamma_h, compensated value
        std::vector<double> raw;    // uncompensated running sum
        std::vector<double> comp;   // running compensation
    };

    StepSchedule(Kind kind, double c, double rho, Generator gen, std::string label,
                 std::uint64_t cache_horizon);

    double raw_gamma(std::uint64_t n) const;

    Kind kind_;
    double c_ = 0.0;
    double rho_ = 0.0;
    Generator generator_;
    std::string label_;
    std::shared_ptr<const Cache> cache_;

    friend class PartialSumCursor;
};

/// Walks n = 0, 1, 2, ... producing gamma_{n+1} and Gamma_n with the same
/// compensated recurrence as StepSchedule::big_gamma. O(1) per advance.
class PartialSumCursor {
public:
    explicit PartialSumCursor(const StepSchedule& schedule) : schedule_(&schedule) {}

    std::uint64_t index() const noexcept { return n_; }
    double time() const noexcept { return sum_.value(); }
    double next_step() const { return schedule_->gamma(n_ + 1); }

    /// Gamma_n -> Gamma_{n+1}; returns the step taken.
    double advance() {
        const double g = schedule_->gamma(n_ + 1);
        sum_.add(g);
        ++n_;
        return g;
    }

private:
    const StepSchedule* schedule_;
    std::uint64_t n_ = 0;
    CompensatedSum sum_;
};

enum class ClauseVerdict { Holds, Fails };
enum class ClauseBasis { Analytic, FiniteHorizon };

struct ClauseResult {
    std::string clause;     // "H3.a", "H3.b", "H3.c"
    ClauseVerdict verdict;
    ClauseBasis basis;
    std::string detail;
};

struct ValidationReport {
    std::vector<ClauseResult> clauses;
    std::string caveat;     // non-empty when any clause is a finite-horizon heuristic

    bool all_hold() const noexcept;
    const ClauseResult& clause(const std::string& name) const;
};

/// Checks the step conditions: gamma_n -> 0 with Gamma_n -> infinity (a),
/// sum gamma_n^p < infinity for some p > 1 (b), sup gamma_n / gamma_{n+1} < infinity (c).
/// Polynomial and Constant kinds are certified analytically; Custom kinds get a
/// heuristic over n <= horizon. Throws InvalidScheduleError if a step <= 0 is seen.
ValidationReport validate_h3(const StepSchedule& schedule, std::uint64_t horizon);

}  // namespace qsd
