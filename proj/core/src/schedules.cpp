#include "qsd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

StepSchedule::StepSchedule(Kind kind, double c, double rho, Generator gen, std::string label,
                           std::uint64_t cache_horizon)
    : kind_(kind), c_(c), rho_(rho), generator_(std::move(gen)), label_(std::move(label)) {
    auto cache = std::make_shared<Cache>();
    cache->sums.reserve(cache_horizon + 1);
    cache->raw.reserve(cache_horizon + 1);
    cache->comp.reserve(cache_horizon + 1);
    CompensatedSum acc;
    cache->sums.push_back(0.0);
    cache->raw.push_back(0.0);
    cache->comp.push_back(0.0);
    for (std::uint64_t n = 1; n <= cache_horizon; ++n) {
        acc.add(gamma(n));
        cache->sums.push_back(acc.value());
        cache->raw.push_back(acc.raw_sum());
        cache->comp.push_back(acc.compensation());
    }
    cache_ = std::move(cache);
}

StepSchedule StepSchedule::polynomial(double c, double rho, std::uint64_t cache_horizon) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidScheduleError("polynomial schedule needs c > 0");
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw InvalidScheduleError("polynomial schedule needs rho > 0");
    std::ostringstream os;
    os << "polynomial(c=" << c << ", rho=" << rho << ")";
    return StepSchedule(Kind::Polynomial, c, rho, {}, os.str(), cache_horizon);
}

StepSchedule StepSchedule::constant(double gamma, std::uint64_t cache_horizon) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidScheduleError("constant schedule needs gamma > 0");
    std::ostringstream os;
    os << "constant(gamma=" << gamma << ")";
    return StepSchedule(Kind::Constant, gamma, 0.0, {}, os.str(), cache_horizon);
}

StepSchedule StepSchedule::custom(Generator generator, std::string label,
                                  std::uint64_t cache_horizon) {
    if (!generator) throw InvalidScheduleError("custom schedule needs a generator");
    return StepSchedule(Kind::Custom, 0.0, 0.0, std::move(generator), std::move(label),
                        cache_horizon);
}

double StepSchedule::raw_gamma(std::uint64_t n) const {
    switch (kind_) {
        case Kind::Polynomial:
            return c_ * std::pow(static_cast<double>(n), -rho_);
        case Kind::Constant:
            return c_;
        case Kind::Custom:
            return generator_(n);
    }
    return 0.0;
}

double StepSchedule::gamma(std::uint64_t n) const {
    if (n == 0) throw DomainError("gamma(n) is defined for n >= 1");
    const double g = raw_gamma(n);
    if (!(g > 0.0) || !std::isfinite(g)) {
        std::ostringstream os;
        os << "schedule " << label_ << " produced step " << g << " at n=" << n;
        throw InvalidScheduleError(os.str());
    }
    return g;
}

double StepSchedule::big_gamma(std::uint64_t n) const {
    const std::uint64_t h = cache_->sums.size() - 1;
    if (n <= h) return cache_->sums[n];
    // Resume the exact accumulator state at the end of the cache.
    double comp = cache_->comp[h];
    double sum = cache_->raw[h];
    for (std::uint64_t k = h + 1; k <= n; ++k) {
        const double x = gamma(k);
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::uint64_t StepSchedule::index_of_time(double t) const {
    if (!(t >= 0.0)) throw DomainError("index_of_time needs t >= 0");
    const auto& sums = cache_->sums;
    if (t < sums.back()) {
        // Largest n with sums[n] <= t.
        auto it = std::upper_bound(sums.begin(), sums.end(), t);
        return static_cast<std::uint64_t>(it - sums.begin()) - 1;
    }
    std::uint64_t n = sums.size() - 1;
    double comp = cache_->comp[n];
    double sum = cache_->raw[n];
    for (;;) {
        const double x = gamma(n + 1);
        double c2 = comp;
        const double s2 = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            c2 += (sum - s2) + x;
        else
            c2 += (x - s2) + sum;
        if (s2 + c2 > t) return n;
        sum = s2;
        comp = c2;
        ++n;
    }
}

double StepSchedule::sup_step() const {
    switch (kind_) {
        case Kind::Polynomial:
            return c_;
        case Kind::Constant:
            return c_;
        case Kind::Custom: {
            double m = 0.0;
            const std::uint64_t h = std::max<std::uint64_t>(cache_->sums.size() - 1, 1);
            for (std::uint64_t n = 1; n <= h; ++n) m = std::max(m, gamma(n));
            return m;
        }
    }
    return 0.0;
}

bool ValidationReport::all_hold() const noexcept {
    return std::all_of(clauses.begin(), clauses.end(),
                       [](const ClauseResult& c) { return c.verdict == ClauseVerdict::Holds; });
}

const ClauseResult& ValidationReport::clause(const std::string& name) const {
    for (const auto& c : clauses)
        if (c.clause == name) return c;
    throw DomainError("no clause named " + name);
}

namespace {

ValidationReport analytic_polynomial(double rho) {
    ValidationReport r;
    std::ostringstream b;
    if (rho <= 1.0) {
        r.clauses.push_back({"H3.a", ClauseVerdict::Holds, ClauseBasis::Analytic,
                             "c n^-rho -> 0 and sum diverges for rho <= 1"});
        const double p = rho > 0.5 ? 2.0 : 1.0 / rho + 1.0;
        b << "p = " << p << " > 1/rho gives a convergent p-series";
        r.clauses.push_back({"H3.b", ClauseVerdict::Holds, ClauseBasis::Analytic, b.str()});
    } else {
        r.clauses.push_back({"H3.a", ClauseVerdict::Fails, ClauseBasis::Analytic,
                             "rho > 1: Gamma_n converges, so Gamma_n does not tend to infinity"});
        b << "p = 2 works (rho > 1)";
        r.clauses.push_back({"H3.b", ClauseVerdict::Holds, ClauseBasis::Analytic, b.str()});
    }
    std::ostringstream c;
    c << "gamma_n / gamma_{n+1} = (1 + 1/n)^rho <= 2^rho = " << std::pow(2.0, rho);
    r.clauses.push_back({"H3.c", ClauseVerdict::Holds, ClauseBasis::Analytic, c.str()});
    return r;
}

ValidationReport analytic_constant() {
    ValidationReport r;
    r.clauses.push_back({"H3.a", ClauseVerdict::Fails, ClauseBasis::Analytic,
                         "constant step does not tend to 0 (biased constant-step scheme)"});
    r.clauses.push_back({"H3.b", ClauseVerdict::Fails, ClauseBasis::Analytic,
                         "sum gamma^p diverges for every p"});
    r.clauses.push_back({"H3.c", ClauseVerdict::Holds, ClauseBasis::Analytic,
                         "gamma_n / gamma_{n+1} = 1"});
    return r;
}

// Ratio of successive doubling increments of a partial-sum sequence. For a
// p-series with exponent s this tends to 2^(1-s): >= 1 iff divergent.
double doubling_ratio(const std::vector<double>& partial, std::uint64_t h) {
    const double d2 = partial[h] - partial[h / 2];
    const double d1 = partial[h / 2] - partial[h / 4];
    if (d1 <= 0.0) return 0.0;
    return d2 / d1;
}

ValidationReport heuristic_custom(const StepSchedule& s, std::uint64_t horizon) {
    constexpr double kTol = 0.99;
    ValidationReport r;
    r.caveat =
        "custom schedule: clauses checked on n <= " + std::to_string(horizon) +
        " only; a finite prefix cannot certify limits or existence of p";
    std::vector<double> gammas(horizon + 2);
    for (std::uint64_t n = 1; n <= horizon + 1; ++n) gammas[n] = s.gamma(n);

    std::vector<double> partial(horizon + 1, 0.0);
    CompensatedSum acc;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        acc.add(gammas[n]);
        partial[n] = acc.value();
    }
    const std::uint64_t quarter = std::max<std::uint64_t>(horizon / 4, 1);
    const bool decays = gammas[horizon] < kTol * gammas[quarter];
    const double ratio = horizon >= 4 ? doubling_ratio(partial, horizon) : 0.0;
    const bool diverges = ratio >= kTol;
    {
        std::ostringstream os;
        os << "gamma_h / gamma_{h/4} = " << gammas[horizon] / gammas[quarter]
           << ", Gamma doubling-increment ratio = " << ratio;
        r.clauses.push_back({"H3.a", decays && diverges ? ClauseVerdict::Holds : ClauseVerdict::Fails,
                             ClauseBasis::FiniteHorizon, os.str()});
    }
    {
        ClauseResult b{"H3.b", ClauseVerdict::Fails, ClauseBasis::FiniteHorizon,
                       "no p in {1.1, 1.25, 1.5, 2, 3, 4, 8} gives a converging trend"};
        for (double p : {1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0}) {
            std::vector<double> pp(horizon + 1, 0.0);
            CompensatedSum a;
            for (std::uint64_t n = 1; n <= horizon; ++n) {
                a.add(std::pow(gammas[n], p));
                pp[n] = a.value();
            }
            if (horizon >= 4 && doubling_ratio(pp, horizon) < kTol) {
                std::ostringstream os;
                os << "sum gamma^p shows a converging trend for p = " << p;
                b = {"H3.b", ClauseVerdict::Holds, ClauseBasis::FiniteHorizon, os.str()};
                break;
            }
        }
        r.clauses.push_back(b);
    }
    {
        double worst = 0.0;
        for (std::uint64_t n = 1; n <= horizon; ++n) worst = std::max(worst, gammas[n] / gammas[n + 1]);
        std::ostringstream os;
        os << "max gamma_n / gamma_{n+1} over prefix = " << worst;
        r.clauses.push_back({"H3.c", worst < 1e6 ? ClauseVerdict::Holds : ClauseVerdict::Fails,
                             ClauseBasis::FiniteHorizon, os.str()});
    }
    return r;
}

}  // namespace

ValidationReport validate_h3(const StepSchedule& schedule, std::uint64_t horizon) {
    if (horizon < 2) throw DomainError("validate_h3 needs horizon >= 2");
    // Every kind is scanned for non-positive steps over the horizon.
    for (std::uint64_t n = 1; n <= horizon; ++n) (void)schedule.gamma(n);
    switch (schedule.kind()) {
        case StepSchedule::Kind::Polynomial:
            return analytic_polynomial(schedule.rho());
        case StepSchedule::Kind::Constant:
            return analytic_constant();
        case StepSchedule::Kind::Custom:
            return heuristic_custom(schedule, horizon);
    }
    return {};
}

}  // namespace qsd
