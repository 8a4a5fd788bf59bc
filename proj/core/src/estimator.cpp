#include "qsd/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

QsdChain::QsdChain(const SdeModel& model, std::shared_ptr<const Domain> domain, const StepSchedule& schedule,
                   RedistributionPolicy policy, const Point& x0, RngStream rng, bool track_occupation,
                   bool record_trace)
    : model_(&model),
      domain_(std::move(domain)),
      schedule_(&schedule),
      policy_(std::move(policy), domain_, x0),
      rng_(rng),
      x0_(x0),
      x_(x0),
      record_trace_(record_trace) {
    if (model.dim() != domain_->dim() || x0.dim() != domain_->dim())
        throw ConfigError("model, domain and x0 dimensions differ");
    if (!domain_->contains(x0)) throw ConfigError("x0 must lie in the open domain D");
    full_policy_ = policy_.policy().kind == RedistributionPolicy::Kind::FullOccupation;
    if (track_occupation && !full_policy_) occupation_.emplace(domain_->dim());
    next_gamma_ = schedule.gamma(1);
    policy_.record_visit(x_, next_gamma_);
    if (occupation_) occupation_->record(x_, next_gamma_);
}

void QsdChain::step() {
    const double dt = next_gamma_;   // gamma_{n+1}
    const std::uint64_t n = n_;
    const Point noise = gaussian_increment(rng_, n, x_.dim(), dt);
    const Point b = model_->drift(x_);
    const Point s = model_->diffuse(x_, noise);
    Point proposal(x_.dim());
    for (std::size_t i = 0; i < x_.dim(); ++i) proposal[i] = x_[i] + b[i] * dt + s[i];
    if (!proposal.finite()) throw NumericError("non-finite Euler proposal", n + 1, rng_.chain());

    clock_.add(dt);
    ++n_;
    const bool killed = !domain_->contains_unchecked(proposal);
    Point landing = proposal;
    if (killed) {
        ++kills_;
        // p_{n+1} is built from X_{Gamma_0..Gamma_n}, all recorded already.
        landing = policy_.sample_restart(rng_, n);
        renewals_.push_back({n_, clock_.value(), landing});
    }
    if (record_trace_) trace_.push_back({proposal, killed, landing});
    x_ = landing;
    next_gamma_ = schedule_->gamma(n_ + 1);
    policy_.record_visit(x_, next_gamma_);
    if (occupation_) occupation_->record(x_, next_gamma_);
}

const WeightedEmpiricalMeasure* QsdChain::occupation() const noexcept {
    if (full_policy_) return policy_.measure();
    return occupation_ ? &*occupation_ : nullptr;
}

std::optional<WeightedEmpiricalMeasure> QsdChain::release_occupation() {
    if (full_policy_) {
        const WeightedEmpiricalMeasure* m = policy_.measure();
        return m ? std::optional<WeightedEmpiricalMeasure>(*m) : std::nullopt;
    }
    return std::move(occupation_);
}

double QsdChain::survival_rate() const { return qsd::survival_rate(kills_, clock()); }

double survival_rate(std::uint64_t kills, double gamma_n) {
    if (!(gamma_n > 0.0)) throw DomainError("survival rate is undefined before the first step");
    return static_cast<double>(kills) / gamma_n;
}

EmpiricalLaw renewal_measure(const std::vector<Renewal>& renewals) {
    if (renewals.empty()) throw DomainError("renewal measure is empty: no kill occurred");
    std::vector<double> x;
    x.reserve(renewals.size());
    for (const auto& r : renewals) x.push_back(r.landing[0]);
    return EmpiricalLaw::from_samples(std::move(x));
}

std::vector<double> tightness_profile(const WeightedEmpiricalMeasure& measure, const Domain& domain,
                                      const std::vector<double>& etas) {
    std::vector<double> out;
    out.reserve(etas.size());
    const std::size_t begin = measure.first_retained(), end = measure.size();
    std::vector<double> psi;
    psi.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) psi.push_back(domain.signed_distance(measure.point(k)));
    const double total = measure.range_weight(begin, end);
    for (double eta : etas) {
        CompensatedSum acc;
        for (std::size_t k = begin; k < end; ++k)
            if (psi[k - begin] < eta) acc.add(measure.weight(k));
        out.push_back(acc.value() / total);
    }
    return out;
}

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_steps, std::uint64_t first, double ratio,
                                                 const std::vector<std::uint64_t>& extra) {
    std::vector<std::uint64_t> cps;
    if (n_steps == 0) return cps;
    double v = static_cast<double>(std::max<std::uint64_t>(first, 1));
    for (int j = 0; j < 400; ++j) {
        const auto n = static_cast<std::uint64_t>(std::ceil(v));
        if (n >= n_steps) break;
        cps.push_back(n);
        v *= ratio;
    }
    for (auto e : extra)
        if (e >= 1 && e <= n_steps) cps.push_back(e);
    cps.push_back(n_steps);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

QsdRunResult run(const SdeModel& model, std::shared_ptr<const Domain> domain, const StepSchedule& schedule,
                 const RedistributionPolicy& policy, const Point& x0, std::uint64_t n_steps,
                 const RunOptions& options, RngStream rng) {
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    QsdChain chain(model, domain, schedule, policy, x0, rng, options.track_occupation, options.record_trace);
    std::vector<std::uint64_t> cps = options.checkpoints.empty() ? geometric_checkpoints(n_steps)
                                                                 : options.checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    const bool want_w1 = options.checkpoint_w1 && options.reference && domain->dim() == 1;

    QsdRunResult result;
    result.seed = rng.seed();
    result.chain = rng.chain();
    result.policy = policy.describe();
    auto cp = cps.begin();
    while (cp != cps.end() && *cp == 0) ++cp;
    for (std::uint64_t n = 0; n < n_steps; ++n) {
        chain.step();
        if (cp != cps.end() && *cp == chain.steps()) {
            Checkpoint c;
            c.step = chain.steps();
            c.time = chain.clock();
            c.kills = chain.kills();
            c.lambda_hat = chain.survival_rate();
            const WeightedEmpiricalMeasure* occ = chain.occupation();
            // mu_n covers X_{Gamma_0..Gamma_{n-1}}.
            const std::size_t end = static_cast<std::size_t>(c.step);
            const std::size_t begin = std::max<std::size_t>(occ ? occ->first_retained() : 0,
                                                            static_cast<std::size_t>(options.discard_prefix));
            if (want_w1 && occ && begin < end)
                c.w1_to_reference = wasserstein1_1d(EmpiricalLaw::from_measure(*occ, begin, end), *options.reference);
            result.checkpoints.push_back(c);
            ++cp;
        }
    }
    result.steps = chain.steps();
    result.kills = chain.kills();
    result.final_time = chain.clock();
    result.lambda_hat = chain.survival_rate();
    result.end_state = chain.state();
    result.renewals = chain.renewals();
    result.trace = chain.trace();

    const RedistributionState& ps = chain.policy_state();
    if (ps.partition()) {
        result.cell_weights = ps.normalized_cell_weights();
        for (std::size_t c = 0; c < ps.partition()->size(); ++c)
            result.cell_representatives.push_back(ps.representative(c).value_or(ps.partition()->cell_center(c)));
    }
    if (const WeightedEmpiricalMeasure* occ = chain.occupation()) {
        const std::size_t begin = std::max<std::size_t>(occ->first_retained(),
                                                        static_cast<std::size_t>(options.discard_prefix));
        if (begin < occ->size()) {
            if (options.reference && domain->dim() == 1)
                result.w1_final = wasserstein1_1d(EmpiricalLaw::from_measure(*occ, begin, occ->size()),
                                                  *options.reference);
            const auto profile = tightness_profile(*occ, *domain, options.tightness_etas);
            for (std::size_t i = 0; i < profile.size(); ++i)
                result.tightness.emplace_back(options.tightness_etas[i], profile[i]);
        }
        if (options.keep_occupation) result.occupation = chain.release_occupation();
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

ReplayReport replay_trace(const SdeModel& model, std::shared_ptr<const Domain> domain,
                          const StepSchedule& schedule, const RedistributionPolicy& policy, const Point& x0,
                          RngStream rng, const std::vector<TraceEntry>& trace) {
    RedistributionState state(policy, domain, x0);
    ReplayReport report;
    Point x = x0;
    state.record_visit(x, schedule.gamma(1));
    for (std::uint64_t n = 0; n < trace.size(); ++n) {
        const TraceEntry& e = trace[n];
        const double dt = schedule.gamma(n + 1);
        const Point proposal = euler_step(model, x, dt, gaussian_increment(rng, n, x.dim(), dt));
        bool ok = proposal == e.proposal;
        const bool killed = !domain->contains(proposal);
        ok = ok && killed == e.killed;
        Point landing = proposal;
        if (killed) landing = state.sample_restart(rng, n);
        ok = ok && landing == e.landing;
        ++report.steps_checked;
        if (!ok) {
            ++report.mismatches;
            if (!report.first_mismatch) report.first_mismatch = n + 1;
        }
        // Follow the recorded path so one divergence does not cascade.
        x = e.landing;
        state.record_visit(x, schedule.gamma(n + 2));
    }
    return report;
}

}  // namespace qsd
