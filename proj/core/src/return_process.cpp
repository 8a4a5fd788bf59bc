#include "qsd/return_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsd/errors.hpp"
#include "qsd/numeric.hpp"
#include "qsd/parallel.hpp"

namespace qsd {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::uint32_t kInitialSlotBase = 16;

// A grid time t_k counts as "<= s" with a little relative slack so that
// k * eta accumulated in floating point does not miss s = k * eta.
bool not_after(double tk, double s) { return tk <= s + 1e-10 * std::max(1.0, std::abs(s)); }

// Constant schedules skip the checked generator call in hot loops.
struct StepSource {
    const StepSchedule& s;
    bool constant;
    double c;
    explicit StepSource(const StepSchedule& sch)
        : s(sch), constant(sch.kind() == StepSchedule::Kind::Constant), c(sch.c()) {}
    double operator()(std::uint64_t n) const { return constant ? c : s.gamma(n); }
};

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t batch) { return splitmix64(seed + batch); }

McEstimate summarize(const std::vector<double>& values) {
    McEstimate e;
    e.replicas = values.size();
    if (values.empty()) return e;
    CompensatedSum s;
    for (double v : values) s.add(v);
    e.mean = s.value() / static_cast<double>(values.size());
    if (values.size() > 1) {
        CompensatedSum q;
        for (double v : values) q.add((v - e.mean) * (v - e.mean));
        const double var = q.value() / static_cast<double>(values.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    e.ci_half_width = kZ95 * e.std_error;
    return e;
}

void validate_return_config(const ReturnProcessConfig& cfg, const Domain& domain) {
    if (!cfg.mu) throw ConfigError("return process needs a redistribution law mu");
    if (cfg.mu->dim() != domain.dim()) throw ConfigError("mu and domain dimensions differ");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("horizon must be > 0");
    for (std::size_t i = 0; i < cfg.instants.size(); ++i) {
        const double s = cfg.instants[i];
        if (!(s >= 0.0 && s <= cfg.horizon)) throw ConfigError("sampling instants must lie in [0, horizon]");
        if (i > 0 && s < cfg.instants[i - 1]) throw ConfigError("sampling instants must be sorted");
    }
    if (cfg.perturbation_radius < 0.0) throw ConfigError("perturbation radius must be >= 0");
    if (cfg.perturbation_radius > 0.0 && domain.dim() != 1)
        throw ConfigError("perturbed redistribution is only available in dimension 1");
}

}  // namespace

double perturbation_weight(const FixedLaw& mu, double a, double b, double radius) {
    if (radius <= 0.0) return 0.0;
    const double d = mu.wasserstein1_to_uniform(a, b);
    if (!(d > 0.0)) return 1.0;
    return std::min(1.0, radius / d);
}

ReturnTrajectory simulate_return_chain(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                       const ReturnProcessConfig& cfg, const Point& x0, RngStream rng) {
    validate_return_config(cfg, domain);
    if (!domain.contains(x0)) throw ConfigError("return process start must lie in D");

    const std::size_t d = domain.dim();
    const double a = domain.lower()[0], b = domain.upper()[0];
    const double w_max = perturbation_weight(*cfg.mu, a, b, cfg.perturbation_radius);

    ReturnTrajectory out;
    out.start = x0;
    out.samples.reserve(cfg.instants.size());
    std::size_t next_instant = 0;

    Point x = x0;
    CompensatedSum clock;
    const StepSource step(eta);
    std::uint64_t n = 0;
    for (;;) {
        const double dt = step(n + 1);
        const double t_next = clock.value() + dt;
        while (next_instant < cfg.instants.size() && !not_after(t_next, cfg.instants[next_instant])) {
            out.samples.push_back(x);
            ++next_instant;
        }
        if (!not_after(t_next, cfg.horizon)) break;

        Point y = euler_step(model, x, dt, gaussian_increment(rng, n, d, dt));
        if (!y.finite()) throw NumericError("non-finite Euler proposal in return process", n + 1, rng.chain());
        clock.add(dt);
        ++n;
        if (!domain.contains_unchecked(y)) {
            if (w_max > 0.0) {
                const double w = w_max * rng.uniform(n - 1, 0, Lane::Auxiliary);
                if (rng.uniform(n - 1, 1, Lane::Auxiliary) < w) {
                    const double u = rng.open_uniform(n - 1, 2, Lane::Auxiliary);
                    y = Point{a + (b - a) * u};
                } else {
                    y = cfg.mu->sample(rng, n - 1);
                }
            } else {
                y = cfg.mu->sample(rng, n - 1);
            }
            if (cfg.record_jumps) out.jumps.push_back({n, clock.value(), y});
        }
        x = y;
    }
    while (next_instant < cfg.instants.size()) {
        out.samples.push_back(x);
        ++next_instant;
    }
    out.end_state = x;
    out.steps = n;
    out.end_time = clock.value();
    return out;
}

ReturnTrajectory simulate_return_chain(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                       const ReturnProcessConfig& cfg, const FixedLaw& initial, RngStream rng) {
    if (initial.dim() != domain.dim()) throw ConfigError("initial law and domain dimensions differ");
    const Point x0 = initial.sample(rng, 0, Lane::Auxiliary, kInitialSlotBase);
    return simulate_return_chain(model, domain, eta, cfg, x0, rng);
}

std::vector<ReturnTrajectory> simulate_batch(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                             const ReturnProcessConfig& cfg, const FixedLaw& initial,
                                             std::uint64_t n_replicas, std::uint64_t seed, unsigned threads) {
    validate_return_config(cfg, domain);
    std::vector<ReturnTrajectory> out(n_replicas);
    parallel_for(n_replicas, threads, [&](std::size_t r) {
        out[r] = simulate_return_chain(model, domain, eta, cfg, initial, RngStream(seed, r));
    });
    return out;
}

namespace {

// Runs one killed Euler path from x and accumulates sum_k eta_{k+1} f_j(Y_{t_k}) for
// every grid point before the exit step.
void killed_path_sums(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                      const std::vector<TestFunction>& fns, const Point& x0, RngStream rng, std::uint64_t max_steps,
                      std::vector<double>& sums) {
    const std::size_t d = domain.dim();
    std::vector<CompensatedSum> acc(fns.size());
    const StepSource step(eta);
    Point x = x0;
    for (std::uint64_t n = 0;; ++n) {
        if (n >= max_steps) {
            std::ostringstream os;
            os << "replica did not exit within " << max_steps << " steps";
            throw NumericError(os.str(), n, rng.chain());
        }
        const double dt = step(n + 1);
        for (std::size_t j = 0; j < fns.size(); ++j) acc[j].add(dt * fns[j](x));
        const Point y = euler_step(model, x, dt, gaussian_increment(rng, n, d, dt));
        if (!y.finite()) throw NumericError("non-finite Euler proposal", n + 1, rng.chain());
        if (!domain.contains_unchecked(y)) break;
        x = y;
    }
    for (std::size_t j = 0; j < fns.size(); ++j) sums[j] = acc[j].value();
}

}  // namespace

std::vector<McEstimate> estimate_A(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                                   const std::vector<TestFunction>& fns, const Point& x, std::uint64_t n_replicas,
                                   const ReplicaOptions& opts) {
    if (!domain.contains(x)) throw DomainError("estimate_A start point must lie in D");
    if (n_replicas == 0) throw ConfigError("n_replicas must be >= 1");
    const std::size_t m = fns.size();
    std::vector<double> values(n_replicas * m);
    parallel_for(n_replicas, opts.threads, [&](std::size_t r) {
        std::vector<double> sums(m);
        killed_path_sums(model, domain, eta, fns, x, RngStream(opts.seed, r), opts.max_steps, sums);
        std::copy(sums.begin(), sums.end(), values.begin() + static_cast<std::ptrdiff_t>(r * m));
    });
    std::vector<McEstimate> out;
    out.reserve(m);
    std::vector<double> col(n_replicas);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < n_replicas; ++r) col[r] = values[r * m + j];
        out.push_back(summarize(col));
    }
    return out;
}

McEstimate estimate_A(const SdeModel& model, const Domain& domain, const StepSchedule& eta, const TestFunction& f,
                      const Point& x, std::uint64_t n_replicas, const ReplicaOptions& opts) {
    return estimate_A(model, domain, eta, std::vector<TestFunction>{f}, x, n_replicas, opts).front();
}

RatioEstimate estimate_Pi(const SdeModel& model, const Domain& domain, const StepSchedule& eta, const FixedLaw& mu,
                          const TestFunction& f, std::uint64_t n_replicas, const ReplicaOptions& opts) {
    if (mu.dim() != domain.dim()) throw ConfigError("mu and domain dimensions differ");
    if (n_replicas < 2) throw ConfigError("estimate_Pi needs at least 2 replicas");
    const std::vector<TestFunction> fns{f, [](const Point&) { return 1.0; }};
    std::vector<double> num(n_replicas), den(n_replicas);
    parallel_for(n_replicas, opts.threads, [&](std::size_t r) {
        RngStream rng(opts.seed, r);
        const Point x = mu.sample(rng, 0, Lane::Auxiliary, kInitialSlotBase);
        if (!domain.contains(x)) throw DomainError("mu must be supported in D");
        std::vector<double> sums(2);
        killed_path_sums(model, domain, eta, fns, x, rng, opts.max_steps, sums);
        num[r] = sums[0];
        den[r] = sums[1];
    });
    const McEstimate en = summarize(num), ed = summarize(den);
    RatioEstimate out;
    out.replicas = n_replicas;
    out.numerator = en.mean;
    out.denominator = ed.mean;
    out.denominator_ci_half_width = ed.ci_half_width;
    out.unreliable = !(ed.mean - ed.ci_half_width > 0.0);
    out.value = en.mean / ed.mean;
    CompensatedSum q;
    for (std::size_t r = 0; r < n_replicas; ++r) {
        const double z = num[r] - out.value * den[r];
        q.add(z * z);
    }
    const double n = static_cast<double>(n_replicas);
    out.std_error = std::sqrt(q.value() / (n - 1.0) / n) / std::abs(ed.mean);
    out.ci_half_width = kZ95 * out.std_error;
    return out;
}

std::vector<double> time_law_distances(const std::vector<ReturnTrajectory>& a,
                                       const std::vector<ReturnTrajectory>& b) {
    if (a.empty() || b.empty()) throw DomainError("time-law distance needs nonempty batches");
    const std::size_t m = a.front().samples.size();
    const std::size_t d = a.front().start.dim();
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (d == 1) {
            std::vector<double> xa, xb;
            xa.reserve(a.size());
            xb.reserve(b.size());
            for (const auto& t : a) xa.push_back(t.samples.at(j)[0]);
            for (const auto& t : b) xb.push_back(t.samples.at(j)[0]);
            out[j] = wasserstein1_1d(EmpiricalLaw::from_samples(std::move(xa)),
                                     EmpiricalLaw::from_samples(std::move(xb)));
        } else {
            std::vector<Point> pa, pb;
            for (const auto& t : a) pa.push_back(t.samples.at(j));
            for (const auto& t : b) pb.push_back(t.samples.at(j));
            SequentialRng rng(0x5EEDull, j);
            out[j] = wasserstein1_sliced(pa, pb, 200, rng).value;
        }
    }
    return out;
}

WeakErrorTable weak_error_curve(const SdeModel& model, const Domain& domain, const FixedLaw& mu,
                                const FixedLaw& mu0, double horizon, const std::vector<double>& eta_list,
                                const WeakErrorOptions& opts) {
    if (eta_list.empty()) throw ConfigError("eta_list is empty");
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        if (!(eta_list[i] > 0.0)) throw ConfigError("eta_list entries must be > 0");
        if (i > 0 && !(eta_list[i] < eta_list[i - 1])) throw ConfigError("eta_list must be strictly decreasing");
    }
    if (opts.n_replicas < 4) throw ConfigError("weak_error_curve needs at least 4 replicas");
    if (opts.n_times == 0) throw ConfigError("n_times must be >= 1");

    WeakErrorTable table;
    table.eta_ref = opts.eta_ref > 0.0 ? opts.eta_ref : eta_list.back() / 20.0;
    for (std::size_t i = 1; i <= opts.n_times; ++i)
        table.times.push_back(horizon * static_cast<double>(i) / static_cast<double>(opts.n_times));

    ReturnProcessConfig cfg;
    cfg.mu = std::make_shared<const FixedLaw>(mu);
    cfg.horizon = horizon;
    cfg.instants = table.times;
    cfg.record_jumps = false;

    const StepSchedule ref_eta = StepSchedule::constant(table.eta_ref);
    const auto reference = simulate_batch(model, domain, ref_eta, cfg, mu0, opts.n_replicas,
                                          batch_seed(opts.seed, 0), opts.threads);
    const std::size_t half = reference.size() / 2;
    const std::vector<ReturnTrajectory> first(reference.begin(), reference.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<ReturnTrajectory> second(reference.begin() + static_cast<std::ptrdiff_t>(half), reference.end());
    table.noise_floor_by_time = time_law_distances(first, second);
    table.noise_floor = *std::max_element(table.noise_floor_by_time.begin(), table.noise_floor_by_time.end());

    cfg.perturbation_radius = opts.perturbation_radius;
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        const StepSchedule s = StepSchedule::constant(eta_list[i]);
        const auto batch = simulate_batch(model, domain, s, cfg, mu0, opts.n_replicas,
                                          batch_seed(opts.seed, i + 1), opts.threads);
        WeakErrorRow row;
        row.eta = eta_list[i];
        row.w1 = time_law_distances(batch, reference);
        row.sup_w1 = *std::max_element(row.w1.begin(), row.w1.end());
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<Point> start_grid(const Domain& domain, std::size_t n_target) {
    if (n_target == 0) throw ConfigError("start grid needs at least one point");
    const std::size_t d = domain.dim();
    const Point lo = domain.lower(), hi = domain.upper();
    auto per_axis = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n_target), 1.0 / static_cast<double>(d))));
    per_axis = std::max<std::size_t>(per_axis, 1);
    std::vector<Point> out;
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
        Point p(d);
        for (std::size_t i = 0; i < d; ++i)
            p[i] = lo[i] + (hi[i] - lo[i]) * (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(per_axis);
        if (domain.contains(p)) out.push_back(p);
        std::size_t k = 0;
        while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == d) break;
    }
    if (out.empty()) throw DomainError("start grid has no point inside D");
    return out;
}

ExitTailTable exit_time_tail(const SdeModel& model, const Domain& domain, const StepSchedule& eta,
                             std::uint64_t n_replicas, const ExitTailOptions& opts) {
    if (n_replicas == 0) throw ConfigError("n_replicas must be >= 1");
    if (opts.n_points < 2) throw ConfigError("n_points must be >= 2");
    const std::vector<Point> starts = start_grid(domain, opts.n_starts);
    const std::size_t d = domain.dim();
    const double inf = std::numeric_limits<double>::infinity();

    ExitTailTable table;
    table.replicas = n_replicas;
    table.exit_times.assign(n_replicas, inf);
    parallel_for(n_replicas, opts.threads, [&](std::size_t r) {
        RngStream rng(opts.seed, r);
        Point x = starts[r % starts.size()];
        CompensatedSum clock;
        const StepSource step(eta);
        for (std::uint64_t n = 0;; ++n) {
            if (n >= opts.max_steps) throw NumericError("replica did not exit within the step budget", n, r);
            const double dt = step(n + 1);
            if (opts.t_max > 0.0 && clock.value() + dt > opts.t_max) return;  // censored
            const Point y = euler_step(model, x, dt, gaussian_increment(rng, n, d, dt));
            if (!y.finite()) throw NumericError("non-finite Euler proposal", n + 1, r);
            clock.add(dt);
            if (!domain.contains_unchecked(y)) {
                table.exit_times[r] = clock.value();
                return;
            }
            x = y;
        }
    });

    std::vector<double> sorted = table.exit_times;
    std::sort(sorted.begin(), sorted.end());
    double t_end = opts.t_max;
    if (!(t_end > 0.0)) {
        t_end = 0.0;
        for (double t : sorted)
            if (std::isfinite(t)) t_end = std::max(t_end, t);
    }
    const double n = static_cast<double>(n_replicas);
    for (std::size_t j = 0; j <= opts.n_points; ++j) {
        const double t = t_end * static_cast<double>(j) / static_cast<double>(opts.n_points);
        const auto exited = static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        const std::uint64_t surv = n_replicas - exited;
        const double p = static_cast<double>(surv) / n;
        const double z2 = kZ95 * kZ95;
        const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
        table.points.push_back({t, p, std::max(0.0, centre - half), std::min(1.0, centre + half), surv});
    }

    // Weighted least squares of log S(t) on t; Var(log S) ~ (1 - S) / survivors.
    double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (const TailPoint& pt : table.points) {
        if (!(pt.survival <= opts.fit_survival_max) || pt.survivors < opts.min_survivors || pt.survival >= 1.0) continue;
        const double w = static_cast<double>(pt.survivors) / (1.0 - pt.survival);
        const double y = std::log(pt.survival);
        sw += w;
        st += w * pt.time;
        sy += w * y;
        stt += w * pt.time * pt.time;
        sty += w * pt.time * y;
        if (table.fit_points == 0) table.fit_start = pt.time;
        table.fit_end = pt.time;
        ++table.fit_points;
    }
    if (table.fit_points >= 2) {
        const double det = sw * stt - st * st;
        table.slope = (sw * sty - st * sy) / det;
        table.intercept = (sy - table.slope * st) / sw;
        table.slope_std_error = std::sqrt(sw / det);
    } else {
        table.slope = std::numeric_limits<double>::quiet_NaN();
        table.intercept = std::numeric_limits<double>::quiet_NaN();
        table.slope_std_error = std::numeric_limits<double>::quiet_NaN();
    }
    return table;
}

RenewalSplit renewal_split(const std::vector<ReturnTrajectory>& batch, const std::vector<double>& instants,
                           std::size_t instant_index, const TestFunction& f) {
    if (batch.empty()) throw DomainError("renewal split needs a nonempty batch");
    if (instant_index >= instants.size()) throw DomainError("instant index out of range");
    const double t = instants[instant_index];
    RenewalSplit out;
    CompensatedSum all, pre, post;
    for (const auto& tr : batch) {
        const double v = f(tr.samples.at(instant_index));
        all.add(v);
        const bool jumped = !tr.jumps.empty() && not_after(tr.jumps.front().time, t);
        if (jumped) {
            post.add(v);
        } else {
            pre.add(v);
            ++out.replicas_before;
        }
    }
    const double n = static_cast<double>(batch.size());
    out.direct = all.value() / n;
    out.before_first_jump = pre.value() / n;
    out.after_first_jump = post.value() / n;
    return out;
}

}  // namespace qsd
