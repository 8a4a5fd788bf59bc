#include "qsd_app/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qsd/errors.hpp"
#include "qsd/estimator.hpp"
#include "qsd/parallel.hpp"
#include "qsd/return_process.hpp"

#ifndef QSD_VERSION
#define QSD_VERSION "0.0.0"
#endif
#ifndef QSD_GIT_DESCRIBE
#define QSD_GIT_DESCRIBE "unknown"
#endif

namespace qsd::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string version_string() { return QSD_VERSION; }
std::string git_stamp() { return QSD_GIT_DESCRIBE; }

namespace {

Point to_point(const std::vector<double>& v) { return Point(std::span<const double>(v)); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Collects the files of one output directory and keeps their names for meta.json.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        const fs::path probe = root_ / ".write_probe";
        std::ofstream p(probe);
        if (ec || !p) throw ConfigError("config field 'out': directory " + root_.string() + " is not writable");
        p.close();
        fs::remove(probe, ec);
    }

    std::ofstream open(const std::string& rel) {
        const fs::path path = root_ / rel;
        fs::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + path.string());
        files_.push_back(rel);
        return f;
    }

    void write_json(const std::string& rel, const json& j) {
        auto f = open(rel);
        f << j.dump(2) << "\n";
    }

    const fs::path& root() const { return root_; }
    std::vector<std::string>& files() { return files_; }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

std::string coord_header(std::size_t dim, const std::string& prefix) {
    if (dim == 1) return prefix;
    std::string h;
    for (std::size_t i = 0; i < dim; ++i) h += (i ? "," : "") + prefix + std::to_string(i);
    return h;
}

std::string coords(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.dim(); ++i) s += (i ? "," : "") + fmt(p[i]);
    return s;
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Mean exit time u(x) = (x - a)(b - x) / s^2, which solves (s^2/2) u'' = -1 with zero boundary values.
std::optional<double> exit_time_mean(const ExperimentConfig& cfg, double x) {
    if (cfg.model.kind != "brownian" || cfg.domain.kind != "interval") return std::nullopt;
    const double s2 = cfg.model.scale * cfg.model.scale;
    return (x - cfg.domain.a) * (cfg.domain.b - x) / s2;
}

// Nonincreasing up to one inversion, which must stay within `slack`.
bool decreasing_with_one_inversion(const std::vector<double>& v, double slack) {
    int inversions = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) {
            if (++inversions > 1 || v[i] - v[i - 1] > slack) return false;
        }
    }
    return true;
}

RunOptions run_options(const ExperimentConfig& cfg, const std::optional<ReferenceQsd>& ref) {
    RunOptions o;
    o.checkpoints = cfg.checkpoints.empty() ? geometric_checkpoints(cfg.steps) : cfg.checkpoints;
    o.reference = ref;
    o.discard_prefix = cfg.discard_prefix;
    return o;
}

json write_qsd_run(OutputDir& out, const std::string& prefix, const QsdRunResult& r,
                   const std::optional<ReferenceQsd>& ref, std::size_t dim) {
    {
        auto f = out.open(prefix + "lambda.csv");
        f << "step,time,kills,lambda_hat,w1_to_reference\n";
        for (const auto& c : r.checkpoints)
            f << c.step << "," << fmt(c.time) << "," << c.kills << "," << fmt(c.lambda_hat) << ","
              << fmt(c.w1_to_reference) << "\n";
    }
    if (!r.cell_weights.empty()) {
        auto f = out.open(prefix + "cells.csv");
        f << "cell," << coord_header(dim, "x") << ",weight\n";
        for (std::size_t i = 0; i < r.cell_weights.size(); ++i)
            f << i << "," << coords(r.cell_representatives[i]) << "," << fmt(r.cell_weights[i]) << "\n";
    }
    if (r.occupation) {
        write_measure_csv(out.root() / (prefix + "measure.csv"), *r.occupation);
        out.files().push_back(prefix + "measure.csv");
    }
    {
        auto f = out.open(prefix + "renewals.csv");
        f << "step,time," << coord_header(dim, "landing") << "\n";
        for (const auto& rn : r.renewals) f << rn.step << "," << fmt(rn.time) << "," << coords(rn.landing) << "\n";
    }
    json s;
    s["seed"] = r.seed;
    s["policy"] = r.policy;
    s["steps"] = r.steps;
    s["kills"] = r.kills;
    s["final_time"] = r.final_time;
    s["lambda_hat"] = r.lambda_hat;
    s["w1_final"] = opt_number(r.w1_final);
    s["end_state"] = std::vector<double>(r.end_state.coords().begin(), r.end_state.coords().end());
    json tight = json::array();
    for (const auto& [eta, mass] : r.tightness) tight.push_back({{"eta", eta}, {"mass", mass}});
    s["tightness"] = tight;
    if (ref) {
        s["lambda_reference"] = ref->lambda();
        s["lambda_rel_error"] = std::fabs(r.lambda_hat - ref->lambda()) / ref->lambda();
    }
    return s;
}

json checks_qsd_run(const json& s) {
    json c = json::object();
    if (s.contains("lambda_reference")) c["lambda_within_5pct"] = s["lambda_rel_error"].get<double>() <= 0.05;
    if (!s["w1_final"].is_null()) c["w1_at_most_0.02"] = s["w1_final"].get<double>() <= 0.02;
    return c;
}

bool all_true(const json& checks) {
    for (const auto& [k, v] : checks.items())
        if (!v.get<bool>()) return false;
    return true;
}

RunOutcome do_qsd_run(OutputDir& out, const ExperimentConfig& cfg, json& meta_extra) {
    const SdeModel model = make_model(cfg);
    const auto domain = make_domain(cfg.domain);
    const StepSchedule schedule = make_schedule(cfg.schedule);
    const auto ref = make_reference(cfg, model);
    const RedistributionPolicy policy = make_policy(cfg.redistribution, ref);
    const Point x0 = to_point(cfg.x0);
    const RunOptions opts = run_options(cfg, ref);

    std::vector<QsdRunResult> results(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
        results[i] = run(model, domain, schedule, policy, x0, cfg.steps, opts, RngStream(cfg.seeds[i], 0));
    });

    RunOutcome o;
    json runs = json::array();
    json walls = json::array();
    bool pass = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string prefix = results.size() > 1 ? "seed_" + std::to_string(cfg.seeds[i]) + "/" : "";
        json s = write_qsd_run(out, prefix, results[i], ref, domain->dim());
        s["checks"] = checks_qsd_run(s);
        pass = pass && all_true(s["checks"]);
        runs.push_back(s);
        walls.push_back(results[i].wall_seconds);
    }
    o.summary = results.size() == 1 ? runs[0] : json{{"runs", runs}};
    if (results.size() > 1) {
        std::vector<double> l;
        for (const auto& r : results) l.push_back(r.lambda_hat);
        const double m = std::accumulate(l.begin(), l.end(), 0.0) / l.size();
        double v = 0.0;
        for (double x : l) v += (x - m) * (x - m);
        o.summary["lambda_hat_mean"] = m;
        o.summary["lambda_hat_sd"] = std::sqrt(v / (l.size() - 1));
    }
    meta_extra["chain_wall_seconds"] = walls;
    o.checks_passed = pass;
    return o;
}

RunOutcome do_replica_histogram(OutputDir& out, const ExperimentConfig& cfg) {
    const SdeModel model = make_model(cfg);
    const auto domain = make_domain(cfg.domain);
    const StepSchedule schedule = make_schedule(cfg.schedule);
    const auto ref = make_reference(cfg, model);
    const RedistributionPolicy policy = make_policy(cfg.redistribution, ref);
    const Point x0 = to_point(cfg.x0);
    const std::uint64_t chains = cfg.replica_histogram.chains;
    const std::uint64_t seed = cfg.seeds.front();

    RunOptions opts;
    opts.checkpoints = {cfg.steps};
    opts.checkpoint_w1 = false;
    opts.keep_occupation = false;
    opts.tightness_etas = {};

    std::vector<Point> ends(chains);
    parallel_for(chains, cfg.threads, [&](std::size_t c) {
        ends[c] = run(model, domain, schedule, policy, x0, cfg.steps, opts, RngStream(seed, c)).end_state;
    });

    {
        auto f = out.open("endpoints.csv");
        f << "chain," << coord_header(domain->dim(), "x") << "\n";
        for (std::size_t c = 0; c < ends.size(); ++c) f << c << "," << coords(ends[c]) << "\n";
    }

    RunOutcome o;
    o.summary["chains"] = chains;
    o.summary["steps"] = cfg.steps;
    o.summary["seed"] = seed;
    if (domain->dim() != 1) return o;

    const std::size_t bins = cfg.replica_histogram.bins;
    std::vector<double> edges;
    if (ref) {
        edges = equal_mass_edges(*ref, bins);
    } else {
        for (std::size_t i = 0; i <= bins; ++i)
            edges.push_back(cfg.domain.a + (cfg.domain.b - cfg.domain.a) * static_cast<double>(i) / bins);
    }
    std::vector<double> xs;
    for (const auto& p : ends) xs.push_back(p[0]);
    const std::vector<double> mass = histogram(EmpiricalLaw::from_samples(xs), edges);
    {
        auto f = out.open("hist.csv");
        f << "bin_left,bin_right,mass,expected\n";
        for (std::size_t i = 0; i < bins; ++i) {
            const double expected = ref ? ref->cdf(edges[i + 1]) - ref->cdf(edges[i]) : std::nan("");
            f << fmt(edges[i]) << "," << fmt(edges[i + 1]) << "," << fmt(mass[i]) << "," << fmt(expected) << "\n";
        }
    }
    if (ref) {
        std::vector<double> counts, probs;
        for (std::size_t i = 0; i < bins; ++i) {
            counts.push_back(std::round(mass[i] * static_cast<double>(chains)));
            probs.push_back(ref->cdf(edges[i + 1]) - ref->cdf(edges[i]));
        }
        const GoodnessOfFit chi = chi_squared_test(counts, probs);
        o.summary["chi_squared"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
        o.summary["checks"] = {{"chi_squared_p_above_0.01", chi.p_value > 0.01}};
        o.checks_passed = chi.p_value > 0.01;
    }
    return o;
}

RunOutcome do_operator_a(OutputDir& out, const ExperimentConfig& cfg) {
    const SdeModel model = make_model(cfg);
    const Domain domain = *make_domain(cfg.domain);
    const auto& oa = cfg.operator_a;
    ReplicaOptions ro;
    ro.seed = cfg.seeds.front();
    ro.threads = cfg.threads;
    const TestFunction one = [](const Point&) { return 1.0; };

    RunOutcome o;
    auto f = out.open("operator_a.csv");
    f << "eta,x,estimate,std_error,ci_half_width,reference,abs_error\n";
    json rows = json::array();
    std::vector<double> max_errors;
    for (double eta : oa.etas) {
        const StepSchedule sched = StepSchedule::constant(eta);
        double max_err = 0.0;
        bool have_ref = false;
        for (double x : oa.points) {
            const Point p{x};
            if (!domain.contains(p)) throw ConfigError("config field 'operator_a.points': point outside the domain");
            const McEstimate e = estimate_A(model, domain, sched, one, p, oa.replicas, ro);
            const auto u = exit_time_mean(cfg, x);
            const double err = u ? std::fabs(e.mean - *u) : std::nan("");
            if (u) {
                have_ref = true;
                max_err = std::max(max_err, err);
            }
            f << fmt(eta) << "," << fmt(x) << "," << fmt(e.mean) << "," << fmt(e.std_error) << ","
              << fmt(e.ci_half_width) << "," << fmt(u ? *u : std::nan("")) << "," << fmt(err) << "\n";
        }
        if (have_ref) max_errors.push_back(max_err);
        rows.push_back({{"eta", eta}, {"max_abs_error", have_ref ? json(max_err) : json(nullptr)}});
    }
    o.summary["replicas"] = oa.replicas;
    o.summary["seed"] = ro.seed;
    o.summary["by_eta"] = rows;
    if (!max_errors.empty()) {
        // etas listed coarse to fine
        const bool monotone = decreasing_with_one_inversion(max_errors, std::numeric_limits<double>::infinity());
        const bool small = max_errors.back() <= 0.01;
        o.summary["checks"] = {{"error_nonincreasing", monotone}, {"finest_error_at_most_0.01", small}};
        o.checks_passed = monotone && small;
    }
    return o;
}

RunOutcome do_weak_error(OutputDir& out, const ExperimentConfig& cfg) {
    const SdeModel model = make_model(cfg);
    const Domain domain = *make_domain(cfg.domain);
    const auto ref = make_reference(cfg, model);
    const auto& we = cfg.weak_error;
    const FixedLaw mu = make_law(we.mu, ref);
    const FixedLaw mu0 = make_law(we.mu0, ref);
    WeakErrorOptions wo;
    wo.n_replicas = we.replicas;
    wo.n_times = we.n_times;
    wo.eta_ref = we.eta_ref;
    wo.perturbation_radius = we.perturbation;
    wo.seed = cfg.seeds.front();
    wo.threads = cfg.threads;
    const WeakErrorTable t = weak_error_curve(model, domain, mu, mu0, we.horizon, we.etas, wo);

    {
        auto f = out.open("weak_error.csv");
        f << "eta,time,w1,noise_floor\n";
        for (const auto& row : t.rows)
            for (std::size_t j = 0; j < t.times.size(); ++j)
                f << fmt(row.eta) << "," << fmt(t.times[j]) << "," << fmt(row.w1[j]) << ","
                  << fmt(t.noise_floor_by_time[j]) << "\n";
    }
    RunOutcome o;
    json rows = json::array();
    std::vector<double> sups;
    for (const auto& row : t.rows) {
        rows.push_back({{"eta", row.eta}, {"sup_w1", row.sup_w1}});
        sups.push_back(row.sup_w1);
    }
    o.summary["eta_ref"] = t.eta_ref;
    o.summary["noise_floor"] = t.noise_floor;
    o.summary["replicas"] = we.replicas;
    o.summary["by_eta"] = rows;
    const bool ok = decreasing_with_one_inversion(sups, 2.0 * t.noise_floor);
    o.summary["checks"] = {{"sup_w1_decreasing", ok}};
    o.checks_passed = ok;
    return o;
}

RunOutcome do_exit_tail(OutputDir& out, const ExperimentConfig& cfg) {
    const SdeModel model = make_model(cfg);
    const Domain domain = *make_domain(cfg.domain);
    const auto ref = make_reference(cfg, model);
    const auto& et = cfg.exit_tail;
    ExitTailOptions eo;
    eo.n_starts = et.n_starts;
    eo.t_max = et.t_max;
    eo.n_points = et.n_points;
    eo.seed = cfg.seeds.front();
    eo.threads = cfg.threads;
    const ExitTailTable t = exit_time_tail(model, domain, StepSchedule::constant(et.eta), et.replicas, eo);
    {
        auto f = out.open("exit_tail.csv");
        f << "time,survival,ci_low,ci_high,survivors\n";
        for (const auto& p : t.points)
            f << fmt(p.time) << "," << fmt(p.survival) << "," << fmt(p.ci_low) << "," << fmt(p.ci_high) << ","
              << p.survivors << "\n";
    }
    RunOutcome o;
    o.summary = {{"eta", et.eta},           {"replicas", t.replicas},      {"slope", t.slope},
                 {"slope_std_error", t.slope_std_error}, {"intercept", t.intercept}, {"fit_start", t.fit_start},
                 {"fit_end", t.fit_end},   {"fit_points", t.fit_points}};
    if (ref) {
        const double rel = std::fabs(-t.slope - ref->lambda()) / ref->lambda();
        o.summary["lambda_reference"] = ref->lambda();
        o.summary["slope_rel_error"] = rel;
        o.summary["checks"] = {{"slope_within_15pct", rel <= 0.15}};
        o.checks_passed = rel <= 0.15;
    }
    return o;
}

RunOutcome do_policy_compare(OutputDir& out, const ExperimentConfig& cfg) {
    const SdeModel model = make_model(cfg);
    const auto domain = make_domain(cfg.domain);
    const StepSchedule schedule = make_schedule(cfg.schedule);
    const auto ref = make_reference(cfg, model);
    const Point x0 = to_point(cfg.x0);
    RunOptions opts = run_options(cfg, ref);
    opts.keep_occupation = false;
    const std::uint64_t seed = cfg.seeds.front();

    std::vector<QsdRunResult> results(cfg.policies.size());
    parallel_for(results.size(), cfg.threads, [&](std::size_t i) {
        results[i] = run(model, domain, schedule, make_policy(cfg.policies[i], ref), x0, cfg.steps, opts,
                         RngStream(seed, 0));
    });

    RunOutcome o;
    auto f = out.open("policy_compare.csv");
    f << "policy,steps,kills,final_time,lambda_hat,w1_to_reference\n";
    json rows = json::array();
    json checks = json::object();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        f << '"' << r.policy << '"' << "," << r.steps << "," << r.kills << "," << fmt(r.final_time) << ","
          << fmt(r.lambda_hat) << "," << fmt(r.w1_final.value_or(std::nan(""))) << "\n";
        rows.push_back({{"policy", r.policy}, {"lambda_hat", r.lambda_hat}, {"w1_final", opt_number(r.w1_final)}});
        if (ref) checks["policy_" + std::to_string(i) + "_lambda_within_5pct"] =
                     std::fabs(r.lambda_hat - ref->lambda()) <= 0.05 * ref->lambda();
    }
    o.summary["seed"] = seed;
    o.summary["policies"] = rows;
    if (ref) {
        o.summary["lambda_reference"] = ref->lambda();
        o.summary["checks"] = checks;
        o.checks_passed = all_true(checks);
    }
    return o;
}

}  // namespace

SdeModel make_model(const ExperimentConfig& cfg) {
    const auto& m = cfg.model;
    const std::size_t d = cfg.x0.empty() ? m.dim : cfg.x0.size();
    if (m.kind == "brownian") return SdeModel::brownian(m.scale, d);
    if (m.kind == "ou") return SdeModel::ornstein_uhlenbeck(m.theta, to_point(m.mean), m.scale);
    if (m.kind == "affine") {
        try {
            return SdeModel::affine(m.drift_matrix, to_point(m.drift_vector), m.sigma);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config field 'model.sigma': ") + e.what());
        }
    }
    throw ConfigError("config field 'model.kind': unknown model " + m.kind);
}

std::shared_ptr<const Domain> make_domain(const DomainConfig& d) {
    if (d.kind == "interval") return std::make_shared<const Domain>(Domain::interval(d.a, d.b));
    if (d.kind == "box") return std::make_shared<const Domain>(Domain::box(to_point(d.lo), to_point(d.hi)));
    if (d.kind == "ball") return std::make_shared<const Domain>(Domain::ball(to_point(d.center), d.radius));
    throw ConfigError("config field 'domain.kind': unknown domain " + d.kind);
}

StepSchedule make_schedule(const ScheduleConfig& s) {
    if (s.kind == "constant") return StepSchedule::constant(s.gamma);
    return StepSchedule::polynomial(s.c, s.rho);
}

std::optional<ReferenceQsd> make_reference(const ExperimentConfig& cfg, const SdeModel& model) {
    std::string kind = cfg.reference.kind;
    const bool interval = cfg.domain.kind == "interval";
    if (kind == "auto") {
        if (!interval) return std::nullopt;
        kind = cfg.model.kind == "brownian" ? "bm_interval" : "finite_difference";
    }
    if (kind == "none") return std::nullopt;
    if (kind == "bm_interval") return ReferenceQsd::bm_interval(cfg.domain.a, cfg.domain.b, cfg.model.scale);
    return ReferenceQsd::finite_difference(model, cfg.domain.a, cfg.domain.b, cfg.reference.intervals);
}

FixedLaw make_law(const LawConfig& l, const std::optional<ReferenceQsd>& ref) {
    if (l.kind == "dirac") return FixedLaw::dirac(to_point(l.point));
    if (l.kind == "uniform") return FixedLaw::uniform_box(to_point(l.lo), to_point(l.hi));
    if (l.kind == "qsd") {
        if (!ref) throw ConfigError("config field 'law.kind': qsd law needs a reference (set reference.kind)");
        return FixedLaw::reference(*ref);
    }
    if (l.kind == "measure_csv") return FixedLaw::empirical(read_measure_csv(l.path));
    throw ConfigError("config field 'law.kind': unknown law " + l.kind);
}

RedistributionPolicy make_policy(const PolicyConfig& p, const std::optional<ReferenceQsd>& ref) {
    if (p.kind == "full") return RedistributionPolicy::full();
    if (p.kind == "window") {
        if (p.rule == "fraction") return RedistributionPolicy::sliding_window(WindowRule::fraction(p.param));
        return RedistributionPolicy::sliding_window(WindowRule::power(p.param));
    }
    if (p.kind == "quantized")
        return RedistributionPolicy::quantized(p.eps, p.cell_law == "uniform" ? CellLaw::Uniform : CellLaw::Dirac);
    if (p.kind == "fixed") return RedistributionPolicy::fixed_law(make_law(p.law, ref));
    throw ConfigError("config field 'redistribution.kind': unknown policy " + p.kind);
}

void write_measure_csv(const fs::path& path, const WeightedEmpiricalMeasure& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << coord_header(m.dim(), "x") << ",weight\n";
    std::string line;
    for (std::size_t k = m.first_retained(); k < m.size(); ++k) {
        line.clear();
        for (std::size_t i = 0; i < m.dim(); ++i) {
            line += fmt(m.raw_coords()[(k - m.first_retained()) * m.dim() + i]);
            line += ',';
        }
        line += fmt(m.weight(k));
        line += '\n';
        f << line;
    }
}

WeightedEmpiricalMeasure read_measure_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open measure file " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw ConfigError(path.string() + ": empty measure file");
    const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2 || cols - 1 > kMaxDim) throw ConfigError(path.string() + ": bad measure header");
    WeightedEmpiricalMeasure m(cols - 1);
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
            }
        }
        if (v.size() != cols || !(v.back() > 0.0))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected coordinates and a positive weight");
        const double w = v.back();
        v.pop_back();
        m.record(Point(std::span<const double>(v)), w);
    }
    if (m.empty()) throw ConfigError(path.string() + ": no atoms");
    return m;
}

RunOutcome run_experiment(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    resolve(cfg);
    OutputDir out(cfg.out);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    json meta_extra = json::object();
    RunOutcome o;
    if (cfg.kind == "qsd_run") o = do_qsd_run(out, cfg, meta_extra);
    else if (cfg.kind == "replica_histogram") o = do_replica_histogram(out, cfg);
    else if (cfg.kind == "operator_a") o = do_operator_a(out, cfg);
    else if (cfg.kind == "weak_error") o = do_weak_error(out, cfg);
    else if (cfg.kind == "exit_tail") o = do_exit_tail(out, cfg);
    else o = do_policy_compare(out, cfg);

    o.summary["kind"] = cfg.kind;
    o.summary["config_hash"] = config_hash(cfg);
    if (cfg.discard_prefix > 0) o.summary["discard_prefix_diagnostics_only"] = cfg.discard_prefix;
    out.write_json("summary.json", o.summary);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta;
    meta["config"] = to_json(cfg);
    meta["config_hash"] = config_hash(cfg);
    meta["version"] = version_string();
    meta["git"] = git_stamp();
    meta["started_utc"] = started;
    meta["finished_utc"] = utc_now();
    meta["wall_seconds"] = wall;
    meta["files"] = out.files();
    if (cfg.discard_prefix > 0)
        meta["note"] = "discard_prefix drops early atoms from reported diagnostics only; not part of the analyzed scheme";
    for (auto& [k, v] : meta_extra.items()) meta[k] = v;
    out.write_json("meta.json", meta);
    o.files = out.files();
    return o;
}

}  // namespace qsd::app
