#include "qsd_app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "qsd/errors.hpp"

namespace qsd::app {

using nlohmann::json;

namespace {

using LineMap = std::map<std::string, std::size_t>;

[[noreturn]] void fail(const std::string& path, const std::string& msg, const LineMap* lines = nullptr) {
    std::ostringstream os;
    os << "config field '" << path << "': " << msg;
    if (lines) {
        auto it = lines->find(path);
        if (it != lines->end()) os << " (line " << it->second << ")";
    }
    throw ConfigError(os.str());
}

// Walks a JSON object, remembering which keys were consumed so that typos are reported.
class Reader {
public:
    Reader(const json& j, std::string path, const LineMap* lines) : j_(j), path_(std::move(path)), lines_(lines) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected a table/object", lines_);
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    template <class T>
    void get(const std::string& k, T& out) {
        seen_.insert(k);
        auto it = j_.find(k);
        if (it == j_.end()) return;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) throw std::runtime_error("expected a number");
                out = it->template get<double>();
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (it->is_number()) {
                    out = {it->template get<double>()};
                } else {
                    if (!it->is_array()) throw std::runtime_error("expected a list of numbers");
                    out.clear();
                    for (const auto& v : *it) {
                        if (!v.is_number()) throw std::runtime_error("expected a list of numbers");
                        out.push_back(v.template get<double>());
                    }
                }
            } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
                if (!it->is_array()) throw std::runtime_error("expected a list of non-negative integers");
                out.clear();
                for (const auto& v : *it) {
                    if (!v.is_number_integer() || v.template get<std::int64_t>() < 0)
                        throw std::runtime_error("expected a list of non-negative integers");
                    out.push_back(v.template get<std::uint64_t>());
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw std::runtime_error("expected a string");
                out = it->template get<std::string>();
            } else if constexpr (std::is_unsigned_v<T>) {
                if (!it->is_number_integer() || it->template get<std::int64_t>() < 0)
                    throw std::runtime_error("expected a non-negative integer");
                out = static_cast<T>(it->template get<std::uint64_t>());
            } else {
                out = it->template get<T>();
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(key(k), e.what(), lines_);
        }
    }

    const json* child(const std::string& k) {
        seen_.insert(k);
        auto it = j_.find(k);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(key(it.key()), "unknown key", lines_);
    }

    const LineMap* lines() const { return lines_; }

private:
    const json& j_;
    std::string path_;
    const LineMap* lines_;
    std::set<std::string> seen_;
};

void read(const json& j, const std::string& path, const LineMap* lines, ModelConfig& m) {
    Reader r(j, path, lines);
    r.get("kind", m.kind);
    r.get("scale", m.scale);
    r.get("dim", m.dim);
    r.get("theta", m.theta);
    r.get("mean", m.mean);
    r.get("drift_matrix", m.drift_matrix);
    r.get("drift_vector", m.drift_vector);
    r.get("sigma", m.sigma);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, DomainConfig& d) {
    Reader r(j, path, lines);
    r.get("kind", d.kind);
    r.get("a", d.a);
    r.get("b", d.b);
    r.get("lo", d.lo);
    r.get("hi", d.hi);
    r.get("center", d.center);
    r.get("radius", d.radius);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, ScheduleConfig& s) {
    Reader r(j, path, lines);
    r.get("kind", s.kind);
    r.get("c", s.c);
    r.get("rho", s.rho);
    r.get("gamma", s.gamma);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, LawConfig& l) {
    Reader r(j, path, lines);
    r.get("kind", l.kind);
    r.get("point", l.point);
    r.get("lo", l.lo);
    r.get("hi", l.hi);
    r.get("path", l.path);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, PolicyConfig& p) {
    Reader r(j, path, lines);
    r.get("kind", p.kind);
    r.get("rule", p.rule);
    r.get("param", p.param);
    r.get("eps", p.eps);
    r.get("cell_law", p.cell_law);
    if (const json* c = r.child("law")) read(*c, r.key("law"), lines, p.law);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, ReferenceConfig& c) {
    Reader r(j, path, lines);
    r.get("kind", c.kind);
    r.get("intervals", c.intervals);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, OperatorAConfig& c) {
    Reader r(j, path, lines);
    r.get("points", c.points);
    r.get("etas", c.etas);
    r.get("replicas", c.replicas);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, WeakErrorConfig& c) {
    Reader r(j, path, lines);
    if (const json* m = r.child("mu")) read(*m, r.key("mu"), lines, c.mu);
    if (const json* m = r.child("mu0")) read(*m, r.key("mu0"), lines, c.mu0);
    r.get("horizon", c.horizon);
    r.get("etas", c.etas);
    r.get("eta_ref", c.eta_ref);
    r.get("replicas", c.replicas);
    r.get("n_times", c.n_times);
    r.get("perturbation", c.perturbation);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, ExitTailConfig& c) {
    Reader r(j, path, lines);
    r.get("eta", c.eta);
    r.get("replicas", c.replicas);
    r.get("n_starts", c.n_starts);
    r.get("t_max", c.t_max);
    r.get("n_points", c.n_points);
    r.finish();
}

void read(const json& j, const std::string& path, const LineMap* lines, HistogramConfig& c) {
    Reader r(j, path, lines);
    r.get("chains", c.chains);
    r.get("bins", c.bins);
    r.finish();
}

ExperimentConfig read_root(const json& j, const LineMap* lines) {
    ExperimentConfig c;
    Reader r(j, "", lines);
    r.get("kind", c.kind);
    if (const json* x = r.child("model")) read(*x, "model", lines, c.model);
    if (const json* x = r.child("domain")) read(*x, "domain", lines, c.domain);
    if (const json* x = r.child("schedule")) read(*x, "schedule", lines, c.schedule);
    if (const json* x = r.child("redistribution")) read(*x, "redistribution", lines, c.redistribution);
    r.get("x0", c.x0);
    r.get("steps", c.steps);
    r.get("seeds", c.seeds);
    r.get("checkpoints", c.checkpoints);
    r.get("out", c.out);
    r.get("threads", c.threads);
    r.get("discard_prefix", c.discard_prefix);
    if (const json* x = r.child("reference")) read(*x, "reference", lines, c.reference);
    if (const json* x = r.child("operator_a")) read(*x, "operator_a", lines, c.operator_a);
    if (const json* x = r.child("weak_error")) read(*x, "weak_error", lines, c.weak_error);
    if (const json* x = r.child("exit_tail")) read(*x, "exit_tail", lines, c.exit_tail);
    if (const json* x = r.child("replica_histogram")) read(*x, "replica_histogram", lines, c.replica_histogram);
    if (const json* x = r.child("policies")) {
        if (!x->is_array()) fail("policies", "expected a list of redistribution tables", lines);
        c.policies.clear();
        for (std::size_t i = 0; i < x->size(); ++i) {
            PolicyConfig p;
            read((*x)[i], "policies[" + std::to_string(i) + "]", lines, p);
            c.policies.push_back(p);
        }
    }
    r.finish();
    return c;
}

json law_json(const LawConfig& l) {
    return {{"kind", l.kind}, {"point", l.point}, {"lo", l.lo}, {"hi", l.hi}, {"path", l.path}};
}

json policy_json(const PolicyConfig& p) {
    return {{"kind", p.kind},         {"rule", p.rule}, {"param", p.param},
            {"eps", p.eps},           {"cell_law", p.cell_law}, {"law", law_json(p.law)}};
}

// TOML -> JSON, recording the line of every key.
json toml_to_json(const toml::node& n, const std::string& path, LineMap& lines) {
    lines.emplace(path, n.source().begin.line);
    if (const auto* t = n.as_table()) {
        json o = json::object();
        for (const auto& [k, v] : *t) {
            const std::string key(k.str());
            o[key] = toml_to_json(v, path.empty() ? key : path + "." + key, lines);
        }
        return o;
    }
    if (const auto* a = n.as_array()) {
        json arr = json::array();
        std::size_t i = 0;
        for (const auto& v : *a) arr.push_back(toml_to_json(v, path + "[" + std::to_string(i++) + "]", lines));
        return arr;
    }
    if (const auto* v = n.as_integer()) return v->get();
    if (const auto* v = n.as_floating_point()) return v->get();
    if (const auto* v = n.as_boolean()) return v->get();
    if (const auto* v = n.as_string()) return v->get();
    fail(path, "unsupported TOML value type");
}

void json_to_toml(const json& j, toml::table& t);

toml::array json_array_to_toml(const json& j) {
    toml::array a;
    for (const auto& v : j) {
        if (v.is_object()) {
            toml::table sub;
            json_to_toml(v, sub);
            a.push_back(std::move(sub));
        } else if (v.is_array()) {
            a.push_back(json_array_to_toml(v));
        } else if (v.is_number_unsigned() || v.is_number_integer()) {
            a.push_back(v.get<std::int64_t>());
        } else if (v.is_number_float()) {
            a.push_back(v.get<double>());
        } else if (v.is_boolean()) {
            a.push_back(v.get<bool>());
        } else {
            a.push_back(v.get<std::string>());
        }
    }
    return a;
}

void json_to_toml(const json& j, toml::table& t) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const json& v = it.value();
        if (v.is_object()) {
            toml::table sub;
            json_to_toml(v, sub);
            t.insert(it.key(), std::move(sub));
        } else if (v.is_array()) {
            t.insert(it.key(), json_array_to_toml(v));
        } else if (v.is_number_unsigned() || v.is_number_integer()) {
            t.insert(it.key(), v.get<std::int64_t>());
        } else if (v.is_number_float()) {
            t.insert(it.key(), v.get<double>());
        } else if (v.is_boolean()) {
            t.insert(it.key(), v.get<bool>());
        } else {
            t.insert(it.key(), v.get<std::string>());
        }
    }
}

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
}

bool one_of(const std::string& v, std::initializer_list<const char*> opts) {
    return std::any_of(opts.begin(), opts.end(), [&](const char* o) { return v == o; });
}

std::size_t domain_dim(const DomainConfig& d) {
    if (d.kind == "interval") return 1;
    if (d.kind == "box") return d.lo.size();
    return d.center.size();
}

std::vector<double> domain_centre(const DomainConfig& d) {
    if (d.kind == "interval") return {0.5 * (d.a + d.b)};
    if (d.kind == "box") {
        std::vector<double> c(d.lo.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (d.lo[i] + d.hi[i]);
        return c;
    }
    return d.center;
}

void resolve_law(LawConfig& l, const std::string& path, const std::vector<double>& x0, const DomainConfig& d,
                 std::size_t dim) {
    require(one_of(l.kind, {"dirac", "uniform", "qsd", "measure_csv"}), path + ".kind",
            "must be dirac, uniform, qsd or measure_csv");
    if (l.kind == "dirac") {
        if (l.point.empty()) l.point = x0;
        require(l.point.size() == dim, path + ".point", "dimension does not match the domain");
    }
    if (l.kind == "uniform") {
        if (l.lo.empty() && l.hi.empty()) {
            if (d.kind == "interval") {
                l.lo = {d.a};
                l.hi = {d.b};
            } else if (d.kind == "box") {
                l.lo = d.lo;
                l.hi = d.hi;
            } else {
                l.lo = l.hi = d.center;
                for (std::size_t i = 0; i < dim; ++i) {
                    l.lo[i] -= d.radius / std::sqrt(static_cast<double>(dim));
                    l.hi[i] += d.radius / std::sqrt(static_cast<double>(dim));
                }
            }
        }
        require(l.lo.size() == dim && l.hi.size() == dim, path, "uniform lo/hi must match the domain dimension");
    }
    if (l.kind == "qsd") require(dim == 1, path + ".kind", "qsd law is available for one-dimensional domains only");
    if (l.kind == "measure_csv") require(!l.path.empty(), path + ".path", "required for measure_csv laws");
}

void resolve_policy(PolicyConfig& p, const std::string& path, const std::vector<double>& x0, const DomainConfig& d,
                    std::size_t dim) {
    require(one_of(p.kind, {"full", "window", "quantized", "fixed"}), path + ".kind",
            "must be full, window, quantized or fixed");
    if (p.kind == "window") {
        require(one_of(p.rule, {"sqrt", "power", "fraction"}), path + ".rule", "must be sqrt, power or fraction");
        if (p.rule == "sqrt") p.param = 0.5;
        require(p.param > 0.0 && p.param < 1.0, path + ".param", "must be in (0, 1)");
    }
    if (p.kind == "quantized") {
        require(p.eps > 0.0 && std::isfinite(p.eps), path + ".eps", "must be > 0");
        require(one_of(p.cell_law, {"dirac", "uniform"}), path + ".cell_law", "must be dirac or uniform");
        require(!(p.cell_law == "uniform" && d.kind == "ball"), path + ".cell_law",
                "uniform cell law is available for interval and box domains only");
    }
    if (p.kind == "fixed") resolve_law(p.law, path + ".law", x0, d, dim);
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"qsd_run",    "replica_histogram", "operator_a",
                                            "weak_error", "exit_tail",         "policy_compare"};
    return k;
}

void resolve(ExperimentConfig& c) {
    const auto& kinds = experiment_kinds();
    require(std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end(), "kind",
            "must be one of qsd_run, replica_histogram, operator_a, weak_error, exit_tail, policy_compare");

    auto& d = c.domain;
    require(one_of(d.kind, {"interval", "box", "ball"}), "domain.kind", "must be interval, box or ball");
    if (d.kind == "interval") require(d.a < d.b, "domain", "needs a < b");
    if (d.kind == "box") {
        require(!d.lo.empty() && d.lo.size() == d.hi.size(), "domain", "box needs lo and hi of equal length");
        for (std::size_t i = 0; i < d.lo.size(); ++i) require(d.lo[i] < d.hi[i], "domain", "box needs lo < hi");
    }
    if (d.kind == "ball") {
        require(!d.center.empty(), "domain.center", "required for ball domains");
        require(d.radius > 0.0, "domain.radius", "must be > 0");
    }
    const std::size_t dim = domain_dim(d);
    require(dim >= 1 && dim <= 4, "domain", "dimension must be between 1 and 4");

    auto& m = c.model;
    require(one_of(m.kind, {"brownian", "ou", "affine"}), "model.kind", "must be brownian, ou or affine");
    m.dim = dim;
    if (m.kind != "affine") require(m.scale > 0.0, "model.scale", "must be > 0");
    if (m.kind == "ou" && m.mean.empty()) m.mean = domain_centre(d);
    if (m.kind == "ou") require(m.mean.size() == dim, "model.mean", "dimension does not match the domain");
    if (m.kind == "affine") {
        if (m.drift_matrix.empty()) m.drift_matrix.assign(dim * dim, 0.0);
        if (m.drift_vector.empty()) m.drift_vector.assign(dim, 0.0);
        require(m.drift_matrix.size() == dim * dim, "model.drift_matrix", "must have d*d entries");
        require(m.drift_vector.size() == dim, "model.drift_vector", "must have d entries");
        require(m.sigma.size() == dim * dim, "model.sigma", "must have d*d entries");
    }

    auto& s = c.schedule;
    require(one_of(s.kind, {"polynomial", "constant"}), "schedule.kind", "must be polynomial or constant");
    if (s.kind == "polynomial") {
        require(s.c > 0.0, "schedule.c", "must be > 0");
        require(s.rho > 0.0 && s.rho <= 1.0, "schedule.rho", "must be in (0, 1]");
    } else {
        require(s.gamma > 0.0, "schedule.gamma", "must be > 0");
    }

    if (c.x0.empty()) c.x0 = domain_centre(d);
    require(c.x0.size() == dim, "x0", "dimension does not match the domain");
    resolve_policy(c.redistribution, "redistribution", c.x0, d, dim);

    require(c.steps >= 1, "steps", "must be >= 1");
    require(!c.seeds.empty(), "seeds", "at least one seed is required");
    {
        std::set<std::uint64_t> u(c.seeds.begin(), c.seeds.end());
        require(u.size() == c.seeds.size(), "seeds", "seeds must be distinct");
    }
    std::sort(c.checkpoints.begin(), c.checkpoints.end());
    c.checkpoints.erase(std::unique(c.checkpoints.begin(), c.checkpoints.end()), c.checkpoints.end());
    for (auto k : c.checkpoints) require(k >= 1 && k <= c.steps, "checkpoints", "must lie in [1, steps]");
    require(!c.out.empty(), "out", "output directory is required");
    if (c.threads == 0) c.threads = 1;
    require(c.discard_prefix < c.steps, "discard_prefix", "must be < steps");

    require(one_of(c.reference.kind, {"auto", "none", "bm_interval", "finite_difference"}), "reference.kind",
            "must be auto, none, bm_interval or finite_difference");
    if (c.reference.kind == "bm_interval")
        require(d.kind == "interval" && m.kind == "brownian", "reference.kind", "bm_interval needs brownian on an interval");
    if (c.reference.kind == "finite_difference") require(dim == 1, "reference.kind", "finite_difference is one-dimensional");
    require(c.reference.intervals >= 16, "reference.intervals", "must be >= 16");

    auto& oa = c.operator_a;
    require(!oa.etas.empty(), "operator_a.etas", "must be nonempty");
    for (double e : oa.etas) require(e > 0.0, "operator_a.etas", "entries must be > 0");
    require(oa.replicas >= 2, "operator_a.replicas", "must be >= 2");
    require(!oa.points.empty(), "operator_a.points", "must be nonempty");
    if (dim != 1 && c.kind == "operator_a") fail("operator_a.points", "operator_a grids are one-dimensional");

    auto& we = c.weak_error;
    resolve_law(we.mu, "weak_error.mu", c.x0, d, dim);
    resolve_law(we.mu0, "weak_error.mu0", c.x0, d, dim);
    require(we.horizon > 0.0, "weak_error.horizon", "must be > 0");
    require(!we.etas.empty(), "weak_error.etas", "must be nonempty");
    for (std::size_t i = 0; i < we.etas.size(); ++i) {
        require(we.etas[i] > 0.0, "weak_error.etas", "entries must be > 0");
        if (i > 0) require(we.etas[i] < we.etas[i - 1], "weak_error.etas", "must be strictly decreasing");
    }
    require(we.eta_ref >= 0.0, "weak_error.eta_ref", "must be >= 0");
    require(we.replicas >= 4, "weak_error.replicas", "must be >= 4");
    require(we.n_times >= 1, "weak_error.n_times", "must be >= 1");
    require(we.perturbation >= 0.0, "weak_error.perturbation", "must be >= 0");

    auto& et = c.exit_tail;
    require(et.eta > 0.0, "exit_tail.eta", "must be > 0");
    require(et.replicas >= 1, "exit_tail.replicas", "must be >= 1");
    require(et.n_starts >= 1, "exit_tail.n_starts", "must be >= 1");
    require(et.t_max >= 0.0, "exit_tail.t_max", "must be >= 0");
    require(et.n_points >= 2, "exit_tail.n_points", "must be >= 2");

    require(c.replica_histogram.chains >= 2, "replica_histogram.chains", "must be >= 2");
    require(c.replica_histogram.bins >= 2, "replica_histogram.bins", "must be >= 2");

    if (c.policies.empty() && c.kind == "policy_compare") {
        PolicyConfig full, quant, window;
        quant.kind = "quantized";
        window.kind = "window";
        c.policies = {full, quant, window};
    }
    for (std::size_t i = 0; i < c.policies.size(); ++i)
        resolve_policy(c.policies[i], "policies[" + std::to_string(i) + "]", c.x0, d, dim);
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["model"] = {{"kind", c.model.kind},   {"scale", c.model.scale},       {"dim", c.model.dim},
                  {"theta", c.model.theta}, {"mean", c.model.mean},         {"drift_matrix", c.model.drift_matrix},
                  {"drift_vector", c.model.drift_vector}, {"sigma", c.model.sigma}};
    j["domain"] = {{"kind", c.domain.kind}, {"a", c.domain.a},           {"b", c.domain.b},
                   {"lo", c.domain.lo},     {"hi", c.domain.hi},         {"center", c.domain.center},
                   {"radius", c.domain.radius}};
    j["schedule"] = {{"kind", c.schedule.kind}, {"c", c.schedule.c}, {"rho", c.schedule.rho}, {"gamma", c.schedule.gamma}};
    j["redistribution"] = policy_json(c.redistribution);
    j["x0"] = c.x0;
    j["steps"] = c.steps;
    j["seeds"] = c.seeds;
    j["checkpoints"] = c.checkpoints;
    j["out"] = c.out;
    j["threads"] = c.threads;
    j["discard_prefix"] = c.discard_prefix;
    j["reference"] = {{"kind", c.reference.kind}, {"intervals", c.reference.intervals}};
    j["operator_a"] = {{"points", c.operator_a.points}, {"etas", c.operator_a.etas}, {"replicas", c.operator_a.replicas}};
    j["weak_error"] = {{"mu", law_json(c.weak_error.mu)},   {"mu0", law_json(c.weak_error.mu0)},
                       {"horizon", c.weak_error.horizon},   {"etas", c.weak_error.etas},
                       {"eta_ref", c.weak_error.eta_ref},   {"replicas", c.weak_error.replicas},
                       {"n_times", c.weak_error.n_times},   {"perturbation", c.weak_error.perturbation}};
    j["exit_tail"] = {{"eta", c.exit_tail.eta},         {"replicas", c.exit_tail.replicas},
                      {"n_starts", c.exit_tail.n_starts}, {"t_max", c.exit_tail.t_max},
                      {"n_points", c.exit_tail.n_points}};
    j["replica_histogram"] = {{"chains", c.replica_histogram.chains}, {"bins", c.replica_histogram.bins}};
    json pols = json::array();
    for (const auto& p : c.policies) pols.push_back(policy_json(p));
    j["policies"] = pols;
    return j;
}

ExperimentConfig from_json(const json& j) { return read_root(j, nullptr); }

std::string serialize_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string serialize_toml(const ExperimentConfig& cfg) {
    toml::table t;
    json_to_toml(to_json(cfg), t);
    std::ostringstream os;
    os << t << "\n";
    return os.str();
}

ExperimentConfig parse_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return read_root(j, nullptr);
}

ExperimentConfig parse_toml(const std::string& text, const std::string& source) {
    toml::table t;
    try {
        t = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ConfigError(os.str());
    }
    LineMap lines;
    const json j = toml_to_json(t, "", lines);
    return read_root(j, &lines);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.extension() == ".json") return parse_json(ss.str());
    return parse_toml(ss.str(), path.string());
}

std::string config_hash(const ExperimentConfig& cfg) {
    // out and threads do not change results
    nlohmann::json j = to_json(cfg);
    j.erase("out");
    j.erase("threads");
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qsd::app
