#include "qsd/measures.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Kronrod over [lo, hi] split into `pieces` equal sub-intervals; the
// integrands here have kinks so a fixed split beats global adaptivity.
template <class F>
double integrate_split(F&& f, double lo, double hi, std::size_t pieces) {
    double total = 0.0;
    const double h = (hi - lo) / static_cast<double>(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
        const double l = lo + static_cast<double>(i) * h;
        const double r = (i + 1 == pieces) ? hi : l + h;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, l, r, 5, 1e-13);
    }
    return total;
}

// Antiderivative of a CDF model extended to the whole real line.
template <class Model>
double extended_integral(const Model& m, double x) {
    if (x <= m.lower()) return 0.0;
    if (x >= m.upper()) return m.cdf_integral(m.upper()) + (x - m.upper());
    return m.cdf_integral(x);
}

// integral over [l, r] of |c - F| for a continuous nondecreasing F.
template <class Model>
double gap_integral(const Model& m, double l, double r, double c) {
    if (!(r > l)) return 0.0;
    double q;
    if (c <= 0.0)
        q = m.lower();
    else if (c >= 1.0)
        q = m.upper();
    else
        q = m.quantile(c);
    q = std::clamp(q, l, r);
    const double gl = extended_integral(m, l);
    const double gq = extended_integral(m, q);
    const double gr = extended_integral(m, r);
    const double left = c * (q - l) - (gq - gl);
    const double right = (gr - gq) - c * (r - q);
    return std::max(left, 0.0) + std::max(right, 0.0);
}

template <class Model>
double w1_against_model(const EmpiricalLaw& e, const Model& m) {
    if (e.empty()) throw DomainError("W1 of an empty law");
    const auto& x = e.atoms();
    const auto& w = e.weights();
    const double lo = std::min(m.lower(), x.front());
    const double hi = std::max(m.upper(), x.back());
    double total = gap_integral(m, lo, x.front(), 0.0);
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        cum += w[i];
        total += gap_integral(m, x[i], x[i + 1], cum);
    }
    total += gap_integral(m, x.back(), hi, 1.0);
    return total;
}

template <class A, class B>
double w1_between_models(const A& a, const B& b) {
    const double lo = std::min(a.lower(), b.lower());
    const double hi = std::max(a.upper(), b.upper());
    auto cdf = [](const auto& m, double x) {
        if (x <= m.lower()) return 0.0;
        if (x >= m.upper()) return 1.0;
        return m.cdf(x);
    };
    return integrate_split([&](double x) { return std::fabs(cdf(a, x) - cdf(b, x)); }, lo, hi, 256);
}

}  // namespace

// ---------------------------------------------------------------- EmpiricalLaw

EmpiricalLaw EmpiricalLaw::from_samples(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("empirical law needs at least one sample");
    std::vector<double> w(samples.size(), 1.0);
    return from_weighted(samples, w);
}

EmpiricalLaw EmpiricalLaw::from_weighted(std::span<const double> atoms, std::span<const double> weights) {
    if (atoms.size() != weights.size()) throw DomainError("atoms and weights differ in length");
    if (atoms.empty()) throw DomainError("empirical law needs at least one atom");
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return atoms[i] < atoms[j] || (atoms[i] == atoms[j] && i < j);
    });
    EmpiricalLaw law;
    CompensatedSum total;
    for (std::size_t idx : order) {
        const double x = atoms[idx];
        const double wt = weights[idx];
        if (!std::isfinite(x)) throw DomainError("empirical atom is not finite");
        if (!(wt > 0.0)) throw DomainError("empirical weights must be positive");
        total.add(wt);
        if (!law.atoms_.empty() && law.atoms_.back() == x)
            law.weights_.back() += wt;
        else {
            law.atoms_.push_back(x);
            law.weights_.push_back(wt);
        }
    }
    const double t = total.value();
    for (double& wt : law.weights_) wt /= t;
    return law;
}

EmpiricalLaw EmpiricalLaw::from_measure(const WeightedEmpiricalMeasure& m, std::size_t begin, std::size_t end) {
    if (m.dim() != 1) throw DomainError("EmpiricalLaw is one-dimensional");
    if (begin >= end) throw DomainError("empty measure range");
    std::vector<double> x, w;
    x.reserve(end - begin);
    w.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
        x.push_back(m.coord(k));
        w.push_back(m.weight(k));
    }
    return from_weighted(x, w);
}

double EmpiricalLaw::cdf(double x) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    double s = 0.0;
    for (auto i = atoms_.begin(); i != it; ++i) s += weights_[static_cast<std::size_t>(i - atoms_.begin())];
    return std::min(s, 1.0);
}

// ----------------------------------------------------------------- UniformLaw

double UniformLaw::cdf(double x) const noexcept {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return (x - a) / (b - a);
}

double UniformLaw::cdf_integral(double x) const noexcept {
    const double y = std::clamp(x, a, b);
    return 0.5 * (y - a) * (y - a) / (b - a);
}

// --------------------------------------------------------------- ReferenceQsd

ReferenceQsd ReferenceQsd::bm_interval(double a, double b, double scale) {
    if (!(a < b)) throw DomainError("bm_interval needs a < b");
    if (!(scale > 0.0)) throw DomainError("bm_interval needs scale > 0");
    ReferenceQsd r;
    r.kind_ = Kind::BmInterval;
    r.a_ = a;
    r.b_ = b;
    const double len = b - a;
    r.lambda_ = scale * scale * kPi * kPi / (2.0 * len * len);
    return r;
}

ReferenceQsd ReferenceQsd::numeric_table(std::vector<double> grid, std::vector<double> cdf, double lambda) {
    if (grid.size() < 2 || grid.size() != cdf.size()) throw DomainError("numeric table needs matching grid and CDF");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("numeric table grid must increase");
        if (cdf[i] < cdf[i - 1]) throw DomainError("numeric table CDF must be nondecreasing");
    }
    if (std::fabs(cdf.front()) > 1e-12 || std::fabs(cdf.back() - 1.0) > 1e-9)
        throw DomainError("numeric table CDF must run from 0 to 1");
    cdf.front() = 0.0;
    cdf.back() = 1.0;
    ReferenceQsd r;
    r.kind_ = Kind::NumericTable;
    r.a_ = grid.front();
    r.b_ = grid.back();
    r.lambda_ = lambda;
    r.cdf_int_.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        r.cdf_int_[i] = r.cdf_int_[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (cdf[i] + cdf[i - 1]);
    r.grid_ = std::move(grid);
    r.cdf_ = std::move(cdf);
    return r;
}

ReferenceQsd ReferenceQsd::finite_difference(const SdeModel& model, double a, double b, std::size_t intervals) {
    if (model.dim() != 1) throw DomainError("finite-difference reference is one-dimensional");
    if (!(a < b) || intervals < 4) throw DomainError("finite-difference reference needs a < b and >= 4 cells");
    const std::size_t n = intervals - 1;   // interior nodes
    const double h = (b - a) / static_cast<double>(intervals);
    std::vector<double> xs(intervals + 1), drift(intervals + 1), diff(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        xs[i] = a + static_cast<double>(i) * h;
        const Point p{xs[i]};
        drift[i] = model.drift(p)[0];
        const double s = model.diffuse(p, Point{1.0})[0];
        diff[i] = s * s;
    }
    // M = -(adjoint generator): M mu = lambda mu on interior nodes 1..n.
    std::vector<double> lower(n), diag(n), upper(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = k + 1;
        diag[k] = diff[i] / (h * h);
        lower[k] = -diff[i - 1] / (2.0 * h * h) - drift[i - 1] / (2.0 * h);
        upper[k] = -diff[i + 1] / (2.0 * h * h) + drift[i + 1] / (2.0 * h);
    }
    auto solve = [&](const std::vector<double>& rhs) {
        // Thomas algorithm.
        std::vector<double> c(n), d(n), x(n);
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double m = diag[k] - lower[k] * c[k - 1];
            c[k] = upper[k] / m;
            d[k] = (rhs[k] - lower[k] * d[k - 1]) / m;
        }
        x[n - 1] = d[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) x[k] = d[k] - c[k] * x[k + 1];
        return x;
    };
    std::vector<double> v(n, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        std::vector<double> w = solve(v);
        const double sv = std::accumulate(v.begin(), v.end(), 0.0);
        const double sw = std::accumulate(w.begin(), w.end(), 0.0);
        const double next = sv / sw;
        for (double& x : w) x /= sw;
        v = std::move(w);
        if (it > 5 && std::fabs(next - lambda) <= 1e-14 * std::fabs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    std::vector<double> dens(intervals + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) dens[k + 1] = std::max(v[k], 0.0);
    std::vector<double> cdf(intervals + 1, 0.0);
    for (std::size_t i = 1; i <= intervals; ++i) cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i] + dens[i - 1]);
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    return numeric_table(std::move(xs), std::move(cdf), lambda);
}

double ReferenceQsd::density(double x) const {
    if (x <= a_ || x >= b_) return 0.0;
    if (kind_ == Kind::BmInterval) {
        const double len = b_ - a_;
        return kPi / (2.0 * len) * std::sin(kPi * (x - a_) / len);
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    return (cdf_[i + 1] - cdf_[i]) / (grid_[i + 1] - grid_[i]);
}

double ReferenceQsd::cdf(double x) const {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    if (kind_ == Kind::BmInterval) return 0.5 * (1.0 - std::cos(kPi * (x - a_) / (b_ - a_)));
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
}

double ReferenceQsd::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (kind_ == Kind::BmInterval) return a_ + (b_ - a_) * std::acos(1.0 - 2.0 * u) / kPi;
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return grid_.front();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double span = cdf_[i] - cdf_[i - 1];
    if (span <= 0.0) return grid_[i];
    return grid_[i - 1] + (u - cdf_[i - 1]) / span * (grid_[i] - grid_[i - 1]);
}

double ReferenceQsd::cdf_integral(double x) const {
    x = std::clamp(x, a_, b_);
    if (kind_ == Kind::BmInterval) {
        const double len = b_ - a_;
        return 0.5 * (x - a_) - len / (2.0 * kPi) * std::sin(kPi * (x - a_) / len);
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    i = std::min(i, grid_.size() - 1) - 1;
    const double dx = x - grid_[i];
    const double slope = (cdf_[i + 1] - cdf_[i]) / (grid_[i + 1] - grid_[i]);
    return cdf_int_[i] + dx * cdf_[i] + 0.5 * dx * dx * slope;
}

double ReferenceQsd::integrate(const std::function<double(double)>& f) const {
    auto g = [&](double x) { return f(x) * density(x); };
    if (kind_ == Kind::BmInterval) return integrate_split(g, a_, b_, 64);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, grid_[i], grid_[i + 1], 0);
    return total;
}

std::string ReferenceQsd::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind_ == Kind::BmInterval)
        os << "bm_interval(" << a_ << ", " << b_ << "), lambda=" << lambda_;
    else
        os << "numeric_table(" << grid_.size() << " nodes), lambda=" << lambda_;
    return os.str();
}

// ------------------------------------------------------------------------- W1

double wasserstein1_1d(const EmpiricalLaw& a, const EmpiricalLaw& b) {
    if (a.empty() || b.empty()) throw DomainError("W1 of an empty law");
    const auto& xa = a.atoms();
    const auto& xb = b.atoms();
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, total = 0.0;
    double x = std::min(xa.front(), xb.front());
    while (i < xa.size() || j < xb.size()) {
        const double next = std::min(i < xa.size() ? xa[i] : INFINITY, j < xb.size() ? xb[j] : INFINITY);
        total += std::fabs(fa - fb) * (next - x);
        x = next;
        while (i < xa.size() && xa[i] == x) fa += a.weights()[i++];
        while (j < xb.size() && xb[j] == x) fb += b.weights()[j++];
    }
    return total;
}

double wasserstein1_1d(const EmpiricalLaw& a, const ReferenceQsd& b) { return w1_against_model(a, b); }
double wasserstein1_1d(const EmpiricalLaw& a, const UniformLaw& b) { return w1_against_model(a, b); }
double wasserstein1_1d(const ReferenceQsd& a, const ReferenceQsd& b) { return w1_between_models(a, b); }
double wasserstein1_1d(const ReferenceQsd& a, const UniformLaw& b) { return w1_between_models(a, b); }

SlicedEstimate wasserstein1_sliced(std::span<const Point> a, std::span<const Point> b,
                                   std::size_t n_projections, SequentialRng& rng) {
    if (a.empty() || b.empty()) throw DomainError("sliced W1 of an empty cloud");
    if (n_projections == 0) throw DomainError("sliced W1 needs at least one projection");
    const std::size_t d = a.front().dim();
    if (d < 2) throw DomainError("sliced W1 is for d >= 2; use wasserstein1_1d");
    std::vector<double> values;
    values.reserve(n_projections);
    std::vector<double> pa(a.size()), pb(b.size());
    for (std::size_t p = 0; p < n_projections; ++p) {
        Point u(d);
        double nrm = 0.0;
        do {
            for (std::size_t i = 0; i < d; ++i) u[i] = rng.gaussian();
            nrm = norm(u);
        } while (nrm == 0.0);
        for (std::size_t i = 0; i < d; ++i) u[i] /= nrm;
        auto project = [&](const Point& x) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += u[i] * x[i];
            return s;
        };
        for (std::size_t k = 0; k < a.size(); ++k) pa[k] = project(a[k]);
        for (std::size_t k = 0; k < b.size(); ++k) pb[k] = project(b[k]);
        values.push_back(wasserstein1_1d(EmpiricalLaw::from_samples(pa), EmpiricalLaw::from_samples(pb)));
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / (n - 1.0) : 0.0;
    return {mean, 1.96 * std::sqrt(var / n), values.size()};
}

std::vector<double> histogram(const EmpiricalLaw& law, std::span<const double> edges) {
    if (edges.size() < 2) throw DomainError("histogram needs at least two edges");
    std::vector<double> mass(edges.size() - 1, 0.0);
    for (std::size_t i = 0; i < law.size(); ++i) {
        const double x = law.atoms()[i];
        if (x < edges.front() || x >= edges.back()) continue;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        mass[static_cast<std::size_t>(it - edges.begin()) - 1] += law.weights()[i];
    }
    return mass;
}

std::vector<double> equal_mass_edges(const ReferenceQsd& ref, std::size_t bins) {
    if (bins == 0) throw DomainError("equal_mass_edges needs bins >= 1");
    std::vector<double> edges(bins + 1);
    edges.front() = ref.lower();
    edges.back() = ref.upper();
    for (std::size_t i = 1; i < bins; ++i)
        edges[i] = ref.quantile(static_cast<double>(i) / static_cast<double>(bins));
    return edges;
}

GoodnessOfFit chi_squared_test(std::span<const double> counts, std::span<const double> probabilities) {
    if (counts.size() != probabilities.size() || counts.size() < 2)
        throw DomainError("chi-squared test needs matching counts and probabilities (>= 2 cells)");
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = n * probabilities[i];
        if (!(e > 0.0)) throw DomainError("chi-squared cell with zero expected count");
        stat += (counts[i] - e) * (counts[i] - e) / e;
    }
    const double dof = static_cast<double>(counts.size() - 1);
    boost::math::chi_squared dist(dof);
    return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

GoodnessOfFit kolmogorov_smirnov_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("KS test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    // Asymptotic Kolmogorov distribution with Stephens' small-sample correction.
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int j = 1; j <= 100; ++j) {
            const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
            p += term;
            if (std::fabs(term) < 1e-16) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {d, 0.0, p};
}

// ------------------------------------------------------------- reflection maps

std::vector<double> reflect_path_pos(std::span<const double> path, double z) {
    std::vector<double> out(path.size());
    double running = 0.0;
    for (std::size_t r = 0; r < path.size(); ++r) {
        running = std::max(running, std::max(z - path[r], 0.0));
        out[r] = path[r] + running;
    }
    return out;
}

std::vector<double> reflect_path_neg(std::span<const double> path, double z) {
    std::vector<double> out(path.size());
    double running = 0.0;
    for (std::size_t r = 0; r < path.size(); ++r) {
        running = std::max(running, std::max(path[r] - z, 0.0));
        out[r] = path[r] - running;
    }
    return out;
}

}  // namespace qsd
