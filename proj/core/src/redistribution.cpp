#include "qsd/redistribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

namespace {

// Point strictly inside (lo, hi) from an open uniform.
double inside_open(double lo, double hi, double u) {
    double x = lo + u * (hi - lo);
    if (x <= lo) x = std::nextafter(lo, hi);
    if (x >= hi) x = std::nextafter(hi, lo);
    return x;
}

// Tensor Gauss-Legendre average of f over a box, 8 nodes per axis.
double box_average(const Point& lo, const Point& hi, const TestFunction& f) {
    static constexpr double kNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
    static constexpr double kWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
    const std::size_t d = lo.dim();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= 8;
    double acc = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        Point x(d);
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t k = rem % 8;
            rem /= 8;
            x[i] = 0.5 * (lo[i] + hi[i]) + 0.5 * (hi[i] - lo[i]) * kNodes[k];
            w *= 0.5 * kWeights[k];
        }
        acc += w * f(x);
    }
    return acc;
}

}  // namespace

// ----------------------------------------------------------------- WindowRule

std::uint64_t WindowRule::start(std::uint64_t n) const {
    if (n == 0) return 0;
    std::uint64_t t = 0;
    switch (kind) {
        case Kind::Power:
            t = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), param)));
            break;
        case Kind::Fraction:
            t = static_cast<std::uint64_t>(std::floor(param * static_cast<double>(n)));
            break;
        case Kind::Custom:
            t = custom(n);
            break;
    }
    return std::min(t, n - 1);
}

std::string WindowRule::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Power:
            os << "floor(n^" << param << ")";
            break;
        case Kind::Fraction:
            os << "floor(" << param << " n)";
            break;
        case Kind::Custom:
            os << "custom";
            break;
    }
    return os.str();
}

double window_prefix_ratio(const StepSchedule& schedule, const WindowRule& rule, std::uint64_t n) {
    if (n == 0) throw DomainError("window_prefix_ratio needs n >= 1");
    return schedule.big_gamma(rule.start(n)) / schedule.big_gamma(n);
}

// ------------------------------------------------------------------- FixedLaw

FixedLaw FixedLaw::dirac(const Point& x) {
    FixedLaw l;
    l.kind_ = Kind::Dirac;
    l.dim_ = x.dim();
    l.point_ = x;
    return l;
}

FixedLaw FixedLaw::uniform_box(const Point& lo, const Point& hi) {
    if (lo.dim() != hi.dim()) throw DomainError("uniform box corners differ in dimension");
    for (std::size_t i = 0; i < lo.dim(); ++i)
        if (!(lo[i] < hi[i])) throw DomainError("uniform box needs lo < hi");
    FixedLaw l;
    l.kind_ = Kind::UniformBox;
    l.dim_ = lo.dim();
    l.lo_ = lo;
    l.hi_ = hi;
    return l;
}

FixedLaw FixedLaw::reference(const ReferenceQsd& ref) {
    FixedLaw l;
    l.kind_ = Kind::Reference;
    l.dim_ = 1;
    l.reference_ = std::make_shared<const ReferenceQsd>(ref);
    return l;
}

FixedLaw FixedLaw::empirical(const WeightedEmpiricalMeasure& m) {
    if (m.empty()) throw DomainError("empirical law from an empty measure");
    FixedLaw l;
    l.kind_ = Kind::Empirical;
    l.dim_ = m.dim();
    l.empirical_ = std::make_shared<const WeightedEmpiricalMeasure>(m);
    return l;
}

FixedLaw FixedLaw::mixture(const FixedLaw& base, const Point& lo, const Point& hi, double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
    if (base.dim() != lo.dim()) throw DomainError("mixture components differ in dimension");
    FixedLaw l;
    l.kind_ = Kind::Mixture;
    l.dim_ = base.dim();
    l.base_ = std::make_shared<const FixedLaw>(base);
    l.lo_ = lo;
    l.hi_ = hi;
    l.weight_ = weight;
    return l;
}

Point FixedLaw::sample(const RngStream& rng, std::uint64_t step, Lane lane, std::uint32_t slot_base) const {
    switch (kind_) {
        case Kind::Dirac:
            return point_;
        case Kind::UniformBox: {
            Point x(dim_);
            for (std::size_t i = 0; i < dim_; ++i)
                x[i] = inside_open(lo_[i], hi_[i], rng.open_uniform(step, slot_base + static_cast<std::uint32_t>(i), lane));
            return x;
        }
        case Kind::Reference: {
            const double lo = reference_->lower(), hi = reference_->upper();
            double x = reference_->quantile(rng.open_uniform(step, slot_base, lane));
            if (x <= lo) x = std::nextafter(lo, hi);
            if (x >= hi) x = std::nextafter(hi, lo);
            return Point{x};
        }
        case Kind::Empirical: {
            const auto& m = *empirical_;
            const std::size_t k = m.locate(m.first_retained(), m.size(), rng.uniform(step, slot_base, lane));
            return m.point(k);
        }
        case Kind::Mixture: {
            const double u = rng.uniform(step, slot_base, lane);
            if (u < weight_) {
                Point x(dim_);
                for (std::size_t i = 0; i < dim_; ++i)
                    x[i] = inside_open(lo_[i], hi_[i],
                                       rng.open_uniform(step, slot_base + 1 + static_cast<std::uint32_t>(i), lane));
                return x;
            }
            return base_->sample(rng, step, lane, slot_base + 1 + static_cast<std::uint32_t>(dim_));
        }
    }
    return point_;
}

double FixedLaw::integrate(const std::function<double(const Point&)>& f) const {
    switch (kind_) {
        case Kind::Dirac:
            return f(point_);
        case Kind::UniformBox:
            return box_average(lo_, hi_, f);
        case Kind::Reference:
            return reference_->integrate([&](double x) { return f(Point{x}); });
        case Kind::Empirical:
            return empirical_->integrate(f);
        case Kind::Mixture:
            return (1.0 - weight_) * base_->integrate(f) + weight_ * box_average(lo_, hi_, f);
    }
    return 0.0;
}

double FixedLaw::wasserstein1_to(const EmpiricalLaw& other) const {
    if (dim_ != 1) throw DomainError("exact W1 needs a one-dimensional law");
    switch (kind_) {
        case Kind::Dirac:
            return wasserstein1_1d(EmpiricalLaw::dirac(point_[0]), other);
        case Kind::UniformBox:
            return wasserstein1_1d(other, UniformLaw{lo_[0], hi_[0]});
        case Kind::Reference:
            return wasserstein1_1d(other, *reference_);
        case Kind::Empirical:
            return wasserstein1_1d(EmpiricalLaw::from_measure(*empirical_), other);
        case Kind::Mixture:
            throw DomainError("W1 of a mixture against an empirical law is not implemented");
    }
    return 0.0;
}

double FixedLaw::wasserstein1_to_uniform(double a, double b) const {
    if (dim_ != 1) throw DomainError("exact W1 needs a one-dimensional law");
    const UniformLaw u{a, b};
    switch (kind_) {
        case Kind::Dirac:
            return wasserstein1_1d(EmpiricalLaw::dirac(point_[0]), u);
        case Kind::UniformBox:
            return wasserstein1_1d(ReferenceQsd::numeric_table({lo_[0], hi_[0]}, {0.0, 1.0}, 0.0), u);
        case Kind::Reference:
            return wasserstein1_1d(*reference_, u);
        case Kind::Empirical:
            return wasserstein1_1d(EmpiricalLaw::from_measure(*empirical_), u);
        case Kind::Mixture:
            // CDFs mix linearly, so the distance scales by the base weight
            // when the uniform component matches (a, b).
            if (lo_[0] == a && hi_[0] == b) return (1.0 - weight_) * base_->wasserstein1_to_uniform(a, b);
            throw DomainError("mixture W1 to a different uniform law is not implemented");
    }
    return 0.0;
}

std::string FixedLaw::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Dirac:
            os << "dirac(" << point_[0] << (dim_ > 1 ? ", ..." : "") << ")";
            break;
        case Kind::UniformBox:
            os << "uniform_box";
            break;
        case Kind::Reference:
            os << "reference:" << reference_->describe();
            break;
        case Kind::Empirical:
            os << "empirical(" << empirical_->size() << " atoms)";
            break;
        case Kind::Mixture:
            os << "mixture(w=" << weight_ << ", " << base_->describe() << ")";
            break;
    }
    return os.str();
}

std::string RedistributionPolicy::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::FullOccupation:
            os << "full_occupation";
            break;
        case Kind::SlidingWindow:
            os << "sliding_window(t(n) = " << window.describe() << ")";
            break;
        case Kind::Quantized:
            os << "quantized(eps=" << eps << ", " << (cell_law == CellLaw::Dirac ? "dirac" : "uniform") << ")";
            break;
        case Kind::Fixed:
            os << "fixed(" << (fixed ? fixed->describe() : "?") << ")";
            break;
    }
    return os.str();
}

// -------------------------------------------------------- RedistributionState

RedistributionState::RedistributionState(RedistributionPolicy policy, std::shared_ptr<const Domain> domain,
                                         Point fallback)
    : policy_(std::move(policy)), domain_(std::move(domain)), fallback_(fallback) {
    if (!domain_) throw DomainError("redistribution needs a domain");
    switch (policy_.kind) {
        case RedistributionPolicy::Kind::FullOccupation:
        case RedistributionPolicy::Kind::SlidingWindow:
            measure_.emplace(domain_->dim());
            break;
        case RedistributionPolicy::Kind::Quantized: {
            if (policy_.cell_law == CellLaw::Uniform && domain_->kind() == Domain::Kind::Ball)
                throw ConfigError("uniform cell law is supported for interval and box domains only");
            partition_ = std::make_shared<const Partition>(Partition::build(domain_, policy_.eps));
            const std::size_t L = partition_->size();
            cell_weight_.assign(L, 0.0);
            cell_acc_.assign(L, CompensatedSum{});
            reps_.assign(L, Point(domain_->dim()));
            has_rep_.assign(L, 0);
            for (std::size_t c = 0; c < L; ++c)
                if (partition_->center_in_domain(c)) {
                    reps_[c] = partition_->cell_center(c);
                    has_rep_[c] = 1;
                }
            break;
        }
        case RedistributionPolicy::Kind::Fixed:
            if (!policy_.fixed) throw ConfigError("fixed redistribution needs a law");
            if (policy_.fixed->dim() != domain_->dim()) throw ConfigError("fixed law dimension mismatch");
            break;
    }
}

void RedistributionState::record_visit(const Point& x, double weight) {
    if (x.dim() != domain_->dim() || !domain_->contains_unchecked(x))
        throw ContractViolation("record_visit: the scheme only records states inside D");
    ++recorded_;
    total_.add(weight);
    switch (policy_.kind) {
        case RedistributionPolicy::Kind::FullOccupation:
            measure_->record(x, weight);
            break;
        case RedistributionPolicy::Kind::SlidingWindow: {
            measure_->record(x, weight);
            // Retire indices below t(n) physically once they outnumber the live window.
            const std::size_t left = policy_.window.start(measure_->size());
            const std::size_t retired = left - std::min(left, measure_->first_retained());
            if (retired > 0 && retired >= measure_->size() - left) measure_->compact_before(left);
            break;
        }
        case RedistributionPolicy::Kind::Quantized: {
            const std::size_t c = partition_->cell_of(x);
            cell_acc_[c].add(weight);
            cell_weight_[c] = cell_acc_[c].value();
            if (!has_rep_[c]) {
                reps_[c] = x;
                has_rep_[c] = 1;
            }
            cumulative_dirty_ = true;
            break;
        }
        case RedistributionPolicy::Kind::Fixed:
            break;
    }
}

std::pair<std::size_t, std::size_t> RedistributionState::window_range() const {
    if (!measure_) return {0, 0};
    const std::size_t n = measure_->size();
    if (policy_.kind == RedistributionPolicy::Kind::SlidingWindow)
        return {policy_.window.start(n), n};
    return {measure_->first_retained(), n};
}

void RedistributionState::rebuild_cumulative() {
    cumulative_.resize(cell_weight_.size());
    double acc = 0.0;
    for (std::size_t c = 0; c < cell_weight_.size(); ++c) {
        acc += cell_weight_[c];
        cumulative_[c] = acc;
    }
    cumulative_dirty_ = false;
}

Point RedistributionState::sample_in_cell(std::size_t cell, const RngStream& rng, std::uint64_t step) const {
    if (policy_.cell_law == CellLaw::Dirac) return reps_[cell];
    const Point lo = partition_->cell_lower(cell);
    const Point hi = partition_->cell_upper(cell);
    Point x(lo.dim());
    for (std::size_t i = 0; i < lo.dim(); ++i)
        x[i] = inside_open(lo[i], hi[i], rng.open_uniform(step, 1 + static_cast<std::uint32_t>(i)));
    return x;
}

Point RedistributionState::sample_restart(const RngStream& rng, std::uint64_t step) {
    if (policy_.kind == RedistributionPolicy::Kind::Fixed) return policy_.fixed->sample(rng, step);
    if (recorded_ == 0) return fallback_;
    const double u = rng.uniform(step, 0);
    switch (policy_.kind) {
        case RedistributionPolicy::Kind::FullOccupation:
        case RedistributionPolicy::Kind::SlidingWindow: {
            const auto [begin, end] = window_range();
            return measure_->point(measure_->locate(begin, end, u));
        }
        case RedistributionPolicy::Kind::Quantized: {
            if (cumulative_dirty_) rebuild_cumulative();
            const double target = u * cumulative_.back();
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
            std::size_t c = static_cast<std::size_t>(it - cumulative_.begin());
            if (c >= cumulative_.size()) c = cumulative_.size() - 1;
            return sample_in_cell(c, rng, step);
        }
        case RedistributionPolicy::Kind::Fixed:
            break;
    }
    return fallback_;
}

double RedistributionState::cell_integral(std::size_t cell, const TestFunction& f) const {
    if (policy_.cell_law == CellLaw::Dirac) return f(reps_[cell]);
    return box_average(partition_->cell_lower(cell), partition_->cell_upper(cell), f);
}

double RedistributionState::integrate(const TestFunction& f) const {
    switch (policy_.kind) {
        case RedistributionPolicy::Kind::FullOccupation:
        case RedistributionPolicy::Kind::SlidingWindow: {
            if (recorded_ == 0) return f(fallback_);
            const auto [begin, end] = window_range();
            return measure_->integrate(f, begin, end);
        }
        case RedistributionPolicy::Kind::Quantized: {
            if (recorded_ == 0) return f(fallback_);
            CompensatedSum acc, tot;
            for (std::size_t c = 0; c < cell_weight_.size(); ++c) {
                if (cell_weight_[c] <= 0.0) continue;
                acc.add(cell_weight_[c] * cell_integral(c, f));
                tot.add(cell_weight_[c]);
            }
            return acc.value() / tot.value();
        }
        case RedistributionPolicy::Kind::Fixed:
            return policy_.fixed->integrate(f);
    }
    return 0.0;
}

std::vector<double> RedistributionState::h4_discrepancy(const WeightedEmpiricalMeasure& full_measure,
                                                        const std::vector<TestFunction>& fns) const {
    if (full_measure.empty()) throw DomainError("h4_discrepancy needs a nonempty occupation measure");
    std::vector<double> out;
    out.reserve(fns.size());
    for (const auto& f : fns) out.push_back(full_measure.integrate(f) - integrate(f));
    return out;
}

std::vector<double> RedistributionState::normalized_cell_weights() const {
    std::vector<double> w = cell_weight_;
    double t = 0.0;
    for (double x : w) t += x;
    if (t > 0.0)
        for (double& x : w) x /= t;
    return w;
}

std::optional<Point> RedistributionState::representative(std::size_t cell) const {
    if (cell >= has_rep_.size() || !has_rep_[cell]) return std::nullopt;
    return reps_[cell];
}

}  // namespace qsd
