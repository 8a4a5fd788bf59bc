#include "qsd/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsd {

Domain::Domain(Kind kind, Point lo, Point hi, Point center, double radius)
    : kind_(kind), dim_(lo.dim()), lo_(lo), hi_(hi), center_(center), radius_(radius) {}

Domain Domain::interval(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
        throw DomainError("interval needs finite a < b");
    return Domain(Kind::Interval, Point{a}, Point{b}, Point{0.5 * (a + b)}, 0.5 * (b - a));
}

Domain Domain::box(const Point& lo, const Point& hi) {
    if (lo.dim() != hi.dim()) throw DomainError("box corners differ in dimension");
    for (std::size_t i = 0; i < lo.dim(); ++i)
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw DomainError("box needs finite lo < hi on every axis");
    Point c(lo.dim());
    for (std::size_t i = 0; i < lo.dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return Domain(Kind::Box, lo, hi, c, 0.0);
}

Domain Domain::ball(const Point& center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball needs radius > 0");
    if (!center.finite()) throw DomainError("ball center must be finite");
    Point lo(center.dim()), hi(center.dim());
    for (std::size_t i = 0; i < center.dim(); ++i) {
        lo[i] = center[i] - radius;
        hi[i] = center[i] + radius;
    }
    return Domain(Kind::Ball, lo, hi, center, radius);
}

double Domain::signed_distance(const Point& x) const {
    check_dim(x);
    switch (kind_) {
        case Kind::Interval:
            return std::min(x[0] - lo_[0], hi_[0] - x[0]);
        case Kind::Box: {
            double inside = INFINITY;
            double outside_sq = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                inside = std::min({inside, x[i] - lo_[i], hi_[i] - x[i]});
                const double excess = std::max({lo_[i] - x[i], x[i] - hi_[i], 0.0});
                outside_sq += excess * excess;
            }
            return inside >= 0.0 ? inside : -std::sqrt(outside_sq);
        }
        case Kind::Ball:
            return ball_signed_distance(x);
    }
    return 0.0;
}

std::function<bool(const Point&)> Domain::compact_core(double eta) const {
    if (!(eta > 0.0)) throw DomainError("compact_core needs eta > 0");
    return [self = *this, eta](const Point& x) { return self.signed_distance(x) >= eta; };
}

double Domain::diameter() const {
    switch (kind_) {
        case Kind::Interval:
            return hi_[0] - lo_[0];
        case Kind::Box:
            return distance(lo_, hi_);
        case Kind::Ball:
            return 2.0 * radius_;
    }
    return 0.0;
}

std::vector<std::string> Domain::warnings() const {
    std::vector<std::string> w;
    if (!has_smooth_boundary())
        w.emplace_back("box domain has corners: boundary is not C^2 (H1 violated); "
                       "the scheme is still well defined");
    return w;
}

std::string Domain::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Interval:
            os << "interval(" << lo_[0] << ", " << hi_[0] << ")";
            break;
        case Kind::Box:
            os << "box(d=" << dim_ << ")";
            break;
        case Kind::Ball:
            os << "ball(d=" << dim_ << ", r=" << radius_ << ")";
            break;
    }
    return os.str();
}

Partition Partition::build(std::shared_ptr<const Domain> domain, double eps) {
    if (!domain) throw DomainError("partition needs a domain");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("partition needs eps > 0");
    Partition p;
    p.domain_ = std::move(domain);
    p.eps_ = eps;
    const Domain& D = *p.domain_;
    const std::size_t d = D.dim();
    const double axis_step = eps / std::sqrt(static_cast<double>(d));
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        const double len = D.upper()[i] - D.lower()[i];
        // Guard against 1/0.1 = 10.000000000000002 style rounding.
        const double ratio = len / axis_step;
        auto n = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
        n = std::max<std::size_t>(n, 1);
        p.counts_.push_back(n);
        p.widths_.push_back(len / static_cast<double>(n));
        total *= n;
    }
    p.lookup_.assign(total, -1);
    for (std::size_t lin = 0; lin < total; ++lin) {
        // Decode multi-index.
        std::size_t rem = lin;
        Point lo(d), hi(d), mid(d);
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t k = rem % p.counts_[i];
            rem /= p.counts_[i];
            lo[i] = D.lower()[i] + static_cast<double>(k) * p.widths_[i];
            hi[i] = (k + 1 == p.counts_[i]) ? D.upper()[i] : lo[i] + p.widths_[i];
            mid[i] = 0.5 * (lo[i] + hi[i]);
        }
        bool meets = true;
        bool inside = true;
        if (D.kind() == Domain::Kind::Ball) {
            // Nearest point of the closed cell to the center, and its farthest corner.
            double near_sq = 0.0, far_sq = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double centre = 0.5 * (D.lower()[i] + D.upper()[i]);
                const double nearest = std::clamp(centre, lo[i], hi[i]);
                near_sq += (nearest - centre) * (nearest - centre);
                const double far = std::max(std::fabs(lo[i] - centre), std::fabs(hi[i] - centre));
                far_sq += far * far;
            }
            const double r = 0.5 * (D.upper()[0] - D.lower()[0]);
            meets = std::sqrt(near_sq) < r;
            inside = std::sqrt(far_sq) <= r;
        }
        if (!meets) continue;
        p.lookup_[lin] = static_cast<std::ptrdiff_t>(p.cells_.size());
        p.cells_.push_back(lin);
        p.center_inside_.push_back(D.contains(mid) ? 1 : 0);
        p.cell_inside_.push_back(inside ? 1 : 0);
    }
    return p;
}

std::size_t Partition::grid_index(const Point& x) const {
    const Domain& D = *domain_;
    std::size_t lin = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < D.dim(); ++i) {
        double f = std::floor((x[i] - D.lower()[i]) / widths_[i]);
        f = std::clamp(f, 0.0, static_cast<double>(counts_[i] - 1));
        auto k = static_cast<std::size_t>(f);
        // Rounding in the division can land one cell off; fix against the edges.
        const double lo = D.lower()[i] + static_cast<double>(k) * widths_[i];
        if (x[i] < lo && k > 0) --k;
        else if (k + 1 < counts_[i] && x[i] >= lo + widths_[i]) ++k;
        lin += k * stride;
        stride *= counts_[i];
    }
    return lin;
}

std::size_t Partition::cell_of(const Point& x) const {
    if (!domain_->contains(x)) throw ContractViolation("cell_of: point is outside the domain");
    const std::ptrdiff_t c = lookup_[grid_index(x)];
    if (c < 0) throw ContractViolation("cell_of: point maps to a discarded cell");
    return static_cast<std::size_t>(c);
}

Point Partition::cell_lower(std::size_t cell) const {
    const Domain& D = *domain_;
    std::size_t rem = cells_.at(cell);
    Point lo(D.dim());
    for (std::size_t i = 0; i < D.dim(); ++i) {
        const std::size_t k = rem % counts_[i];
        rem /= counts_[i];
        lo[i] = D.lower()[i] + static_cast<double>(k) * widths_[i];
    }
    return lo;
}

Point Partition::cell_upper(std::size_t cell) const {
    const Domain& D = *domain_;
    std::size_t rem = cells_.at(cell);
    Point hi(D.dim());
    for (std::size_t i = 0; i < D.dim(); ++i) {
        const std::size_t k = rem % counts_[i];
        rem /= counts_[i];
        hi[i] = (k + 1 == counts_[i]) ? D.upper()[i]
                                      : D.lower()[i] + static_cast<double>(k + 1) * widths_[i];
    }
    return hi;
}

Point Partition::cell_center(std::size_t cell) const {
    Point lo = cell_lower(cell);
    const Point hi = cell_upper(cell);
    for (std::size_t i = 0; i < lo.dim(); ++i) lo[i] = 0.5 * (lo[i] + hi[i]);
    return lo;
}

double Partition::cell_diameter() const noexcept {
    double s = 0.0;
    for (double w : widths_) s += w * w;
    return std::sqrt(s);
}

}  // namespace qsd
