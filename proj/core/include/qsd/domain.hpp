#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qsd/point.hpp"

namespace qsd {

/// Bounded open set D with a closed-form signed distance psi_D
/// (positive inside, zero on the boundary, negative outside).
class Domain {
public:
    enum class Kind { Interval, Box, Ball };

    static Domain interval(double a, double b);
    static Domain box(const Point& lo, const Point& hi);
    static Domain ball(const Point& center, double radius);

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }

    /// x in D. Boundary points are outside since D is open.
    bool contains(const Point& x) const {
        check_dim(x);
        return contains_unchecked(x);
    }

    /// Hot-path membership test; caller guarantees x.dim() == dim().
    bool contains_unchecked(const Point& x) const noexcept {
        switch (kind_) {
            case Kind::Interval:
                return x[0] > lo_[0] && x[0] < hi_[0];
            case Kind::Box:
                for (std::size_t i = 0; i < dim_; ++i)
                    if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
                return true;
            case Kind::Ball:
                return ball_signed_distance(x) > 0.0;
        }
        return false;
    }

    double signed_distance(const Point& x) const;

    /// Membership predicate of K_eta = {x in D : psi_D(x) >= eta}.
    std::function<bool(const Point&)> compact_core(double eta) const;

    /// Closed bounding box of D.
    const Point& lower() const noexcept { return lo_; }
    const Point& upper() const noexcept { return hi_; }
    double diameter() const;

    /// Smooth-boundary requirement; boxes have corners.
    bool has_smooth_boundary() const noexcept { return kind_ != Kind::Box; }
    std::vector<std::string> warnings() const;

    std::string describe() const;

private:
    Domain(Kind kind, Point lo, Point hi, Point center, double radius);

    void check_dim(const Point& x) const {
        if (x.dim() != dim_) throw DomainError("point dimension does not match domain");
    }
    double ball_signed_distance(const Point& x) const noexcept {
        return radius_ - distance(x, center_);
    }

    Kind kind_;
    std::size_t dim_;
    Point lo_;
    Point hi_;
    Point center_;
    double radius_ = 0.0;
};

/// Axis-aligned grid partition of D with mesh eps: every retained cell has
/// diameter <= eps. Cells that do not meet D are discarded.
class Partition {
public:
    static Partition build(std::shared_ptr<const Domain> domain, double eps);

    const Domain& domain() const noexcept { return *domain_; }
    double eps() const noexcept { return eps_; }
    std::size_t size() const noexcept { return cells_.size(); }

    /// Index of the cell containing x; x must lie in D.
    std::size_t cell_of(const Point& x) const;

    Point cell_lower(std::size_t cell) const;
    Point cell_upper(std::size_t cell) const;
    Point cell_center(std::size_t cell) const;
    double cell_diameter() const noexcept;
    /// Whether the cell center lies in D (otherwise a representative is taken
    /// from the first in-D sample falling in the cell).
    bool center_in_domain(std::size_t cell) const { return center_inside_[cell] != 0; }
    /// Whether the whole closed cell lies in closure(D), so uniform-on-cell is supported.
    bool cell_inside_closure(std::size_t cell) const { return cell_inside_[cell] != 0; }

    const std::vector<std::size_t>& counts_per_axis() const noexcept { return counts_; }

private:
    Partition() = default;

    std::size_t grid_index(const Point& x) const;

    std::shared_ptr<const Domain> domain_;
    double eps_ = 0.0;
    std::vector<std::size_t> counts_;
    std::vector<double> widths_;
    std::vector<std::size_t> cells_;        // retained cell -> grid linear index
    std::vector<std::ptrdiff_t> lookup_;    // grid linear index -> retained cell or -1
    std::vector<char> center_inside_;
    std::vector<char> cell_inside_;
};

}  // namespace qsd
