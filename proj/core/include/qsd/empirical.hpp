#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsd/numeric.hpp"
#include "qsd/point.hpp"

namespace qsd {

/// Weighted point masses sum_k w_k delta_{x_k} stored in insertion order, with
/// a compensated running prefix of the weights for O(log n) weighted sampling
/// over any index range. Append-only apart from prefix compaction.
class WeightedEmpiricalMeasure {
public:
    explicit WeightedEmpiricalMeasure(std::size_t dim = 1) : dim_(Point(dim).dim()) {}

    std::size_t dim() const noexcept { return dim_; }
    /// Logical number of recorded atoms, including compacted ones.
    std::size_t size() const noexcept { return offset_ + weights_.size(); }
    bool empty() const noexcept { return size() == 0; }
    /// First logical index still held in memory.
    std::size_t first_retained() const noexcept { return offset_; }

    void record(const Point& x, double weight);
    void reserve(std::size_t n);

    Point point(std::size_t i) const;
    double coord(std::size_t i) const { return coords_[(i - offset_) * dim_]; }
    double weight(std::size_t i) const { return weights_[i - offset_]; }

    /// Sum of weights of atoms [0, i). Valid for i >= first_retained().
    double prefix(std::size_t i) const { return prefix_[i - offset_]; }
    double total_weight() const noexcept { return prefix_.back(); }
    double range_weight(std::size_t begin, std::size_t end) const { return prefix(end) - prefix(begin); }

    /// Atom index k in [begin, end) with prefix(k) <= target < prefix(k+1),
    /// where target = prefix(begin) + u * range_weight(begin, end), u in [0,1).
    std::size_t locate(std::size_t begin, std::size_t end, double u) const;

    /// Forget atoms [first_retained(), k); their weight stays in the prefix.
    void compact_before(std::size_t k);

    /// Normalized integral sum_k w_k f(x_k) / sum_k w_k over [begin, end).
    template <class F>
    double integrate(F&& f, std::size_t begin, std::size_t end) const {
        CompensatedSum acc;
        for (std::size_t k = begin; k < end; ++k) acc.add(weight(k) * f(point(k)));
        return acc.value() / range_weight(begin, end);
    }
    template <class F>
    double integrate(F&& f) const {
        return integrate(std::forward<F>(f), first_retained(), size());
    }

    std::span<const double> raw_coords() const noexcept { return coords_; }
    std::span<const double> raw_weights() const noexcept { return weights_; }

private:
    std::size_t dim_;
    std::size_t offset_ = 0;
    std::vector<double> coords_;
    std::vector<double> weights_;
    std::vector<double> prefix_{0.0};
    CompensatedSum total_;
};

}  // namespace qsd
