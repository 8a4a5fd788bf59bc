#include "qsd/empirical.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

void WeightedEmpiricalMeasure::record(const Point& x, double weight) {
    if (x.dim() != dim_) throw DomainError("recorded point has wrong dimension");
    if (!(weight > 0.0) || !std::isfinite(weight)) throw DomainError("recorded weight must be positive");
    for (std::size_t i = 0; i < dim_; ++i) coords_.push_back(x[i]);
    weights_.push_back(weight);
    total_.add(weight);
    prefix_.push_back(total_.value());
}

void WeightedEmpiricalMeasure::reserve(std::size_t n) {
    coords_.reserve(n * dim_);
    weights_.reserve(n);
    prefix_.reserve(n + 1);
}

Point WeightedEmpiricalMeasure::point(std::size_t i) const {
    return Point(std::span<const double>(coords_.data() + (i - offset_) * dim_, dim_));
}

std::size_t WeightedEmpiricalMeasure::locate(std::size_t begin, std::size_t end, double u) const {
    const double lo = prefix(begin);
    const double target = lo + u * (prefix(end) - lo);
    // prefix_ is nondecreasing; find last k in [begin, end) with prefix(k) <= target.
    const auto first = prefix_.begin() + static_cast<std::ptrdiff_t>(begin - offset_);
    const auto last = prefix_.begin() + static_cast<std::ptrdiff_t>(end - offset_);
    auto it = std::upper_bound(first, last, target);
    std::size_t k = static_cast<std::size_t>(it - prefix_.begin()) + offset_;
    k = (k == 0) ? 0 : k - 1;
    if (k < begin) k = begin;
    if (k >= end) k = end - 1;
    return k;
}

void WeightedEmpiricalMeasure::compact_before(std::size_t k) {
    if (k <= offset_) return;
    k = std::min(k, size());
    const std::size_t drop = k - offset_;
    coords_.erase(coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(drop * dim_));
    weights_.erase(weights_.begin(), weights_.begin() + static_cast<std::ptrdiff_t>(drop));
    prefix_.erase(prefix_.begin(), prefix_.begin() + static_cast<std::ptrdiff_t>(drop));
    offset_ = k;
}

}  // namespace qsd
