#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

#include "qsd/errors.hpp"

namespace qsd {

inline constexpr std::size_t kMaxDim = 4;

/// Small fixed-capacity vector in R^d, d <= kMaxDim. Lives on the stack so the
/// simulation loop never allocates.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim) : dim_(dim) { check_dim(dim); }
    Point(std::initializer_list<double> values) : dim_(values.size()) {
        check_dim(dim_);
        std::size_t i = 0;
        for (double v : values) data_[i++] = v;
    }
    explicit Point(std::span<const double> values) : dim_(values.size()) {
        check_dim(dim_);
        for (std::size_t i = 0; i < dim_; ++i) data_[i] = values[i];
    }
    static Point scalar(double x) { return Point{x}; }

    std::size_t dim() const noexcept { return dim_; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    std::span<const double> coords() const noexcept { return {data_.data(), dim_}; }
    std::span<double> coords() noexcept { return {data_.data(), dim_}; }

    bool finite() const noexcept {
        for (std::size_t i = 0; i < dim_; ++i)
            if (!std::isfinite(data_[i])) return false;
        return true;
    }

    friend bool operator==(const Point& a, const Point& b) noexcept {
        if (a.dim_ != b.dim_) return false;
        for (std::size_t i = 0; i < a.dim_; ++i)
            if (a.data_[i] != b.data_[i]) return false;
        return true;
    }

private:
    static void check_dim(std::size_t d) {
        if (d == 0 || d > kMaxDim) throw DomainError("point dimension must be in [1, 4]");
    }

    std::array<double, kMaxDim> data_{};
    std::size_t dim_ = 1;
};

inline double norm(const Point& p) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

inline double distance(const Point& a, const Point& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace qsd
