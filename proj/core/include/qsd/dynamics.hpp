#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qsd/point.hpp"
#include "qsd/rng.hpp"

namespace qsd {

/// Coefficients b and sigma of dY = b(Y) dt + sigma(Y) dB.
///
/// Built-in kinds are globally Lipschitz with constant sigma, and uniform
/// ellipticity of sigma sigma^T is checked at construction. Callback models are
/// accepted as-is; their H2 compliance is the caller's responsibility.
class SdeModel {
public:
    enum class Kind { BrownianMotion, OrnsteinUhlenbeck, Affine, Callback };
    using Matrix = std::array<double, kMaxDim * kMaxDim>;   // row-major, d x d used
    using DriftFn = std::function<Point(const Point&)>;
    using DiffusionFn = std::function<Point(const Point&, const Point&)>;  // (x, noise) -> sigma(x) noise

    static constexpr double kDefaultEllipticityFloor = 1e-12;

    /// b = 0, sigma = scale * I.
    static SdeModel brownian(double scale, std::size_t dim = 1);
    /// b(x) = -theta (x - mean), sigma = scale * I.
    static SdeModel ornstein_uhlenbeck(double theta, const Point& mean, double scale);
    /// b(x) = A x + v, constant sigma. Matrices are row-major d x d.
    static SdeModel affine(std::span<const double> drift_matrix, const Point& drift_vector,
                           std::span<const double> sigma,
                           double ellipticity_floor = kDefaultEllipticityFloor);
    static SdeModel callback(std::size_t dim, DriftFn drift, DiffusionFn diffusion,
                             std::string label = "callback");

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    double scale() const noexcept { return scale_; }
    double theta() const noexcept { return theta_; }
    const Point& mean() const noexcept { return mean_; }
    const Matrix& drift_matrix() const noexcept { return drift_matrix_; }
    const Point& drift_vector() const noexcept { return mean_; }
    const Matrix& sigma_matrix() const noexcept { return sigma_; }
    /// Smallest eigenvalue of sigma sigma^T (constant-sigma kinds).
    double ellipticity() const noexcept { return ellipticity_; }
    const std::string& label() const noexcept { return label_; }

    Point drift(const Point& x) const {
        switch (kind_) {
            case Kind::BrownianMotion:
                return Point(dim_);
            case Kind::OrnsteinUhlenbeck: {
                Point b(dim_);
                for (std::size_t i = 0; i < dim_; ++i) b[i] = -theta_ * (x[i] - mean_[i]);
                return b;
            }
            case Kind::Affine: {
                Point b = mean_;
                for (std::size_t i = 0; i < dim_; ++i)
                    for (std::size_t j = 0; j < dim_; ++j) b[i] += drift_matrix_[i * kMaxDim + j] * x[j];
                return b;
            }
            case Kind::Callback:
                return drift_fn_(x);
        }
        return Point(dim_);
    }

    /// sigma(x) * noise.
    Point diffuse(const Point& x, const Point& noise) const {
        switch (kind_) {
            case Kind::BrownianMotion:
            case Kind::OrnsteinUhlenbeck: {
                Point out(dim_);
                for (std::size_t i = 0; i < dim_; ++i) out[i] = scale_ * noise[i];
                return out;
            }
            case Kind::Affine: {
                Point out(dim_);
                for (std::size_t i = 0; i < dim_; ++i)
                    for (std::size_t j = 0; j < dim_; ++j) out[i] += sigma_[i * kMaxDim + j] * noise[j];
                return out;
            }
            case Kind::Callback:
                return diffusion_fn_(x, noise);
        }
        return Point(dim_);
    }

private:
    SdeModel() = default;

    Kind kind_ = Kind::BrownianMotion;
    std::size_t dim_ = 1;
    double scale_ = 1.0;
    double theta_ = 0.0;
    Point mean_;
    Matrix drift_matrix_{};
    Matrix sigma_{};
    double ellipticity_ = 0.0;
    DriftFn drift_fn_;
    DiffusionFn diffusion_fn_;
    std::string label_;
};

/// One Euler transition x + b(x) dt + sigma(x) noise, with noise ~ N(0, dt I)
/// supplied by the caller. Throws NumericError on non-finite input.
inline Point euler_step(const SdeModel& model, const Point& x, double dt, const Point& noise) {
    if (!x.finite() || !noise.finite() || !std::isfinite(dt))
        throw NumericError("non-finite input to euler_step", 0);
    const Point b = model.drift(x);
    const Point s = model.diffuse(x, noise);
    Point y(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) y[i] = x[i] + b[i] * dt + s[i];
    return y;
}

/// Noise vector N(0, dt I) for (step) drawn from the stream.
inline Point gaussian_increment(RngStream& rng, std::uint64_t step, std::size_t dim, double dt) {
    Point g(dim);
    const double sd = std::sqrt(dt);
    for (std::size_t i = 0; i < dim; ++i) g[i] = sd * rng.gaussian(step, static_cast<std::uint32_t>(i));
    return g;
}

/// Uniform-grid Euler path with its Brownian increments retained, so coarser
/// paths driven by the same noise can be built by summing increments.
struct EulerPath {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Point> values;
    std::vector<Point> increments;   // increments[k] = B_{t_{k+1}} - B_{t_k}
};

/// Euler path on the grid k * fine_dt, k = 0..round(t_end / fine_dt). Noise for
/// fine step k is rng.gaussian(k, i) * sqrt(fine_dt).
EulerPath reference_path(const SdeModel& model, const Point& x0, double t_end, double fine_dt,
                         RngStream& rng);

/// Sum consecutive groups of `factor` increments.
std::vector<Point> aggregate_increments(std::span<const Point> increments, std::size_t factor);

/// Euler path on a uniform grid driven by the given increments.
EulerPath euler_path_from_increments(const SdeModel& model, const Point& x0, double dt,
                                     std::span<const Point> increments);

}  // namespace qsd
