#include "qsd/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qsd {

namespace {

double min_eig_sigma_sigma_t(const SdeModel::Matrix& sigma, std::size_t d) {
    Eigen::MatrixXd s(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s(i, j) = sigma[i * kMaxDim + j];
    const Eigen::MatrixXd a = s * s.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace

SdeModel SdeModel::brownian(double scale, std::size_t dim) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("brownian scale must be > 0");
    SdeModel m;
    m.kind_ = Kind::BrownianMotion;
    m.dim_ = Point(dim).dim();
    m.scale_ = scale;
    m.mean_ = Point(dim);
    m.ellipticity_ = scale * scale;
    m.label_ = "brownian";
    return m;
}

SdeModel SdeModel::ornstein_uhlenbeck(double theta, const Point& mean, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("OU scale must be > 0");
    if (!std::isfinite(theta) || !mean.finite()) throw DomainError("OU parameters must be finite");
    SdeModel m;
    m.kind_ = Kind::OrnsteinUhlenbeck;
    m.dim_ = mean.dim();
    m.scale_ = scale;
    m.theta_ = theta;
    m.mean_ = mean;
    m.ellipticity_ = scale * scale;
    m.label_ = "ornstein_uhlenbeck";
    return m;
}

SdeModel SdeModel::affine(std::span<const double> drift_matrix, const Point& drift_vector,
                          std::span<const double> sigma, double ellipticity_floor) {
    const std::size_t d = drift_vector.dim();
    if (drift_matrix.size() != d * d || sigma.size() != d * d)
        throw DomainError("affine model matrices must be d x d");
    SdeModel m;
    m.kind_ = Kind::Affine;
    m.dim_ = d;
    m.mean_ = drift_vector;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            m.drift_matrix_[i * kMaxDim + j] = drift_matrix[i * d + j];
            m.sigma_[i * kMaxDim + j] = sigma[i * d + j];
        }
    for (double v : drift_matrix)
        if (!std::isfinite(v)) throw DomainError("affine drift must be finite");
    m.ellipticity_ = min_eig_sigma_sigma_t(m.sigma_, d);
    if (!(m.ellipticity_ >= ellipticity_floor))
        throw DomainError("sigma sigma^T is not uniformly elliptic (smallest eigenvalue " +
                          std::to_string(m.ellipticity_) + ")");
    m.label_ = "affine";
    return m;
}

SdeModel SdeModel::callback(std::size_t dim, DriftFn drift, DiffusionFn diffusion, std::string label) {
    if (!drift || !diffusion) throw DomainError("callback model needs drift and diffusion");
    SdeModel m;
    m.kind_ = Kind::Callback;
    m.dim_ = Point(dim).dim();
    m.mean_ = Point(dim);
    m.drift_fn_ = std::move(drift);
    m.diffusion_fn_ = std::move(diffusion);
    m.label_ = std::move(label);
    return m;
}

EulerPath reference_path(const SdeModel& model, const Point& x0, double t_end, double fine_dt,
                         RngStream& rng) {
    if (!(fine_dt > 0.0) || !(t_end >= 0.0)) throw DomainError("reference_path needs fine_dt > 0, t_end >= 0");
    const double ratio = t_end / fine_dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (std::fabs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
        throw DomainError("t_end must be an integer multiple of fine_dt");
    std::vector<Point> inc;
    inc.reserve(n);
    for (std::size_t k = 0; k < n; ++k) inc.push_back(gaussian_increment(rng, k, x0.dim(), fine_dt));
    EulerPath path = euler_path_from_increments(model, x0, fine_dt, inc);
    return path;
}

std::vector<Point> aggregate_increments(std::span<const Point> increments, std::size_t factor) {
    if (factor == 0 || increments.size() % factor != 0)
        throw DomainError("increment count must be a multiple of the aggregation factor");
    std::vector<Point> out;
    out.reserve(increments.size() / factor);
    for (std::size_t k = 0; k < increments.size(); k += factor) {
        Point s(increments[k].dim());
        for (std::size_t j = 0; j < factor; ++j)
            for (std::size_t i = 0; i < s.dim(); ++i) s[i] += increments[k + j][i];
        out.push_back(s);
    }
    return out;
}

EulerPath euler_path_from_increments(const SdeModel& model, const Point& x0, double dt,
                                     std::span<const Point> increments) {
    EulerPath p;
    p.dt = dt;
    p.times.reserve(increments.size() + 1);
    p.values.reserve(increments.size() + 1);
    p.increments.assign(increments.begin(), increments.end());
    p.times.push_back(0.0);
    p.values.push_back(x0);
    Point x = x0;
    for (std::size_t k = 0; k < increments.size(); ++k) {
        x = euler_step(model, x, dt, increments[k]);
        p.times.push_back(static_cast<double>(k + 1) * dt);
        p.values.push_back(x);
    }
    return p;
}

}  // namespace qsd
