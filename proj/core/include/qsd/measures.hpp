#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qsd/dynamics.hpp"
#include "qsd/empirical.hpp"
#include "qsd/point.hpp"
#include "qsd/rng.hpp"

namespace qsd {

/// Probability measure on R given by sorted atoms with positive weights summing to 1.
class EmpiricalLaw {
public:
    EmpiricalLaw() = default;

    /// Equal weights.
    static EmpiricalLaw from_samples(std::vector<double> samples);
    /// Arbitrary positive weights; normalized internally. Equal atoms are merged.
    static EmpiricalLaw from_weighted(std::span<const double> atoms, std::span<const double> weights);
    /// First coordinate of atoms [begin, end) of a 1-d occupation measure.
    static EmpiricalLaw from_measure(const WeightedEmpiricalMeasure& m, std::size_t begin, std::size_t end);
    static EmpiricalLaw from_measure(const WeightedEmpiricalMeasure& m) {
        return from_measure(m, m.first_retained(), m.size());
    }
    static EmpiricalLaw dirac(double x) { return from_samples({x}); }

    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    const std::vector<double>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// P(X <= x).
    double cdf(double x) const;
    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * f(atoms_[i]);
        return s;
    }

private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
};

/// Uniform law on [a, b], used as a CDF model.
struct UniformLaw {
    double a = 0.0;
    double b = 1.0;
    double lower() const noexcept { return a; }
    double upper() const noexcept { return b; }
    double cdf(double x) const noexcept;
    double quantile(double u) const noexcept { return a + u * (b - a); }
    /// Antiderivative of the CDF, zero at the lower end of the support.
    double cdf_integral(double x) const noexcept;
};

/// Closed-form or tabulated QSD of a one-dimensional killed diffusion.
class ReferenceQsd {
public:
    enum class Kind { BmInterval, NumericTable };

    /// Brownian motion with scale s on (a, b): density proportional to
    /// sin(pi (x - a) / (b - a)), lambda* = s^2 pi^2 / (2 (b - a)^2).
    static ReferenceQsd bm_interval(double a, double b, double scale);

    /// Tabulated CDF on an increasing grid spanning [grid.front(), grid.back()],
    /// linear between nodes.
    static ReferenceQsd numeric_table(std::vector<double> grid, std::vector<double> cdf, double lambda);

    /// Principal left Dirichlet eigenpair of the generator of a 1-d SDE on
    /// (a, b), from a second-order finite-difference discretization with
    /// `intervals` cells solved by inverse iteration.
    static ReferenceQsd finite_difference(const SdeModel& model, double a, double b,
                                          std::size_t intervals = 4000);

    Kind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return lambda_; }
    double lower() const noexcept { return a_; }
    double upper() const noexcept { return b_; }

    double density(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
    double cdf_integral(double x) const;
    /// integral of f against the density, adaptive Gauss-Kronrod.
    double integrate(const std::function<double(double)>& f) const;
    /// Inverse-CDF draw.
    double sample(double u) const { return quantile(u); }

    std::string describe() const;

private:
    ReferenceQsd() = default;

    Kind kind_ = Kind::BmInterval;
    double a_ = 0.0;
    double b_ = 1.0;
    double lambda_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> cdf_;
    std::vector<double> cdf_int_;   // antiderivative of the CDF at nodes
};

/// W1 between two 1-d empirical laws: integral |F_a - F_b| over R.
double wasserstein1_1d(const EmpiricalLaw& a, const EmpiricalLaw& b);
/// W1 between an empirical law and a reference QSD, closed form per atom gap.
double wasserstein1_1d(const EmpiricalLaw& a, const ReferenceQsd& b);
double wasserstein1_1d(const EmpiricalLaw& a, const UniformLaw& b);
/// W1 between two reference laws, adaptive quadrature of |F_a - F_b|.
double wasserstein1_1d(const ReferenceQsd& a, const ReferenceQsd& b);
double wasserstein1_1d(const ReferenceQsd& a, const UniformLaw& b);

struct SlicedEstimate {
    double value = 0.0;
    double ci_half_width = 0.0;   // 95% normal interval over projections
    std::size_t projections = 0;
    /// Averaged 1-d projections never exceed the true W1 (lower-bound surrogate).
    static constexpr const char* kLabel = "sliced-W1 (lower-bound surrogate of W1)";
};

/// Mean over random unit directions u of W1(<u, a>, <u, b>). Equal-weight clouds.
SlicedEstimate wasserstein1_sliced(std::span<const Point> a, std::span<const Point> b,
                                   std::size_t n_projections, SequentialRng& rng);

/// Mass per bin [edges[i], edges[i+1]); values outside [edges.front(), edges.back()] are dropped.
std::vector<double> histogram(const EmpiricalLaw& law, std::span<const double> edges);

/// Bin edges with equal mass under the reference law.
std::vector<double> equal_mass_edges(const ReferenceQsd& ref, std::size_t bins);

struct GoodnessOfFit {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 0.0;
};

/// Pearson chi-squared test of counts against cell probabilities.
GoodnessOfFit chi_squared_test(std::span<const double> counts, std::span<const double> probabilities);

/// One-sample Kolmogorov-Smirnov test; `cdf` is the hypothesized law.
GoodnessOfFit kolmogorov_smirnov_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Running maximum of [beta_u - z]_- added to beta: the path kept above z.
std::vector<double> reflect_path_pos(std::span<const double> path, double z);
/// Running maximum of [beta_u - z]_+ subtracted from beta: the path kept below z.
std::vector<double> reflect_path_neg(std::span<const double> path, double z);

}  // namespace qsd
