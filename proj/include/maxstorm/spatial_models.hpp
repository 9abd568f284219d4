#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "maxstorm/geometry.hpp"
#include "maxstorm/point_process.hpp"
#include "maxstorm/random.hpp"

namespace maxstorm {

// Covariance matrix of the Gaussian storm shape of the Smith model.
class SmithParams {
 public:
  SmithParams(double sigma11, double sigma12, double sigma22);

  [[nodiscard]] double sigma11() const { return s11_; }
  [[nodiscard]] double sigma12() const { return s12_; }
  [[nodiscard]] double sigma22() const { return s22_; }
  [[nodiscard]] double det() const { return s11_ * s22_ - s12_ * s12_; }
  [[nodiscard]] Eigen::Matrix2d matrix() const;
  [[nodiscard]] Eigen::Matrix2d inverse() const;
  // Lower Cholesky factor L with L L' = Sigma.
  [[nodiscard]] Eigen::Matrix2d cholesky() const;
  // sqrt(dx' Sigma^-1 dx).
  [[nodiscard]] double mahalanobis(const Eigen::Vector2d& dx) const;
  // sup h_Sigma = 1 / (2 pi sqrt(det Sigma)).
  [[nodiscard]] double density_max() const;

 private:
  double s11_, s12_, s22_;
};

class SchlatherParams {
 public:
  SchlatherParams(double range, double smoothness);
  [[nodiscard]] double range() const { return c1_; }
  [[nodiscard]] double smoothness() const { return c2_; }

 private:
  double c1_, c2_;
};

class VmfParams {
 public:
  explicit VmfParams(double kappa);
  [[nodiscard]] double kappa() const { return kappa_; }

 private:
  double kappa_;
};

// One realization of a simple max-stable field at a finite site set.
template <class Site>
struct SpatialField {
  std::vector<Site> sites;
  std::vector<double> values;
  std::size_t storms = 0;             // storms drawn before the stopping rule fired
  std::vector<std::string> warnings;  // approximation diagnostics
};

using PlanarField = SpatialField<PlanarSite>;
using SphereField = SpatialField<SphereSite>;

// Bivariate Gaussian density with mean 0 and covariance Sigma.
[[nodiscard]] double gaussian_density_2d(const PlanarSite& x, const SmithParams& params);

struct SmithSimulationOptions {
  double tail_epsilon = 1e-6;  // Frechet mass lost per site through windowing
  std::size_t storm_cap = kDefaultStormCap;
};

// Buffer added around the sites' bounding box so that storms centred farther
// away carry less than `tail_epsilon` of any site's Frechet scale.
[[nodiscard]] double smith_buffer_radius(const SmithParams& params, double tail_epsilon);

[[nodiscard]] PlanarField simulate_smith(std::span<const PlanarSite> sites, const SmithParams& params,
                                         SeededStream& stream, const SmithSimulationOptions& options = {});

// rho(h) = exp(-(h / c1)^c2).
[[nodiscard]] double correlation_powered_exponential(double h, const SchlatherParams& params);

// Dense Cholesky sampler for a standard Gaussian field with powered
// exponential correlation. Duplicate sites share one latent value.
class GaussianFieldSampler {
 public:
  static constexpr std::size_t kMaxSites = 4000;

  GaussianFieldSampler(std::span<const PlanarSite> sites, const SchlatherParams& params);

  [[nodiscard]] std::size_t size() const { return site_index_.size(); }
  [[nodiscard]] double jitter() const { return jitter_; }
  // One standard Gaussian vector, one entry per input site.
  [[nodiscard]] std::vector<double> sample(SeededStream& stream) const;

 private:
  std::vector<std::size_t> site_index_;  // input site -> unique site
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

struct SchlatherSimulationOptions {
  std::size_t n_storms = 1000;
  double envelope = 4.0;  // assumed bound b_max on the Gaussian spectral process
};

[[nodiscard]] PlanarField simulate_schlather(std::span<const PlanarSite> sites, const SchlatherParams& params,
                                             SeededStream& stream, const SchlatherSimulationOptions& options = {});
[[nodiscard]] PlanarField simulate_schlather(const GaussianFieldSampler& sampler, std::span<const PlanarSite> sites,
                                             SeededStream& stream, const SchlatherSimulationOptions& options = {});

// kappa / sinh(kappa), with a Taylor branch below 1e-4.
[[nodiscard]] double kappa_over_sinh(double kappa);

// f(x; mu, kappa) = kappa / (4 pi sinh kappa) exp(kappa mu'x).
[[nodiscard]] double vmf_density(const SphereSite& x, const SphereSite& mu, const VmfParams& params);
[[nodiscard]] double vmf_density_max(const VmfParams& params);

struct VmfSimulationOptions {
  std::size_t storm_cap = kDefaultStormCap;
};

[[nodiscard]] SphereField simulate_vmf_field(std::span<const SphereSite> sites, const VmfParams& params,
                                             SeededStream& stream, const VmfSimulationOptions& options = {});

// Uniform point on the unit sphere.
[[nodiscard]] SphereSite sample_uniform_sphere(SeededStream& stream);

// Exponent function of a bivariate Smith field and its partial derivatives,
// h being the Mahalanobis distance between the two sites.
struct BivariateExponent {
  double value = 0.0;
  double d_z1 = 0.0;
  double d_z2 = 0.0;
  double d_z1z2 = 0.0;
};

inline constexpr double kCompleteDependenceH = 1e-8;

// Below kCompleteDependenceH the complete-dependence limit max(1/z1, 1/z2) is
// returned; its first partials are one-sided (the smaller z carries the full
// derivative, ties split it equally) and the mixed partial is 0.
[[nodiscard]] BivariateExponent smith_exponent_bivariate(double z1, double z2, double h);

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double max_rel_error = 1e-6;  // NumericalError above this estimated error
};

// Direct quadrature of int max_m h_Sigma(x_m - c) / z_m dc over R^2.
[[nodiscard]] double smith_exponent_numeric(std::span<const PlanarSite> sites, std::span<const double> z,
                                            const SmithParams& params, const QuadratureOptions& options = {});

// Evaluates the spatial exponent function V_{x_1..x_M}(z_1..z_M) of a
// spatial model, plus bivariate partials for pair densities.
class ExponentOracle {
 public:
  virtual ~ExponentOracle() = default;
  [[nodiscard]] virtual std::size_t max_dimension() const = 0;
  [[nodiscard]] virtual double value(std::span<const PlanarSite> sites, std::span<const double> z) const = 0;
  [[nodiscard]] virtual BivariateExponent bivariate(double z1, double z2, const PlanarSite& x1,
                                                    const PlanarSite& x2) const = 0;
};

// Closed form for M <= 2, quadrature for M <= 4.
class SmithExponentOracle final : public ExponentOracle {
 public:
  explicit SmithExponentOracle(SmithParams params) : params_(params) {}

  [[nodiscard]] std::size_t max_dimension() const override { return 4; }
  [[nodiscard]] double value(std::span<const PlanarSite> sites, std::span<const double> z) const override;
  [[nodiscard]] BivariateExponent bivariate(double z1, double z2, const PlanarSite& x1,
                                            const PlanarSite& x2) const override;
  [[nodiscard]] const SmithParams& params() const { return params_; }

 private:
  SmithParams params_;
};

// Standard normal cdf and pdf.
[[nodiscard]] double normal_cdf(double x);
[[nodiscard]] double normal_pdf(double x);

}  // namespace maxstorm
