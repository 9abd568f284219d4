#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "maxstorm/optimizer.hpp"
#include "maxstorm/spacetime_markov.hpp"
#include "maxstorm/spatial_models.hpp"

namespace maxstorm {

// (sigma11, sigma12, sigma22, a, tau1, tau2) of the planar Smith max-AR model.
struct ThetaVector {
  double sigma11 = 1.0;
  double sigma12 = 0.0;
  double sigma22 = 1.0;
  double a = 0.5;
  double tau1 = 0.0;
  double tau2 = 0.0;

  // Throws ValidationError unless Sigma is positive definite and a in (0, 1).
  void validate() const;
  [[nodiscard]] SmithParams smith() const { return {sigma11, sigma12, sigma22}; }
  [[nodiscard]] MarkovParams markov() const { return {a, Eigen::Vector2d(tau1, tau2)}; }
  [[nodiscard]] Eigen::Matrix<double, 6, 1> as_vector() const;
  static ThetaVector from_vector(const Eigen::Matrix<double, 6, 1>& v);
};

// Temporal weights omega_{i,j} (N x N) and spatial weights omega_{k,l}
// (M x M); an empty matrix means all ones.
struct PairWeights {
  Eigen::MatrixXd temporal;
  Eigen::MatrixXd spatial;

  [[nodiscard]] double time_weight(std::size_t i, std::size_t j) const {
    return temporal.size() == 0 ? 1.0 : temporal(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  [[nodiscard]] double space_weight(std::size_t k, std::size_t l) const {
    return spatial.size() == 0 ? 1.0 : spatial(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  }

  // Zero weight beyond the given date lag / Euclidean site distance.
  static PairWeights cutoff(const PlanarSpaceTimeField& data, std::optional<double> max_time_lag,
                            std::optional<double> max_distance);
  // Throws ValidationError on negative weights, wrong shapes, or all-zero products.
  void validate(std::size_t n_dates, std::size_t n_sites) const;
};

inline constexpr double kDensityFloor = 1e-300;

// Bivariate density of (X(t1, x1), X(t2, x2)) for the Smith max-AR model.
// Points are swapped when t1 > t2. Throws ValidationError for a same-date,
// same-site pair (no density there).
[[nodiscard]] double bivariate_density(double z1, double z2, double t1, double t2, const PlanarSite& x1,
                                       const PlanarSite& x2, const ThetaVector& theta);

// Same density assembled from the exponent oracle's partial derivatives of
// V(z1, z2 a^-l); for any spatial model with a bivariate oracle.
[[nodiscard]] double bivariate_density_from_exponent(double z1, double z2, double t1, double t2,
                                                     const PlanarSite& x1, const PlanarSite& x2,
                                                     const MarkovParams& markov, const ExponentOracle& exponent);

struct LoglikOptions {
  std::size_t threads = 1;
};

struct LoglikResult {
  double value = 0.0;
  std::size_t n_terms = 0;    // pairs with positive weight
  std::size_t n_floored = 0;  // densities raised to kDensityFloor before the log
};

// Sum over i < j (dates) and k < l (sites) of
// omega_{i,j} omega_{k,l} log f_{(t_i, x_k), (t_j, x_l)}(z_{i,k}, z_{j,l}).
// Block sums per date i are reduced in index order, so the value does not
// depend on the thread count.
[[nodiscard]] LoglikResult pairwise_loglik_detailed(const PlanarSpaceTimeField& data, const ThetaVector& theta,
                                                    const PairWeights& weights = {},
                                                    const LoglikOptions& options = {});
[[nodiscard]] double pairwise_loglik(const PlanarSpaceTimeField& data, const ThetaVector& theta,
                                     const PairWeights& weights = {}, const LoglikOptions& options = {});

// Same-date pairs only (N * C(M, 2) terms) with the spatial Smith pair density;
// only the spatial weights apply.
[[nodiscard]] LoglikResult spatial_pairwise_loglik_detailed(const PlanarSpaceTimeField& data,
                                                            const SmithParams& sigma,
                                                            const PairWeights& weights = {},
                                                            const LoglikOptions& options = {});
[[nodiscard]] double spatial_pairwise_loglik(const PlanarSpaceTimeField& data, const SmithParams& sigma,
                                             const PairWeights& weights = {}, const LoglikOptions& options = {});

struct FitOptions {
  NelderMeadOptions optimizer;
  PairWeights weights;
  std::size_t threads = 1;
};

struct FitReport {
  ThetaVector theta_hat;
  double loglik = 0.0;  // spatio-temporal pairwise log-likelihood at theta_hat
  std::size_t n_pairs = 0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  int scheme = 1;
  double spatial_loglik = 0.0;  // stage-1 objective (scheme 1 only)
};

// Scheme 1: Sigma from the spatial pairwise likelihood, then (a, tau) from the
// spatio-temporal one with Sigma fixed.
[[nodiscard]] FitReport fit_scheme1(const PlanarSpaceTimeField& data, const ThetaVector& init,
                                    const FitOptions& options = {});
// Scheme 2: all six parameters jointly.
[[nodiscard]] FitReport fit_scheme2(const PlanarSpaceTimeField& data, const ThetaVector& init,
                                    const FitOptions& options = {});

// Log-Cholesky coordinates (log l11, l21, log l22) of Sigma = L L'.
[[nodiscard]] Eigen::Vector3d sigma_to_log_cholesky(const SmithParams& sigma);
[[nodiscard]] SmithParams log_cholesky_to_sigma(const Eigen::Vector3d& p);

}  // namespace maxstorm
