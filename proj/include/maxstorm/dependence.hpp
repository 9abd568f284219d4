#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "maxstorm/spacetime_markov.hpp"
#include "maxstorm/spatial_models.hpp"

namespace maxstorm {

// Time lag l = t2 - t1 and space lag h = x2 - x1.
struct LagSpec {
  double time_lag = 0.0;
  Eigen::Vector2d space_lag = Eigen::Vector2d::Zero();
};

// Time lag and great-circle angle (radians) between the two sphere sites.
struct SphereLagSpec {
  double time_lag = 0.0;
  double angle = 0.0;
};

// theta(l, h) = V_{x1, x2 - l tau}(1, a^-l) + 1 - a^l for the Smith model.
// Negative time lags use theta(-l, -h) = theta(l, h).
[[nodiscard]] double extremal_coefficient(const LagSpec& lag, const SmithParams& spatial, const MarkovParams& markov);

// nu = (theta - 1) / (2 (theta + 1)).
[[nodiscard]] double madogram_from_theta(double theta);
[[nodiscard]] double f_madogram(const LagSpec& lag, const SmithParams& spatial, const MarkovParams& markov);

// theta = (1 + 2 nu) / (1 - 2 nu), nu in [0, 1/2).
[[nodiscard]] double madogram_to_theta(double nu);

struct MadogramEstimate {
  double nu_hat = 0.0;
  std::size_t n_pairs = 0;
};

struct MadogramOptions {
  // Lags match when every component is within this distance of the request.
  // 0 means exact matching (up to 1e-9 to absorb decimal round-off).
  double binning_radius = 0.0;
};

// Mean of |Phi_1(X(t2, x2)) - Phi_1(X(t1, x1))| / 2 over all pairs of every
// field whose date and site differences equal the lag; Phi_1(z) = e^{-1/z}.
[[nodiscard]] MadogramEstimate empirical_madogram(std::span<const PlanarSpaceTimeField> fields, const LagSpec& lag,
                                                  const MadogramOptions& options = {});
[[nodiscard]] MadogramEstimate empirical_madogram(const PlanarSpaceTimeField& field, const LagSpec& lag,
                                                  const MadogramOptions& options = {});
[[nodiscard]] MadogramEstimate empirical_madogram(std::span<const SphereSpaceTimeField> fields,
                                                  const SphereLagSpec& lag, const MadogramOptions& options = {});

// Standard Frechet cdf e^{-1/z}.
[[nodiscard]] double frechet_cdf(double z);

}  // namespace maxstorm
