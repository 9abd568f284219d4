#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "maxstorm/geometry.hpp"
#include "maxstorm/random.hpp"
#include "maxstorm/spatial_models.hpp"

namespace maxstorm {

// Temporal coefficient a in (0, 1) and drift tau of the planar recursion
// X(t, x) = max(a X(t-1, x - tau), (1 - a) Z(t, x)).
class MarkovParams {
 public:
  MarkovParams(double a, const Eigen::Vector2d& tau);

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] const Eigen::Vector2d& tau() const { return tau_; }
  // a^lag for real lags.
  [[nodiscard]] double decay(double lag) const;

 private:
  double a_;
  Eigen::Vector2d tau_;
};

// Spherical recursion X(t, x) = max(a X(t-1, R x), (1 - a) Z(t, x)).
class SphereMarkovParams {
 public:
  SphereMarkovParams(double a, RotationSpec rotation);

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] const RotationSpec& rotation() const { return rotation_; }

 private:
  double a_;
  RotationSpec rotation_;
};

// Temporal kernel g: exponential density nu e^{-nu t} (continuous time) or
// geometric weights (1 - phi) phi^t (discrete time). Both give a in (0, 1).
class TemporalKernelParams {
 public:
  enum class Mode { kExponentialRate, kGeometric };

  static TemporalKernelParams exponential_rate(double nu);
  static TemporalKernelParams geometric(double phi);

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double weight(double t) const;

 private:
  TemporalKernelParams(Mode mode, double parameter, double a) : mode_(mode), parameter_(parameter), a_(a) {}
  Mode mode_;
  double parameter_;
  double a_;
};

// Values on N dates x M sites, stored date-major: values[n * M + m].
template <class Site>
struct SpaceTimeField {
  std::vector<Site> sites;
  std::vector<std::int64_t> dates;
  std::vector<double> values;

  [[nodiscard]] std::size_t n_sites() const { return sites.size(); }
  [[nodiscard]] std::size_t n_dates() const { return dates.size(); }
  [[nodiscard]] double at(std::size_t date_index, std::size_t site_index) const {
    return values[date_index * sites.size() + site_index];
  }
  // Throws ValidationError when shapes, ordering or positivity are violated.
  void validate() const;
};

using PlanarSpaceTimeField = SpaceTimeField<PlanarSite>;
using SphereSpaceTimeField = SpaceTimeField<SphereSite>;

using PlanarInnovation = std::variant<SmithParams, SchlatherParams>;

struct MarkovSimulationOptions {
  std::int64_t first_date = 1;
  bool keep_trace = false;
  SmithSimulationOptions smith;
  SchlatherSimulationOptions schlather;
  VmfSimulationOptions vmf;
};

// Per-date state on the enlarged site set; entry k * M + g is grid site g
// moved back k steps along the drift (or rotation).
template <class Site>
struct DateTrace {
  std::vector<Site> sites;
  std::vector<double> state;        // X at this date
  std::vector<double> innovations;  // Z at this date
};

template <class Site>
struct MarkovSimulation {
  SpaceTimeField<Site> field;
  std::size_t storms = 0;
  std::vector<std::string> warnings;
  std::vector<DateTrace<Site>> trace;  // filled when keep_trace is set
};

[[nodiscard]] MarkovSimulation<PlanarSite> simulate_markov_planar(std::span<const PlanarSite> grid,
                                                                  std::size_t n_dates,
                                                                  const PlanarInnovation& spatial,
                                                                  const MarkovParams& markov, SeededStream& stream,
                                                                  const MarkovSimulationOptions& options = {});

[[nodiscard]] MarkovSimulation<SphereSite> simulate_markov_sphere(std::span<const SphereSite> mesh,
                                                                  std::size_t n_dates, const VmfParams& spatial,
                                                                  const SphereMarkovParams& markov,
                                                                  SeededStream& stream,
                                                                  const MarkovSimulationOptions& options = {});

struct MovingMaxResult {
  PlanarSpaceTimeField field;
  std::size_t truncation = 0;
  double truncated_mass = 0.0;  // a^{J+1}, Frechet mass of the discarded tail
  std::size_t storms = 0;
};

// X(t, x) = max_{j <= J} a^j (1 - a) Z(t - j, x - j tau) with iid Z.
[[nodiscard]] MovingMaxResult truncated_moving_max(std::span<const PlanarSite> sites, std::size_t n_dates,
                                                   const PlanarInnovation& spatial, const MarkovParams& markov,
                                                   std::size_t truncation, SeededStream& stream,
                                                   const MarkovSimulationOptions& options = {});

struct SpaceTimePoint {
  double date = 0.0;
  PlanarSite site;
};

// -log P(X(t_1, x_1) <= z_1, ..., X(t_M, x_M) <= z_M) for dates sorted
// non-decreasingly.
[[nodiscard]] double finite_dim_neg_log_cdf(std::span<const SpaceTimePoint> points, std::span<const double> z,
                                            const MarkovParams& markov, const ExponentOracle& exponent);

}  // namespace maxstorm
