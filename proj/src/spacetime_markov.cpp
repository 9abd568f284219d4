#include "maxstorm/spacetime_markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "maxstorm/errors.hpp"

namespace maxstorm {

MarkovParams::MarkovParams(double a, const Eigen::Vector2d& tau) : a_(a), tau_(tau) {
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("temporal coefficient a must lie in (0, 1)");
  if (!tau.allFinite()) throw ValidationError("drift tau must be finite");
}

double MarkovParams::decay(double lag) const { return std::pow(a_, lag); }

SphereMarkovParams::SphereMarkovParams(double a, RotationSpec rotation) : a_(a), rotation_(rotation) {
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("temporal coefficient a must lie in (0, 1)");
}

TemporalKernelParams TemporalKernelParams::exponential_rate(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("exponential rate nu must be positive");
  return {Mode::kExponentialRate, nu, std::exp(-nu)};
}

TemporalKernelParams TemporalKernelParams::geometric(double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw ValidationError("geometric parameter phi must lie in (0, 1)");
  return {Mode::kGeometric, phi, phi};
}

double TemporalKernelParams::weight(double t) const {
  if (t < 0.0) return 0.0;
  if (mode_ == Mode::kExponentialRate) return parameter_ * std::exp(-parameter_ * t);
  return (1.0 - parameter_) * std::pow(parameter_, std::floor(t));
}

template <class Site>
void SpaceTimeField<Site>::validate() const {
  if (values.size() != sites.size() * dates.size()) throw ValidationError("field values do not match N x M");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] <= dates[i - 1]) throw ValidationError("field dates must be strictly increasing");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("field values must be positive and finite");
  }
}

template struct SpaceTimeField<PlanarSite>;
template struct SpaceTimeField<SphereSite>;

namespace {

std::array<double, 3> site_key(const PlanarSite& s) { return {s.x1, s.x2, 0.0}; }
std::array<double, 3> site_key(const SphereSite& s) { return {s.vec().x(), s.vec().y(), s.vec().z()}; }

// Distinct sites and, for every input site, its index among them.
template <class Site>
std::pair<std::vector<Site>, std::vector<std::size_t>> distinct_sites(std::span<const Site> sites) {
  std::map<std::array<double, 3>, std::size_t> seen;
  std::vector<Site> distinct;
  std::vector<std::size_t> index;
  index.reserve(sites.size());
  for (const auto& s : sites) {
    auto [it, inserted] = seen.try_emplace(site_key(s), distinct.size());
    if (inserted) distinct.push_back(s);
    index.push_back(it->second);
  }
  return {std::move(distinct), std::move(index)};
}

struct Innovation {
  std::vector<double> values;
  std::size_t storms = 0;
  std::vector<std::string> warnings;
};

Innovation draw_innovation(std::span<const PlanarSite> sites, const PlanarInnovation& spatial, SeededStream& stream,
                           const MarkovSimulationOptions& options) {
  auto [distinct, index] = distinct_sites(sites);
  PlanarField z;
  if (const auto* smith = std::get_if<SmithParams>(&spatial)) {
    z = simulate_smith(distinct, *smith, stream, options.smith);
  } else {
    const auto& schlather = std::get<SchlatherParams>(spatial);
    try {
      const GaussianFieldSampler sampler(distinct, schlather);
      z = simulate_schlather(sampler, distinct, stream, options.schlather);
    } catch (const ResourceError& e) {
      throw ResourceError(std::string(e.what()) +
                          "; reduce the number of dates or use Smith innovations");
    }
  }
  Innovation out{std::vector<double>(sites.size()), z.storms, std::move(z.warnings)};
  for (std::size_t k = 0; k < sites.size(); ++k) out.values[k] = z.values[index[k]];
  return out;
}

Innovation draw_innovation(std::span<const SphereSite> sites, const VmfParams& spatial, SeededStream& stream,
                           const MarkovSimulationOptions& options) {
  auto [distinct, index] = distinct_sites(sites);
  const SphereField z = simulate_vmf_field(distinct, spatial, stream, options.vmf);
  Innovation out{std::vector<double>(sites.size()), z.storms, {}};
  for (std::size_t k = 0; k < sites.size(); ++k) out.values[k] = z.values[index[k]];
  return out;
}

// Shared recursion. `preimage(k, g)` is grid site g carried back k steps.
template <class Site, class Spatial, class Preimage>
MarkovSimulation<Site> run_recursion(std::span<const Site> grid, std::size_t n_dates, const Spatial& spatial,
                                     double a, Preimage preimage, SeededStream& stream,
                                     const MarkovSimulationOptions& options) {
  if (grid.empty()) throw ValidationError("simulation grid is empty");
  if (n_dates == 0) throw ValidationError("n_dates must be >= 1");
  const std::size_t m = grid.size();

  MarkovSimulation<Site> out;
  out.field.sites.assign(grid.begin(), grid.end());
  out.field.values.resize(n_dates * m);
  for (std::size_t d = 0; d < n_dates; ++d) out.field.dates.push_back(options.first_date + static_cast<std::int64_t>(d));

  std::vector<double> previous;
  for (std::size_t d = 0; d < n_dates; ++d) {
    // Enlarged site set at date d: grid carried back k = 0..N-1-d steps, so
    // every site read at date d+1 is present without interpolation.
    const std::size_t depth = n_dates - d;
    std::vector<Site> sites;
    sites.reserve(depth * m);
    for (std::size_t k = 0; k < depth; ++k) {
      for (std::size_t g = 0; g < m; ++g) sites.push_back(preimage(k, g));
    }
    SeededStream date_stream = stream.child(d);
    Innovation z = draw_innovation(std::span<const Site>(sites), spatial, date_stream, options);
    out.storms += z.storms;
    for (auto& w : z.warnings) {
      if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
    }

    std::vector<double> state(sites.size());
    if (d == 0) {
      // Stationary start: the spatial law of X(t, .) is that of Z.
      state = z.values;
    } else {
      for (std::size_t k = 0; k < depth; ++k) {
        for (std::size_t g = 0; g < m; ++g) {
          const std::size_t i = k * m + g;
          state[i] = std::max(a * previous[(k + 1) * m + g], (1.0 - a) * z.values[i]);
        }
      }
    }
    std::copy(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(m),
              out.field.values.begin() + static_cast<std::ptrdiff_t>(d * m));
    if (options.keep_trace) out.trace.push_back({sites, state, z.values});
    previous = std::move(state);
  }
  return out;
}

}  // namespace

MarkovSimulation<PlanarSite> simulate_markov_planar(std::span<const PlanarSite> grid, std::size_t n_dates,
                                                    const PlanarInnovation& spatial, const MarkovParams& markov,
                                                    SeededStream& stream, const MarkovSimulationOptions& options) {
  auto preimage = [&](std::size_t k, std::size_t g) {
    return translate(grid[g], static_cast<double>(k), markov.tau());
  };
  return run_recursion<PlanarSite>(grid, n_dates, spatial, markov.a(), preimage, stream, options);
}

MarkovSimulation<SphereSite> simulate_markov_sphere(std::span<const SphereSite> mesh, std::size_t n_dates,
                                                    const VmfParams& spatial, const SphereMarkovParams& markov,
                                                    SeededStream& stream, const MarkovSimulationOptions& options) {
  std::vector<Eigen::Matrix3d> powers;
  for (std::size_t k = 0; k < std::max<std::size_t>(n_dates, 1); ++k) {
    powers.push_back(rotation_matrix(markov.rotation(), static_cast<double>(k)));
  }
  auto preimage = [&](std::size_t k, std::size_t g) { return rotate(powers[k], mesh[g]); };
  return run_recursion<SphereSite>(mesh, n_dates, spatial, markov.a(), preimage, stream, options);
}

MovingMaxResult truncated_moving_max(std::span<const PlanarSite> sites, std::size_t n_dates,
                                     const PlanarInnovation& spatial, const MarkovParams& markov,
                                     std::size_t truncation, SeededStream& stream,
                                     const MarkovSimulationOptions& options) {
  if (sites.empty()) throw ValidationError("moving max needs at least one site");
  if (n_dates == 0) throw ValidationError("n_dates must be >= 1");
  const std::size_t m = sites.size();
  const auto n = static_cast<std::int64_t>(n_dates);
  const auto jmax = static_cast<std::int64_t>(truncation);
  const double a = markov.a();

  MovingMaxResult out;
  out.truncation = truncation;
  out.truncated_mass = std::pow(a, static_cast<double>(truncation + 1));
  out.field.sites.assign(sites.begin(), sites.end());
  out.field.values.assign(n_dates * m, 0.0);
  for (std::int64_t d = 0; d < n; ++d) out.field.dates.push_back(options.first_date + d);

  // One innovation field per source date s in [-J, N-1], evaluated at every
  // x - j tau it feeds (date d = s + j).
  for (std::int64_t s = -jmax; s < n; ++s) {
    std::vector<PlanarSite> points;
    std::vector<std::pair<std::int64_t, std::int64_t>> targets;  // (d, j)
    for (std::int64_t d = std::max<std::int64_t>(s, 0); d <= std::min(n - 1, s + jmax); ++d) {
      const std::int64_t j = d - s;
      targets.emplace_back(d, j);
      for (std::size_t g = 0; g < m; ++g) points.push_back(translate(sites[g], static_cast<double>(j), markov.tau()));
    }
    SeededStream source = stream.child(static_cast<std::uint64_t>(s + jmax));
    const Innovation z = draw_innovation(std::span<const PlanarSite>(points), spatial, source, options);
    out.storms += z.storms;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto [d, j] = targets[t];
      const double weight = std::pow(a, static_cast<double>(j)) * (1.0 - a);
      for (std::size_t g = 0; g < m; ++g) {
        double& cell = out.field.values[static_cast<std::size_t>(d) * m + g];
        cell = std::max(cell, weight * z.values[t * m + g]);
      }
    }
  }
  return out;
}

double finite_dim_neg_log_cdf(std::span<const SpaceTimePoint> points, std::span<const double> z,
                              const MarkovParams& markov, const ExponentOracle& exponent) {
  const std::size_t m = points.size();
  if (m == 0) throw ValidationError("at least one point required");
  if (z.size() != m) throw ValidationError("one threshold per point required");
  for (std::size_t i = 1; i < m; ++i) {
    if (points[i].date < points[i - 1].date) throw ValidationError("dates must be sorted non-decreasingly");
  }
  for (double zi : z) {
    if (!(zi > 0.0)) throw ValidationError("thresholds must be positive");
  }
  if (m > exponent.max_dimension()) {
    std::ostringstream os;
    os << "exponent oracle supports at most " << exponent.max_dimension() << " points, got " << m;
    throw CapabilityError(os.str());
  }
  if (m == 1) return 1.0 / z[0];

  // Block starting at point `first`: all later points moved back to the
  // first date along the drift, thresholds inflated by a^{-lag}.
  auto block = [&](std::size_t first) {
    std::vector<PlanarSite> sites;
    std::vector<double> zs;
    for (std::size_t i = first; i < m; ++i) {
      const double lag = points[i].date - points[first].date;
      sites.push_back(translate(points[i].site, lag, markov.tau()));
      zs.push_back(z[i] / markov.decay(lag));
    }
    return exponent.value(sites, zs);
  };

  double total = block(0);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double w = 1.0 - markov.decay(points[i].date - points[i - 1].date);
    if (w != 0.0) total += w * block(i);
  }
  total += (1.0 - markov.decay(points[m - 1].date - points[m - 2].date)) / z[m - 1];
  return total;
}

}  // namespace maxstorm
