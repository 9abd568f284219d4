#include "maxstorm/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "maxstorm/errors.hpp"

namespace maxstorm {

namespace {

constexpr double kExactMatch = 1e-9;

double match_radius(const MadogramOptions& options) { return std::max(options.binning_radius, kExactMatch); }

[[noreturn]] void no_pairs(const std::set<double>& time_lags, const std::string& what) {
  std::ostringstream os;
  os << "no observation pairs match " << what << "; available time lags:";
  std::size_t shown = 0;
  for (double l : time_lags) {
    if (++shown > 40) {
      os << " ...";
      break;
    }
    os << ' ' << l;
  }
  throw ValidationError(os.str());
}

// Calls body(i, j) for every date pair with |t_j - t_i - lag| <= radius;
// dates are strictly increasing.
template <class Body>
void for_each_date_pair(const std::vector<std::int64_t>& dates, double lag, double radius, Body body) {
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const double lo = static_cast<double>(dates[i]) + lag - radius;
    auto it = std::lower_bound(dates.begin(), dates.end(), lo,
                               [](std::int64_t d, double v) { return static_cast<double>(d) < v; });
    for (; it != dates.end(); ++it) {
      const double dl = static_cast<double>(*it - dates[i]);
      if (dl - lag > radius) break;
      body(i, static_cast<std::size_t>(it - dates.begin()));
    }
  }
}

template <class Field>
std::set<double> available_lags(std::span<const Field> fields) {
  std::set<double> lags;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < f.n_dates(); ++i) {
      for (std::size_t j = 0; j < f.n_dates(); ++j) lags.insert(static_cast<double>(f.dates[j] - f.dates[i]));
    }
  }
  return lags;
}

}  // namespace

double frechet_cdf(double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; }

double extremal_coefficient(const LagSpec& lag, const SmithParams& spatial, const MarkovParams& markov) {
  double l = lag.time_lag;
  Eigen::Vector2d h = lag.space_lag;
  if (l < 0.0) {
    l = -l;
    h = -h;
  }
  const double decay = markov.decay(l);
  const double dist = spatial.mahalanobis(h - l * markov.tau());
  const double v = smith_exponent_bivariate(1.0, 1.0 / decay, dist).value;
  return std::clamp(v + 1.0 - decay, 1.0, 2.0);
}

double madogram_from_theta(double theta) { return 0.5 * (theta - 1.0) / (theta + 1.0); }

double f_madogram(const LagSpec& lag, const SmithParams& spatial, const MarkovParams& markov) {
  return madogram_from_theta(extremal_coefficient(lag, spatial, markov));
}

double madogram_to_theta(double nu) {
  if (!(nu >= 0.0 && nu < 0.5)) throw ValidationError("madogram must lie in [0, 1/2)");
  return (1.0 + 2.0 * nu) / (1.0 - 2.0 * nu);
}

MadogramEstimate empirical_madogram(std::span<const PlanarSpaceTimeField> fields, const LagSpec& lag,
                                    const MadogramOptions& options) {
  const double radius = match_radius(options);
  double sum = 0.0;
  MadogramEstimate out;
  for (const auto& f : fields) {
    const std::size_t m = f.n_sites();
    std::vector<std::pair<std::size_t, std::size_t>> site_pairs;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < m; ++q) {
        const Eigen::Vector2d d = f.sites[q].vec() - f.sites[k].vec();
        if ((d - lag.space_lag).cwiseAbs().maxCoeff() <= radius) site_pairs.emplace_back(k, q);
      }
    }
    for_each_date_pair(f.dates, lag.time_lag, radius, [&](std::size_t i, std::size_t j) {
      for (const auto& [k, q] : site_pairs) {
        sum += 0.5 * std::abs(frechet_cdf(f.at(j, q)) - frechet_cdf(f.at(i, k)));
        ++out.n_pairs;
      }
    });
  }
  if (out.n_pairs == 0) {
    std::ostringstream what;
    what << "lag (" << lag.time_lag << ", " << lag.space_lag.x() << ", " << lag.space_lag.y() << ")";
    no_pairs(available_lags(fields), what.str());
  }
  out.nu_hat = sum / static_cast<double>(out.n_pairs);
  return out;
}

MadogramEstimate empirical_madogram(const PlanarSpaceTimeField& field, const LagSpec& lag,
                                    const MadogramOptions& options) {
  return empirical_madogram(std::span<const PlanarSpaceTimeField>(&field, 1), lag, options);
}

MadogramEstimate empirical_madogram(std::span<const SphereSpaceTimeField> fields, const SphereLagSpec& lag,
                                    const MadogramOptions& options) {
  const double radius = match_radius(options);
  double sum = 0.0;
  MadogramEstimate out;
  for (const auto& f : fields) {
    const std::size_t m = f.n_sites();
    std::vector<std::pair<std::size_t, std::size_t>> site_pairs;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < m; ++q) {
        const double angle = std::acos(std::clamp(f.sites[k].dot(f.sites[q]), -1.0, 1.0));
        if (std::abs(angle - lag.angle) <= radius) site_pairs.emplace_back(k, q);
      }
    }
    for_each_date_pair(f.dates, lag.time_lag, radius, [&](std::size_t i, std::size_t j) {
      for (const auto& [k, q] : site_pairs) {
        sum += 0.5 * std::abs(frechet_cdf(f.at(j, q)) - frechet_cdf(f.at(i, k)));
        ++out.n_pairs;
      }
    });
  }
  if (out.n_pairs == 0) {
    std::ostringstream what;
    what << "lag (" << lag.time_lag << ", angle " << lag.angle << ")";
    no_pairs(available_lags(fields), what.str());
  }
  out.nu_hat = sum / static_cast<double>(out.n_pairs);
  return out;
}

}  // namespace maxstorm
