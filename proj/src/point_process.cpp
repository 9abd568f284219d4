#include "maxstorm/point_process.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "maxstorm/errors.hpp"

namespace maxstorm {

StormIntensityGenerator::StormIntensityGenerator(SeededStream& stream, double scale, std::size_t cap)
    : stream_(stream), scale_(scale), cap_(cap) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("storm scale must be positive");
}

double StormIntensityGenerator::next() {
  if (produced_ >= cap_) {
    std::ostringstream os;
    os << "storm cap of " << cap_ << " exhausted";
    throw ResourceError(os.str());
  }
  ++produced_;
  partial_sum_ += stream_.exponential();
  return scale_ / partial_sum_;
}

StormSequence sample_storm_intensities(SeededStream& stream, double stop_threshold, std::size_t cap) {
  if (!(stop_threshold > 0.0)) throw ValidationError("stop_threshold must be positive");
  // Expected count is 1 / stop_threshold; refuse up front when that alone
  // is far beyond the cap.
  if (1.0 / stop_threshold > static_cast<double>(cap)) {
    std::ostringstream os;
    os << "stop_threshold " << stop_threshold << " needs ~" << 1.0 / stop_threshold
       << " storms, above the cap of " << cap;
    throw ResourceError(os.str());
  }
  StormSequence out;
  StormIntensityGenerator gen(stream, 1.0, cap + 1);
  for (;;) {
    const double u = gen.next();
    if (u < stop_threshold) break;
    if (out.intensities.size() == cap) {
      std::ostringstream os;
      os << "storm cap of " << cap << " exhausted";
      throw ResourceError(os.str());
    }
    out.intensities.push_back(u);
  }
  return out;
}

PlanarPoissonSample sample_planar_poisson(SeededStream& stream, const Rectangle& window, double rate) {
  if (!(window.width() > 0.0) || !(window.height() > 0.0)) {
    throw ValidationError("planar Poisson window has zero area");
  }
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw ValidationError("rate must be non-negative");
  PlanarPoissonSample out{{}, window};
  const std::uint64_t n = sample_poisson(stream, rate * window.area());
  out.points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double a = stream.uniform(window.lower.x1, window.upper.x1);
    const double b = stream.uniform(window.lower.x2, window.upper.x2);
    out.points.emplace_back(a, b);
  }
  return out;
}

std::uint32_t IntegerPoissonSample::count_at(std::int64_t k) const {
  if (k < range.first || k > range.last) throw ValidationError("integer outside sampled range");
  return counts[static_cast<std::size_t>(k - range.first)];
}

std::uint64_t IntegerPoissonSample::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

IntegerPoissonSample sample_integer_poisson(SeededStream& stream, const IntegerRange& range) {
  IntegerPoissonSample out{range, {}};
  out.counts.reserve(range.size());
  for (std::size_t i = 0; i < range.size(); ++i) {
    out.counts.push_back(static_cast<std::uint32_t>(sample_poisson(stream, 1.0)));
  }
  return out;
}

namespace {

std::uint64_t poisson_inversion(SeededStream& stream, double mean) {
  const double u = stream.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // Upper guard: beyond mean + 40 sqrt(mean) + 40 the remaining mass is below
  // double resolution.
  const double guard = mean + 40.0 * std::sqrt(mean) + 40.0;
  while (u > cdf && static_cast<double>(k) < guard) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

std::uint64_t sample_poisson(SeededStream& stream, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("Poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  constexpr double kChunk = 30.0;
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > kChunk) {
    total += poisson_inversion(stream, kChunk);
    remaining -= kChunk;
  }
  return total + poisson_inversion(stream, remaining);
}

}  // namespace maxstorm
