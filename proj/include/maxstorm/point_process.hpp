#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maxstorm/geometry.hpp"
#include "maxstorm/random.hpp"

namespace maxstorm {

inline constexpr std::size_t kDefaultStormCap = 10'000'000;

// Points U_i = 1 / P_i of a Poisson process on (0, inf) with intensity
// u^-2 du, in decreasing order; P_i are partial sums of unit exponentials.
struct StormSequence {
  std::vector<double> intensities;
  [[nodiscard]] std::size_t count() const { return intensities.size(); }
};

// Lazy generator behind the storm simulators: yields scale / P_i one at a
// time and throws ResourceError once `cap` storms have been produced.
class StormIntensityGenerator {
 public:
  StormIntensityGenerator(SeededStream& stream, double scale = 1.0,
                          std::size_t cap = kDefaultStormCap);

  double next();
  [[nodiscard]] std::size_t produced() const { return produced_; }

 private:
  SeededStream& stream_;
  double scale_;
  std::size_t cap_;
  std::size_t produced_ = 0;
  double partial_sum_ = 0.0;
};

// All U_i >= stop_threshold. The count of retained storms is Poisson with
// mean 1 / stop_threshold.
[[nodiscard]] StormSequence sample_storm_intensities(SeededStream& stream, double stop_threshold,
                                                     std::size_t cap = kDefaultStormCap);

struct Rectangle {
  PlanarSite lower;
  PlanarSite upper;

  [[nodiscard]] double width() const { return upper.x1 - lower.x1; }
  [[nodiscard]] double height() const { return upper.x2 - lower.x2; }
  [[nodiscard]] double area() const { return width() * height(); }
  [[nodiscard]] bool contains(const PlanarSite& p) const {
    return p.x1 >= lower.x1 && p.x1 <= upper.x1 && p.x2 >= lower.x2 && p.x2 <= upper.x2;
  }
};

struct PlanarPoissonSample {
  std::vector<PlanarSite> points;
  Rectangle window;
};

// Homogeneous Poisson process of the given rate on an axis-aligned window.
[[nodiscard]] PlanarPoissonSample sample_planar_poisson(SeededStream& stream, const Rectangle& window,
                                                        double rate);

// Inclusive integer interval; empty when last < first.
struct IntegerRange {
  std::int64_t first = 0;
  std::int64_t last = -1;
  [[nodiscard]] bool empty() const { return last < first; }
  [[nodiscard]] std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>(last - first + 1);
  }
};

// Homogeneous Poisson process on Z: one iid Poisson(1) count per integer.
struct IntegerPoissonSample {
  IntegerRange range;
  std::vector<std::uint32_t> counts;

  [[nodiscard]] std::uint32_t count_at(std::int64_t k) const;
  [[nodiscard]] std::uint64_t total() const;
};

[[nodiscard]] IntegerPoissonSample sample_integer_poisson(SeededStream& stream, const IntegerRange& range);

// Poisson(mean) draw: inversion for mean <= 30, otherwise a sum of independent
// inversion draws of mean <= 30 (exact by additivity).
[[nodiscard]] std::uint64_t sample_poisson(SeededStream& stream, double mean);

}  // namespace maxstorm
