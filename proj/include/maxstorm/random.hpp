#pragma once

#include <cstdint>
#include <random>

namespace maxstorm {

// Deterministic random stream keyed by (seed, stream id). Two streams with the
// same key produce the same draws bit-for-bit on one build. A stream is a
// single-consumer object: never share one across threads.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  // Independent sub-stream; child(k) is a pure function of (seed, id, k).
  [[nodiscard]] SeededStream child(std::uint64_t k) const;

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Exp(1) by inversion.
  double exponential();
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace maxstorm
