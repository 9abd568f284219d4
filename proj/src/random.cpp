#include "maxstorm/random.hpp"

#include <cmath>

namespace maxstorm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream_id ^ 0x6a09e667f3bcc909ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SeededStream::SeededStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

SeededStream SeededStream::child(std::uint64_t k) const {
  return SeededStream(seed_, splitmix64(stream_id_ * 0x9e3779b97f4a7c15ULL + k + 1));
}

double SeededStream::uniform() {
  // 53 random bits mapped to the midpoints of a 2^-53 grid, never 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double SeededStream::exponential() { return -std::log(uniform()); }

double SeededStream::normal() { return normal_(engine_); }

}  // namespace maxstorm
