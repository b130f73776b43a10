#pragma once

#include <cstdint>

namespace idmauc {

// SplitMix64: tiny, fast, and seedable with any 64-bit value. Good enough
// statistically for Monte-Carlo draws and trivially reproducible across
// platforms, which is what the simulator needs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1): safe under log() and never exactly 0
  // or 1, so inverse-transform event times stay positive and finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Statistically independent stream for one (seed, index) pair: the draws of
// subject i never depend on how many draws other subjects consumed, so
// datasets are reproducible under any parallel schedule.
inline SplitMix64 subject_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t h = detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
  return SplitMix64(detail::mix64(h + 0x632BE59BD9B4E019ULL));
}

}  // namespace idmauc
