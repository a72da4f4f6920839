#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ship {

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

// Counter-based generator: draw i of a stream is a pure function of
// (seed, stream, i), so derived streams give the same values no matter how
// tasks are scheduled. Satisfies UniformRandomBitGenerator.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), key_(make_key(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return detail::mix64(key_ + detail::kGolden * (++counter_));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t make_key(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(detail::mix64(seed ^ 0x5851F42D4C957F2DULL) + detail::kGolden * stream);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Independent child stream for a task; the parent's draw position is irrelevant.
inline SeededRng derive_stream(const SeededRng& rng, std::uint64_t task_index) {
  const std::uint64_t child = detail::mix64(rng.stream() * detail::kGolden + detail::mix64(task_index + 1));
  return SeededRng(rng.seed(), child);
}

// Convenience for multi-level derivation, e.g. (instance, replica).
inline SeededRng derive_stream(const SeededRng& rng, std::uint64_t a, std::uint64_t b) {
  return derive_stream(derive_stream(rng, a), b);
}

// Box-Muller on our own uniforms so Gaussian draws do not depend on the
// standard library's distribution internals.
inline double standard_normal(SeededRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Uniform integer in [0, n) by rejection, n > 0.
inline std::uint64_t uniform_index(SeededRng& rng, std::uint64_t n) {
  const std::uint64_t limit = SeededRng::max() - SeededRng::max() % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

// Fisher-Yates with uniform_index, stable across standard library versions.
template <typename It>
void shuffle(It first, It last, SeededRng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace ship
