#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lrp {

// SplitMix64 finalizer (Steele, Lea, Flood). Used both as a stream generator and
// as the mixing step of stable substream hashes.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive hash of a word sequence; stable across platforms and runs.
constexpr std::uint64_t hash_words(std::uint64_t seed, std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t w : words) {
    h = mix64(h ^ mix64(w + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

// Small counter-based generator; cheap to construct per substream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on (0, 1]; never returns 0 so log() is always finite.
  double uniform_open0() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Number of failures before the next success of a Bernoulli(p) sequence, given
// log1p(-p). Saturates at max() when the skip exceeds any realistic index range.
inline std::uint64_t geometric_skip(SplitMix64& rng, double log1m_p) noexcept {
  const double skip = std::floor(std::log(rng.uniform_open0()) / log1m_p);
  if (!(skip < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(skip);
}

}  // namespace lrp
