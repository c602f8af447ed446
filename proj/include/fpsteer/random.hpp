#ifndef FPSTEER_RANDOM_HPP
#define FPSTEER_RANDOM_HPP

#include <cstdint>
#include <limits>

namespace fpsteer {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-driven generator: output k is mix64(key + k * golden gamma).
/// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

enum class StreamRole : std::uint64_t { init = 1, kernel = 2, noise = 3 };

/// Independent stream keyed by (master seed, run, step, role). The stream
/// depends only on its key, never on the order in which runs execute.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t run, std::uint64_t step,
                            StreamRole role) noexcept {
  std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  key = mix64(key ^ (run + 0x9e3779b97f4a7c15ULL));
  key = mix64(key ^ (step * 0xbb67ae8584caa73bULL + 1));
  key = mix64(key ^ static_cast<std::uint64_t>(role));
  return SplitMix64(key);
}

}  // namespace fpsteer

#endif  // FPSTEER_RANDOM_HPP
