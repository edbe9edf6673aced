#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace girf {

/// Tags for the last component of a stream path, so that draws made for
/// different purposes at the same (step, particle) never share a stream.
enum class Purpose : std::uint64_t {
  kInit = 1,
  kPropagate = 2,
  kResample = 3,
  kForecast = 4,
  kPerturbInit = 5,
  kPerturbStep = 6,
  kMeasurement = 7,
  kIsland = 8,
  kPool = 9,
  kReplicate = 10,
  kEnsemble = 11,
  kIteration = 12,
  kData = 13,
  kProfile = 14,
};

/// Counter-keyed random stream.
///
/// A stream is identified by a 64-bit key obtained by hashing the root seed
/// with a path of integers (island, step, particle, purpose ...). The key
/// seeds a xoshiro256** generator, so a given (root_seed, path) always
/// produces the same sequence, regardless of which thread asks for it or in
/// which order streams are created.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t root_seed = 0);

  /// Child stream keyed on this stream's key and `path`. Does not depend on
  /// how many values have already been drawn from `*this`.
  RngStream derive(std::initializer_list<std::uint64_t> path) const;
  RngStream derive(Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0,
                   std::uint64_t c = 0) const {
    return derive({static_cast<std::uint64_t>(purpose), a, b, c});
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Marsaglia polar method, second variate cached).
  double normal() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  void seed_state() noexcept;

  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace girf
