#include "girf/rng.hpp"

#include <cmath>

namespace girf {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t root_seed) : key_(mix64(root_seed + kGolden)) {
  seed_state();
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> path) const {
  RngStream child(0);
  std::uint64_t k = key_;
  std::uint64_t position = 1;
  for (std::uint64_t component : path) {
    k = mix64(k ^ mix64(component + position * kGolden));
    ++position;
  }
  child.key_ = k;
  child.seed_state();
  return child;
}

void RngStream::seed_state() noexcept {
  std::uint64_t x = key_;
  for (auto& s : state_) {
    x += kGolden;
    s = mix64(x);
  }
  has_spare_ = false;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

}  // namespace girf
