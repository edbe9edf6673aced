#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace girf {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

inline double normal_logpdf(double y, double mean, double variance) {
  const double r = y - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + r * r / variance);
}

/// Standard normal cdf.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// log(Phi(b) - Phi(a)) for standardized a < b, accurate in both tails.
double log_normal_interval(double a, double b);

double logsumexp(std::span<const double> values);

}  // namespace girf
