#include "girf/stats.hpp"

#include <algorithm>
#include <limits>

namespace girf {

double log_normal_interval(double a, double b) {
  if (!(b > a)) return -std::numeric_limits<double>::infinity();
  // Work in the tail closest to zero mass so the subtraction does not cancel.
  if (a > 30.0) {
    // erfc underflows past here; asymptotic Mills ratio instead
    const auto log_tail = [](double x) {
      const double r = 1.0 / (x * x);
      return -0.5 * (kLogTwoPi + x * x) - std::log(x) + std::log1p(r * (-1.0 + r * (3.0 - 15.0 * r)));
    };
    const double la = log_tail(a);
    if (std::isinf(b)) return la;
    return la + std::log1p(-std::exp(log_tail(b) - la));
  }
  if (a > 0.0) {
    const double qa = 0.5 * std::erfc(a / std::numbers::sqrt2);
    const double qb = 0.5 * std::erfc(b / std::numbers::sqrt2);
    return std::log(qa - qb);
  }
  if (b < 0.0) return log_normal_interval(-b, -a);
  return std::log(normal_cdf(b) - normal_cdf(a));
}

double logsumexp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (double v : values) total += std::exp(v - m);
  return m + std::log(total);
}

}  // namespace girf
