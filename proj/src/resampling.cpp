#include "girf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "girf/errors.hpp"

namespace girf {

std::string_view to_string(ResampleScheme s) {
  return s == ResampleScheme::kSystematic ? "systematic" : "multinomial";
}

ResampleScheme parse_scheme(std::string_view s) {
  if (s == "systematic") return ResampleScheme::kSystematic;
  if (s == "multinomial") return ResampleScheme::kMultinomial;
  throw ConfigError("unknown resampling scheme '" + std::string(s) + "'");
}

NormalizedWeights normalize_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw AllWeightsDegenerate("no weights to normalize");
  double max_w = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w)) throw AllWeightsDegenerate("NaN log weight");
    max_w = std::max(max_w, w);
  }
  if (!std::isfinite(max_w)) {
    throw AllWeightsDegenerate(max_w > 0 ? "infinite log weight" : "all weights are zero");
  }
  NormalizedWeights out;
  out.probabilities.resize(log_weights.size());
  double total = 0.0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double p = std::exp(log_weights[j] - max_w);
    out.probabilities[j] = p;
    total += p;
  }
  for (auto& p : out.probabilities) p /= total;
  out.log_mean_weight = max_w + std::log(total) - std::log(static_cast<double>(log_weights.size()));
  return out;
}

double ess(std::span<const double> probabilities) {
  double sum_sq = 0.0;
  for (double p : probabilities) sum_sq += p * p;
  return 1.0 / sum_sq;
}

std::vector<std::size_t> systematic_ancestors(std::span<const double> probabilities, double offset,
                                              std::size_t count) {
  std::vector<std::size_t> ancestors(count);
  const std::size_t n = probabilities.size();
  const double scale = static_cast<double>(count);
  // Cumulative sums are scaled by count so that stratum boundaries are compared
  // against j + U directly.
  double cumulative = probabilities[0] * scale;
  std::size_t i = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double u = static_cast<double>(j) + offset;
    while (u >= cumulative && i + 1 < n) {
      ++i;
      cumulative += probabilities[i] * scale;
    }
    // Zero-probability strata can only be reached through rounding at the tail.
    while (probabilities[i] == 0.0 && i > 0) --i;
    ancestors[j] = i;
  }
  return ancestors;
}

std::vector<std::size_t> multinomial_ancestors(std::span<const double> probabilities, std::size_t count,
                                               RngStream& rng) {
  std::vector<double> cumulative(probabilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    total += probabilities[i];
    cumulative[i] = total;
  }
  std::vector<std::size_t> ancestors(count);
  for (auto& a : ancestors) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(probabilities.size()) - 1));
    while (probabilities[i] == 0.0 && i > 0) --i;
    a = i;
  }
  return ancestors;
}

std::vector<std::size_t> resample_ancestors(std::span<const double> probabilities, ResampleScheme scheme,
                                            RngStream& rng) {
  if (scheme == ResampleScheme::kSystematic) {
    return systematic_ancestors(probabilities, rng.uniform(), probabilities.size());
  }
  return multinomial_ancestors(probabilities, probabilities.size(), rng);
}

}  // namespace girf
