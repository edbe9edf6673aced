#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "girf/rng.hpp"

namespace girf {

enum class ResampleScheme { kSystematic, kMultinomial };

std::string_view to_string(ResampleScheme s);
ResampleScheme parse_scheme(std::string_view s);

struct NormalizedWeights {
  std::vector<double> probabilities;
  /// logsumexp(logw) - ln J
  double log_mean_weight = 0.0;
};

/// Stable softmax of log weights. Throws AllWeightsDegenerate when no entry
/// is finite.
NormalizedWeights normalize_log_weights(std::span<const double> log_weights);

/// Effective sample size 1 / sum p^2.
double ess(std::span<const double> probabilities);

/// Draws J ancestor indices from the given probabilities.
std::vector<std::size_t> resample_ancestors(std::span<const double> probabilities, ResampleScheme scheme,
                                            RngStream& rng);

/// Systematic resampling with an explicit offset U in [0, 1): index j is the
/// stratum of the cumulative probabilities containing (j + U) / J.
std::vector<std::size_t> systematic_ancestors(std::span<const double> probabilities, double offset,
                                              std::size_t count);

/// Draws `count` i.i.d. indices from the given probabilities.
std::vector<std::size_t> multinomial_ancestors(std::span<const double> probabilities, std::size_t count,
                                               RngStream& rng);

}  // namespace girf
