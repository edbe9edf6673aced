#pragma once

#include <vector>

#include "girf/engine.hpp"

namespace girf {

enum class PointEstimate { kMean, kMedian };

struct IgirfConfig {
  std::size_t M = 20;
  /// Perturbation sd on the estimation scale at iteration 1, one per
  /// parameter (ignored for fixed entries).
  std::vector<double> sigma;
  double cooling = 0.92;
  GirfConfig filter;
  PointEstimate estimate = PointEstimate::kMean;

  void validate(const ParamVector& layout) const;  ///< throws ConfigError
  /// sigma_m = sigma_1 * cooling^(m-1) for parameter i, m in 1..M.
  double sigma_at(std::size_t i, std::size_t m) const;
};

struct IgirfResult {
  Matrix final_swarm;                            ///< (J*islands) x P, natural scale
  std::vector<double> loglik;                    ///< one per iteration
  std::vector<std::vector<double>> swarm_means;  ///< per iteration, natural scale
  std::vector<std::vector<double>> swarm_sds;    ///< per iteration, estimation scale
  ParamVector point_estimate;
};

/// Swarm of J copies of the given parameters.
Matrix replicate_params(const ParamVector& params, std::size_t rows);

/// Gaussian perturbation of every row on the estimation scale. At the
/// intermediate stage IVP entries are left alone; fixed entries never move.
Matrix perturb_params(const Matrix& swarm, const ParamVector& layout, std::span<const double> sd, bool initial,
                      const RngStream& rng);

/// Mean (or median) of the swarm on the estimation scale mapped back, and
/// estimation-scale standard deviations. Fixed entries keep layout values.
ParamVector swarm_estimate(const Matrix& swarm, const ParamVector& layout, PointEstimate kind);
std::vector<double> swarm_sd(const Matrix& swarm, const ParamVector& layout);

/// Iterated filtering with cooled perturbations; each iteration is one
/// (island) filter run on the extended state (X, theta).
IgirfResult igirf_run(const FilterProblem& problem, const IgirfConfig& config, const Matrix& init_swarm,
                      const RngStream& rng);

/// Filters the first `prefix` observations with initial-only perturbations
/// of the IVP entries, `passes` times, and returns the swarm with IVP
/// columns updated and all other columns as given.
Matrix estimate_ivps(const FilterProblem& problem, std::size_t prefix, const IgirfConfig& config,
                     const Matrix& swarm, std::size_t passes, const RngStream& rng);

}  // namespace girf
