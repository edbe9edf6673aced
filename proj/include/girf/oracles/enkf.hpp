#pragma once

#include "girf/model.hpp"
#include "girf/swarm.hpp"

namespace girf {

struct EnkfOutput {
  double loglik = 0.0;
  std::vector<double> cond_loglik;  ///< one per observation
  Matrix filter_means;              ///< N x d
};

/// Stochastic (perturbed-observation) ensemble Kalman filter.
///
/// Members are propagated with transition_sample from one observation time
/// to the next. The update linearizes the measurement through
/// measurement_mean, with observation covariance given by
/// measurement_variance at the ensemble mean. Sample covariances use the
/// 1/(J-1) divisor and are regularized by 1e-8 * trace. Log likelihood
/// increments are Gaussian predictive densities.
EnkfOutput enkf_filter(const Model& model, const ParamVector& params, const ObservationSeries& data, double t0,
                       const std::vector<double>& obs_times, std::size_t J, const RngStream& rng);

}  // namespace girf
