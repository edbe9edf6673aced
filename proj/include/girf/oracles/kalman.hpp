#pragma once

#include <Eigen/Dense>
#include <vector>

#include "girf/model.hpp"
#include "girf/models/cbm.hpp"

namespace girf {

/// Random walk with drift observed in Gaussian noise:
///   X_{t'} = X_t + drift (t'-t) + N(0, (t'-t) A),   Y_n = X_{t_n} + N(0, obs_var I).
struct LinearGaussianSpec {
  Eigen::VectorXd drift;
  Eigen::MatrixXd A;
  double obs_var = 1.0;
  Eigen::VectorXd m0;
  Eigen::MatrixXd P0;  ///< zero for a point-mass start

  std::size_t dim() const { return static_cast<std::size_t>(A.rows()); }
  void validate() const;  ///< throws ConfigError
};

/// The linear-Gaussian description of a correlated Brownian motion model.
LinearGaussianSpec cbm_linear_gaussian(const CorrelatedBrownianMotion& model, ParamView theta);

struct KalmanResult {
  double loglik = 0.0;
  std::vector<double> cond_loglik;           ///< one per observation
  std::vector<Eigen::VectorXd> means;        ///< filter means at t_1..t_N
  std::vector<Eigen::MatrixXd> covariances;  ///< filter covariances at t_1..t_N
};

/// Exact log likelihood and filtering moments. Throws SingularInnovation
/// when an innovation covariance cannot be factored.
KalmanResult kalman_filter(const LinearGaussianSpec& spec, double t0, const std::vector<double>& obs_times,
                           const ObservationSeries& data);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Smoothed moments at arbitrary times given the observations y_{1:last}.
/// Times are merged with the observation times; the result follows the
/// order of `times`.
std::vector<GaussianMoments> kalman_smoother(const LinearGaussianSpec& spec, double t0,
                                             const std::vector<double>& obs_times, const ObservationSeries& data,
                                             std::size_t last, const std::vector<double>& times);

/// Law of X_t under the guided filter distribution whose guide is the
/// exact forecast likelihood of the next B observations: the conditional
/// law of X_t given y_{1:min(c+B, N)}, c = number of observation times
/// strictly before t. B = 0 gives the filter at t (all y with t_n <= t).
GaussianMoments kalman_guided_oracle(const LinearGaussianSpec& spec, double t0, const std::vector<double>& obs_times,
                                     const ObservationSeries& data, double t, std::size_t B);

}  // namespace girf
