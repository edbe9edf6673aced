#pragma once

#include <Eigen/Dense>

#include "girf/model.hpp"

namespace girf {

/// Equicorrelated Brownian motion in R^d observed with Gaussian noise:
///   X_{t+delta} = X_t + drift*delta + N(0, delta*A),  Y_n = X_{t_n} + N(0, obs_sd^2 I)
/// where A has unit diagonal and off-diagonal alpha. X_{t0} is the point
/// mass at x0 * 1.
class CorrelatedBrownianMotion final : public Model {
 public:
  /// Parameter layout: alpha, obs_sd, drift, x0.
  enum : std::size_t { kAlpha = 0, kObsSd = 1, kDrift = 2, kX0 = 3 };

  CorrelatedBrownianMotion(std::size_t dim, double alpha = 0.0, double obs_sd = 1.0, double drift = 0.0,
                           double x0 = 0.0);

  std::string name() const override { return "cbm"; }
  std::size_t state_dim() const override { return dim_; }
  std::size_t obs_dim() const override { return dim_; }
  ParamVector default_params() const override { return defaults_; }

  void init_sample(ParamView theta, StateView x, RngStream& rng) const override;
  void transition_sample(ParamView theta, double t_from, double t_to, StateView x,
                         RngStream& rng) const override;
  void skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const override;
  double measurement_logdensity(ParamView theta, std::size_t n, ObsView y, ConstStateView x) const override;
  void measurement_sample(ParamView theta, std::size_t n, ConstStateView x, std::span<double> y,
                          RngStream& rng) const override;
  void measurement_mean(ParamView theta, std::size_t n, ConstStateView x, std::span<double> mean) const override;
  void measurement_variance(ParamView theta, std::size_t n, ConstStateView x,
                            std::span<double> variance) const override;
  double family_logdensity(ParamView theta, std::size_t n, std::size_t i, double y, double center,
                           double variance) const override;

  /// Correlation matrix A for a given alpha.
  Eigen::MatrixXd correlation(double alpha) const;
  /// Lower Cholesky factor of A; throws CholeskyFailure if A is not PD.
  Eigen::MatrixXd correlation_cholesky(double alpha) const;
  double configured_alpha() const noexcept { return alpha_; }

 private:
  std::size_t dim_;
  double alpha_;
  ParamVector defaults_;
  Eigen::MatrixXd chol_;  // for the configured alpha
};

/// Which covariance the analytic Brownian-motion guide uses.
enum class CbmGuideCovariance { kExact, kDiagonal };

/// log prod_b phi_d(y_{b}; x + drift*tau_b, tau_b*A + obs_sd^2 I), tau_b = horizon_b - t_now.
/// Horizons and observations are matched by position.
double cbm_guide_exact(const CorrelatedBrownianMotion& model, ParamView theta, ConstStateView x,
                       double t_now, std::span<const double> horizons, std::span<const ObsView> ys);

/// Same product with the off-diagonal entries of A dropped.
double cbm_guide_diag(const CorrelatedBrownianMotion& model, ParamView theta, ConstStateView x,
                      double t_now, std::span<const double> horizons, std::span<const ObsView> ys);

}  // namespace girf
