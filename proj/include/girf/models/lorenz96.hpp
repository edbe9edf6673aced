#pragma once

#include "girf/model.hpp"

namespace girf {

/// Drift of the Lorenz-96 system with cyclic indexing:
///   (x[i+1] - x[i-2]) * x[i-1] - x[i] + F.
/// Throws DomainError when x has fewer than 4 coordinates.
void lorenz_drift(std::span<const double> x, double forcing, std::span<double> out);

enum class SkeletonScheme { kEuler, kRk4 };

/// Stochastic Lorenz-96 model integrated by Euler-Maruyama, observed with
/// independent Gaussian noise on every coordinate. The initial state is
/// zero except the last coordinate, which is 0.01.
///
/// Each call to transition_sample splits [t_from, t_to] into the smallest
/// number of equal steps no longer than euler_dt, so sub-intervals that are
/// multiples of euler_dt are integrated with exactly euler_dt.
class Lorenz96 final : public Model {
 public:
  /// Parameter layout: F, sigma_p, sigma_m.
  enum : std::size_t { kForcing = 0, kSigmaP = 1, kSigmaM = 2 };

  Lorenz96(std::size_t dim, double forcing = 8.0, double sigma_p = 1.0, double sigma_m = 1.0,
           double euler_dt = 0.01, SkeletonScheme skeleton = SkeletonScheme::kEuler);

  std::string name() const override { return "lorenz96"; }
  std::size_t state_dim() const override { return dim_; }
  std::size_t obs_dim() const override { return dim_; }
  ParamVector default_params() const override { return defaults_; }
  double euler_dt() const noexcept { return euler_dt_; }

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

  /// Number of integration steps used for an interval of the given length.
  std::size_t step_count(double interval) const;

 private:
  std::size_t dim_;
  double euler_dt_;
  SkeletonScheme skeleton_;
  ParamVector defaults_;
};

}  // namespace girf
