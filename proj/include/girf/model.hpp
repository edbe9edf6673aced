#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "girf/params.hpp"
#include "girf/rng.hpp"

namespace girf {

using StateView = std::span<double>;
using ConstStateView = std::span<const double>;
using ParamView = std::span<const double>;
using ObsView = std::span<const double>;

/// How a guide approximates the per-coordinate forecast likelihood.
enum class MeasurementFamily {
  /// Gaussian measurement; forecast variability is the sample variance.
  kGaussian,
  /// Discretized normal; forecast variability is calibrated from the
  /// inter-quartile distance of the forecast sample.
  kQuantileCalibrated,
};

/// Plug-and-play POMP model: latent transitions are simulated, never
/// evaluated. The measurement density is evaluable.
///
/// Parameter spans passed to callbacks hold natural-scale values laid out as
/// in default_params(). Callbacks must be re-entrant.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual ParamVector default_params() const = 0;

  virtual void init_sample(ParamView theta, StateView x, RngStream& rng) const = 0;
  /// Advances x from t_from to t_to in place.
  virtual void transition_sample(ParamView theta, double t_from, double t_to, StateView x,
                                 RngStream& rng) const = 0;
  /// Deterministic skeleton forecast from t_from to t_to, in place.
  virtual void skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const = 0;

  /// log g_n(y_n | x) for observation n (1-based).
  virtual double measurement_logdensity(ParamView theta, std::size_t n, ObsView y,
                                        ConstStateView x) const = 0;
  virtual void measurement_sample(ParamView theta, std::size_t n, ConstStateView x,
                                  std::span<double> y, RngStream& rng) const = 0;

  virtual MeasurementFamily measurement_family() const { return MeasurementFamily::kGaussian; }
  /// Conditional mean of Y_n given x, per coordinate.
  virtual void measurement_mean(ParamView theta, std::size_t n, ConstStateView x,
                                std::span<double> mean) const = 0;
  /// Conditional variance of Y_n given x, per coordinate.
  virtual void measurement_variance(ParamView theta, std::size_t n, ConstStateView x,
                                    std::span<double> variance) const = 0;
  /// log of the approximating family density for coordinate i of y_n with
  /// the given center and variance.
  virtual double family_logdensity(ParamView theta, std::size_t n, std::size_t i, double y,
                                   double center, double variance) const = 0;

  /// Clears per-interval accumulators in x (e.g. cases counted since the
  /// last observation). Called once the observation at the start of an
  /// interval has been used.
  virtual void reset_accumulators(StateView /*x*/) const {}
};

using ModelPtr = std::shared_ptr<const Model>;

/// Observations y_{1:N}, stored row-major (N x obs_dim).
class ObservationSeries {
 public:
  ObservationSeries() = default;
  ObservationSeries(std::size_t n_obs, std::size_t dim)
      : n_obs_(n_obs), dim_(dim), values_(n_obs * dim, 0.0) {}
  ObservationSeries(std::size_t dim, std::vector<double> values);

  std::size_t size() const noexcept { return n_obs_; }
  std::size_t dim() const noexcept { return dim_; }
  /// y_n for n in 1..N.
  ObsView at(std::size_t n) const { return {values_.data() + (n - 1) * dim_, dim_}; }
  std::span<double> at(std::size_t n) { return {values_.data() + (n - 1) * dim_, dim_}; }
  const std::vector<double>& values() const noexcept { return values_; }
  /// First `count` observations.
  ObservationSeries prefix(std::size_t count) const;

 private:
  std::size_t n_obs_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

}  // namespace girf
