#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "girf/model.hpp"
#include "girf/models/cbm.hpp"
#include "girf/swarm.hpp"
#include "girf/time_grid.hpp"

namespace girf {

enum class PowerSchedule { kLinearFraction, kAllOnes };
enum class RefreshPolicy { kEveryS1, kEveryStep };

std::string_view to_string(PowerSchedule p);
std::string_view to_string(RefreshPolicy p);
PowerSchedule parse_power_schedule(std::string_view s);
RefreshPolicy parse_refresh_policy(std::string_view s);

/// Settings of the simulation-based guide.
struct GuideSpec {
  std::size_t B = 2;
  PowerSchedule power_schedule = PowerSchedule::kLinearFraction;
  std::size_t n_variability_sims = 40;
  RefreshPolicy refresh_policy = RefreshPolicy::kEveryS1;
  /// Inflation of the inter-quartile distance; 0 means 1 + 2/sqrt(n_sims).
  double variance_inflation = 0.0;

  double effective_inflation() const;
  void validate() const;  ///< throws ConfigError
};

/// eta = 1 - (t_target - t_now) / (t_target - t_start), where t_start is
/// t_{max(n+b-B, 0)}. Returns 1 when the denominator vanishes.
double lookahead_power(double t_now, double t_target, double t_start);

/// Xi(t_now) = Xi(anchor) * (horizon - t_now) / (horizon - anchor).
double rescale_variability(double xi_anchor, double anchor, double horizon, double t_now);

/// Deterministic skeleton forecasts from x at grid index k to the
/// observation times of `targets`. Accumulators are reset before the path
/// leaves an observation time. Row b of the result is the forecast at
/// t_{targets[b]}.
Matrix skeleton_forecasts(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                          std::span<const std::size_t> targets, const TimeGrid& grid);

/// Per-coordinate variability of the measurement mean at each target,
/// estimated from `n_sims` random forecasts started at x. Gaussian families
/// use the sample variance; quantile-calibrated families use
/// 0.55 * (inter-quartile distance * inflation)^2. Row b holds the obs_dim
/// variabilities for targets[b].
Matrix forecast_variability(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                            std::span<const std::size_t> targets, const TimeGrid& grid, std::size_t n_sims,
                            double inflation, const RngStream& rng);

/// Simulation-free variant of the per-target forecast factor:
///   sum_i log g~(y_i | center_i(mu), xi_i + 1e-12 + meas_var_i(mu)).
double forecast_factor(const Model& model, ParamView theta, std::size_t obs_index, ObsView y,
                       ConstStateView mu, std::span<const double> xi);

/// Forecast variabilities of one particle, estimated at `anchor`.
struct ForecastCache {
  double anchor = 0.0;
  std::vector<std::size_t> targets;  ///< observation indices, increasing
  Matrix xi;                         ///< targets x obs_dim
};

/// Builds a particle's cache at grid index k from random forecasts.
ForecastCache build_forecast_cache(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                                   const TimeGrid& grid, const GuideSpec& spec, const RngStream& rng);

/// log u_{t_k}(x) of the lookahead product. Returns 0 at k = 0. At an
/// observation step the first factor is `log_g_now` (the exact measurement
/// density) with power 1. Throws NonFiniteGuide on NaN.
double guide_value(const Model& model, ParamView theta, ConstStateView x, std::size_t k, const TimeGrid& grid,
                   const ObservationSeries& data, const GuideSpec& spec, const ForecastCache& cache,
                   std::optional<double> log_g_now);

/// Problem seen by a guide when a filter run starts.
struct GuideContext {
  const Model& model;
  const ParamVector& params;
  const ObservationSeries& data;
  const TimeGrid& grid;
};

/// Per-run guide state (forecast caches that follow particle ancestry).
class GuideRun {
 public:
  virtual ~GuideRun() = default;

  /// log u at grid index k for the propagated particles. `log_g` holds the
  /// exact measurement log densities when k is an observation step and is
  /// empty otherwise.
  virtual void evaluate(std::size_t k, const Matrix& states, const Matrix& thetas, std::span<const double> log_g,
                        const RngStream& rng, std::span<double> log_u) = 0;
  /// Called after resampling with the selected ancestors.
  virtual void resampled(std::span<const std::size_t> /*ancestors*/) {}
};

/// Guide factory shared across runs and islands.
class Guide {
 public:
  virtual ~Guide() = default;
  virtual std::string name() const = 0;
  /// Steps per interval imposed by the guide (1 for the bootstrap filter
  /// and the APF).
  virtual std::optional<std::size_t> forced_steps() const { return std::nullopt; }
  virtual std::unique_ptr<GuideRun> start(const GuideContext& context, std::size_t particles) const = 0;
};

using GuidePtr = std::shared_ptr<const Guide>;

/// u_{t_n} = g_n: bootstrap particle filter.
GuidePtr make_bootstrap_guide();

/// u_{t_n}(x) = g_n(y_n | x) g_{n+1}(y_{n+1} | mu_{t_{n+1}}(x)), u_{t_N} = g_N,
/// with mu the deterministic skeleton.
GuidePtr make_apf_guide();

/// Lookahead forecast-likelihood product with skeleton means and simulated
/// variabilities.
GuidePtr make_simulation_guide(GuideSpec spec);

/// Analytic guide for correlated Brownian motion.
GuidePtr make_cbm_guide(std::size_t B, CbmGuideCovariance covariance,
                        PowerSchedule schedule = PowerSchedule::kAllOnes);

/// Observation indices m = n+1 .. min(n+B, N) targeted at grid index k.
std::vector<std::size_t> guide_targets(const TimeGrid& grid, std::size_t k, std::size_t B);

}  // namespace girf
