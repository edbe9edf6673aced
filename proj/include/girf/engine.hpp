#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "girf/guide.hpp"
#include "girf/model.hpp"
#include "girf/resampling.hpp"
#include "girf/swarm.hpp"
#include "girf/time_grid.hpp"

namespace girf {

/// What the engine exposes at each grid step, before resampling.
struct StepView {
  std::size_t k;
  std::size_t n;
  std::size_t s;
  double time;
  const Matrix& propagated;
  std::span<const double> probabilities;
  std::span<const double> log_u;
};

using StepObserver = std::function<void(const StepView&)>;

/// Random-walk perturbation of per-particle parameters on the estimation
/// scale. Entries are indexed like the ParamVector; fixed entries are
/// never perturbed and IVP entries only at initialization.
struct Perturbation {
  std::vector<double> initial_sd;
  std::vector<double> step_sd;
};

struct GirfConfig {
  std::size_t J = 1000;
  std::size_t islands = 1;
  ResampleScheme scheme = ResampleScheme::kSystematic;
  GuidePtr guide;
  bool record_filter_means = false;
  bool record_ess = true;
  /// Resample only when ESS < threshold * J; 0 resamples every step.
  double ess_threshold = 0.0;
  StepObserver observer;

  void validate() const;  ///< throws ConfigError
};

struct FilterOutput {
  double loglik = 0.0;
  std::vector<double> cond_loglik;  ///< one per grid step (N*S entries)
  std::vector<double> ess;          ///< one per grid step
  ParticleSwarm terminal_swarm;
  Matrix terminal_params;  ///< per-particle natural-scale parameters
  /// Filter means at t_1..t_N (N x d) when recorded.
  std::optional<Matrix> filter_means;
  std::vector<double> island_loglik;
  std::size_t steps_per_interval = 1;
};

/// Intermediate importance weight on the natural scale:
///   u_now / u_prev, times g_prev when the previous time is an observation.
/// Throws NonPositiveGuide when an input is not positive.
double girf_weight(double u_now, double u_prev, std::optional<double> g_prev);

/// Log-scale version used by the engine.
double girf_log_weight(double log_u_now, double log_u_prev, std::optional<double> log_g_prev);

/// Inputs shared by every filter run.
struct FilterProblem {
  const Model& model;
  const ParamVector& params;
  const ObservationSeries& data;
  const TimeGrid& grid;
};

/// One guided intermediate resampling filter run on a single swarm.
///
/// `initial_params` (J x P, natural scale) seeds per-particle parameters;
/// when absent every particle starts at problem.params. `perturbation`
/// perturbs them as in iterated filtering.
FilterOutput girf_filter(const FilterProblem& problem, const GirfConfig& config, const RngStream& rng,
                         const Matrix* initial_params = nullptr, const Perturbation* perturbation = nullptr);

/// config.islands independent filters, each with config.J particles.
/// Likelihoods are averaged on the natural scale; the terminal swarm pools
/// the islands and is resampled to J with island weights. When
/// initial_params is given it holds islands*J rows, island i using rows
/// [i*J, (i+1)*J); terminal_params then concatenates the islands'
/// terminal parameters in the same layout.
FilterOutput run_islands(const FilterProblem& problem, const GirfConfig& config, const RngStream& rng,
                         const Matrix* initial_params = nullptr, const Perturbation* perturbation = nullptr);

/// Guide config for the bootstrap filter and the auxiliary particle filter.
/// Both force one step per interval.
GirfConfig configure_bootstrap(GirfConfig base);
GirfConfig configure_apf(GirfConfig base);

/// Steps per interval to use with a guide: forced_steps() when the guide
/// imposes it, else `requested`.
std::size_t effective_steps(const Guide& guide, std::size_t requested);

/// Plain bootstrap particle filter on an observation-only grid (S = 1),
/// written independently of girf_filter but using the same random streams.
FilterOutput bootstrap_filter(const FilterProblem& problem, std::size_t J, ResampleScheme scheme,
                              const RngStream& rng);

}  // namespace girf
