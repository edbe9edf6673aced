#include "girf/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "girf/errors.hpp"
#include "girf/parallel.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_problem(const FilterProblem& p, std::size_t steps) {
  if (p.data.size() != p.grid.num_observations()) {
    throw ConfigError("data has " + std::to_string(p.data.size()) + " observations but the grid has " +
                      std::to_string(p.grid.num_observations()));
  }
  if (p.data.dim() != p.model.obs_dim()) throw ConfigError("data dimension does not match the model");
  if (p.grid.steps_per_interval() != steps) {
    throw ConfigError("guide requires " + std::to_string(steps) + " steps per interval, grid has " +
                      std::to_string(p.grid.steps_per_interval()));
  }
}

void perturb_row(const ParamVector& layout, std::span<double> theta, std::span<const double> sd, bool initial,
                 RngStream& rng) {
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout[i];
    if (e.kind == ParamKind::kFixed) continue;
    if (!initial && e.kind == ParamKind::kIvp) continue;
    if (!(sd[i] > 0.0)) continue;
    const double est = to_estimation(e.transform, theta[i]) + sd[i] * rng.normal();
    theta[i] = from_estimation(e.transform, est);
  }
}

bool any_positive(const std::vector<double>& v) {
  for (double x : v) {
    if (x > 0.0) return true;
  }
  return false;
}

NormalizedWeights normalize_at(std::span<const double> lw, std::size_t k) {
  try {
    return normalize_log_weights(lw);
  } catch (const AllWeightsDegenerate& e) {
    throw AllWeightsDegenerate(std::string(e.what()) + " at grid index " + std::to_string(k), k);
  }
}

}  // namespace

void GirfConfig::validate() const {
  if (J < 2) throw ConfigError("filter.J must be >= 2");
  if (islands < 1) throw ConfigError("filter.islands must be >= 1");
  if (!guide) throw ConfigError("filter.guide is missing");
  if (ess_threshold < 0.0 || ess_threshold > 1.0) throw ConfigError("filter.ess_threshold must be in [0, 1]");
}

double girf_weight(double u_now, double u_prev, std::optional<double> g_prev) {
  if (!(u_now > 0.0) || !(u_prev > 0.0) || (g_prev && !(*g_prev > 0.0))) {
    throw NonPositiveGuide("guide and measurement values must be positive");
  }
  const double ratio = u_now / u_prev;
  return g_prev ? ratio * *g_prev : ratio;
}

double girf_log_weight(double log_u_now, double log_u_prev, std::optional<double> log_g_prev) {
  if (std::isnan(log_u_now) || std::isnan(log_u_prev)) throw NonFiniteGuide("guide value is NaN");
  if (log_u_prev == kNegInf) return kNegInf;
  if (log_g_prev) return log_u_now + (*log_g_prev - log_u_prev);
  return log_u_now - log_u_prev;
}

std::size_t effective_steps(const Guide& guide, std::size_t requested) {
  const auto forced = guide.forced_steps();
  return forced ? *forced : requested;
}

GirfConfig configure_bootstrap(GirfConfig base) {
  base.guide = make_bootstrap_guide();
  return base;
}

GirfConfig configure_apf(GirfConfig base) {
  base.guide = make_apf_guide();
  return base;
}

FilterOutput girf_filter(const FilterProblem& problem, const GirfConfig& config, const RngStream& rng,
                         const Matrix* initial_params, const Perturbation* perturbation) {
  config.validate();
  const auto& model = problem.model;
  const auto& grid = problem.grid;
  const auto& data = problem.data;
  check_problem(problem, effective_steps(*config.guide, grid.steps_per_interval()));

  const std::size_t J = config.J;
  const std::size_t d = model.state_dim();
  const std::size_t P = problem.params.size();
  const std::size_t S = grid.steps_per_interval();
  const std::size_t K = grid.num_steps();

  Matrix thetas(J, P);
  if (initial_params != nullptr) {
    if (initial_params->rows() != J || initial_params->cols() != P) {
      throw ConfigError("initial parameter swarm has the wrong shape");
    }
    thetas = *initial_params;
  } else {
    const auto base = problem.params.values();
    for (std::size_t j = 0; j < J; ++j) std::copy(base.begin(), base.end(), thetas.row(j).begin());
  }
  const bool perturb_init = perturbation != nullptr && any_positive(perturbation->initial_sd);
  const bool perturb_step = perturbation != nullptr && any_positive(perturbation->step_sd);
  if (perturbation != nullptr &&
      (perturbation->initial_sd.size() != P || perturbation->step_sd.size() != P)) {
    throw ConfigError("perturbation sds do not match the parameter vector");
  }

  Matrix states(J, d);
  parallel_for(J, [&](std::size_t j) {
    if (perturb_init) {
      RngStream r = rng.derive(Purpose::kPerturbInit, j);
      perturb_row(problem.params, thetas.row(j), perturbation->initial_sd, true, r);
    }
    RngStream r = rng.derive(Purpose::kInit, j);
    model.init_sample(thetas.row(j), states.row(j), r);
  });

  auto run = config.guide->start(GuideContext{model, problem.params, data, grid}, J);

  FilterOutput out;
  out.steps_per_interval = S;
  out.cond_loglik.assign(K, 0.0);
  out.ess.assign(K, 0.0);
  if (config.record_filter_means) out.filter_means = Matrix(grid.num_observations(), d);

  std::vector<double> log_u(J), log_u_prev(J, 0.0), log_g(J), log_g_prev(J, 0.0), carry(J, 0.0), lw(J);
  std::vector<std::size_t> ancestors(J);
  for (std::size_t j = 0; j < J; ++j) ancestors[j] = j;
  bool carrying = false;

  for (std::size_t k = 1; k <= K; ++k) {
    const std::size_t n = grid.step_interval(k);
    const std::size_t s = grid.step_substep(k);
    const double t_prev = grid.time(k - 1);
    const double t_now = grid.time(k);
    const bool prev_obs = grid.point(k - 1).is_observation;
    const bool obs_step = grid.point(k).is_observation;
    const std::size_t m = n + 1;

    parallel_for(J, [&](std::size_t j) {
      auto x = states.row(j);
      if (prev_obs) model.reset_accumulators(x);
      if (perturb_step) {
        RngStream r = rng.derive(Purpose::kPerturbStep, k, j);
        perturb_row(problem.params, thetas.row(j), perturbation->step_sd, false, r);
      }
      RngStream r = rng.derive(Purpose::kPropagate, k, j);
      model.transition_sample(thetas.row(j), t_prev, t_now, x, r);
      if (obs_step) log_g[j] = model.measurement_logdensity(thetas.row(j), m, data.at(m), x);
    });

    run->evaluate(k, states, thetas, obs_step ? std::span<const double>(log_g) : std::span<const double>(), rng,
                  log_u);

    for (std::size_t j = 0; j < J; ++j) {
      const std::optional<double> g = prev_obs ? std::optional<double>(log_g_prev[j]) : std::nullopt;
      const double w = girf_log_weight(log_u[j], log_u_prev[j], g);
      lw[j] = carrying ? (carry[j] == kNegInf ? kNegInf : carry[j] + w) : w;
    }
    const NormalizedWeights nw = normalize_at(lw, k);
    out.cond_loglik[k - 1] = nw.log_mean_weight;
    const double ess_k = ess(nw.probabilities);
    out.ess[k - 1] = ess_k;

    if (obs_step && out.filter_means) {
      // Reweight the guided swarm to the filter distribution at t_m.
      std::vector<double> fw(J, kNegInf);
      for (std::size_t j = 0; j < J; ++j) {
        if (nw.probabilities[j] > 0.0 && log_u[j] != kNegInf) {
          fw[j] = std::log(nw.probabilities[j]) + (log_g[j] - log_u[j]);
        }
      }
      const NormalizedWeights fp = normalize_at(fw, k);
      auto row = out.filter_means->row(m - 1);
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t j = 0; j < J; ++j) {
        const double p = fp.probabilities[j];
        if (p == 0.0) continue;
        const auto x = states.row(j);
        for (std::size_t i = 0; i < d; ++i) row[i] += p * x[i];
      }
    }

    if (k == K) {
      for (std::size_t j = 0; j < J; ++j) {
        if (!std::isfinite(log_g[j])) continue;
        if (std::abs(log_u[j] - log_g[j]) > 1e-9 * (1.0 + std::abs(log_g[j]))) {
          throw FilterError("guide boundary violated: final guide differs from the measurement density");
        }
      }
    }

    if (config.observer) {
      config.observer(StepView{k, n, s, t_now, states, nw.probabilities, log_u});
    }

    const bool resample = config.ess_threshold == 0.0 || ess_k < config.ess_threshold * static_cast<double>(J);
    if (resample) {
      RngStream r = rng.derive(Purpose::kResample, k);
      ancestors = resample_ancestors(nw.probabilities, config.scheme, r);
      states = states.gather(ancestors);
      thetas = thetas.gather(ancestors);
      for (std::size_t j = 0; j < J; ++j) {
        log_u_prev[j] = log_u[ancestors[j]];
        log_g_prev[j] = obs_step ? log_g[ancestors[j]] : 0.0;
      }
      run->resampled(ancestors);
      carrying = false;
    } else {
      for (std::size_t j = 0; j < J; ++j) {
        ancestors[j] = j;
        carry[j] = nw.probabilities[j] > 0.0 ? std::log(static_cast<double>(J) * nw.probabilities[j]) : kNegInf;
        log_u_prev[j] = log_u[j];
        log_g_prev[j] = obs_step ? log_g[j] : 0.0;
      }
      carrying = true;
    }
    if (k == K) {
      out.terminal_swarm.log_weights = lw;
      out.terminal_swarm.ancestors = ancestors;
    }
  }

  double total = 0.0;
  for (double c : out.cond_loglik) total += c;
  out.loglik = total;
  out.island_loglik = {total};
  out.terminal_swarm.time = grid.time(K);
  out.terminal_swarm.states = std::move(states);
  out.terminal_swarm.log_guide = log_u_prev;
  out.terminal_params = std::move(thetas);
  return out;
}

FilterOutput run_islands(const FilterProblem& problem, const GirfConfig& config, const RngStream& rng,
                         const Matrix* initial_params, const Perturbation* perturbation) {
  config.validate();
  if (config.islands == 1) return girf_filter(problem, config, rng, initial_params, perturbation);

  const std::size_t I = config.islands;
  const std::size_t J = config.J;
  const std::size_t P = problem.params.size();
  if (initial_params != nullptr && (initial_params->rows() != I * J || initial_params->cols() != P)) {
    throw ConfigError("initial parameter swarm must have islands*J rows");
  }

  std::vector<std::optional<FilterOutput>> runs(I);
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < I; ++i) {
    Matrix slice;
    if (initial_params != nullptr) {
      slice = Matrix(J, P);
      std::copy(initial_params->data().begin() + static_cast<std::ptrdiff_t>(i * J * P),
                initial_params->data().begin() + static_cast<std::ptrdiff_t>((i + 1) * J * P), slice.data().begin());
    }
    try {
      runs[i] = girf_filter(problem, config, rng.derive(Purpose::kIsland, i),
                            initial_params != nullptr ? &slice : nullptr, perturbation);
    } catch (const FilterError&) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < I; ++i) {
    if (runs[i]) ok.push_back(i);
  }
  if (ok.empty()) std::rethrow_exception(first_error);

  const auto& grid = problem.grid;
  const std::size_t K = grid.num_steps();
  const std::size_t d = problem.model.state_dim();
  FilterOutput out;
  out.steps_per_interval = grid.steps_per_interval();
  out.cond_loglik.assign(K, 0.0);
  out.ess.assign(K, 0.0);
  out.island_loglik.assign(I, kNegInf);
  if (config.record_filter_means) out.filter_means = Matrix(grid.num_observations(), d);

  std::vector<double> running(ok.size(), 0.0);
  double prev_combined = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    double ess_sum = 0.0;
    for (std::size_t a = 0; a < ok.size(); ++a) {
      running[a] += runs[ok[a]]->cond_loglik[k - 1];
      ess_sum += runs[ok[a]]->ess[k - 1];
    }
    const double combined = logsumexp(running) - std::log(static_cast<double>(I));
    out.cond_loglik[k - 1] = combined - prev_combined;
    prev_combined = combined;
    out.ess[k - 1] = ess_sum / static_cast<double>(ok.size());

    const auto& p = grid.point(k);
    if (p.is_observation && out.filter_means) {
      const NormalizedWeights w = normalize_log_weights(running);
      auto row = out.filter_means->row(p.observation_index - 1);
      for (std::size_t a = 0; a < ok.size(); ++a) {
        const auto src = runs[ok[a]]->filter_means->row(p.observation_index - 1);
        for (std::size_t i = 0; i < d; ++i) row[i] += w.probabilities[a] * src[i];
      }
    }
  }
  double total = 0.0;
  for (double c : out.cond_loglik) total += c;
  out.loglik = total;
  for (std::size_t a = 0; a < ok.size(); ++a) out.island_loglik[ok[a]] = running[a];

  // Pool the island swarms with island likelihood weights, resample to J.
  std::vector<double> pool_lw(I * J, kNegInf);
  for (std::size_t a = 0; a < ok.size(); ++a) {
    for (std::size_t j = 0; j < J; ++j) pool_lw[ok[a] * J + j] = running[a];
  }
  const NormalizedWeights pw = normalize_log_weights(pool_lw);
  RngStream r = rng.derive(Purpose::kPool);
  std::vector<std::size_t> idx = config.scheme == ResampleScheme::kSystematic
                                     ? systematic_ancestors(pw.probabilities, r.uniform(), J)
                                     : multinomial_ancestors(pw.probabilities, J, r);
  Matrix pooled_states(J, d);
  out.terminal_swarm.log_guide.resize(J);
  out.terminal_swarm.log_weights.assign(J, 0.0);
  out.terminal_swarm.ancestors = idx;
  for (std::size_t j = 0; j < J; ++j) {
    const auto& src = *runs[idx[j] / J];
    const std::size_t row = idx[j] % J;
    const auto x = src.terminal_swarm.states.row(row);
    std::copy(x.begin(), x.end(), pooled_states.row(j).begin());
    out.terminal_swarm.log_guide[j] = src.terminal_swarm.log_guide[row];
  }
  out.terminal_swarm.time = grid.time(K);
  out.terminal_swarm.states = std::move(pooled_states);

  out.terminal_params = Matrix(I * J, P);
  for (std::size_t i = 0; i < I; ++i) {
    const std::size_t offset = i * J * P;
    if (runs[i]) {
      std::copy(runs[i]->terminal_params.data().begin(), runs[i]->terminal_params.data().end(),
                out.terminal_params.data().begin() + static_cast<std::ptrdiff_t>(offset));
    } else if (initial_params != nullptr) {
      std::copy(initial_params->data().begin() + static_cast<std::ptrdiff_t>(offset),
                initial_params->data().begin() + static_cast<std::ptrdiff_t>(offset + J * P),
                out.terminal_params.data().begin() + static_cast<std::ptrdiff_t>(offset));
    } else {
      const auto base = problem.params.values();
      for (std::size_t j = 0; j < J; ++j) std::copy(base.begin(), base.end(), out.terminal_params.row(i * J + j).begin());
    }
  }
  return out;
}

FilterOutput bootstrap_filter(const FilterProblem& problem, std::size_t J, ResampleScheme scheme,
                              const RngStream& rng) {
  const auto& model = problem.model;
  const auto& grid = problem.grid;
  if (J < 2) throw ConfigError("filter.J must be >= 2");
  check_problem(problem, 1);
  const auto theta = problem.params.values();
  const std::size_t d = model.state_dim();
  const std::size_t N = grid.num_observations();

  Matrix states(J, d);
  parallel_for(J, [&](std::size_t j) {
    RngStream r = rng.derive(Purpose::kInit, j);
    model.init_sample(theta, states.row(j), r);
  });

  FilterOutput out;
  out.cond_loglik.assign(N, 0.0);
  out.ess.assign(N, 0.0);
  std::vector<double> lw(J);
  for (std::size_t k = 1; k <= N; ++k) {
    parallel_for(J, [&](std::size_t j) {
      auto x = states.row(j);
      if (k > 1) model.reset_accumulators(x);
      RngStream r = rng.derive(Purpose::kPropagate, k, j);
      model.transition_sample(theta, grid.time(k - 1), grid.time(k), x, r);
      lw[j] = model.measurement_logdensity(theta, k, problem.data.at(k), x);
    });
    const NormalizedWeights nw = normalize_at(lw, k);
    out.cond_loglik[k - 1] = nw.log_mean_weight;
    out.ess[k - 1] = ess(nw.probabilities);
    RngStream r = rng.derive(Purpose::kResample, k);
    const auto ancestors = resample_ancestors(nw.probabilities, scheme, r);
    states = states.gather(ancestors);
    if (k == N) {
      out.terminal_swarm.log_weights = lw;
      out.terminal_swarm.ancestors = ancestors;
    }
  }
  double total = 0.0;
  for (double c : out.cond_loglik) total += c;
  out.loglik = total;
  out.island_loglik = {total};
  out.terminal_swarm.time = grid.time(N);
  out.terminal_swarm.states = std::move(states);
  out.terminal_params = Matrix(J, theta.size());
  for (std::size_t j = 0; j < J; ++j) std::copy(theta.begin(), theta.end(), out.terminal_params.row(j).begin());
  return out;
}

}  // namespace girf
