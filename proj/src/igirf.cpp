#include "girf/igirf.hpp"

#include <algorithm>
#include <cmath>

#include "girf/errors.hpp"

namespace girf {

void IgirfConfig::validate(const ParamVector& layout) const {
  if (M < 1) throw ConfigError("igirf.M must be >= 1");
  if (!(cooling > 0.0) || cooling > 1.0) throw ConfigError("igirf.cooling must be in (0, 1]");
  if (sigma.size() != layout.size()) throw ConfigError("igirf.sigma must give one sd per parameter");
  for (double s : sigma) {
    if (!(s >= 0.0)) throw ConfigError("igirf.sigma entries must be >= 0");
  }
  filter.validate();
}

double IgirfConfig::sigma_at(std::size_t i, std::size_t m) const {
  return sigma[i] * std::pow(cooling, static_cast<double>(m - 1));
}

Matrix replicate_params(const ParamVector& params, std::size_t rows) {
  const auto v = params.values();
  Matrix out(rows, v.size());
  for (std::size_t j = 0; j < rows; ++j) std::copy(v.begin(), v.end(), out.row(j).begin());
  return out;
}

Matrix perturb_params(const Matrix& swarm, const ParamVector& layout, std::span<const double> sd, bool initial,
                      const RngStream& rng) {
  Matrix out = swarm;
  for (std::size_t j = 0; j < out.rows(); ++j) {
    RngStream r = rng.derive(initial ? Purpose::kPerturbInit : Purpose::kPerturbStep, j);
    auto row = out.row(j);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto& e = layout[i];
      if (e.kind == ParamKind::kFixed || (!initial && e.kind == ParamKind::kIvp) || !(sd[i] > 0.0)) continue;
      row[i] = from_estimation(e.transform, to_estimation(e.transform, row[i]) + sd[i] * r.normal());
    }
  }
  return out;
}

ParamVector swarm_estimate(const Matrix& swarm, const ParamVector& layout, PointEstimate kind) {
  ParamVector out = layout;
  std::vector<double> column(swarm.rows());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout[i];
    if (e.kind == ParamKind::kFixed) continue;
    for (std::size_t j = 0; j < swarm.rows(); ++j) column[j] = to_estimation(e.transform, swarm(j, i));
    double est;
    if (kind == PointEstimate::kMean) {
      est = 0.0;
      for (double v : column) est += v;
      est /= static_cast<double>(column.size());
    } else {
      std::sort(column.begin(), column.end());
      const std::size_t h = column.size() / 2;
      est = column.size() % 2 == 1 ? column[h] : 0.5 * (column[h - 1] + column[h]);
    }
    out.set_value(i, from_estimation(e.transform, est));
  }
  return out;
}

std::vector<double> swarm_sd(const Matrix& swarm, const ParamVector& layout) {
  std::vector<double> out(layout.size(), 0.0);
  const auto J = static_cast<double>(swarm.rows());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout[i];
    if (e.kind == ParamKind::kFixed || swarm.rows() < 2) continue;
    double mean = 0.0;
    for (std::size_t j = 0; j < swarm.rows(); ++j) mean += to_estimation(e.transform, swarm(j, i));
    mean /= J;
    double ss = 0.0;
    for (std::size_t j = 0; j < swarm.rows(); ++j) {
      const double r = to_estimation(e.transform, swarm(j, i)) - mean;
      ss += r * r;
    }
    out[i] = std::sqrt(ss / (J - 1.0));
  }
  return out;
}

IgirfResult igirf_run(const FilterProblem& problem, const IgirfConfig& config, const Matrix& init_swarm,
                      const RngStream& rng) {
  const auto& layout = problem.params;
  config.validate(layout);
  const std::size_t rows = config.filter.J * config.filter.islands;
  if (init_swarm.rows() != rows || init_swarm.cols() != layout.size()) {
    throw ConfigError("igirf: initial swarm must have J*islands rows and one column per parameter");
  }
  IgirfResult result;
  Matrix swarm = init_swarm;
  for (std::size_t m = 1; m <= config.M; ++m) {
    Perturbation pert;
    pert.initial_sd.assign(layout.size(), 0.0);
    pert.step_sd.assign(layout.size(), 0.0);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto kind = layout[i].kind;
      if (kind == ParamKind::kFixed) continue;
      pert.initial_sd[i] = config.sigma_at(i, m);
      if (kind == ParamKind::kRegular) pert.step_sd[i] = config.sigma_at(i, m);
    }
    FilterOutput out = run_islands(problem, config.filter, rng.derive(Purpose::kIteration, m), &swarm, &pert);
    swarm = std::move(out.terminal_params);
    result.loglik.push_back(out.loglik);
    result.swarm_means.push_back(swarm_estimate(swarm, layout, PointEstimate::kMean).values());
    result.swarm_sds.push_back(swarm_sd(swarm, layout));
  }
  result.point_estimate = swarm_estimate(swarm, layout, config.estimate);
  result.final_swarm = std::move(swarm);
  return result;
}

Matrix estimate_ivps(const FilterProblem& problem, std::size_t prefix, const IgirfConfig& config,
                     const Matrix& swarm, std::size_t passes, const RngStream& rng) {
  const auto& layout = problem.params;
  config.validate(layout);
  if (prefix < 1 || prefix > problem.data.size()) throw ConfigError("ivp prefix must be in 1..N");
  const std::vector<double> times(problem.grid.obs_times().begin(),
                                  problem.grid.obs_times().begin() + static_cast<std::ptrdiff_t>(prefix));
  const TimeGrid grid(problem.grid.t0(), times, problem.grid.steps_per_interval());
  const ObservationSeries data = problem.data.prefix(prefix);
  const FilterProblem sub{problem.model, layout, data, grid};

  Perturbation pert;
  pert.step_sd.assign(layout.size(), 0.0);
  Matrix current = swarm;
  for (std::size_t pass = 1; pass <= passes; ++pass) {
    pert.initial_sd.assign(layout.size(), 0.0);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (layout[i].kind == ParamKind::kIvp) pert.initial_sd[i] = config.sigma_at(i, pass);
    }
    FilterOutput out = run_islands(sub, config.filter, rng.derive(Purpose::kIteration, pass), &current, &pert);
    for (std::size_t j = 0; j < current.rows(); ++j) {
      for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].kind == ParamKind::kIvp) current(j, i) = out.terminal_params(j, i);
      }
    }
  }
  return current;
}

}  // namespace girf
