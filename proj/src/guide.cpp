#include "girf/guide.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "girf/errors.hpp"
#include "girf/parallel.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

constexpr double kXiFloor = 1e-12;

double quantile(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double target_power(const TimeGrid& grid, PowerSchedule schedule, double t_now, std::size_t m, std::size_t B) {
  if (schedule == PowerSchedule::kAllOnes) return 1.0;
  const std::size_t start = m > B ? m - B : 0;
  return lookahead_power(t_now, grid.obs_time(m), grid.obs_time(start));
}

void check_finite(double log_u, std::size_t k) {
  if (std::isnan(log_u)) throw NonFiniteGuide("guide value is NaN at grid index " + std::to_string(k));
}

class BootstrapRun final : public GuideRun {
 public:
  void evaluate(std::size_t k, const Matrix&, const Matrix&, std::span<const double> log_g, const RngStream&,
                std::span<double> log_u) override {
    if (log_g.empty()) throw ConfigError("bootstrap guide needs one step per interval (grid index " +
                                         std::to_string(k) + ")");
    std::copy(log_g.begin(), log_g.end(), log_u.begin());
  }
};

class BootstrapGuide final : public Guide {
 public:
  std::string name() const override { return "bootstrap"; }
  std::optional<std::size_t> forced_steps() const override { return 1; }
  std::unique_ptr<GuideRun> start(const GuideContext&, std::size_t) const override {
    return std::make_unique<BootstrapRun>();
  }
};

class ApfRun final : public GuideRun {
 public:
  explicit ApfRun(const GuideContext& ctx) : ctx_(ctx) {}

  void evaluate(std::size_t k, const Matrix& states, const Matrix& thetas, std::span<const double> log_g,
                const RngStream&, std::span<double> log_u) override {
    if (log_g.empty()) throw ConfigError("APF guide needs one step per interval");
    const std::size_t n_next = ctx_.grid.step_interval(k) + 2;
    if (n_next > ctx_.grid.num_observations()) {
      std::copy(log_g.begin(), log_g.end(), log_u.begin());
      return;
    }
    const std::size_t target = n_next;
    parallel_for(states.rows(), [&](std::size_t j) {
      const auto theta = thetas.row(j);
      const Matrix mu = skeleton_forecasts(ctx_.model, theta, states.row(j), k, {&target, 1}, ctx_.grid);
      const double ahead = ctx_.model.measurement_logdensity(theta, target, ctx_.data.at(target), mu.row(0));
      log_u[j] = log_g[j] + ahead;
      check_finite(log_u[j], k);
    });
  }

 private:
  GuideContext ctx_;
};

class ApfGuide final : public Guide {
 public:
  std::string name() const override { return "apf"; }
  std::optional<std::size_t> forced_steps() const override { return 1; }
  std::unique_ptr<GuideRun> start(const GuideContext& ctx, std::size_t) const override {
    return std::make_unique<ApfRun>(ctx);
  }
};

class SimulationRun final : public GuideRun {
 public:
  SimulationRun(const GuideContext& ctx, const GuideSpec& spec, std::size_t particles)
      : ctx_(ctx), spec_(spec), caches_(particles) {}

  void evaluate(std::size_t k, const Matrix& states, const Matrix& thetas, std::span<const double> log_g,
                const RngStream& rng, std::span<double> log_u) override {
    const bool refresh =
        spec_.refresh_policy == RefreshPolicy::kEveryStep || ctx_.grid.step_substep(k) == 1;
    parallel_for(states.rows(), [&](std::size_t j) {
      const auto theta = thetas.row(j);
      if (refresh) {
        caches_[j] = build_forecast_cache(ctx_.model, theta, states.row(j), k, ctx_.grid, spec_,
                                          rng.derive(Purpose::kForecast, k, j));
      }
      const std::optional<double> g = log_g.empty() ? std::nullopt : std::optional<double>(log_g[j]);
      log_u[j] = guide_value(ctx_.model, theta, states.row(j), k, ctx_.grid, ctx_.data, spec_, caches_[j], g);
    });
  }

  void resampled(std::span<const std::size_t> ancestors) override {
    std::vector<ForecastCache> next(ancestors.size());
    for (std::size_t j = 0; j < ancestors.size(); ++j) next[j] = caches_[ancestors[j]];
    caches_.swap(next);
  }

 private:
  GuideContext ctx_;
  GuideSpec spec_;
  std::vector<ForecastCache> caches_;
};

class SimulationGuide final : public Guide {
 public:
  explicit SimulationGuide(GuideSpec spec) : spec_(spec) { spec_.validate(); }
  std::string name() const override { return "simulation"; }
  std::unique_ptr<GuideRun> start(const GuideContext& ctx, std::size_t particles) const override {
    return std::make_unique<SimulationRun>(ctx, spec_, particles);
  }

 private:
  GuideSpec spec_;
};

// Forecast covariance of one target at the base parameters, factored once
// per grid step and shared by all particles with those parameters.
struct CbmFactor {
  std::size_t target = 0;
  double tau = 0.0;
  double power = 1.0;
  bool diagonal = true;
  double var = 0.0;        // diagonal case
  double log_norm = 0.0;   // -0.5 (d log 2pi + log det)
  std::vector<double> l;   // row-major lower factor, exact case
};

class CbmRun final : public GuideRun {
 public:
  CbmRun(const GuideContext& ctx, const CorrelatedBrownianMotion& model, std::size_t B, CbmGuideCovariance cov,
         PowerSchedule schedule)
      : ctx_(ctx), model_(model), B_(B), cov_(cov), schedule_(schedule), base_(ctx.params.values()) {}

  void evaluate(std::size_t k, const Matrix& states, const Matrix& thetas, std::span<const double> log_g,
                const RngStream&, std::span<double> log_u) override {
    const auto& grid = ctx_.grid;
    const double t_now = grid.time(k);
    const bool obs_step = !log_g.empty();
    const auto targets = guide_targets(grid, k, B_);
    const std::size_t d = model_.state_dim();
    const double alpha = base_[CorrelatedBrownianMotion::kAlpha];
    const double obs_var = base_[CorrelatedBrownianMotion::kObsSd] * base_[CorrelatedBrownianMotion::kObsSd];

    std::vector<CbmFactor> factors;
    for (std::size_t b = obs_step ? 1 : 0; b < targets.size(); ++b) {
      CbmFactor f;
      f.target = targets[b];
      f.tau = grid.obs_time(f.target) - t_now;
      f.power = target_power(grid, schedule_, t_now, f.target, B_);
      f.diagonal = cov_ == CbmGuideCovariance::kDiagonal || alpha == 0.0;
      if (f.diagonal) {
        f.var = f.tau + obs_var;
        f.log_norm = -0.5 * static_cast<double>(d) * (kLogTwoPi + std::log(f.var));
      } else {
        Eigen::MatrixXd c = f.tau * model_.correlation(alpha);
        c.diagonal().array() += obs_var;
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() != Eigen::Success) throw CholeskyFailure("cbm guide: forecast covariance not PD");
        const Eigen::MatrixXd lm = llt.matrixL();
        f.l.resize(d * d);
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            f.l[i * d + j] = lm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          }
        }
        f.log_norm = -0.5 * (static_cast<double>(d) * kLogTwoPi + 2.0 * lm.diagonal().array().log().sum());
      }
      factors.push_back(std::move(f));
    }

    parallel_for(states.rows(), [&](std::size_t j) {
      const auto theta = thetas.row(j);
      const auto x = states.row(j);
      const bool shared = std::equal(theta.begin(), theta.end(), base_.begin());
      double total = obs_step ? log_g[j] : 0.0;
      thread_local std::vector<double> z;
      z.resize(d);
      for (const auto& f : factors) {
        const ObsView y = ctx_.data.at(f.target);
        double value;
        if (!shared) {
          const double horizon = grid.obs_time(f.target);
          value = cov_ == CbmGuideCovariance::kExact ? cbm_guide_exact(model_, theta, x, t_now, {&horizon, 1}, {&y, 1})
                                                     : cbm_guide_diag(model_, theta, x, t_now, {&horizon, 1}, {&y, 1});
        } else {
          const double shift = base_[CorrelatedBrownianMotion::kDrift] * f.tau;
          double q = 0.0;
          if (f.diagonal) {
            for (std::size_t i = 0; i < d; ++i) {
              const double r = y[i] - x[i] - shift;
              q += r * r;
            }
            q /= f.var;
          } else {
            for (std::size_t i = 0; i < d; ++i) {
              const double* row = f.l.data() + i * d;
              double acc = y[i] - x[i] - shift;
              for (std::size_t m = 0; m < i; ++m) acc -= row[m] * z[m];
              z[i] = acc / row[i];
              q += z[i] * z[i];
            }
          }
          value = f.log_norm - 0.5 * q;
        }
        total += f.power * value;
      }
      log_u[j] = total;
      check_finite(total, k);
    });
  }

 private:
  GuideContext ctx_;
  const CorrelatedBrownianMotion& model_;
  std::size_t B_;
  CbmGuideCovariance cov_;
  PowerSchedule schedule_;
  std::vector<double> base_;
};

class CbmGuide final : public Guide {
 public:
  CbmGuide(std::size_t B, CbmGuideCovariance cov, PowerSchedule schedule) : B_(B), cov_(cov), schedule_(schedule) {
    if (B_ < 1) throw ConfigError("guide.B must be >= 1");
  }
  std::string name() const override {
    return cov_ == CbmGuideCovariance::kExact ? "cbm-exact" : "cbm-diagonal";
  }
  std::unique_ptr<GuideRun> start(const GuideContext& ctx, std::size_t) const override {
    const auto* cbm = dynamic_cast<const CorrelatedBrownianMotion*>(&ctx.model);
    if (cbm == nullptr) throw ConfigError("analytic Brownian guide requires the cbm model");
    return std::make_unique<CbmRun>(ctx, *cbm, B_, cov_, schedule_);
  }

 private:
  std::size_t B_;
  CbmGuideCovariance cov_;
  PowerSchedule schedule_;
};

}  // namespace

std::string_view to_string(PowerSchedule p) {
  return p == PowerSchedule::kAllOnes ? "all-ones" : "linear-fraction";
}

std::string_view to_string(RefreshPolicy p) { return p == RefreshPolicy::kEveryStep ? "every-step" : "every-s1"; }

PowerSchedule parse_power_schedule(std::string_view s) {
  if (s == "linear-fraction") return PowerSchedule::kLinearFraction;
  if (s == "all-ones") return PowerSchedule::kAllOnes;
  throw ConfigError("unknown power schedule '" + std::string(s) + "'");
}

RefreshPolicy parse_refresh_policy(std::string_view s) {
  if (s == "every-s1") return RefreshPolicy::kEveryS1;
  if (s == "every-step") return RefreshPolicy::kEveryStep;
  throw ConfigError("unknown refresh policy '" + std::string(s) + "'");
}

double GuideSpec::effective_inflation() const {
  if (variance_inflation > 0.0) return variance_inflation;
  return 1.0 + 2.0 / std::sqrt(static_cast<double>(n_variability_sims));
}

void GuideSpec::validate() const {
  if (B < 1) throw ConfigError("guide.B must be >= 1");
  if (n_variability_sims < 2) throw ConfigError("guide.n_variability_sims must be >= 2");
  if (variance_inflation != 0.0 && variance_inflation < 1.0) {
    throw ConfigError("guide.variance_inflation must be >= 1");
  }
}

double lookahead_power(double t_now, double t_target, double t_start) {
  const double span = t_target - t_start;
  if (span <= 0.0) return 1.0;
  return std::clamp(1.0 - (t_target - t_now) / span, 0.0, 1.0);
}

double rescale_variability(double xi_anchor, double anchor, double horizon, double t_now) {
  const double span = horizon - anchor;
  if (span <= 0.0) return 0.0;
  return xi_anchor * (horizon - t_now) / span;
}

std::vector<std::size_t> guide_targets(const TimeGrid& grid, std::size_t k, std::size_t B) {
  std::vector<std::size_t> out;
  if (k == 0) return out;
  const std::size_t n = grid.step_interval(k);
  const std::size_t last = std::min(n + B, grid.num_observations());
  for (std::size_t m = n + 1; m <= last; ++m) out.push_back(m);
  return out;
}

Matrix skeleton_forecasts(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                          std::span<const std::size_t> targets, const TimeGrid& grid) {
  Matrix out(targets.size(), x.size());
  thread_local std::vector<double> cur;
  cur.assign(x.begin(), x.end());
  double t = grid.time(k);
  bool at_obs = grid.point(k).is_observation;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const double t_m = grid.obs_time(targets[b]);
    if (t_m > t) {
      if (at_obs) model.reset_accumulators(cur);
      model.skeleton_step(theta, t, t_m, cur);
      t = t_m;
      at_obs = true;
    }
    std::copy(cur.begin(), cur.end(), out.row(b).begin());
  }
  return out;
}

Matrix forecast_variability(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                            std::span<const std::size_t> targets, const TimeGrid& grid, std::size_t n_sims,
                            double inflation, const RngStream& rng) {
  const std::size_t dy = model.obs_dim();
  const std::size_t nb = targets.size();
  // samples[(b * dy + i) * n_sims + r]
  std::vector<double> samples(nb * dy * n_sims);
  std::vector<double> cur(x.size());
  std::vector<double> mean(dy);
  for (std::size_t r = 0; r < n_sims; ++r) {
    RngStream stream = rng.derive({r});
    cur.assign(x.begin(), x.end());
    double t = grid.time(k);
    bool at_obs = grid.point(k).is_observation;
    for (std::size_t b = 0; b < nb; ++b) {
      const double t_m = grid.obs_time(targets[b]);
      if (t_m > t) {
        if (at_obs) model.reset_accumulators(cur);
        model.transition_sample(theta, t, t_m, cur, stream);
        t = t_m;
        at_obs = true;
      }
      model.measurement_mean(theta, targets[b], cur, mean);
      for (std::size_t i = 0; i < dy; ++i) samples[(b * dy + i) * n_sims + r] = mean[i];
    }
  }

  Matrix xi(nb, dy);
  const bool quantile_family = model.measurement_family() == MeasurementFamily::kQuantileCalibrated;
  std::vector<double> column(n_sims);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < dy; ++i) {
      const double* v = samples.data() + (b * dy + i) * n_sims;
      if (quantile_family) {
        column.assign(v, v + n_sims);
        const double iqr = (quantile(column, 0.75) - quantile(column, 0.25)) * inflation;
        xi(b, i) = 0.55 * iqr * iqr;
      } else {
        double m = 0.0;
        for (std::size_t r = 0; r < n_sims; ++r) m += v[r];
        m /= static_cast<double>(n_sims);
        double ss = 0.0;
        for (std::size_t r = 0; r < n_sims; ++r) ss += (v[r] - m) * (v[r] - m);
        xi(b, i) = ss / static_cast<double>(n_sims - 1);
      }
    }
  }
  return xi;
}

double forecast_factor(const Model& model, ParamView theta, std::size_t obs_index, ObsView y, ConstStateView mu,
                       std::span<const double> xi) {
  const std::size_t dy = model.obs_dim();
  thread_local std::vector<double> center, var;
  center.resize(dy);
  var.resize(dy);
  model.measurement_mean(theta, obs_index, mu, center);
  model.measurement_variance(theta, obs_index, mu, var);
  double total = 0.0;
  for (std::size_t i = 0; i < dy; ++i) {
    const double xi_i = xi.empty() ? 0.0 : xi[i];
    total += model.family_logdensity(theta, obs_index, i, y[i], center[i], xi_i + kXiFloor + var[i]);
  }
  return total;
}

ForecastCache build_forecast_cache(const Model& model, ParamView theta, ConstStateView x, std::size_t k,
                                   const TimeGrid& grid, const GuideSpec& spec, const RngStream& rng) {
  ForecastCache cache;
  cache.anchor = grid.time(k);
  cache.targets = guide_targets(grid, k, spec.B);
  cache.xi = forecast_variability(model, theta, x, k, cache.targets, grid, spec.n_variability_sims,
                                  spec.effective_inflation(), rng);
  return cache;
}

double guide_value(const Model& model, ParamView theta, ConstStateView x, std::size_t k, const TimeGrid& grid,
                   const ObservationSeries& data, const GuideSpec& spec, const ForecastCache& cache,
                   std::optional<double> log_g_now) {
  if (k == 0) return 0.0;
  const bool obs_step = grid.point(k).is_observation;
  const double t_now = grid.time(k);
  const auto targets = guide_targets(grid, k, spec.B);
  const Matrix mu = skeleton_forecasts(model, theta, x, k, targets, grid);
  const std::size_t dy = model.obs_dim();
  thread_local std::vector<double> xi;
  xi.resize(dy);
  double total = 0.0;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const std::size_t m = targets[b];
    if (obs_step && b == 0) {
      total += log_g_now ? *log_g_now : model.measurement_logdensity(theta, m, data.at(m), x);
      continue;
    }
    const auto it = std::find(cache.targets.begin(), cache.targets.end(), m);
    if (it == cache.targets.end()) {
      throw NonFiniteGuide("forecast cache does not cover observation " + std::to_string(m));
    }
    const auto row = cache.xi.row(static_cast<std::size_t>(it - cache.targets.begin()));
    const double horizon = grid.obs_time(m);
    for (std::size_t i = 0; i < dy; ++i) xi[i] = rescale_variability(row[i], cache.anchor, horizon, t_now);
    const double eta = target_power(grid, spec.power_schedule, t_now, m, spec.B);
    total += eta * forecast_factor(model, theta, m, data.at(m), mu.row(b), xi);
  }
  check_finite(total, k);
  return total;
}

GuidePtr make_bootstrap_guide() { return std::make_shared<BootstrapGuide>(); }
GuidePtr make_apf_guide() { return std::make_shared<ApfGuide>(); }
GuidePtr make_simulation_guide(GuideSpec spec) { return std::make_shared<SimulationGuide>(spec); }
GuidePtr make_cbm_guide(std::size_t B, CbmGuideCovariance covariance, PowerSchedule schedule) {
  return std::make_shared<CbmGuide>(B, covariance, schedule);
}

}  // namespace girf
