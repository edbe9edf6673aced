#include "girf/models/lorenz96.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "girf/errors.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

constexpr double kBlowUp = 1e6;

void check_state(std::span<const double> x) {
  for (double v : x) {
    if (!(std::abs(v) <= kBlowUp)) throw ModelError("lorenz96: NonFiniteState (state left |x| <= 1e6)");
  }
}

}  // namespace

void lorenz_drift(std::span<const double> x, double forcing, std::span<double> out) {
  const std::size_t d = x.size();
  if (d < 4) throw DomainError("lorenz96: DimensionTooSmall (d must be >= 4)");
  for (std::size_t i = 0; i < d; ++i) {
    const double next = x[(i + 1) % d];
    const double prev = x[(i + d - 1) % d];
    const double prev2 = x[(i + d - 2) % d];
    out[i] = (next - prev2) * prev - x[i] + forcing;
  }
}

Lorenz96::Lorenz96(std::size_t dim, double forcing, double sigma_p, double sigma_m, double euler_dt,
                   SkeletonScheme skeleton)
    : dim_(dim), euler_dt_(euler_dt), skeleton_(skeleton) {
  if (dim_ < 4) throw ConfigError("lorenz96: DimensionTooSmall (d must be >= 4)");
  if (!(euler_dt_ > 0.0)) throw ConfigError("lorenz96: euler_dt must be positive");
  defaults_.add("F", forcing, Transform::kIdentity, ParamKind::kRegular)
      .add("sigma_p", sigma_p, Transform::kLog, ParamKind::kRegular)
      .add("sigma_m", sigma_m, Transform::kLog, ParamKind::kRegular);
}

std::size_t Lorenz96::step_count(double interval) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(interval / euler_dt_ - 1e-9)));
}

void Lorenz96::init_sample(ParamView, StateView x, RngStream&) const {
  std::fill(x.begin(), x.end(), 0.0);
  x[dim_ - 1] = 0.01;
}

void Lorenz96::transition_sample(ParamView theta, double t_from, double t_to, StateView x, RngStream& rng) const {
  const double interval = t_to - t_from;
  if (interval <= 0.0) return;
  const std::size_t steps = step_count(interval);
  const double h = interval / static_cast<double>(steps);
  const double noise = theta[kSigmaP] * std::sqrt(h);
  thread_local std::vector<double> drift;
  drift.resize(dim_);
  for (std::size_t k = 0; k < steps; ++k) {
    lorenz_drift(x, theta[kForcing], drift);
    for (std::size_t i = 0; i < dim_; ++i) x[i] += drift[i] * h + noise * rng.normal();
  }
  check_state(x);
}

void Lorenz96::skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const {
  const double interval = t_to - t_from;
  if (interval <= 0.0) return;
  const std::size_t steps = step_count(interval);
  const double h = interval / static_cast<double>(steps);
  const double forcing = theta[kForcing];
  thread_local std::vector<double> k1, k2, k3, k4, tmp;
  k1.resize(dim_);
  if (skeleton_ == SkeletonScheme::kEuler) {
    for (std::size_t k = 0; k < steps; ++k) {
      lorenz_drift(x, forcing, k1);
      for (std::size_t i = 0; i < dim_; ++i) x[i] += k1[i] * h;
    }
  } else {
    k2.resize(dim_);
    k3.resize(dim_);
    k4.resize(dim_);
    tmp.resize(dim_);
    for (std::size_t k = 0; k < steps; ++k) {
      lorenz_drift(x, forcing, k1);
      for (std::size_t i = 0; i < dim_; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      lorenz_drift(tmp, forcing, k2);
      for (std::size_t i = 0; i < dim_; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      lorenz_drift(tmp, forcing, k3);
      for (std::size_t i = 0; i < dim_; ++i) tmp[i] = x[i] + h * k3[i];
      lorenz_drift(tmp, forcing, k4);
      for (std::size_t i = 0; i < dim_; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  check_state(x);
}

double Lorenz96::measurement_logdensity(ParamView theta, std::size_t, ObsView y, ConstStateView x) const {
  const double var = theta[kSigmaM] * theta[kSigmaM];
  const double log_norm = -0.5 * (kLogTwoPi + std::log(var));
  double total = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double r = y[i] - x[i];
    total += log_norm - 0.5 * r * r / var;
  }
  return total;
}

void Lorenz96::measurement_sample(ParamView theta, std::size_t, ConstStateView x, std::span<double> y,
                                  RngStream& rng) const {
  for (std::size_t i = 0; i < dim_; ++i) y[i] = x[i] + theta[kSigmaM] * rng.normal();
}

void Lorenz96::measurement_mean(ParamView, std::size_t, ConstStateView x, std::span<double> mean) const {
  std::copy(x.begin(), x.end(), mean.begin());
}

void Lorenz96::measurement_variance(ParamView theta, std::size_t, ConstStateView, std::span<double> variance) const {
  std::fill(variance.begin(), variance.end(), theta[kSigmaM] * theta[kSigmaM]);
}

double Lorenz96::family_logdensity(ParamView, std::size_t, std::size_t, double y, double center,
                                   double variance) const {
  return normal_logpdf(y, center, variance);
}

}  // namespace girf
