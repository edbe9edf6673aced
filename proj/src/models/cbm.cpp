#include "girf/models/cbm.hpp"

#include <cmath>
#include <vector>

#include "girf/errors.hpp"
#include "girf/stats.hpp"

namespace girf {

CorrelatedBrownianMotion::CorrelatedBrownianMotion(std::size_t dim, double alpha, double obs_sd, double drift,
                                                   double x0)
    : dim_(dim), alpha_(alpha) {
  if (dim_ < 1) throw ConfigError("cbm: dimension must be >= 1");
  defaults_.add("alpha", alpha, Transform::kIdentity, ParamKind::kFixed)
      .add("obs_sd", obs_sd, Transform::kLog, ParamKind::kRegular)
      .add("drift", drift, Transform::kIdentity, ParamKind::kFixed)
      .add("x0", x0, Transform::kIdentity, ParamKind::kFixed);
  chol_ = correlation_cholesky(alpha_);
}

Eigen::MatrixXd CorrelatedBrownianMotion::correlation(double alpha) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(dim_, dim_, alpha);
  a.diagonal().setOnes();
  return a;
}

Eigen::MatrixXd CorrelatedBrownianMotion::correlation_cholesky(double alpha) const {
  Eigen::LLT<Eigen::MatrixXd> llt(correlation(alpha));
  if (llt.info() != Eigen::Success) {
    throw CholeskyFailure("cbm: correlation matrix with alpha=" + std::to_string(alpha) +
                          " is not positive definite");
  }
  return llt.matrixL();
}

void CorrelatedBrownianMotion::init_sample(ParamView theta, StateView x, RngStream&) const {
  for (auto& v : x) v = theta[kX0];
}

void CorrelatedBrownianMotion::transition_sample(ParamView theta, double t_from, double t_to, StateView x,
                                                 RngStream& rng) const {
  const double delta = t_to - t_from;
  if (delta <= 0.0) return;
  const double scale = std::sqrt(delta);
  const double shift = theta[kDrift] * delta;
  const double alpha = theta[kAlpha];
  if (alpha == 0.0) {
    for (auto& v : x) v += shift + scale * rng.normal();
    return;
  }
  thread_local std::vector<double> z;
  z.resize(dim_);
  for (auto& v : z) v = rng.normal();
  Eigen::MatrixXd local;
  const Eigen::MatrixXd* chol = &chol_;
  if (alpha != alpha_) {
    local = correlation_cholesky(alpha);
    chol = &local;
  }
  const double* l = chol->data();  // column-major
  const std::size_t ld = dim_;
  for (std::size_t i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += l[j * ld + i] * z[j];
    x[i] += shift + scale * acc;
  }
}

void CorrelatedBrownianMotion::skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const {
  const double shift = theta[kDrift] * (t_to - t_from);
  if (shift == 0.0) return;
  for (auto& v : x) v += shift;
}

double CorrelatedBrownianMotion::measurement_logdensity(ParamView theta, std::size_t, ObsView y,
                                                        ConstStateView x) const {
  const double var = theta[kObsSd] * theta[kObsSd];
  const double log_norm = -0.5 * (kLogTwoPi + std::log(var));
  double total = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double r = y[i] - x[i];
    total += log_norm - 0.5 * r * r / var;
  }
  return total;
}

void CorrelatedBrownianMotion::measurement_sample(ParamView theta, std::size_t, ConstStateView x,
                                                  std::span<double> y, RngStream& rng) const {
  for (std::size_t i = 0; i < dim_; ++i) y[i] = x[i] + theta[kObsSd] * rng.normal();
}

void CorrelatedBrownianMotion::measurement_mean(ParamView, std::size_t, ConstStateView x,
                                                std::span<double> mean) const {
  std::copy(x.begin(), x.end(), mean.begin());
}

void CorrelatedBrownianMotion::measurement_variance(ParamView theta, std::size_t, ConstStateView,
                                                    std::span<double> variance) const {
  for (auto& v : variance) v = theta[kObsSd] * theta[kObsSd];
}

double CorrelatedBrownianMotion::family_logdensity(ParamView, std::size_t, std::size_t, double y, double center,
                                                   double variance) const {
  return normal_logpdf(y, center, variance);
}

double cbm_guide_exact(const CorrelatedBrownianMotion& model, ParamView theta, ConstStateView x, double t_now,
                       std::span<const double> horizons, std::span<const ObsView> ys) {
  const auto d = static_cast<Eigen::Index>(model.state_dim());
  const Eigen::MatrixXd a = model.correlation(theta[CorrelatedBrownianMotion::kAlpha]);
  const double obs_var = theta[CorrelatedBrownianMotion::kObsSd] * theta[CorrelatedBrownianMotion::kObsSd];
  double total = 0.0;
  for (std::size_t b = 0; b < horizons.size(); ++b) {
    const double tau = horizons[b] - t_now;
    Eigen::MatrixXd cov = tau * a;
    cov.diagonal().array() += obs_var;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw CholeskyFailure("cbm guide: forecast covariance not PD");
    Eigen::VectorXd r(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      r[i] = ys[b][static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)] -
             theta[CorrelatedBrownianMotion::kDrift] * tau;
    }
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(r);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    total += -0.5 * (static_cast<double>(d) * kLogTwoPi + log_det + z.squaredNorm());
  }
  return total;
}

double cbm_guide_diag(const CorrelatedBrownianMotion& model, ParamView theta, ConstStateView x, double t_now,
                      std::span<const double> horizons, std::span<const ObsView> ys) {
  const double obs_var = theta[CorrelatedBrownianMotion::kObsSd] * theta[CorrelatedBrownianMotion::kObsSd];
  double total = 0.0;
  for (std::size_t b = 0; b < horizons.size(); ++b) {
    const double tau = horizons[b] - t_now;
    const double var = tau + obs_var;
    for (std::size_t i = 0; i < model.state_dim(); ++i) {
      total += normal_logpdf(ys[b][i], x[i] + theta[CorrelatedBrownianMotion::kDrift] * tau, var);
    }
  }
  return total;
}

}  // namespace girf
