#include "girf/oracles/enkf.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "girf/errors.hpp"
#include "girf/parallel.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

EnkfOutput enkf_filter(const Model& model, const ParamVector& params, const ObservationSeries& data, double t0,
                       const std::vector<double>& obs_times, std::size_t J, const RngStream& rng) {
  if (J < 2) throw ConfigError("enkf: need at least two members");
  if (data.size() != obs_times.size() || data.dim() != model.obs_dim()) {
    throw ConfigError("enkf: data do not match the observation times or model");
  }
  const auto theta = params.values();
  const std::size_t d = model.state_dim();
  const std::size_t dy = model.obs_dim();
  const std::size_t N = obs_times.size();
  const double inv = 1.0 / static_cast<double>(J - 1);

  Matrix x(J, d);
  parallel_for(J, [&](std::size_t j) {
    RngStream r = rng.derive(Purpose::kInit, j);
    model.init_sample(theta, x.row(j), r);
  });

  EnkfOutput out;
  out.filter_means = Matrix(N, d);
  out.cond_loglik.assign(N, 0.0);
  Matrix ym(J, dy);
  std::vector<double> mean_state(d), rvar(dy);

  for (std::size_t n = 1; n <= N; ++n) {
    const double t_prev = n == 1 ? t0 : obs_times[n - 2];
    parallel_for(J, [&](std::size_t j) {
      auto xj = x.row(j);
      if (n > 1) model.reset_accumulators(xj);
      RngStream r = rng.derive(Purpose::kPropagate, n, j);
      model.transition_sample(theta, t_prev, obs_times[n - 1], xj, r);
      model.measurement_mean(theta, n, xj, ym.row(j));
    });

    Eigen::Map<RowMatrix> X(x.data().data(), static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(d));
    Eigen::Map<RowMatrix> Y(ym.data().data(), static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(dy));
    const Eigen::RowVectorXd xbar = X.colwise().mean();
    const Eigen::RowVectorXd ybar = Y.colwise().mean();
    const RowMatrix Ax = X.rowwise() - xbar;
    const RowMatrix Ay = Y.rowwise() - ybar;
    const Eigen::MatrixXd cxy = inv * (Ax.transpose() * Ay);
    Eigen::MatrixXd cyy = inv * (Ay.transpose() * Ay);

    for (std::size_t i = 0; i < d; ++i) mean_state[i] = xbar[static_cast<Eigen::Index>(i)];
    model.measurement_variance(theta, n, mean_state, rvar);
    const double reg = 1e-8 * cyy.trace();
    Eigen::MatrixXd S = cyy;
    for (std::size_t i = 0; i < dy; ++i) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += rvar[i] + reg;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw SingularInnovation("enkf: SingularCovariance at observation " + std::to_string(n));
    }

    const auto y = data.at(n);
    Eigen::VectorXd r(static_cast<Eigen::Index>(dy));
    for (std::size_t i = 0; i < dy; ++i) r[static_cast<Eigen::Index>(i)] = y[i] - ybar[static_cast<Eigen::Index>(i)];
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(r);
    out.cond_loglik[n - 1] =
        -0.5 * (static_cast<double>(dy) * kLogTwoPi + 2.0 * L.diagonal().array().log().sum() + z.squaredNorm());

    // Perturbed-observation update: x_j += K (y + eps_j - h(x_j)).
    const Eigen::MatrixXd Kt = llt.solve(cxy.transpose());  // dy x d
    RowMatrix V(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(dy));
    parallel_for(J, [&](std::size_t j) {
      RngStream e = rng.derive(Purpose::kEnsemble, n, j);
      const auto row = static_cast<Eigen::Index>(j);
      for (std::size_t i = 0; i < dy; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        V(row, c) = y[i] + std::sqrt(rvar[i]) * e.normal() - Y(row, c);
      }
    });
    X += V * Kt;

    const Eigen::RowVectorXd xpost = X.colwise().mean();
    for (std::size_t i = 0; i < d; ++i) out.filter_means(n - 1, i) = xpost[static_cast<Eigen::Index>(i)];
  }
  double total = 0.0;
  for (double c : out.cond_loglik) total += c;
  out.loglik = total;
  return out;
}

}  // namespace girf
