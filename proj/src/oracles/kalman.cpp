#include "girf/oracles/kalman.hpp"

#include <algorithm>
#include <cmath>

#include "girf/errors.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

struct Point {
  double time;
  std::size_t obs;  // 1-based observation used at this time, 0 if none
};

struct Forward {
  std::vector<Eigen::VectorXd> mp, mf;
  std::vector<Eigen::MatrixXd> pp, pf;
  std::vector<double> cond;
  double loglik = 0.0;
};

void symmetrize(Eigen::MatrixXd& m) { m = (0.5 * (m + m.transpose())).eval(); }

Forward forward(const LinearGaussianSpec& spec, const std::vector<Point>& points, const ObservationSeries& data) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Forward f;
  Eigen::VectorXd m = spec.m0;
  Eigen::MatrixXd P = spec.P0;
  double t = points.front().time;
  for (const auto& p : points) {
    const double dt = p.time - t;
    if (dt > 0.0) {
      m += spec.drift * dt;
      P += dt * spec.A;
    }
    t = p.time;
    f.mp.push_back(m);
    f.pp.push_back(P);
    if (p.obs > 0) {
      Eigen::MatrixXd S = P;
      S.diagonal().array() += spec.obs_var;
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      if (llt.info() != Eigen::Success) {
        throw SingularInnovation("kalman: innovation covariance not positive definite at observation " +
                                 std::to_string(p.obs));
      }
      const auto y = data.at(p.obs);
      Eigen::VectorXd r(d);
      for (Eigen::Index i = 0; i < d; ++i) r[i] = y[static_cast<std::size_t>(i)] - m[i];
      const Eigen::MatrixXd L = llt.matrixL();
      const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(r);
      const double log_det = 2.0 * L.diagonal().array().log().sum();
      const double inc = -0.5 * (static_cast<double>(d) * kLogTwoPi + log_det + z.squaredNorm());
      f.cond.push_back(inc);
      f.loglik += inc;
      const Eigen::MatrixXd K = llt.solve(P).transpose();
      m += K * r;
      const Eigen::MatrixXd IK = eye - K;
      P = IK * P * IK.transpose() + spec.obs_var * K * K.transpose();
      symmetrize(P);
    }
    f.mf.push_back(m);
    f.pf.push_back(P);
  }
  return f;
}

std::vector<Point> merge_points(double t0, const std::vector<double>& obs_times, std::size_t last,
                                const std::vector<double>& extra) {
  std::vector<Point> pts{{t0, 0}};
  for (std::size_t n = 0; n < obs_times.size(); ++n) pts.push_back({obs_times[n], n + 1 <= last ? n + 1 : 0});
  for (double t : extra) {
    if (t < t0) throw DomainError("kalman: requested time precedes t0");
    pts.push_back({t, 0});
  }
  std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.time < b.time; });
  std::vector<Point> unique;
  for (const auto& p : pts) {
    if (!unique.empty() && unique.back().time == p.time) {
      unique.back().obs = std::max(unique.back().obs, p.obs);
    } else {
      unique.push_back(p);
    }
  }
  return unique;
}

}  // namespace

void LinearGaussianSpec::validate() const {
  const auto d = A.rows();
  if (d < 1 || A.cols() != d || drift.size() != d || m0.size() != d || P0.rows() != d || P0.cols() != d) {
    throw ConfigError("linear-Gaussian spec has inconsistent dimensions");
  }
  if (!(obs_var > 0.0)) throw ConfigError("linear-Gaussian spec needs a positive observation variance");
}

LinearGaussianSpec cbm_linear_gaussian(const CorrelatedBrownianMotion& model, ParamView theta) {
  const auto d = static_cast<Eigen::Index>(model.state_dim());
  LinearGaussianSpec spec;
  spec.drift = Eigen::VectorXd::Constant(d, theta[CorrelatedBrownianMotion::kDrift]);
  spec.A = model.correlation(theta[CorrelatedBrownianMotion::kAlpha]);
  spec.obs_var = theta[CorrelatedBrownianMotion::kObsSd] * theta[CorrelatedBrownianMotion::kObsSd];
  spec.m0 = Eigen::VectorXd::Constant(d, theta[CorrelatedBrownianMotion::kX0]);
  spec.P0 = Eigen::MatrixXd::Zero(d, d);
  return spec;
}

KalmanResult kalman_filter(const LinearGaussianSpec& spec, double t0, const std::vector<double>& obs_times,
                           const ObservationSeries& data) {
  spec.validate();
  if (data.size() != obs_times.size() || data.dim() != spec.dim()) {
    throw ConfigError("kalman: data do not match the observation times or dimension");
  }
  const auto points = merge_points(t0, obs_times, obs_times.size(), {});
  const Forward f = forward(spec, points, data);
  KalmanResult out;
  out.loglik = f.loglik;
  out.cond_loglik = f.cond;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].obs == 0) continue;
    out.means.push_back(f.mf[i]);
    out.covariances.push_back(f.pf[i]);
  }
  return out;
}

std::vector<GaussianMoments> kalman_smoother(const LinearGaussianSpec& spec, double t0,
                                             const std::vector<double>& obs_times, const ObservationSeries& data,
                                             std::size_t last, const std::vector<double>& times) {
  spec.validate();
  last = std::min(last, obs_times.size());
  const auto points = merge_points(t0, obs_times, last, times);
  const Forward f = forward(spec, points, data);
  const std::size_t n = points.size();
  std::vector<Eigen::VectorXd> ms(n);
  std::vector<Eigen::MatrixXd> ps(n);
  ms[n - 1] = f.mf[n - 1];
  ps[n - 1] = f.pf[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    const Eigen::MatrixXd G = f.pp[i + 1].ldlt().solve(f.pf[i]).transpose();
    ms[i] = f.mf[i] + G * (ms[i + 1] - f.mp[i + 1]);
    ps[i] = f.pf[i] + G * (ps[i + 1] - f.pp[i + 1]) * G.transpose();
    symmetrize(ps[i]);
  }
  std::vector<GaussianMoments> out;
  for (double t : times) {
    const auto it = std::find_if(points.begin(), points.end(), [t](const Point& p) { return p.time == t; });
    const auto i = static_cast<std::size_t>(it - points.begin());
    out.push_back({ms[i], ps[i]});
  }
  return out;
}

GaussianMoments kalman_guided_oracle(const LinearGaussianSpec& spec, double t0, const std::vector<double>& obs_times,
                                     const ObservationSeries& data, double t, std::size_t B) {
  std::size_t last;
  if (B == 0) {
    last = static_cast<std::size_t>(std::upper_bound(obs_times.begin(), obs_times.end(), t) - obs_times.begin());
  } else {
    const auto before =
        static_cast<std::size_t>(std::lower_bound(obs_times.begin(), obs_times.end(), t) - obs_times.begin());
    last = std::min(before + B, obs_times.size());
  }
  return kalman_smoother(spec, t0, obs_times, data, last, {t}).front();
}

}  // namespace girf
