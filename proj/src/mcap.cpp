#include "girf/mcap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

#include "girf/errors.hpp"

namespace girf {

namespace {

constexpr std::size_t kGridPoints = 1000;

struct Wls {
  Eigen::Vector3d beta;  // coefficients of (1, x, x^2)
  Eigen::Matrix3d xtwx;
};

Wls weighted_quadratic(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                       double center) {
  Eigen::Matrix3d xtwx = Eigen::Matrix3d::Zero();
  Eigen::Vector3d xtwy = Eigen::Vector3d::Zero();
  std::size_t positive = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    ++positive;
    const double u = x[i] - center;
    const Eigen::Vector3d row(1.0, u, u * u);
    xtwx += w[i] * row * row.transpose();
    xtwy += w[i] * y[i] * row;
  }
  if (positive < 3) throw DegenerateFit("quadratic fit needs at least three weighted points");
  Eigen::FullPivLU<Eigen::Matrix3d> lu(xtwx);
  lu.setThreshold(1e-12);
  if (lu.rank() < 3) throw DegenerateFit("quadratic fit design has rank < 3");
  return {lu.solve(xtwy), xtwx};
}

double forward(PhiTransform t, double v) {
  switch (t) {
    case PhiTransform::kSqrt:
      if (v < 0.0) throw DomainError("sqrt transform needs phi >= 0");
      return std::sqrt(v);
    case PhiTransform::kLog:
      if (!(v > 0.0)) throw DomainError("log transform needs phi > 0");
      return std::log(v);
    default:
      return v;
  }
}

double backward(PhiTransform t, double v) {
  switch (t) {
    case PhiTransform::kSqrt:
      return v * v;
    case PhiTransform::kLog:
      return std::exp(v);
    default:
      return v;
  }
}

}  // namespace

LocalQuadraticSmoother::LocalQuadraticSmoother(std::vector<double> phi, std::vector<double> y, double span)
    : phi_(std::move(phi)), y_(std::move(y)), span_(span) {
  if (phi_.size() != y_.size()) throw DomainError("smoother: phi and loglik lengths differ");
  if (phi_.size() < 4) throw DegenerateFit("smoother needs at least four profile points");
  if (!(span_ > 0.0) || span_ > 1.0) throw DomainError("smoother span must be in (0, 1]");
  lo_ = *std::min_element(phi_.begin(), phi_.end());
  hi_ = *std::max_element(phi_.begin(), phi_.end());
}

std::vector<double> LocalQuadraticSmoother::weights(double at) const {
  const std::size_t K = phi_.size();
  const std::size_t q =
      std::min(K, std::max<std::size_t>(4, static_cast<std::size_t>(std::floor(span_ * static_cast<double>(K)))));
  std::vector<double> dist(K);
  for (std::size_t i = 0; i < K; ++i) dist[i] = std::abs(phi_[i] - at);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
  double h = sorted[q - 1];
  // Keep the q-th nearest point in the neighbourhood.
  h = h > 0.0 ? h * (1.0 + 1e-9) : 1e-300;
  std::vector<double> w(K, 0.0);
  for (std::size_t i = 0; i < K; ++i) {
    const double u = dist[i] / h;
    if (u < 1.0) {
      const double v = 1.0 - u * u * u;
      w[i] = v * v * v;
    }
  }
  return w;
}

double LocalQuadraticSmoother::operator()(double at) const {
  const auto w = weights(at);
  return weighted_quadratic(phi_, y_, w, at).beta[0];
}

SmoothResult local_smooth(const ProfilePoints& points, double span) {
  LocalQuadraticSmoother curve(points.phi, points.loglik, span);
  const double lo = curve.lower();
  const double hi = curve.upper();
  const double step = (hi - lo) / static_cast<double>(kGridPoints - 1);
  std::size_t best = 0;
  double best_value = curve(lo);
  std::vector<double> values(kGridPoints);
  values[0] = best_value;
  for (std::size_t g = 1; g < kGridPoints; ++g) {
    values[g] = curve(lo + step * static_cast<double>(g));
    // near-equal values count as ties so the leftmost maximizer wins
    if (values[g] > best_value + 1e-10 * (1.0 + std::abs(best_value))) {
      best_value = values[g];
      best = g;
    }
  }
  double maximizer = lo + step * static_cast<double>(best);
  const bool interior = best > 0 && best + 1 < kGridPoints;
  if (interior && (values[best - 1] < best_value || values[best + 1] < best_value)) {
    // Golden-section refinement inside the bracketing grid cells.
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = maximizer - step, b = maximizer + step;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = curve(c), fd = curve(d);
    for (int it = 0; it < 100 && b - a > 1e-12 * (1.0 + std::abs(maximizer)); ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = curve(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = curve(d);
      }
    }
    const double refined = 0.5 * (a + b);
    if (curve(refined) >= best_value) maximizer = refined;
  }
  auto w = curve.weights(maximizer);
  return {std::move(curve), maximizer, std::move(w)};
}

QuadraticFit quadratic_fit_with_covariance(const std::vector<double>& phi, const std::vector<double>& y,
                                           const std::vector<double>& w) {
  if (phi.size() != y.size() || phi.size() != w.size()) throw DomainError("quadratic fit: length mismatch");
  for (double v : w) {
    if (v < 0.0) throw DomainError("quadratic fit: negative weight");
  }
  const Wls fit = weighted_quadratic(phi, y, w, 0.0);
  QuadraticFit out;
  out.c = fit.beta[0];
  out.b = fit.beta[1];
  out.a = -fit.beta[2];

  // Sandwich covariance for homoscedastic noise: the tricube weights are
  // locality weights, not inverse variances.
  const Eigen::Matrix3d inv = fit.xtwx.inverse();
  Eigen::Matrix3d xtw2x = Eigen::Matrix3d::Zero();
  double sw = 0.0, sw2 = 0.0, rss = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    sw += w[i];
    sw2 += w[i] * w[i];
    const Eigen::Vector3d row(1.0, phi[i], phi[i] * phi[i]);
    xtw2x += w[i] * w[i] * row * row.transpose();
    const double r = y[i] - (out.c + out.b * phi[i] - out.a * phi[i] * phi[i]);
    rss += w[i] * r * r;
    scale = std::max(scale, std::abs(y[i]));
  }
  out.effective_n = sw * sw / sw2;
  // E[sum w r^2] = sigma^2 (sum w - tr(inv X'W^2X))
  const double dof = sw - (inv * xtw2x).trace();
  if (dof <= 1e-9 * sw) {
    if (rss > 1e-20 * (1.0 + scale * scale) * sw) throw DegenerateFit("quadratic fit has no residual degrees of freedom");
    out.residual_variance = 0.0;
  } else {
    out.residual_variance = rss / dof;
  }
  const Eigen::Matrix3d cov = out.residual_variance * inv * xtw2x * inv;
  // Coefficient of phi^2 is -a, so Cov[a, b] = -Cov[beta2, beta1].
  out.var_a = cov(2, 2);
  out.var_b = cov(1, 1);
  out.cov_ab = -cov(2, 1);
  return out;
}

PhiTransform parse_phi_transform(std::string_view s) {
  if (s == "identity") return PhiTransform::kIdentity;
  if (s == "sqrt") return PhiTransform::kSqrt;
  if (s == "log") return PhiTransform::kLog;
  throw ConfigError("unknown phi transform '" + std::string(s) + "'");
}

std::string_view to_string(PhiTransform t) {
  switch (t) {
    case PhiTransform::kSqrt:
      return "sqrt";
    case PhiTransform::kLog:
      return "log";
    default:
      return "identity";
  }
}

double mcap_cutoff(double a, double se_mc, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
  const boost::math::chi_squared chi(1.0);
  const double q = boost::math::quantile(chi, 1.0 - alpha);
  return (a * se_mc * se_mc + 0.5) * q;
}

McapResult mcap_interval(const ProfilePoints& points, const McapOptions& options) {
  if (points.phi.size() != points.loglik.size()) throw DomainError("profile: phi and loglik lengths differ");
  if (!options.mask.empty() && options.mask.size() != points.phi.size()) {
    throw DomainError("profile mask length does not match the points");
  }
  ProfilePoints kept;
  for (std::size_t i = 0; i < points.phi.size(); ++i) {
    if (!options.mask.empty() && !options.mask[i]) continue;
    kept.phi.push_back(forward(options.transform, points.phi[i]));
    kept.loglik.push_back(points.loglik[i]);
  }
  const SmoothResult smooth = local_smooth(kept, options.span);
  McapResult out;
  out.fit = quadratic_fit_with_covariance(kept.phi, kept.loglik, smooth.weights);
  const double a = out.fit.a;
  const double b = out.fit.b;
  if (!(a > 0.0)) throw NegativeCurvature("profile is not locally concave (a <= 0)");
  const double se_mc2 =
      (out.fit.var_b - 2.0 * b / a * out.fit.cov_ab + b * b / (a * a) * out.fit.var_a) / (4.0 * a * a);
  out.se_mc = std::sqrt(std::max(0.0, se_mc2));
  out.se_stat = 1.0 / std::sqrt(2.0 * a);
  out.se_total = std::sqrt(out.se_stat * out.se_stat + out.se_mc * out.se_mc);
  out.delta = mcap_cutoff(a, out.se_mc, options.alpha);

  const auto& curve = smooth.curve;
  const double peak = curve(smooth.maximizer);
  out.smoothed_max = peak;
  const double level = peak - out.delta;
  auto crossing = [&](double inside, double outside) {
    double in = inside, outv = outside;
    for (int it = 0; it < 200 && std::abs(outv - in) > 1e-13 * (1.0 + std::abs(in)); ++it) {
      const double mid = 0.5 * (in + outv);
      if (curve(mid) >= level) {
        in = mid;
      } else {
        outv = mid;
      }
    }
    return 0.5 * (in + outv);
  };
  double lo, hi;
  if (curve(curve.lower()) >= level) {
    lo = curve.lower();
    out.lower_truncated = true;
  } else {
    lo = crossing(smooth.maximizer, curve.lower());
  }
  if (curve(curve.upper()) >= level) {
    hi = curve.upper();
    out.upper_truncated = true;
  } else {
    hi = crossing(smooth.maximizer, curve.upper());
  }
  out.phi_hat = backward(options.transform, smooth.maximizer);
  out.lower = backward(options.transform, lo);
  out.upper = backward(options.transform, hi);
  return out;
}

}  // namespace girf
