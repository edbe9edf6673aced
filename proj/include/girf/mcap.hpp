#pragma once

#include <functional>
#include <string_view>
#include <vector>

namespace girf {

struct ProfilePoints {
  std::vector<double> phi;
  std::vector<double> loglik;
  std::vector<int> replicate;  ///< optional grouping, may be empty
};

/// Tricube-weighted local quadratic regression (degree-2 loess) through
/// profile points. The q = max(4, floor(span*K)) nearest points get
/// non-zero weight.
class LocalQuadraticSmoother {
 public:
  LocalQuadraticSmoother(std::vector<double> phi, std::vector<double> y, double span);

  double operator()(double at) const;
  /// Smoothing weights used when evaluating at `at`.
  std::vector<double> weights(double at) const;
  double span() const noexcept { return span_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

 private:
  std::vector<double> phi_;
  std::vector<double> y_;
  double span_;
  double lo_;
  double hi_;
};

struct SmoothResult {
  LocalQuadraticSmoother curve;
  double maximizer;
  std::vector<double> weights;  ///< smoothing weights at the maximizer
};

/// Fits the smoother and locates its maximizer over the data range (dense
/// grid then golden-section refinement; ties resolve to the leftmost
/// point). Throws DegenerateFit when fewer than four points are given.
SmoothResult local_smooth(const ProfilePoints& points, double span);

struct QuadraticFit {
  double a = 0.0;  ///< fitted curve is -a phi^2 + b phi + c
  double b = 0.0;
  double c = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  double cov_ab = 0.0;
  double residual_variance = 0.0;
  double effective_n = 0.0;
};

/// Weighted least squares fit of -a phi^2 + b phi + c. Weights localize the
/// fit; the noise is taken as homoscedastic, so the coefficient covariance
/// is the sandwich s^2 (X'WX)^{-1} X'W^2X (X'WX)^{-1} with
///   s^2 = sum w r^2 / (sum w - tr((X'WX)^{-1} X'W^2X)),
/// which is unbiased and reduces to RSS/(n-3) for unit weights. A saturated
/// fit with zero residuals has zero covariance; a saturated fit with
/// residuals throws DegenerateFit.
QuadraticFit quadratic_fit_with_covariance(const std::vector<double>& phi, const std::vector<double>& y,
                                           const std::vector<double>& w);

enum class PhiTransform { kIdentity, kSqrt, kLog };
PhiTransform parse_phi_transform(std::string_view s);
std::string_view to_string(PhiTransform t);

struct McapOptions {
  double alpha = 0.05;
  double span = 0.75;
  std::vector<bool> mask;  ///< true keeps a point; empty keeps all
  PhiTransform transform = PhiTransform::kIdentity;
};

struct McapResult {
  double phi_hat = 0.0;
  double se_mc = 0.0;
  double se_stat = 0.0;
  double se_total = 0.0;
  double delta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_truncated = false;  ///< cutoff not crossed inside the data range
  bool upper_truncated = false;
  QuadraticFit fit;
  double smoothed_max = 0.0;
};

/// (a * SE_mc^2 + 1/2) * chi2_{1, 1-alpha}.
double mcap_cutoff(double a, double se_mc, double alpha);

/// Monte Carlo adjusted profile confidence interval. Throws
/// NegativeCurvature when the local quadratic is not concave.
McapResult mcap_interval(const ProfilePoints& points, const McapOptions& options);

}  // namespace girf
