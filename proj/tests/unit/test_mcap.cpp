#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "girf/errors.hpp"
#include "girf/mcap.hpp"
#include "girf/rng.hpp"

using namespace girf;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

ProfilePoints parabola(const std::vector<double>& phi, double center, double top, const std::vector<double>& noise) {
  ProfilePoints p;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    p.phi.push_back(phi[i]);
    p.loglik.push_back(-(phi[i] - center) * (phi[i] - center) + top + (noise.empty() ? 0.0 : noise[i]));
  }
  return p;
}

}  // namespace

TEST_CASE("smoother reproduces a parabola") {
  const auto phi = linspace(0.0, 4.0, 17);
  const auto p = parabola(phi, 2.0, 5.0, {});
  for (double span : {0.3, 0.5, 0.75, 1.0}) {
    const auto s = local_smooth(p, span);
    CHECK(std::abs(s.maximizer - 2.0) < 1e-6);
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(s.curve(phi[i]) == doctest::Approx(p.loglik[i]).epsilon(1e-10));
  }
}

TEST_CASE("flat profile resolves to the leftmost point") {
  ProfilePoints p;
  p.phi = linspace(1.0, 3.0, 9);
  p.loglik.assign(9, -4.0);
  const auto s = local_smooth(p, 0.75);
  CHECK(s.maximizer == doctest::Approx(1.0));
}

TEST_CASE("smoother needs four points") {
  ProfilePoints p;
  p.phi = {1, 2, 3};
  p.loglik = {0, 1, 0};
  CHECK_THROWS_AS(local_smooth(p, 0.75), DegenerateFit);
}

TEST_CASE("quadratic fit examples") {
  const auto phi = linspace(-1.0, 5.0, 7);
  std::vector<double> y, w(7, 1.0);
  for (double x : phi) y.push_back(-x * x + 4 * x);
  const auto f = quadratic_fit_with_covariance(phi, y, w);
  CHECK(f.a == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.b == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(f.c) < 1e-10);
  CHECK(std::abs(f.var_a) < 1e-20);
  CHECK(std::abs(f.var_b) < 1e-20);

  const std::vector<double> p3{0, 1, 2}, y3{0, 3, 4}, w3{1, 1, 1};
  const auto s = quadratic_fit_with_covariance(p3, y3, w3);
  CHECK(s.var_a == 0.0);
  CHECK(s.var_b == 0.0);
  CHECK(s.cov_ab == 0.0);
}

TEST_CASE("quadratic fit covariance matches the closed-form wls algebra") {
  // phi in {-2..2 step 0.5}: phi is orthogonal to phi^2 and 1 under unit
  // weights, so Var[b] = s^2 / sum phi^2 = s^2 / 15.
  const auto phi = linspace(-2.0, 2.0, 9);
  RngStream rng(5);
  std::vector<double> y, w(9, 1.0);
  for (double x : phi) y.push_back(-x * x + 0.1 * rng.normal());
  const auto f = quadratic_fit_with_covariance(phi, y, w);
  double rss = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double r = y[i] - (-f.a * phi[i] * phi[i] + f.b * phi[i] + f.c);
    rss += r * r;
  }
  const double s2 = rss / (9.0 - 3.0);
  CHECK(f.residual_variance == doctest::Approx(s2).epsilon(1e-10));
  CHECK(f.var_b == doctest::Approx(s2 / 15.0).epsilon(1e-10));
  // a column is -phi^2; centered sum of squares of phi^2 over the design
  double m2 = 0.0;
  for (double x : phi) m2 += x * x;
  m2 /= 9.0;
  double sxx = 0.0;
  for (double x : phi) sxx += (x * x - m2) * (x * x - m2);
  CHECK(f.var_a == doctest::Approx(s2 / sxx).epsilon(1e-10));
  CHECK(std::abs(f.cov_ab) < 1e-14);
}

TEST_CASE("mcap cutoff") {
  CHECK(mcap_cutoff(1.0, 0.0, 0.05) == doctest::Approx(1.9207).epsilon(5e-5));
  const double chi = boost::math::quantile(boost::math::chi_squared(1.0), 0.95);
  CHECK(mcap_cutoff(3.0, 0.0, 0.05) == doctest::Approx(0.5 * chi).epsilon(1e-14));
  CHECK(mcap_cutoff(2.0, 0.5, 0.05) == doctest::Approx((2.0 * 0.25 + 0.5) * chi).epsilon(1e-14));
}

TEST_CASE("mcap on an exact parabola") {
  const auto p = parabola(linspace(0.0, 4.0, 21), 2.0, 0.0, {});
  const auto r = mcap_interval(p, McapOptions{});
  CHECK(std::abs(r.fit.a - 1.0) < 1e-8);
  CHECK(std::abs(r.phi_hat - 2.0) < 1e-6);
  CHECK(r.se_mc == doctest::Approx(0.0));
  CHECK(r.se_stat == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(r.delta == doctest::Approx(1.9207).epsilon(5e-5));
  CHECK(std::abs(r.lower - (2.0 - std::sqrt(r.delta))) < 1e-6);
  CHECK(std::abs(r.upper - (2.0 + std::sqrt(r.delta))) < 1e-6);
  CHECK_FALSE(r.lower_truncated);
  CHECK_FALSE(r.upper_truncated);
}

TEST_CASE("mcap cutoff grows with monte carlo noise") {
  const auto phi = linspace(0.0, 4.0, 25);
  RngStream rng(12);
  std::vector<double> base;
  for (std::size_t i = 0; i < phi.size(); ++i) base.push_back(rng.normal());
  double previous = 0.0;
  const double floor = 0.5 * boost::math::quantile(boost::math::chi_squared(1.0), 0.95);
  for (double scale : {0.0, 0.05, 0.2, 0.5, 1.0}) {
    std::vector<double> noise;
    for (double v : base) noise.push_back(scale * v);
    const auto r = mcap_interval(parabola(phi, 2.0, 0.0, noise), McapOptions{});
    CAPTURE(scale);
    CHECK(r.delta >= floor - 1e-12);
    CHECK(r.delta >= previous);
    if (scale > 0.0) CHECK(r.delta > floor);
    previous = r.delta;
  }
}

TEST_CASE("negative curvature is reported") {
  auto p = parabola(linspace(0.0, 4.0, 12), 2.0, 0.0, {});
  for (double& v : p.loglik) v = -v;
  CHECK_THROWS_AS(mcap_interval(p, McapOptions{}), FitError);
}

TEST_CASE("noisy parabola maximizer coverage") {
  // The smoother is linear in y, so with known noise sd the maximizer's
  // spread follows from the derivative of the equivalent kernel at the
  // noiseless maximizer: sd = sigma * |l'(2)| / |curvature|.
  const auto phi = linspace(0.0, 4.0, 30);
  const double sigma = 0.3, h = 1e-4;
  double kernel_ss = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    std::vector<double> e(phi.size(), 0.0);
    e[i] = 1.0;
    const LocalQuadraticSmoother unit(phi, e, 0.75);
    const double d = (unit(2.0 + h) - unit(2.0 - h)) / (2.0 * h);
    kernel_ss += d * d;
  }
  const double sd = sigma * std::sqrt(kernel_ss) / 2.0;
  int covered = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = RngStream(77).derive(Purpose::kReplicate, r);
    std::vector<double> noise;
    for (std::size_t i = 0; i < phi.size(); ++i) noise.push_back(sigma * rng.normal());
    const auto s = local_smooth(parabola(phi, 2.0, 0.0, noise), 0.75);
    covered += std::abs(s.maximizer - 2.0) <= 1.959964 * sd;
  }
  // 95% nominal; 3 binomial sds of slack at 200 replicates
  CHECK(covered >= 181);
}

TEST_CASE("se_mc tracks the spread of the fitted vertex") {
  const auto phi = linspace(0.0, 4.0, 30);
  const int reps = 400;
  double ss = 0.0, se = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = RngStream(78).derive(Purpose::kReplicate, r);
    std::vector<double> noise;
    for (std::size_t i = 0; i < phi.size(); ++i) noise.push_back(0.3 * rng.normal());
    const auto res = mcap_interval(parabola(phi, 2.0, 0.0, noise), McapOptions{});
    const double vertex = res.fit.b / (2.0 * res.fit.a);
    ss += (vertex - 2.0) * (vertex - 2.0);
    se += res.se_mc;
  }
  CHECK(se / reps == doctest::Approx(std::sqrt(ss / reps)).epsilon(0.2));
}

TEST_CASE("mask and transforms") {
  auto p = parabola(linspace(0.0, 4.0, 21), 2.0, 0.0, {});
  p.phi.push_back(3.0);
  p.loglik.push_back(-100.0);
  McapOptions o;
  o.mask.assign(p.phi.size(), true);
  o.mask.back() = false;
  const auto r = mcap_interval(p, o);
  CHECK(std::abs(r.phi_hat - 2.0) < 1e-6);

  ProfilePoints q;
  for (double u : linspace(0.5, 2.0, 16)) {
    q.phi.push_back(std::exp(u));
    q.loglik.push_back(-(u - 1.2) * (u - 1.2));
  }
  McapOptions lo;
  lo.transform = PhiTransform::kLog;
  const auto rl = mcap_interval(q, lo);
  CHECK(rl.phi_hat == doctest::Approx(std::exp(1.2)).epsilon(1e-6));
  CHECK(parse_phi_transform("sqrt") == PhiTransform::kSqrt);
  CHECK_THROWS(parse_phi_transform("cube"));
}
