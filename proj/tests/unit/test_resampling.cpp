#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>

#include "doctest.h"
#include "girf/errors.hpp"
#include "girf/resampling.hpp"
#include "girf/stats.hpp"

using namespace girf;

TEST_CASE("normalize_log_weights examples") {
  const std::vector<double> zeros{0, 0, 0, 0};
  auto w = normalize_log_weights(zeros);
  for (double p : w.probabilities) CHECK(p == doctest::Approx(0.25));
  CHECK(w.log_mean_weight == doctest::Approx(0.0));

  const std::vector<double> two{std::log(2.0), std::log(2.0)};
  w = normalize_log_weights(two);
  CHECK(w.probabilities[0] == doctest::Approx(0.5));
  CHECK(w.log_mean_weight == doctest::Approx(std::log(2.0)));

  const std::vector<double> far{-1000, -1001, -1002};
  w = normalize_log_weights(far);
  // softmax after subtracting the max, by hand
  const double z = 1.0 + std::exp(-1.0) + std::exp(-2.0);
  CHECK(w.probabilities[0] == doctest::Approx(1.0 / z).epsilon(1e-12));
  CHECK(w.probabilities[1] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-12));
  CHECK(w.probabilities[2] == doctest::Approx(std::exp(-2.0) / z).epsilon(1e-12));
  CHECK(w.probabilities[0] == doctest::Approx(0.6652).epsilon(1e-4));
  CHECK(w.log_mean_weight == doctest::Approx(-1000.0 + std::log(z) - std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("normalize_log_weights degenerate and shift invariance") {
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> dead{ninf, ninf};
  CHECK_THROWS_AS(normalize_log_weights(dead), AllWeightsDegenerate);

  const std::vector<double> one_dead{ninf, 0.0, -1.0};
  auto w = normalize_log_weights(one_dead);
  CHECK(w.probabilities[0] == 0.0);

  const std::vector<double> base{0.1, -2.0, 3.0, 0.7};
  std::vector<double> shifted = base;
  for (double& v : shifted) v += 123.5;
  const auto a = normalize_log_weights(base);
  const auto b = normalize_log_weights(shifted);
  CHECK(b.log_mean_weight - a.log_mean_weight == doctest::Approx(123.5).epsilon(1e-13));
  double sum = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(a.probabilities[i] == doctest::Approx(b.probabilities[i]).epsilon(1e-13));
    sum += a.probabilities[i];
  }
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("ess examples") {
  const std::vector<double> uniform(10, 0.1);
  CHECK(ess(uniform) == doctest::Approx(10.0));
  const std::vector<double> point{0.0, 1.0, 0.0};
  CHECK(ess(point) == doctest::Approx(1.0));
  const std::vector<double> p{0.5, 0.25, 0.25};
  CHECK(ess(p) == doctest::Approx(1.0 / 0.375));
}

TEST_CASE("resampling examples") {
  const std::vector<double> point{1.0, 0.0, 0.0};
  RngStream rng(3);
  for (auto scheme : {ResampleScheme::kSystematic, ResampleScheme::kMultinomial}) {
    for (auto a : resample_ancestors(point, scheme, rng)) CHECK(a == 0);
  }
  const std::vector<double> uniform(4, 0.25);
  const auto a = systematic_ancestors(uniform, 0.3, 4);
  CHECK(a == std::vector<std::size_t>{0, 1, 2, 3});

  const std::vector<double> half{0.5, 0.5};
  const auto m = multinomial_ancestors(half, 100000, rng);
  double zeros = 0;
  for (auto i : m) zeros += i == 0;
  CHECK(std::abs(zeros / 1e5 - 0.5) < 0.005);
}

TEST_CASE("systematic counts stay within one of J p") {
  RngStream rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t J = 1 + static_cast<std::size_t>(rng.uniform() * 50);
    std::vector<double> p(J);
    double s = 0.0;
    for (double& v : p) s += v = -std::log(rng.uniform());
    for (double& v : p) v /= s;
    const auto anc = systematic_ancestors(p, rng.uniform(), J);
    std::vector<int> counts(J, 0);
    for (auto i : anc) {
      REQUIRE(i < J);
      counts[i]++;
    }
    for (std::size_t i = 0; i < J; ++i) {
      CHECK(counts[i] >= std::floor(J * p[i]) - 1e-9);
      CHECK(counts[i] <= std::ceil(J * p[i]) + 1e-9);
    }
    CHECK(std::is_sorted(anc.begin(), anc.end()));
  }
}

TEST_CASE("resampled counts are unbiased for both schemes") {
  const std::vector<double> p{0.05, 0.15, 0.3, 0.5};
  const std::size_t J = 4;
  const int reps = 20000;
  for (auto scheme : {ResampleScheme::kSystematic, ResampleScheme::kMultinomial}) {
    std::vector<double> total(4, 0.0);
    for (int r = 0; r < reps; ++r) {
      RngStream rng = RngStream(21).derive(Purpose::kResample, r);
      for (auto i : resample_ancestors(p, scheme, rng)) total[i] += 1.0;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      const double mean = total[i] / reps;
      // binomial sd bound per replicate count, 3 sigma
      const double sd = std::sqrt(J * p[i] * (1 - p[i]) / reps);
      CHECK(std::abs(mean - J * p[i]) <= 3.0 * sd + 1e-12);
    }
  }
}

TEST_CASE("stats helpers") {
  CHECK(normal_logpdf(0.0, 0.0, 2.0) == doctest::Approx(-0.5 * std::log(4.0 * std::numbers::pi)));
  const std::vector<double> v{std::log(2.0), std::log(3.0)};
  CHECK(logsumexp(v) == doctest::Approx(std::log(5.0)));
  CHECK(std::exp(log_normal_interval(-0.5, 0.5)) == doctest::Approx(0.382925).epsilon(1e-5));
  // far tail stays finite
  CHECK(std::isfinite(log_normal_interval(40.0, 41.0)));
  CHECK(log_normal_interval(40.0, 41.0) < -700.0);
}
