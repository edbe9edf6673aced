#include <cmath>
#include <vector>

#include "doctest.h"
#include "girf/errors.hpp"
#include "girf/guide.hpp"
#include "girf/models/cbm.hpp"
#include "girf/models/lorenz96.hpp"
#include "girf/stats.hpp"

using namespace girf;

TEST_CASE("lookahead power") {
  CHECK(lookahead_power(3.0, 3.0, 1.0) == 1.0);
  CHECK(lookahead_power(1.0, 2.0, 1.0) == 0.0);
  CHECK(lookahead_power(1.5, 3.0, 1.0) == doctest::Approx(0.25));
  CHECK(lookahead_power(2.0, 2.0, 2.0) == 1.0);
}

TEST_CASE("rescale variability") {
  CHECK(rescale_variability(2.0, 0.0, 1.0, 0.0) == 2.0);
  CHECK(rescale_variability(2.0, 0.0, 1.0, 1.0) == 0.0);
  CHECK(rescale_variability(2.0, 0.0, 1.0, 0.25) == doctest::Approx(1.5));
}

TEST_CASE("guide targets") {
  const TimeGrid grid(0.0, {1, 2, 3}, 2);
  CHECK(guide_targets(grid, 0, 2).empty());
  CHECK(guide_targets(grid, 1, 2) == std::vector<std::size_t>{1, 2});
  CHECK(guide_targets(grid, 2, 2) == std::vector<std::size_t>{1, 2});
  CHECK(guide_targets(grid, 5, 2) == std::vector<std::size_t>{3});
  CHECK(guide_targets(grid, 6, 1) == std::vector<std::size_t>{3});
}

TEST_CASE("forecast moments") {
  SUBCASE("deterministic model has zero variability") {
    Lorenz96 m(5);
    const std::vector<double> theta{8.0, 0.0, 1.0};
    const std::vector<double> x{1, 2, 3, 4, 5};
    const TimeGrid grid(0.0, {0.1, 0.2}, 2);
    const std::vector<std::size_t> targets{1, 2};
    const Matrix xi = forecast_variability(m, theta, x, 1, targets, grid, 20, 1.0, RngStream(1));
    for (double v : xi.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-20));
  }
  SUBCASE("standard BM variability matches the horizon") {
    CorrelatedBrownianMotion m(1);
    const std::vector<double> theta{0.0, 1.0, 0.0, 0.0};
    const std::vector<double> x{0.0};
    for (double dt : {0.5, 1.0, 3.0}) {
      const TimeGrid grid(0.0, {dt}, 1);
      const std::vector<std::size_t> targets{1};
      const Matrix xi = forecast_variability(m, theta, x, 0, targets, grid, 400, 1.0, RngStream(7));
      // sample variance sd is dt*sqrt(2/(n-1))
      CHECK(std::abs(xi(0, 0) - dt) <= 4.0 * dt * std::sqrt(2.0 / 399.0));
    }
  }
  SUBCASE("lorenz skeleton from the fixed point") {
    Lorenz96 m(6);
    const std::vector<double> theta{8.0, 1.0, 1.0};
    const std::vector<double> x(6, 8.0);
    const TimeGrid grid(0.0, {0.5, 1.0}, 3);
    const std::vector<std::size_t> targets{1, 2};
    const Matrix mu = skeleton_forecasts(m, theta, x, 0, targets, grid);
    for (double v : mu.data()) CHECK(v == doctest::Approx(8.0).epsilon(1e-13));
  }
}

TEST_CASE("guide value boundaries") {
  CorrelatedBrownianMotion m(1);
  const std::vector<double> theta{0.0, 1.0, 0.0, 0.0};
  const TimeGrid grid(0.0, {1.0, 2.0}, 2);
  ObservationSeries data(1, std::vector<double>{0.7, -0.3});
  GuideSpec spec;
  spec.B = 1;
  ForecastCache cache{0.0, {1}, Matrix(1, 1, 1.0)};
  const std::vector<double> x{0.2};
  CHECK(guide_value(m, theta, x, 0, grid, data, spec, cache, std::nullopt) == 0.0);
  // observation step: exact measurement density, power 1
  CHECK(guide_value(m, theta, x, 2, grid, data, spec, cache, -3.7) == -3.7);
  CHECK(guide_value(m, theta, x, 2, grid, data, spec, cache, std::nullopt) ==
        m.measurement_logdensity(theta, 1, data.at(1), x));
  // halfway: eta 1/2, variability 1/2 of the anchor value
  const double mid = guide_value(m, theta, x, 1, grid, data, spec, cache, std::nullopt);
  CHECK(mid == doctest::Approx(0.5 * normal_logpdf(0.7, 0.2, 0.5 + 1e-12 + 1.0)).epsilon(1e-13));
  // cache missing a target
  ForecastCache empty{0.0, {}, Matrix()};
  CHECK_THROWS_AS(guide_value(m, theta, x, 1, grid, data, spec, empty, std::nullopt), NonFiniteGuide);
}

TEST_CASE("guide spec validation") {
  GuideSpec spec;
  spec.B = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.B = 2;
  spec.n_variability_sims = 1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK(parse_power_schedule("all-ones") == PowerSchedule::kAllOnes);
  CHECK(parse_refresh_policy("every-step") == RefreshPolicy::kEveryStep);
  CHECK_THROWS(parse_power_schedule("nope"));
}
