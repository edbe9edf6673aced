#include "girf/simulate.hpp"

#include <algorithm>

namespace girf {

ObservationSeries::ObservationSeries(std::size_t dim, std::vector<double> values)
    : n_obs_(dim == 0 ? 0 : values.size() / dim), dim_(dim), values_(std::move(values)) {}

ObservationSeries ObservationSeries::prefix(std::size_t count) const {
  count = std::min(count, n_obs_);
  return ObservationSeries(dim_, std::vector<double>(values_.begin(), values_.begin() + count * dim_));
}

Simulation simulate_pomp(const Model& model, const ParamVector& params, const TimeGrid& grid,
                         const RngStream& rng) {
  const auto theta = params.values();
  const std::size_t d = model.state_dim();
  Simulation sim{Matrix(grid.num_steps() + 1, d),
                 ObservationSeries(grid.num_observations(), model.obs_dim())};

  std::vector<double> x(d);
  RngStream init = rng.derive(Purpose::kInit);
  model.init_sample(theta, x, init);
  std::copy(x.begin(), x.end(), sim.latent.row(0).begin());

  for (std::size_t k = 1; k <= grid.num_steps(); ++k) {
    if (grid.point(k - 1).is_observation) model.reset_accumulators(x);
    RngStream step = rng.derive(Purpose::kPropagate, k);
    model.transition_sample(theta, grid.time(k - 1), grid.time(k), x, step);
    std::copy(x.begin(), x.end(), sim.latent.row(k).begin());
    const auto& p = grid.point(k);
    if (p.is_observation) {
      RngStream meas = rng.derive(Purpose::kMeasurement, p.observation_index);
      model.measurement_sample(theta, p.observation_index, x, sim.observations.at(p.observation_index), meas);
    }
  }
  return sim;
}

std::vector<double> latent_at_observation(const Simulation& sim, const TimeGrid& grid, std::size_t n) {
  const auto r = sim.latent.row(grid.index(n, 0));
  return {r.begin(), r.end()};
}

}  // namespace girf
