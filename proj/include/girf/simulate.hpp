#pragma once

#include "girf/model.hpp"
#include "girf/swarm.hpp"
#include "girf/time_grid.hpp"

namespace girf {

struct Simulation {
  Matrix latent;  ///< (N*S + 1) x state_dim, one row per grid point
  ObservationSeries observations;
};

/// Chains transition_sample over the grid and draws y_n at each t_n.
Simulation simulate_pomp(const Model& model, const ParamVector& params, const TimeGrid& grid,
                         const RngStream& rng);

/// Latent state at observation n (1-based) from a simulation's path.
std::vector<double> latent_at_observation(const Simulation& sim, const TimeGrid& grid, std::size_t n);

}  // namespace girf
