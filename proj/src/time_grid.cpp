#include "girf/time_grid.hpp"

#include <string>

#include "girf/errors.hpp"

namespace girf {

TimeGrid::TimeGrid(double t0, std::vector<double> obs_times, std::size_t steps_per_interval)
    : obs_times_(std::move(obs_times)), steps_(steps_per_interval) {
  if (steps_ < 1) throw DomainError("ZeroSteps: intermediate steps per interval must be >= 1");
  if (obs_times_.empty()) throw DomainError("NonMonotoneTimes: no observation times");
  double previous = t0;
  for (std::size_t n = 0; n < obs_times_.size(); ++n) {
    if (!(obs_times_[n] > previous)) {
      throw DomainError("NonMonotoneTimes: observation " + std::to_string(n + 1) +
                        " is not after the preceding time");
    }
    previous = obs_times_[n];
  }

  const std::size_t n_obs = obs_times_.size();
  points_.reserve(n_obs * steps_ + 1);
  double start = t0;
  for (std::size_t n = 0; n < n_obs; ++n) {
    const double end = obs_times_[n];
    points_.push_back({start, n, 0, n > 0, n});
    for (std::size_t s = 1; s < steps_; ++s) {
      const double frac = static_cast<double>(s) / static_cast<double>(steps_);
      points_.push_back({start + frac * (end - start), n, s, false, 0});
    }
    start = end;
  }
  points_.push_back({obs_times_.back(), n_obs, 0, true, n_obs});
}

TimeGrid build_time_grid(double t0, std::vector<double> obs_times, std::size_t steps_per_interval) {
  return TimeGrid(t0, std::move(obs_times), steps_per_interval);
}

}  // namespace girf
