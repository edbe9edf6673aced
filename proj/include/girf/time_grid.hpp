#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace girf {

/// One entry of the refined time grid: t_{n,s} with its (n, s) coordinates.
struct GridPoint {
  double time;
  std::size_t interval;  ///< n in 0..N-1 (N for the final point)
  std::size_t substep;   ///< s in 0..S-1 (0 for the final point)
  bool is_observation;
  std::size_t observation_index;  ///< 1-based observation number when is_observation
};

/// Observation times plus S equally spaced intermediate times per interval.
///
/// Grid index k = n*S + s addresses t_{n,s}; index 0 is t0 and index n*S is
/// t_n. Boundary times are stored once and shared by adjacent intervals, so
/// t_{n,S} and t_{n+1,0} are the same double.
class TimeGrid {
 public:
  TimeGrid(double t0, std::vector<double> obs_times, std::size_t steps_per_interval);

  double t0() const noexcept { return points_.front().time; }
  std::size_t num_observations() const noexcept { return obs_times_.size(); }
  std::size_t steps_per_interval() const noexcept { return steps_; }
  /// N*S, the number of propagation steps.
  std::size_t num_steps() const noexcept { return points_.size() - 1; }

  const std::vector<double>& obs_times() const noexcept { return obs_times_; }
  /// t_n for n in 0..N (t_0 = t0).
  double obs_time(std::size_t n) const { return n == 0 ? t0() : obs_times_.at(n - 1); }

  const GridPoint& point(std::size_t k) const { return points_.at(k); }
  double time(std::size_t k) const { return points_[k].time; }
  std::size_t index(std::size_t n, std::size_t s) const { return n * steps_ + s; }

  /// (n, s) of the step that ends at grid index k >= 1, with s in 1..S.
  std::size_t step_interval(std::size_t k) const { return (k - 1) / steps_; }
  std::size_t step_substep(std::size_t k) const { return (k - 1) % steps_ + 1; }

  std::span<const GridPoint> points() const noexcept { return points_; }

 private:
  std::vector<double> obs_times_;
  std::size_t steps_;
  std::vector<GridPoint> points_;
};

/// Builds the grid, validating ordering. Throws DomainError on non-monotone
/// times and when steps_per_interval < 1.
TimeGrid build_time_grid(double t0, std::vector<double> obs_times, std::size_t steps_per_interval);

}  // namespace girf
