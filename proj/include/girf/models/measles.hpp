#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "girf/model.hpp"
#include "girf/swarm.hpp"

namespace girf {

struct City {
  std::string name;
  double population = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Static description of a network of cities: census populations, pairwise
/// distances (km) and annual births per city.
struct MeaslesNetwork {
  std::vector<City> cities;
  Matrix distances;          ///< K x K, zero diagonal
  int first_birth_year = 0;  ///< calendar year of births.row(0)
  Matrix births;             ///< years x K

  std::size_t size() const noexcept { return cities.size(); }
  /// Births of city k in calendar year `year`; throws ModelError
  /// (MissingBirthData) when the series does not cover it.
  double births_in(std::size_t k, int year) const;
};

/// Great-circle distance in km between two (lat, lon) points in degrees.
double great_circle_km(double lat1, double lon1, double lat2, double lon2);

/// Fills network.distances from the city coordinates.
void compute_distances(MeaslesNetwork& network);

/// Deterministic synthetic network with K cities, populations between
/// roughly 1e5 and 2e6, births covering [first_year, last_year].
MeaslesNetwork synthetic_measles_network(std::size_t cities, std::uint64_t seed, int first_year, int last_year);

/// Mean increment delta*rate; sigma2 = 0 gives Poisson(delta*rate), otherwise
/// Poisson(rate * Gamma(delta/sigma2, sigma2)) with variance
/// delta*rate*(1 + sigma2*rate).
std::int64_t overdispersed_increment(double rate, double delta, double sigma2, RngStream& rng);

/// log P(Y = y) for the discretized normal reporting model
///   F(y) = Phi(y + 0.5; rho*dN, rho(1-rho)dN + psi^2 rho^2 dN^2 + 1),
/// pmf(y) = F(y) - F(y - 1), floored at -745.
double measles_measurement_logpmf(double rho, double psi, double y, double delta_n);

/// Discretized normal log mass with explicit center and variance.
double discretized_normal_logpmf(double y, double center, double variance);

/// True on calendar days that fall in a school holiday.
bool is_school_holiday(int day_of_year);
/// Calendar day (0..365) of a time measured in decimal years.
int day_of_year(double t);

struct Recruitment {
  double continuous_rate = 0.0;  ///< per year
  double pulse = 0.0;            ///< individuals entering at the admission date
  double pulse_time = 0.0;       ///< decimal-year time of the pulse
};

/// Gravity-coupled SEIR network with overdispersed transitions and
/// discretized-normal case reports.
///
/// Time is measured in years. The state of city k is (S, E, I, N) where N
/// counts I->R transitions since the last observation; R is implicit.
class MeaslesModel final : public Model {
 public:
  enum : std::size_t {
    kR0 = 0,
    kAmplitude,
    kMixing,
    kMortality,
    kNuEI,
    kNuIR,
    kSigma2,
    kPsi,
    kGravity,
    kCohort,
    kNumGlobal
  };

  static constexpr double kSchoolTermFraction = 0.739;
  static constexpr double kAdmissionDay = 251.0;
  static constexpr double kDaysPerYear = 365.25;

  MeaslesModel(std::shared_ptr<const MeaslesNetwork> network, double substep = 1.0 / kDaysPerYear);

  std::string name() const override { return "measles"; }
  std::size_t state_dim() const override { return 4 * cities_; }
  std::size_t obs_dim() const override { return cities_; }
  ParamVector default_params() const override { return defaults_; }
  const MeaslesNetwork& network() const noexcept { return *network_; }

  std::size_t s_index(std::size_t k) const { return k; }
  std::size_t e_index(std::size_t k) const { return cities_ + k; }
  std::size_t i_index(std::size_t k) const { return 2 * cities_ + k; }
  std::size_t n_index(std::size_t k) const { return 3 * cities_ + k; }
  std::size_t rho_param(std::size_t k) const { return kNumGlobal + k; }
  std::size_t s0_param(std::size_t k) const { return kNumGlobal + cities_ + k; }
  std::size_t e0_param(std::size_t k) const { return kNumGlobal + 2 * cities_ + k; }
  std::size_t i0_param(std::size_t k) const { return kNumGlobal + 3 * cities_ + k; }

  void init_sample(ParamView theta, StateView x, RngStream& rng) const override;
  void transition_sample(ParamView theta, double t_from, double t_to, StateView x,
                         RngStream& rng) const override;
  void skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const override;
  double measurement_logdensity(ParamView theta, std::size_t n, ObsView y, ConstStateView x) const override;
  void measurement_sample(ParamView theta, std::size_t n, ConstStateView x, std::span<double> y,
                          RngStream& rng) const override;
  MeasurementFamily measurement_family() const override { return MeasurementFamily::kQuantileCalibrated; }
  void measurement_mean(ParamView theta, std::size_t n, ConstStateView x, std::span<double> mean) const override;
  void measurement_variance(ParamView theta, std::size_t n, ConstStateView x,
                            std::span<double> variance) const override;
  double family_logdensity(ParamView theta, std::size_t n, std::size_t i, double y, double center,
                           double variance) const override;
  void reset_accumulators(StateView x) const override;

  /// Annual mean transmission rate from R0: R0 * (nu_IR + mu).
  static double mean_transmission(ParamView theta);
  /// Seasonal transmission coefficient: term-time or holiday level.
  double transmission(ParamView theta, double t) const;
  /// v_kl = G * (mean distance / mean population^2) * P_k P_l / d_kl.
  double gravity_flux(ParamView theta, std::size_t k, std::size_t l) const;
  /// Expected infections per year in city k (bracket clamped at zero).
  double infection_rate(ParamView theta, std::size_t k, ConstStateView x, double t) const;
  Recruitment susceptible_recruitment(ParamView theta, std::size_t k, double t) const;

 private:
  template <bool Stochastic>
  void advance(ParamView theta, double t_from, double t_to, StateView x, RngStream* rng) const;

  std::shared_ptr<const MeaslesNetwork> network_;
  std::size_t cities_;
  double substep_;
  Matrix coupling_;  ///< v_kl / G
  ParamVector defaults_;
};

}  // namespace girf
