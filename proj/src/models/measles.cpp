#include "girf/models/measles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "girf/errors.hpp"
#include "girf/stats.hpp"

namespace girf {

namespace {

constexpr double kLogMassFloor = -745.0;
constexpr double kEarthRadiusKm = 6371.0;

}  // namespace

double MeaslesNetwork::births_in(std::size_t k, int year) const {
  const int row = year - first_birth_year;
  if (row < 0 || static_cast<std::size_t>(row) >= births.rows()) {
    throw ModelError("measles: MissingBirthData for year " + std::to_string(year));
  }
  return births(static_cast<std::size_t>(row), k);
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  const double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

void compute_distances(MeaslesNetwork& network) {
  const std::size_t k = network.size();
  network.distances = Matrix(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto& a = network.cities[i];
      const auto& b = network.cities[j];
      network.distances(i, j) = great_circle_km(a.latitude, a.longitude, b.latitude, b.longitude);
    }
  }
}

MeaslesNetwork synthetic_measles_network(std::size_t cities, std::uint64_t seed, int first_year, int last_year) {
  if (cities < 1) throw ConfigError("measles: need at least one city");
  if (last_year < first_year) throw ConfigError("measles: birth years out of order");
  MeaslesNetwork net;
  RngStream rng = RngStream(seed).derive({0x4d45415345ULL});
  for (std::size_t k = 0; k < cities; ++k) {
    City c;
    c.name = "city" + std::to_string(k + 1);
    // Log-uniform populations between 1e5 and 2e6.
    c.population = std::round(std::exp(std::log(1e5) + rng.uniform() * std::log(20.0)));
    c.latitude = 50.8 + 3.5 * rng.uniform();
    c.longitude = -3.0 + 3.2 * rng.uniform();
    net.cities.push_back(c);
  }
  compute_distances(net);
  net.first_birth_year = first_year;
  const auto years = static_cast<std::size_t>(last_year - first_year + 1);
  net.births = Matrix(years, cities);
  for (std::size_t y = 0; y < years; ++y) {
    for (std::size_t k = 0; k < cities; ++k) {
      const double rate = 0.016 + 0.004 * rng.uniform();
      net.births(y, k) = std::round(rate * net.cities[k].population);
    }
  }
  return net;
}

std::int64_t overdispersed_increment(double rate, double delta, double sigma2, RngStream& rng) {
  if (!(rate > 0.0) || !(delta > 0.0)) return 0;
  double mean = rate * delta;
  if (sigma2 > 0.0) {
    std::gamma_distribution<double> gamma(delta / sigma2, sigma2);
    mean = rate * gamma(rng);
  }
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> poisson(mean);
  return poisson(rng);
}

double discretized_normal_logpmf(double y, double center, double variance) {
  const double sd = std::sqrt(variance);
  const double upper = (y + 0.5 - center) / sd;
  const double lower = (y - 0.5 - center) / sd;
  return std::max(kLogMassFloor, log_normal_interval(lower, upper));
}

double measles_measurement_logpmf(double rho, double psi, double y, double delta_n) {
  const double mean = rho * delta_n;
  const double var = rho * (1.0 - rho) * delta_n + psi * psi * rho * rho * delta_n * delta_n + 1.0;
  return discretized_normal_logpmf(y, mean, var);
}

bool is_school_holiday(int day) {
  return (day >= 356 && day <= 365) || (day >= 0 && day <= 6) || (day >= 100 && day <= 115) ||
         (day >= 199 && day <= 252) || (day >= 300 && day <= 308);
}

int day_of_year(double t) {
  const double frac = t - std::floor(t);
  return std::clamp(static_cast<int>(std::floor(frac * MeaslesModel::kDaysPerYear)), 0, 365);
}

MeaslesModel::MeaslesModel(std::shared_ptr<const MeaslesNetwork> network, double substep)
    : network_(std::move(network)), cities_(network_->size()), substep_(substep) {
  if (cities_ < 1) throw ConfigError("measles: network has no cities");
  if (!(substep_ > 0.0)) throw ConfigError("measles: substep must be positive");
  const auto& net = *network_;
  double mean_pop = 0.0;
  for (const auto& c : net.cities) {
    if (!(c.population > 0.0)) throw ConfigError("measles: city populations must be positive");
    mean_pop += c.population;
  }
  mean_pop /= static_cast<double>(cities_);
  double mean_dist = 0.0;
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < cities_; ++k) {
    for (std::size_t l = k + 1; l < cities_; ++l) {
      mean_dist += net.distances(k, l);
      ++pairs;
    }
  }
  mean_dist = pairs > 0 ? mean_dist / static_cast<double>(pairs) : 1.0;
  coupling_ = Matrix(cities_, cities_);
  for (std::size_t k = 0; k < cities_; ++k) {
    for (std::size_t l = 0; l < cities_; ++l) {
      if (k == l) continue;
      const double d = net.distances(k, l);
      if (!(d > 0.0)) throw ConfigError("measles: ZeroDistance between distinct cities");
      coupling_(k, l) = mean_dist / (mean_pop * mean_pop) * net.cities[k].population *
                        net.cities[l].population / d;
    }
  }

  defaults_.add("R0", 30.0, Transform::kLog)
      .add("a", 0.3, Transform::kLogit)
      .add("alpha", 0.98, Transform::kLog)
      .add("mu", 0.02, Transform::kLog, ParamKind::kFixed)
      .add("nu_EI", kDaysPerYear / 8.0, Transform::kLog)
      .add("nu_IR", kDaysPerYear / 5.0, Transform::kLog)
      .add("sigma2", 0.01, Transform::kLog)
      .add("psi", 0.1, Transform::kLog)
      .add("G", 100.0, Transform::kLog)
      .add("c", 0.4, Transform::kLogit);
  for (std::size_t k = 0; k < cities_; ++k) {
    defaults_.add("rho_" + std::to_string(k + 1), 0.5, Transform::kLogit, ParamKind::kFixed);
  }
  for (std::size_t k = 0; k < cities_; ++k) {
    defaults_.add("S0_" + std::to_string(k + 1), 0.032, Transform::kLogit, ParamKind::kIvp);
  }
  for (std::size_t k = 0; k < cities_; ++k) {
    defaults_.add("E0_" + std::to_string(k + 1), 4e-4, Transform::kLogit, ParamKind::kIvp);
  }
  for (std::size_t k = 0; k < cities_; ++k) {
    defaults_.add("I0_" + std::to_string(k + 1), 2.5e-4, Transform::kLogit, ParamKind::kIvp);
  }
}

double MeaslesModel::mean_transmission(ParamView theta) {
  return theta[kR0] * (theta[kNuIR] + theta[kMortality]);
}

double MeaslesModel::transmission(ParamView theta, double t) const {
  const double beta_bar = mean_transmission(theta);
  const double a = theta[kAmplitude];
  const double p = kSchoolTermFraction;
  if (is_school_holiday(day_of_year(t))) return (1.0 - 2.0 * p * a) * beta_bar;
  return (1.0 + 2.0 * (1.0 - p) * a) * beta_bar;
}

double MeaslesModel::gravity_flux(ParamView theta, std::size_t k, std::size_t l) const {
  if (k == l) throw DomainError("measles: gravity flux needs distinct cities");
  return theta[kGravity] * coupling_(k, l);
}

double MeaslesModel::infection_rate(ParamView theta, std::size_t k, ConstStateView x, double t) const {
  const auto& cities = network_->cities;
  const double alpha = theta[kMixing];
  const double own = std::pow(x[i_index(k)] / cities[k].population, alpha);
  double bracket = own;
  for (std::size_t l = 0; l < cities_; ++l) {
    if (l == k) continue;
    const double other = std::pow(x[i_index(l)] / cities[l].population, alpha);
    bracket += gravity_flux(theta, k, l) / cities[k].population * (other - own);
  }
  return transmission(theta, t) * x[s_index(k)] * std::max(0.0, bracket);
}

Recruitment MeaslesModel::susceptible_recruitment(ParamView theta, std::size_t k, double t) const {
  const int year = static_cast<int>(std::floor(t));
  const double births = network_->births_in(k, year - 4);
  const double c = theta[kCohort];
  return {(1.0 - c) * births, c * births, year + kAdmissionDay / kDaysPerYear};
}

void MeaslesModel::init_sample(ParamView theta, StateView x, RngStream&) const {
  for (std::size_t k = 0; k < cities_; ++k) {
    const double pop = network_->cities[k].population;
    x[s_index(k)] = std::round(theta[s0_param(k)] * pop);
    x[e_index(k)] = std::round(theta[e0_param(k)] * pop);
    x[i_index(k)] = std::round(theta[i0_param(k)] * pop);
    x[n_index(k)] = 0.0;
  }
}

template <bool Stochastic>
void MeaslesModel::advance(ParamView theta, double t_from, double t_to, StateView x, RngStream* rng) const {
  const double interval = t_to - t_from;
  if (interval <= 0.0) return;
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(interval / substep_ - 1e-9)));
  const double h = interval / static_cast<double>(steps);
  const auto& cities = network_->cities;
  const double alpha = theta[kMixing];
  const double mu = theta[kMortality];
  const double sigma2 = theta[kSigma2];
  thread_local std::vector<double> prevalence, force;
  prevalence.resize(cities_);
  force.resize(cities_);

  // Stochastic increments are counts; the skeleton uses expected flows.
  auto flow = [&](double rate, double available) -> double {
    if constexpr (Stochastic) {
      const auto n = static_cast<double>(overdispersed_increment(rate, h, sigma2, *rng));
      return std::min(n, available);
    } else {
      return std::min(rate * h, available);
    }
  };

  for (std::size_t step = 0; step < steps; ++step) {
    const double tau = t_from + static_cast<double>(step) * h;
    const double tau_next = step + 1 == steps ? t_to : t_from + static_cast<double>(step + 1) * h;
    const double beta = transmission(theta, tau);
    for (std::size_t k = 0; k < cities_; ++k) {
      prevalence[k] = std::pow(std::max(0.0, x[i_index(k)]) / cities[k].population, alpha);
    }
    for (std::size_t k = 0; k < cities_; ++k) {
      double bracket = prevalence[k];
      for (std::size_t l = 0; l < cities_; ++l) {
        if (l == k) continue;
        bracket += theta[kGravity] * coupling_(k, l) / cities[k].population * (prevalence[l] - prevalence[k]);
      }
      force[k] = beta * std::max(0.0, bracket);
    }
    for (std::size_t k = 0; k < cities_; ++k) {
      double& s = x[s_index(k)];
      double& e = x[e_index(k)];
      double& i = x[i_index(k)];
      const Recruitment rec = susceptible_recruitment(theta, k, tau);

      const double n_se = flow(force[k] * s, s);
      const double d_s = flow(mu * s, s - n_se);
      const double n_ei = flow(theta[kNuEI] * e, e);
      const double d_e = flow(mu * e, e - n_ei);
      const double n_ir = flow(theta[kNuIR] * i, i);
      const double d_i = flow(mu * i, i - n_ir);

      double births;
      if constexpr (Stochastic) {
        const double mean = rec.continuous_rate * h;
        births = mean > 0.0 ? static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(*rng)) : 0.0;
      } else {
        births = rec.continuous_rate * h;
      }

      s += births - n_se - d_s;
      e += n_se - n_ei - d_e;
      i += n_ei - n_ir - d_i;
      x[n_index(k)] += n_ir;

      if (tau < rec.pulse_time && rec.pulse_time <= tau_next) {
        s += Stochastic ? std::round(rec.pulse) : rec.pulse;
      }
    }
  }
}

void MeaslesModel::transition_sample(ParamView theta, double t_from, double t_to, StateView x,
                                     RngStream& rng) const {
  advance<true>(theta, t_from, t_to, x, &rng);
}

void MeaslesModel::skeleton_step(ParamView theta, double t_from, double t_to, StateView x) const {
  advance<false>(theta, t_from, t_to, x, nullptr);
}

double MeaslesModel::measurement_logdensity(ParamView theta, std::size_t, ObsView y, ConstStateView x) const {
  double total = 0.0;
  for (std::size_t k = 0; k < cities_; ++k) {
    total += measles_measurement_logpmf(theta[rho_param(k)], theta[kPsi], y[k], x[n_index(k)]);
  }
  return total;
}

void MeaslesModel::measurement_sample(ParamView theta, std::size_t, ConstStateView x, std::span<double> y,
                                      RngStream& rng) const {
  for (std::size_t k = 0; k < cities_; ++k) {
    const double rho = theta[rho_param(k)];
    const double dn = x[n_index(k)];
    const double var = rho * (1.0 - rho) * dn + theta[kPsi] * theta[kPsi] * rho * rho * dn * dn + 1.0;
    y[k] = std::max(0.0, std::round(rho * dn + std::sqrt(var) * rng.normal()));
  }
}

void MeaslesModel::measurement_mean(ParamView theta, std::size_t, ConstStateView x, std::span<double> mean) const {
  for (std::size_t k = 0; k < cities_; ++k) mean[k] = theta[rho_param(k)] * x[n_index(k)];
}

void MeaslesModel::measurement_variance(ParamView theta, std::size_t, ConstStateView x,
                                        std::span<double> variance) const {
  for (std::size_t k = 0; k < cities_; ++k) {
    const double rho = theta[rho_param(k)];
    const double dn = x[n_index(k)];
    variance[k] = rho * (1.0 - rho) * dn + theta[kPsi] * theta[kPsi] * rho * rho * dn * dn + 1.0;
  }
}

double MeaslesModel::family_logdensity(ParamView, std::size_t, std::size_t, double y, double center,
                                       double variance) const {
  return discretized_normal_logpmf(y, center, variance);
}

void MeaslesModel::reset_accumulators(StateView x) const {
  for (std::size_t k = 0; k < cities_; ++k) x[n_index(k)] = 0.0;
}

}  // namespace girf
