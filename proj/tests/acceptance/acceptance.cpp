// Acceptance checks. Prints one PASS/FAIL line per criterion; pass a list
// of criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "CLI11.hpp"

#include "girf/engine.hpp"
#include "girf/igirf.hpp"
#include "girf/mcap.hpp"
#include "girf/models/cbm.hpp"
#include "girf/models/lorenz96.hpp"
#include "girf/models/measles.hpp"
#include "girf/oracles/enkf.hpp"
#include "girf/oracles/kalman.hpp"
#include "girf/parallel.hpp"
#include "girf/simulate.hpp"

using namespace girf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[2048];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> regular_times(std::size_t N, double dt) {
  std::vector<double> t;
  for (std::size_t n = 1; n <= N; ++n) t.push_back(dt * static_cast<double>(n));
  return t;
}

struct CbmData {
  std::shared_ptr<CorrelatedBrownianMotion> model;
  ParamVector params;
  std::vector<double> times;
  ObservationSeries data;
  KalmanResult kalman;
};

CbmData cbm_data(std::size_t d, double alpha, std::size_t N, std::uint64_t seed) {
  CbmData c;
  c.model = std::make_shared<CorrelatedBrownianMotion>(d, alpha);
  c.params = c.model->default_params();
  c.times = regular_times(N, 1.0);
  const TimeGrid grid(0.0, c.times, 1);
  c.data = simulate_pomp(*c.model, c.params, grid, RngStream(seed).derive(Purpose::kData)).observations;
  c.kalman = kalman_filter(cbm_linear_gaussian(*c.model, c.params.values()), 0.0, c.times, c.data);
  return c;
}

// Mean of exp(l - ref) and its standard error.
std::pair<double, double> natural_mean(const std::vector<double>& ll, double ref) {
  double m = 0.0;
  for (double v : ll) m += std::exp(v - ref);
  m /= static_cast<double>(ll.size());
  double s = 0.0;
  for (double v : ll) s += (std::exp(v - ref) - m) * (std::exp(v - ref) - m);
  s /= static_cast<double>(ll.size() - 1);
  return {m, std::sqrt(s / static_cast<double>(ll.size()))};
}

bool same_output(const FilterOutput& a, const FilterOutput& b) {
  const bool means = (!a.filter_means && !b.filter_means) ||
                     (a.filter_means && b.filter_means && *a.filter_means == *b.filter_means);
  return a.loglik == b.loglik && a.cond_loglik == b.cond_loglik && a.ess == b.ess &&
         a.terminal_swarm.states == b.terminal_swarm.states && means;
}

// Runs f with one worker and with several; true when outputs agree bitwise.
template <class F>
bool thread_invariant(F f) {
  set_worker_count(1);
  const auto a = f();
  set_worker_count(3);
  const auto b = f();
  set_worker_count(1);
  return a == b;
}

GirfConfig cbm_girf(std::size_t J, std::size_t islands, std::size_t B, CbmGuideCovariance cov) {
  GirfConfig c;
  c.J = J;
  c.islands = islands;
  c.guide = make_cbm_guide(B, cov);
  return c;
}

// 1 -----------------------------------------------------------------------
Outcome unbiasedness(bool reduced) {
  const auto c = cbm_data(2, 0.0, 5, 101);
  const TimeGrid grid(0.0, c.times, 2);
  const FilterProblem problem{*c.model, c.params, c.data, grid};
  const std::size_t reps = reduced ? 20 : 500;
  Outcome o{true, ""};
  for (auto scheme : {ResampleScheme::kSystematic, ResampleScheme::kMultinomial}) {
    GirfConfig cfg = cbm_girf(200, 1, 2, CbmGuideCovariance::kExact);
    cfg.scheme = scheme;
    std::vector<double> ll(reps);
    for (std::size_t r = 0; r < reps; ++r) ll[r] = girf_filter(problem, cfg, RngStream(7000 + r)).loglik;
    const auto [m, se] = natural_mean(ll, c.kalman.loglik);
    const bool ok = std::abs(m - 1.0) <= 3.0 * se;
    o.pass = o.pass && ok;
    o.detail += fmt("%s: mean lhat/l = %.4f, se %.4f (%.2f se); ", std::string(to_string(scheme)).c_str(), m, se,
                    std::abs(m - 1.0) / se);
  }
  return o;
}

// 2 -----------------------------------------------------------------------
Outcome table_pattern(bool reduced) {
  const std::size_t d = reduced ? 10 : 50;
  const auto c = cbm_data(d, 0.0, reduced ? 10 : 50, 202);
  const TimeGrid gg(0.0, c.times, d);
  const TimeGrid ga(0.0, c.times, 1);
  const FilterProblem pg{*c.model, c.params, c.data, gg};
  const FilterProblem pa{*c.model, c.params, c.data, ga};
  const GirfConfig g = cbm_girf(reduced ? 200 : 2000, 1, 2, CbmGuideCovariance::kExact);

  auto t0 = Clock::now();
  const auto girf = girf_filter(pg, g, RngStream(21));
  const double girf_time = seconds_since(t0);

  GirfConfig a;
  a.J = reduced ? 200 : 2000;
  a = configure_apf(a);
  std::size_t apf_J = a.J;
  if (!reduced) {
    // pilot run to match wall time
    t0 = Clock::now();
    girf_filter(pa, a, RngStream(22));
    const double pilot = seconds_since(t0);
    apf_J = std::max<std::size_t>(a.J, static_cast<std::size_t>(static_cast<double>(a.J) * girf_time / pilot));
  }
  a.J = apf_J;
  t0 = Clock::now();
  const auto apf = girf_filter(pa, a, RngStream(23));
  const double apf_time = seconds_since(t0);

  const double eg = std::abs(girf.loglik - c.kalman.loglik);
  const double ea = std::abs(apf.loglik - c.kalman.loglik);
  Outcome o;
  o.pass = eg <= 30.0 && ea >= 10.0 * eg;
  o.detail = fmt("kalman %.2f, girf %.2f (err %.2f, %.1f s), apf J=%zu %.2f (err %.2f, %.1f s)", c.kalman.loglik,
                 girf.loglik, eg, girf_time, apf_J, apf.loglik, ea, apf_time);
  if (reduced) {
    // determinism only needs the filters
    o.pass = true;
    o.detail = fmt("%.17g %.17g", girf.loglik, apf.loglik);
  }
  return o;
}

// 3 -----------------------------------------------------------------------
double terminal_mse(const CbmData& c, std::size_t reps, std::size_t J, std::size_t islands, std::uint64_t seed,
                    std::vector<double>* lls = nullptr) {
  const std::size_t d = c.model->state_dim();
  const TimeGrid grid(0.0, c.times, d);
  const FilterProblem problem{*c.model, c.params, c.data, grid};
  GirfConfig cfg = cbm_girf(J, islands, 2, CbmGuideCovariance::kExact);
  cfg.record_filter_means = true;
  const auto& truth = c.kalman.means.back();
  double mse = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto out = run_islands(problem, cfg, RngStream(seed + r));
    const auto row = out.filter_means->row(c.times.size() - 1);
    for (std::size_t i = 0; i < d; ++i) mse += (row[i] - truth(static_cast<Eigen::Index>(i))) *
                                               (row[i] - truth(static_cast<Eigen::Index>(i)));
    if (lls) lls->push_back(out.loglik);
  }
  return mse / static_cast<double>(reps * d);
}

Outcome dimension_mse(bool reduced) {
  Outcome o;
  if (reduced) {
    const auto c = cbm_data(8, 0.0, 5, 303);
    std::vector<double> ll;
    o.pass = true;
    const double mse = terminal_mse(c, 2, 200, 2, 31, &ll);
    o.detail = fmt("%.17g %.17g", mse, ll[0]);
    return o;
  }
  const auto c20 = cbm_data(20, 0.0, 50, 320);
  const auto c50 = cbm_data(50, 0.0, 50, 350);
  const double m20 = terminal_mse(c20, 20, 1000, 5, 3200);
  const double m50 = terminal_mse(c50, 20, 1000, 5, 3500);
  o.pass = m50 <= 0.03;
  o.detail = fmt("terminal filter-mean mse: d=20 %.5f, d=50 %.5f (limit 0.03 at d=50)", m20, m50);
  return o;
}

// 4 -----------------------------------------------------------------------
Outcome correlation_robustness(bool reduced) {
  const std::size_t d = reduced ? 6 : 20;
  const auto c = cbm_data(d, 0.5, reduced ? 5 : 50, 404);
  const TimeGrid grid(0.0, c.times, d);
  const FilterProblem problem{*c.model, c.params, c.data, grid};
  const std::size_t J = reduced ? 100 : 1000;
  const auto exact = run_islands(problem, cbm_girf(J, 5, 2, CbmGuideCovariance::kExact), RngStream(41));
  const auto diag = run_islands(problem, cbm_girf(J, 5, 2, CbmGuideCovariance::kDiagonal), RngStream(42));
  const double ee = std::abs(exact.loglik - c.kalman.loglik);
  const double ed = std::abs(diag.loglik - c.kalman.loglik);
  Outcome o;
  o.pass = ee <= 1.0 && ed > ee && ed <= 30.0;
  o.detail = fmt("kalman %.2f, exact guide %.2f (err %.3f), diagonal guide %.2f (err %.3f)", c.kalman.loglik,
                 exact.loglik, ee, diag.loglik, ed);
  if (reduced) o = {true, fmt("%.17g %.17g", exact.loglik, diag.loglik)};
  return o;
}

// 5 -----------------------------------------------------------------------
Outcome intermediate_oracle(bool reduced) {
  const std::size_t d = reduced ? 8 : 20;
  const auto c = cbm_data(d, 0.0, 5, 505);
  const TimeGrid grid(0.0, c.times, d);
  const FilterProblem problem{*c.model, c.params, c.data, grid};
  const std::vector<std::size_t> checkpoints = reduced ? std::vector<std::size_t>{2, 8}
                                                       : std::vector<std::size_t>{4, 12, 20};
  const std::size_t reps = reduced ? 3 : 50;
  // means[checkpoint][replicate][component]
  std::vector<std::vector<std::vector<double>>> means(checkpoints.size(),
                                                      std::vector<std::vector<double>>(reps, std::vector<double>(d)));
  for (std::size_t r = 0; r < reps; ++r) {
    GirfConfig cfg = cbm_girf(reduced ? 200 : 1000, 1, 1, CbmGuideCovariance::kExact);
    cfg.observer = [&](const StepView& v) {
      if (v.n != 0) return;
      const auto it = std::find(checkpoints.begin(), checkpoints.end(), v.s);
      if (it == checkpoints.end()) return;
      auto& m = means[static_cast<std::size_t>(it - checkpoints.begin())][r];
      std::fill(m.begin(), m.end(), 0.0);
      for (std::size_t j = 0; j < v.propagated.rows(); ++j) {
        for (std::size_t i = 0; i < d; ++i) m[i] += v.probabilities[j] * v.propagated(j, i);
      }
    };
    girf_filter(problem, cfg, RngStream(5000 + r));
  }
  if (reduced) {
    std::string s;
    for (const auto& cp : means)
      for (const auto& rep : cp) s += fmt("%.17g ", rep[0]);
    return {true, s};
  }
  const auto spec = cbm_linear_gaussian(*c.model, c.params.values());
  std::size_t within = 0, total = 0;
  std::string per;
  for (std::size_t q = 0; q < checkpoints.size(); ++q) {
    const double t = grid.time(grid.index(0, checkpoints[q]));
    const auto oracle = kalman_guided_oracle(spec, 0.0, c.times, c.data, t, 1);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d; ++i) {
      double m = 0.0, ss = 0.0;
      for (std::size_t r = 0; r < reps; ++r) m += means[q][r][i];
      m /= static_cast<double>(reps);
      for (std::size_t r = 0; r < reps; ++r) ss += (means[q][r][i] - m) * (means[q][r][i] - m);
      const double se = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
      ok += std::abs(m - oracle.mean(static_cast<Eigen::Index>(i))) <= 3.0 * se;
    }
    within += ok;
    total += d;
    per += fmt("s=%zu %zu/%zu; ", checkpoints[q], ok, d);
  }
  const double frac = static_cast<double>(within) / static_cast<double>(total);
  return {frac >= 0.95, per + fmt("overall %.3f within 3 MC se (need 0.95)", frac)};
}

// 6 -----------------------------------------------------------------------
struct LorenzRun {
  double girf = 0.0;
  double enkf = 0.0;
  double girf_time = 0.0;
  double enkf_time = 0.0;
  bool operator==(const LorenzRun& o) const { return girf == o.girf && enkf == o.enkf; }
};

LorenzRun lorenz_pair(std::size_t d, double dobs, std::size_t N, std::size_t S, std::size_t J_girf,
                      std::size_t J_enkf, std::size_t sims, std::uint64_t seed) {
  Lorenz96 model(d);
  const ParamVector params = model.default_params();
  const auto times = regular_times(N, dobs);
  const TimeGrid data_grid(0.0, times, static_cast<std::size_t>(std::llround(dobs / model.euler_dt())));
  const auto data = simulate_pomp(model, params, data_grid, RngStream(seed).derive(Purpose::kData)).observations;
  const TimeGrid grid(0.0, times, S);
  const FilterProblem problem{model, params, data, grid};
  GuideSpec spec;
  spec.B = 2;
  spec.n_variability_sims = sims;
  GirfConfig cfg;
  cfg.J = J_girf;
  cfg.guide = make_simulation_guide(spec);
  LorenzRun r;
  auto t0 = Clock::now();
  r.girf = girf_filter(problem, cfg, RngStream(seed + 1)).loglik;
  r.girf_time = seconds_since(t0);
  t0 = Clock::now();
  r.enkf = enkf_filter(model, params, data, 0.0, times, J_enkf, RngStream(seed + 2)).loglik;
  r.enkf_time = seconds_since(t0);
  return r;
}

Outcome lorenz_ordering(bool reduced) {
  if (reduced) {
    const auto a = lorenz_pair(8, 0.5, 4, 10, 100, 200, 5, 606);
    return {true, fmt("%.17g %.17g", a.girf, a.enkf)};
  }
  const auto coarse = lorenz_pair(50, 0.5, 100, 50, 2000, 16000, 10, 600);
  const auto fine = lorenz_pair(50, 0.1, 100, 10, 2000, 16000, 10, 610);
  Outcome o;
  o.pass = coarse.girf - coarse.enkf >= 1e3 && fine.enkf >= fine.girf;
  o.detail = fmt("dobs=0.5: girf %.1f (%.0f s) enkf %.1f (%.0f s) gap %.1f; dobs=0.1: girf %.1f (%.0f s) enkf %.1f "
                 "(%.0f s)",
                 coarse.girf, coarse.girf_time, coarse.enkf, coarse.enkf_time, coarse.girf - coarse.enkf, fine.girf,
                 fine.girf_time, fine.enkf, fine.enkf_time);
  return o;
}

// 7 -----------------------------------------------------------------------
Outcome igirf_mle(bool reduced) {
  CorrelatedBrownianMotion model(1);
  const ParamVector truth = model.default_params();
  const std::size_t N = reduced ? 20 : 100;
  const auto times = regular_times(N, 1.0);
  const TimeGrid grid(0.0, times, 1);
  const auto data = simulate_pomp(model, truth, grid, RngStream(707).derive(Purpose::kData)).observations;

  // Kalman grid search, then golden refinement of the log likelihood
  auto kalman_ll = [&](double sd) {
    auto theta = truth.values();
    theta[CorrelatedBrownianMotion::kObsSd] = sd;
    return kalman_filter(cbm_linear_gaussian(model, theta), 0.0, times, data).loglik;
  };
  double best = 0.05, best_ll = -std::numeric_limits<double>::infinity();
  for (double sd = 0.05; sd <= 5.0; sd += 0.001) {
    const double ll = kalman_ll(sd);
    if (ll > best_ll) {
      best_ll = ll;
      best = sd;
    }
  }

  ParamVector start = truth;
  start.set("obs_sd", 2.0);
  IgirfConfig cfg;
  cfg.M = reduced ? 3 : 20;
  cfg.cooling = 0.92;
  cfg.sigma.assign(start.size(), 0.0);
  cfg.sigma[start.index("obs_sd")] = 0.05;
  cfg.filter.J = reduced ? 100 : 500;
  cfg.filter.guide = make_cbm_guide(1, CbmGuideCovariance::kExact);
  const FilterProblem problem{model, start, data, grid};
  const auto res = igirf_run(problem, cfg, replicate_params(start, cfg.filter.J), RngStream(77));
  double mean = 0.0;
  const std::size_t col = start.index("obs_sd");
  for (std::size_t j = 0; j < res.final_swarm.rows(); ++j) mean += res.final_swarm(j, col);
  mean /= static_cast<double>(res.final_swarm.rows());
  if (reduced) return {true, fmt("%.17g %.17g", mean, res.loglik.back())};
  const double rel = std::abs(mean - best) / best;
  return {rel <= 0.10, fmt("kalman mle obs_sd %.4f, igirf swarm mean %.4f (rel err %.3f, limit 0.10)", best, mean, rel)};
}

// 8 -----------------------------------------------------------------------
Outcome mcap_exactness(bool reduced) {
  (void)reduced;
  const double delta0 = mcap_cutoff(1.0, 0.0, 0.05);
  const bool four_dp = std::abs(delta0 - 1.9207) < 5e-5;

  std::vector<double> phi;
  for (int i = 0; i <= 40; ++i) phi.push_back(0.1 * i);
  ProfilePoints exact;
  exact.phi = phi;
  for (double x : phi) exact.loglik.push_back(-(x - 2.0) * (x - 2.0));
  const auto r = mcap_interval(exact, McapOptions{});
  const double lo_err = std::abs(r.lower - (2.0 - std::sqrt(r.delta)));
  const double hi_err = std::abs(r.upper - (2.0 + std::sqrt(r.delta)));
  const bool interval = lo_err <= 1e-6 && hi_err <= 1e-6 && std::abs(r.delta - delta0) < 1e-9;

  RngStream rng(808);
  std::vector<double> base;
  for (std::size_t i = 0; i < phi.size(); ++i) base.push_back(rng.normal());
  bool monotone = true;
  double prev = 0.0;
  std::string deltas;
  for (double scale : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4}) {
    ProfilePoints p = exact;
    for (std::size_t i = 0; i < phi.size(); ++i) p.loglik[i] += scale * base[i];
    const double dl = mcap_interval(p, McapOptions{}).delta;
    monotone = monotone && dl >= prev;
    prev = dl;
    deltas += fmt("%.4f ", dl);
  }
  return {four_dp && interval && monotone,
          fmt("delta(se_mc=0) %.6f; interval errors %.2e %.2e; delta vs noise: %s", delta0, lo_err, hi_err,
              deltas.c_str())};
}

// 9 -----------------------------------------------------------------------
Outcome measles_properties(bool reduced) {
  const std::size_t K = reduced ? 3 : 5;
  auto net = std::make_shared<MeaslesNetwork>(synthetic_measles_network(K, 909, 1940, 1956));
  MeaslesModel model(net);
  const ParamVector params = model.default_params();
  const std::size_t N = reduced ? 6 : 52;
  std::vector<double> times;
  for (std::size_t n = 1; n <= N; ++n) times.push_back(1950.0 + static_cast<double>(n) / 26.0);
  const TimeGrid data_grid(1950.0, times, 1);

  bool nonneg = true;
  ObservationSeries data;
  for (std::uint64_t s = 0; s < (reduced ? 1u : 20u); ++s) {
    const auto sim = simulate_pomp(model, params, data_grid, RngStream(900 + s).derive(Purpose::kData));
    for (double v : sim.latent.data()) nonneg = nonneg && v >= 0.0 && std::isfinite(v);
    if (s == 0) data = sim.observations;
  }

  GuideSpec spec;
  spec.B = 3;
  spec.n_variability_sims = 40;
  spec.refresh_policy = RefreshPolicy::kEveryS1;
  GirfConfig cfg;
  cfg.J = reduced ? 50 : 500;
  cfg.guide = make_simulation_guide(spec);
  const TimeGrid grid(1950.0, times, reduced ? 4 : model.state_dim());
  const FilterProblem problem{model, params, data, grid};
  const auto out = girf_filter(problem, cfg, RngStream(91));
  const double min_ess = *std::min_element(out.ess.begin(), out.ess.end());

  RngStream rng(92);
  const int draws = reduced ? 1000 : 100000;
  double m = 0.0, ss = 0.0;
  std::vector<double> v(static_cast<std::size_t>(draws));
  for (auto& x : v) m += x = static_cast<double>(overdispersed_increment(5.0, 1.0, 0.0, rng));
  m /= draws;
  for (double x : v) ss += (x - m) * (x - m);
  const double ratio = ss / (draws - 1) / m;
  if (reduced) return {true, fmt("%.17g %.17g %.17g", out.loglik, min_ess, ratio)};
  const bool ok = nonneg && std::isfinite(out.loglik) && min_ess >= 0.02 * static_cast<double>(cfg.J) &&
                  ratio >= 0.9 && ratio <= 1.1;
  return {ok, fmt("nonnegative %s; loglik %.2f; min ess %.1f of J=%zu; poisson var/mean %.4f", nonneg ? "yes" : "no",
                  out.loglik, min_ess, cfg.J, ratio)};
}

// 10 ----------------------------------------------------------------------
Outcome determinism(bool) {
  using Check = std::function<Outcome(bool)>;
  const std::vector<std::pair<int, Check>> checks{
      {1, unbiasedness},          {2, table_pattern},        {3, dimension_mse}, {4, correlation_robustness},
      {5, intermediate_oracle},   {6, lorenz_ordering},      {7, igirf_mle},     {8, mcap_exactness},
      {9, measles_properties}};
  std::string bad;
  for (const auto& [k, f] : checks) {
    if (!thread_invariant([&] { return f(true).detail; })) bad += std::to_string(k) + " ";
  }
  return {bad.empty(), bad.empty() ? "reduced configs of criteria 1-9 are bit-identical with 1 and 3 threads"
                                   : "thread-dependent outputs in criteria " + bad};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)(bool);
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "unbiasedness", 120, unbiasedness},
      {2, "girf vs apf at d=50", 600, table_pattern},
      {3, "filter-mean mse vs dimension", 1200, dimension_mse},
      {4, "correlation robustness", 600, correlation_robustness},
      {5, "intermediate guided oracle", 120, intermediate_oracle},
      {6, "lorenz girf vs enkf", 1800, lorenz_ordering},
      {7, "igirf mle recovery", 300, igirf_mle},
      {8, "mcap formula", 1, mcap_exactness},
      {9, "measles properties", 600, measles_properties},
      {10, "determinism across thread counts", 600, determinism},
  };
  std::vector<int> ids;
  std::string report_path;
  bool report_only = false;
  CLI::App app{"acceptance benchmark: one PASS/FAIL line per criterion"};
  app.add_option("ids", ids, "criteria to run (default: all)");
  app.add_option("--report", report_path, "also write the PASS/FAIL lines to this file");
  app.add_flag("--report-only", report_only, "exit 0 when every criterion ran, whatever the verdicts");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> wanted(ids.begin(), ids.end());
  std::ofstream report;
  if (!report_path.empty()) {
    report.open(report_path);
    if (!report) {
      std::fprintf(stderr, "cannot write %s\n", report_path.c_str());
      return 2;
    }
  }
  set_worker_count(1);
  bool all_pass = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run(false);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double t = seconds_since(t0);
    const bool in_time = t < c.budget_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    const std::string line = fmt("%s criterion %d (%s): %s [%.1f s of %.0f s budget%s]", pass ? "PASS" : "FAIL", c.id,
                                 c.name, o.detail.c_str(), t, c.budget_s, in_time ? "" : ", over budget");
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report.is_open()) report << line << '\n' << std::flush;
  }
  return all_pass || report_only ? 0 : 1;
}
