#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "girf/cli.hpp"
#include "girf/errors.hpp"
#include "girf/io.hpp"
#include "girf/models/cbm.hpp"
#include "girf/oracles/enkf.hpp"
#include "girf/oracles/kalman.hpp"
#include "girf/simulate.hpp"

#ifndef GIRF_CODE_VERSION
#define GIRF_CODE_VERSION "unknown"
#endif

namespace girf::cli {

std::string code_version() { return GIRF_CODE_VERSION; }

namespace {

namespace fs = std::filesystem;

Json provenance(const Experiment& exp) {
  Json p;
  p["code_version"] = code_version();
  p["task"] = exp.task;
  p["seed"] = exp.seed;
  p["replicates"] = exp.replicates;
  p["config"] = exp.raw;
  return p;
}

Json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

/// Emits every row of a CSV just written as one JSON line.
void mirror_csv(const std::string& path, const std::string& table, std::ostream& lines) {
  const CsvTable t = read_csv(path);
  for (const auto& row : t.rows) {
    Json j;
    j["table"] = table;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& f = row[c];
      const bool integral = !f.empty() && f.find_first_not_of("-0123456789") == std::string::npos;
      if (integral) {
        j[t.header[c]] = std::stoll(f);
        continue;
      }
      try {
        j[t.header[c]] = real_json(parse_real(f));
      } catch (const ConfigError&) {
        j[t.header[c]] = f;
      }
    }
    lines << j.dump() << '\n';
  }
}

void write_json(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct Dataset {
  std::vector<double> times;
  ObservationSeries data;
  std::optional<Matrix> truth;  ///< latent states at t_1..t_N
};

Dataset load_dataset(const Experiment& exp) {
  const auto& bundle = *exp.model;
  const auto& grid = *exp.grid;
  Dataset ds;
  if (!exp.data->file.empty()) {
    LoadedObservations obs = bundle.network ? read_cases_csv(exp.data->file, *bundle.network)
                                            : read_observations_csv(exp.data->file, bundle.model->obs_dim());
    if (!grid.obs_times.empty() && grid.obs_times != obs.times) {
      throw ConfigError("grid: observation times differ from those in data.file");
    }
    if (obs.times.empty()) throw ConfigError("data.file: no observations");
    double prev = grid.t0;
    for (double t : obs.times) {
      if (!(t > prev)) throw ConfigError("data.file: times must increase strictly from grid.t0");
      prev = t;
    }
    ds.times = std::move(obs.times);
    ds.data = std::move(obs.data);
    return ds;
  }
  const TimeGrid sim_grid(grid.t0, grid.obs_times, 1);
  Simulation sim = simulate_pomp(*bundle.model, bundle.params, sim_grid, RngStream(exp.data->seed).derive(Purpose::kData));
  ds.times = grid.obs_times;
  ds.data = std::move(sim.observations);
  Matrix truth(ds.times.size(), bundle.model->state_dim());
  for (std::size_t n = 1; n <= ds.times.size(); ++n) {
    const auto r = sim.latent.row(n);
    std::copy(r.begin(), r.end(), truth.row(n - 1).begin());
  }
  ds.truth = std::move(truth);
  return ds;
}

std::size_t default_steps(const Experiment& exp) {
  return exp.grid->S > 0 ? exp.grid->S : exp.model->model->state_dim();
}

struct EngineResult {
  FilterOutput out;
  double seconds = 0.0;
  std::optional<Matrix> means;
};

EngineResult run_engine(const EngineSpec& spec, const ModelBundle& bundle, const Dataset& ds, double t0,
                        std::size_t default_S, const RngStream& rng, bool want_means, const ParamVector* params = nullptr) {
  const ParamVector& theta = params ? *params : bundle.params;
  const Model& model = *bundle.model;
  EngineResult res;
  const auto start = std::chrono::steady_clock::now();
  if (spec.engine == "girf" || spec.engine == "bootstrap" || spec.engine == "apf") {
    GirfConfig config = spec.config;
    config.record_filter_means = config.record_filter_means || want_means;
    const std::size_t S = effective_steps(*config.guide, spec.S.value_or(default_S));
    const TimeGrid grid(t0, ds.times, S);
    res.out = run_islands(FilterProblem{model, theta, ds.data, grid}, config, rng);
    res.means = res.out.filter_means;
  } else if (spec.engine == "enkf") {
    EnkfOutput e = enkf_filter(model, theta, ds.data, t0, ds.times, spec.config.J, rng);
    res.out.loglik = e.loglik;
    res.out.cond_loglik = e.cond_loglik;
    res.out.steps_per_interval = 1;
    res.means = std::move(e.filter_means);
  } else {
    const auto& cbm = dynamic_cast<const CorrelatedBrownianMotion&>(model);
    const auto values = theta.values();
    const KalmanResult k = kalman_filter(cbm_linear_gaussian(cbm, values), t0, ds.times, ds.data);
    res.out.loglik = k.loglik;
    res.out.cond_loglik = k.cond_loglik;
    res.out.steps_per_interval = 1;
    Matrix m(ds.times.size(), model.state_dim());
    for (std::size_t n = 0; n < k.means.size(); ++n) {
      for (std::size_t i = 0; i < model.state_dim(); ++i) m(n, i) = k.means[n][static_cast<Eigen::Index>(i)];
    }
    res.means = std::move(m);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!std::isfinite(res.out.loglik)) {
    throw FilterError(spec.label + ": non-finite log-likelihood estimate");
  }
  return res;
}

double terminal_mse(const Matrix& a, const Matrix& b) {
  const std::size_t last = a.rows() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < a.cols(); ++i) {
    const double r = a(last, i) - b(last, i);
    s += r * r;
  }
  return s / static_cast<double>(a.cols());
}

std::string out_path(const Experiment& exp, const std::string& name) { return (fs::path(exp.out_dir) / name).string(); }

void finish(const Experiment& exp, Json summary, std::ostream& lines) {
  summary["provenance"] = provenance(exp);
  write_json(out_path(exp, "provenance.json"), provenance(exp));
  write_json(out_path(exp, "summary.json"), summary);
  Json line = summary;
  line.erase("provenance");
  line["table"] = "summary";
  lines << line.dump() << '\n';
}

void task_simulate(const Experiment& exp, std::ostream& lines) {
  const auto& bundle = *exp.model;
  const auto& g = *exp.grid;
  const TimeGrid grid(g.t0, g.obs_times, 1);
  Json files = Json::array();
  for (std::size_t r = 0; r < exp.replicates; ++r) {
    const std::uint64_t seed = exp.data->seed + r;
    const Simulation sim = simulate_pomp(*bundle.model, bundle.params, grid, RngStream(seed).derive(Purpose::kData));
    const std::string suffix = exp.replicates == 1 ? "" : "_" + std::to_string(r);
    const std::string data = out_path(exp, "data" + suffix + ".csv");
    const std::string latent = out_path(exp, "latent" + suffix + ".csv");
    write_observations_csv(data, g.obs_times, sim.observations);
    write_latent_csv(latent, grid, sim.latent);
    mirror_csv(data, "data" + suffix, lines);
    mirror_csv(latent, "latent" + suffix, lines);
    files.push_back(data);
    if (bundle.network) {
      const std::string cases = out_path(exp, "cases" + suffix + ".csv");
      write_cases_csv(cases, *bundle.network, g.obs_times, sim.observations);
      files.push_back(cases);
    }
  }
  if (bundle.network) {
    write_cities_csv(out_path(exp, "cities.csv"), *bundle.network);
    write_births_csv(out_path(exp, "births.csv"), *bundle.network);
  }
  Json summary;
  summary["task"] = "simulate";
  summary["observations"] = g.obs_times.size();
  summary["obs_dim"] = bundle.model->obs_dim();
  summary["files"] = files;
  finish(exp, summary, lines);
}

void task_filter(const Experiment& exp, std::ostream& lines) {
  const Dataset ds = load_dataset(exp);
  const auto& spec = *exp.filter;
  std::vector<FilterOutput> runs;
  std::vector<Matrix> means;
  Json logliks = Json::array(), times = Json::array();
  double total_time = 0.0;
  for (std::size_t r = 0; r < exp.replicates; ++r) {
    EngineResult res = run_engine(spec, *exp.model, ds, exp.grid->t0, default_steps(exp), RngStream(exp.seed + r),
                                  spec.config.record_filter_means);
    logliks.push_back(res.out.loglik);
    times.push_back(res.seconds);
    total_time += res.seconds;
    if (spec.config.record_filter_means && res.means) means.push_back(*res.means);
    runs.push_back(std::move(res.out));
  }
  const TimeGrid grid(exp.grid->t0, ds.times, runs.front().steps_per_interval);
  write_filter_csv(out_path(exp, "filter.csv"), grid, runs);
  mirror_csv(out_path(exp, "filter.csv"), "filter", lines);
  if (!means.empty()) {
    write_filter_means_csv(out_path(exp, "filter_means.csv"), ds.times, means);
    mirror_csv(out_path(exp, "filter_means.csv"), "filter_means", lines);
  }
  double mean = 0.0;
  for (const auto& run : runs) mean += run.loglik;
  mean /= static_cast<double>(runs.size());
  double ss = 0.0;
  for (const auto& run : runs) ss += (run.loglik - mean) * (run.loglik - mean);
  Json summary;
  summary["task"] = "filter";
  summary["engine"] = spec.engine;
  summary["loglik"] = logliks;
  summary["mean_loglik"] = mean;
  summary["se_loglik"] = runs.size() > 1 ? std::sqrt(ss / static_cast<double>(runs.size() - 1) /
                                                     static_cast<double>(runs.size()))
                                         : 0.0;
  summary["wall_time_s"] = times;
  summary["total_wall_time_s"] = total_time;
  finish(exp, summary, lines);
}

void task_compare(const Experiment& exp, std::ostream& lines) {
  const Dataset ds = load_dataset(exp);
  std::optional<Matrix> kalman_means;
  if (exp.model->name == "cbm") {
    EngineSpec k;
    k.engine = "kalman";
    k.label = "kalman";
    kalman_means = run_engine(k, *exp.model, ds, exp.grid->t0, 1, RngStream(exp.seed), true).means;
  }
  const std::string path = out_path(exp, "compare.csv");
  CsvWriter w(path);
  w.row({"engine", "label", "replicate", "loglik", "wall_time_s", "mse_truth", "mse_kalman"});
  Json engines = Json::array();
  for (std::size_t e = 0; e < exp.compare.size(); ++e) {
    const auto& spec = exp.compare[e];
    double mean = 0.0;
    for (std::size_t r = 0; r < exp.replicates; ++r) {
      const EngineResult res = run_engine(spec, *exp.model, ds, exp.grid->t0, default_steps(exp),
                                          RngStream(exp.seed + r).derive(Purpose::kReplicate, e), true);
      const std::string mse_truth = ds.truth && res.means ? format_real(terminal_mse(*res.means, *ds.truth)) : "";
      const std::string mse_kalman =
          kalman_means && res.means ? format_real(terminal_mse(*res.means, *kalman_means)) : "";
      w.row({spec.engine, spec.label, std::to_string(r), format_real(res.out.loglik), format_real(res.seconds),
             mse_truth, mse_kalman});
      mean += res.out.loglik;
    }
    Json je;
    je["engine"] = spec.engine;
    je["label"] = spec.label;
    je["mean_loglik"] = mean / static_cast<double>(exp.replicates);
    engines.push_back(je);
  }
  w.close();
  mirror_csv(path, "compare", lines);
  Json summary;
  summary["task"] = "compare";
  summary["engines"] = engines;
  finish(exp, summary, lines);
}

IgirfResult igirf_once(const Experiment& exp, const Dataset& ds, const ParamVector& start, const RngStream& rng) {
  const auto& spec = *exp.igirf;
  const auto& bundle = *exp.model;
  const std::size_t S = effective_steps(*spec.config.filter.guide, exp.filter->S.value_or(default_steps(exp)));
  const TimeGrid grid(exp.grid->t0, ds.times, S);
  const FilterProblem problem{*bundle.model, start, ds.data, grid};
  Matrix swarm = replicate_params(start, spec.config.filter.J * spec.config.filter.islands);
  if (spec.alternation == "joint") return igirf_run(problem, spec.config, swarm, rng);

  IgirfConfig regular = spec.config;
  for (std::size_t i = 0; i < start.size(); ++i) {
    if (start[i].kind == ParamKind::kIvp) regular.sigma[i] = 0.0;
  }
  IgirfResult result;
  for (std::size_t round = 0; round < spec.rounds; ++round) {
    swarm = estimate_ivps(problem, std::min(spec.ivp_data_prefix, ds.data.size()), spec.config, swarm,
                          spec.ivp_passes, rng.derive(Purpose::kPerturbInit, round));
    IgirfResult part = igirf_run(problem, regular, swarm, rng.derive(Purpose::kReplicate, round));
    swarm = part.final_swarm;
    result.loglik.insert(result.loglik.end(), part.loglik.begin(), part.loglik.end());
    result.swarm_means.insert(result.swarm_means.end(), part.swarm_means.begin(), part.swarm_means.end());
    result.swarm_sds.insert(result.swarm_sds.end(), part.swarm_sds.begin(), part.swarm_sds.end());
    result.point_estimate = part.point_estimate;
    result.final_swarm = std::move(part.final_swarm);
  }
  return result;
}

void task_igirf(const Experiment& exp, std::ostream& lines) {
  const Dataset ds = load_dataset(exp);
  const auto& start = exp.igirf->start;
  const std::string path = out_path(exp, "igirf.csv");
  CsvWriter w(path);
  std::vector<std::string> header{"replicate", "iteration", "loglik"};
  for (const auto& e : start.entries()) header.push_back("mean_" + e.name);
  for (const auto& e : start.entries()) header.push_back("sd_" + e.name);
  w.row(header);
  Json estimates = Json::array();
  for (std::size_t r = 0; r < exp.replicates; ++r) {
    const IgirfResult res = igirf_once(exp, ds, start, RngStream(exp.seed + r));
    for (std::size_t m = 0; m < res.loglik.size(); ++m) {
      std::vector<std::string> row{std::to_string(r), std::to_string(m + 1), format_real(res.loglik[m])};
      for (double v : res.swarm_means[m]) row.push_back(format_real(v));
      for (double v : res.swarm_sds[m]) row.push_back(format_real(v));
      w.row(row);
    }
    Json est;
    for (const auto& e : res.point_estimate.entries()) est[e.name] = e.value;
    estimates.push_back(est);
  }
  w.close();
  mirror_csv(path, "igirf", lines);
  Json summary;
  summary["task"] = "igirf";
  summary["point_estimate"] = estimates;
  write_json(out_path(exp, "estimate.json"), estimates);
  finish(exp, summary, lines);
}

void task_profile(const Experiment& exp, std::ostream& lines) {
  const Dataset ds = load_dataset(exp);
  const auto& prof = *exp.profile;
  const auto& bundle = *exp.model;
  ProfilePoints points;
  for (std::size_t i = 0; i < prof.values.size(); ++i) {
    ParamVector theta = exp.igirf ? exp.igirf->start : bundle.params;
    try {
      theta.set(prof.parameter, prof.values[i]);
    } catch (const DomainError& e) {
      throw ConfigError("profile.values: " + std::string(e.what()));
    }
    for (std::size_t r = 0; r < exp.replicates; ++r) {
      const RngStream rng = RngStream(exp.seed + r).derive(Purpose::kProfile, i);
      ParamVector at = theta;
      if (prof.method == "igirf") at = igirf_once(exp, ds, theta, rng.derive(Purpose::kIteration)).point_estimate;
      const EngineResult res =
          run_engine(*exp.filter, bundle, ds, exp.grid->t0, default_steps(exp), rng.derive(Purpose::kPropagate), false, &at);
      points.phi.push_back(prof.values[i]);
      points.loglik.push_back(res.out.loglik);
      points.replicate.push_back(static_cast<int>(r));
    }
  }
  const std::string path = out_path(exp, "profile.csv");
  write_profile_csv(path, points);
  mirror_csv(path, "profile", lines);
  Json summary;
  summary["task"] = "profile";
  summary["parameter"] = prof.parameter;
  summary["points"] = points.phi.size();
  finish(exp, summary, lines);
}

void task_mcap(const Experiment& exp, std::ostream& lines) {
  const auto& spec = *exp.mcap;
  const ProfilePoints points = read_profile_csv(spec.input);
  const McapResult res = mcap_interval(points, spec.options);
  ProfilePoints kept;
  for (std::size_t i = 0; i < points.phi.size(); ++i) {
    if (!spec.options.mask.empty() && !spec.options.mask[i]) continue;
    double phi = points.phi[i];
    if (spec.options.transform == PhiTransform::kSqrt) phi = std::sqrt(phi);
    if (spec.options.transform == PhiTransform::kLog) phi = std::log(phi);
    kept.phi.push_back(phi);
    kept.loglik.push_back(points.loglik[i]);
  }
  const LocalQuadraticSmoother curve(kept.phi, kept.loglik, spec.options.span);
  const std::string path = out_path(exp, "smoothed.csv");
  write_smoothed_csv(path, curve, spec.smoothed_points, spec.options.transform);
  mirror_csv(path, "smoothed", lines);

  Json summary;
  summary["task"] = "mcap";
  summary["phi_hat"] = res.phi_hat;
  summary["lower"] = res.lower;
  summary["upper"] = res.upper;
  summary["lower_truncated"] = res.lower_truncated;
  summary["upper_truncated"] = res.upper_truncated;
  summary["delta"] = res.delta;
  summary["se_mc"] = res.se_mc;
  summary["se_stat"] = res.se_stat;
  summary["se_total"] = res.se_total;
  summary["a"] = res.fit.a;
  summary["b"] = res.fit.b;
  summary["c"] = res.fit.c;
  summary["smoothed_max"] = res.smoothed_max;
  summary["span"] = spec.options.span;
  summary["alpha"] = spec.options.alpha;
  summary["transform"] = std::string(to_string(spec.options.transform));
  write_json(out_path(exp, "mcap.json"), summary);
  finish(exp, summary, lines);
}

}  // namespace

void run_experiment(const Experiment& exp, std::ostream& lines) {
  std::error_code ec;
  fs::create_directories(exp.out_dir, ec);
  if (ec) throw ConfigError("output.dir: cannot create '" + exp.out_dir + "': " + ec.message());
  if (exp.task == "simulate") {
    task_simulate(exp, lines);
  } else if (exp.task == "filter") {
    task_filter(exp, lines);
  } else if (exp.task == "compare") {
    task_compare(exp, lines);
  } else if (exp.task == "igirf") {
    task_igirf(exp, lines);
  } else if (exp.task == "profile") {
    task_profile(exp, lines);
  } else {
    task_mcap(exp, lines);
  }
}

}  // namespace girf::cli
