#include <cmath>
#include <limits>

#include "girf/cli.hpp"
#include "girf/errors.hpp"
#include "girf/io.hpp"
#include "girf/models/cbm.hpp"
#include "girf/models/lorenz96.hpp"

namespace girf::cli {

Fields::Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
}

std::string Fields::path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Fields::has(const std::string& key) const { return j_.contains(key); }

const Json& Fields::raw(const std::string& key) {
  if (!j_.contains(key)) throw ConfigError(path(key) + ": required field missing");
  used_.insert(key);
  return j_.at(key);
}

double Fields::real(const std::string& key, std::optional<double> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path(key) + ": required field missing");
  }
  const Json& v = raw(key);
  if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
  const double out = v.get<double>();
  if (!std::isfinite(out)) throw ConfigError(path(key) + ": must be finite");
  return out;
}

std::uint64_t Fields::count(const std::string& key, std::optional<std::uint64_t> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path(key) + ": required field missing");
  }
  const Json& v = raw(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(path(key) + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string Fields::text(const std::string& key, std::optional<std::string> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path(key) + ": required field missing");
  }
  const Json& v = raw(key);
  if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
  return v.get<std::string>();
}

bool Fields::flag(const std::string& key, std::optional<bool> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path(key) + ": required field missing");
  }
  const Json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
  return v.get<bool>();
}

std::vector<double> Fields::reals(const std::string& key) {
  const Json& v = raw(key);
  if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Fields Fields::object(const std::string& key) { return Fields(raw(key), path(key)); }

void Fields::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (!used_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown field");
  }
}

namespace {

template <class F>
auto wrap_domain(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::size_t positive(Fields& f, const std::string& key, std::optional<std::uint64_t> fallback) {
  const auto v = f.count(key, fallback);
  if (v == 0) throw ConfigError(f.path(key) + ": must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

ModelBundle build_model(Fields model) {
  ModelBundle out;
  out.name = model.text("name");
  const Json empty = Json::object();
  const Json& overrides = model.has("params") ? model.raw("params") : empty;
  if (!overrides.is_object()) throw ConfigError(model.path("params") + ": expected an object");
  auto override_value = [&](const std::string& name) -> std::optional<double> {
    if (!overrides.contains(name)) return std::nullopt;
    const Json& v = overrides.at(name);
    if (v.is_number()) return v.get<double>();
    if (v.is_object() && v.contains("value") && v.at("value").is_number()) return v.at("value").get<double>();
    return std::nullopt;
  };

  if (out.name == "cbm") {
    const std::size_t d = positive(model, "dim", std::nullopt);
    const double alpha = override_value("alpha").value_or(0.0);
    out.model = wrap_domain(model.path("params.alpha"),
                            [&] { return std::make_shared<CorrelatedBrownianMotion>(d, alpha); });
  } else if (out.name == "lorenz96") {
    const std::size_t d = positive(model, "dim", std::nullopt);
    const double dt = model.real("euler_dt", 0.01);
    const std::string sk = model.text("skeleton", "euler");
    SkeletonScheme scheme;
    if (sk == "euler") {
      scheme = SkeletonScheme::kEuler;
    } else if (sk == "rk4") {
      scheme = SkeletonScheme::kRk4;
    } else {
      throw ConfigError(model.path("skeleton") + ": expected euler or rk4");
    }
    if (d < 4) throw ConfigError(model.path("dim") + ": lorenz96 needs dim >= 4");
    if (!(dt > 0.0)) throw ConfigError(model.path("euler_dt") + ": must be > 0");
    out.model = std::make_shared<Lorenz96>(d, 8.0, 1.0, 1.0, dt, scheme);
  } else if (out.name == "measles") {
    std::shared_ptr<MeaslesNetwork> net;
    if (model.has("cities_file") || model.has("births_file")) {
      net = std::make_shared<MeaslesNetwork>(
          read_measles_network(model.text("cities_file"), model.text("births_file")));
    } else {
      const std::size_t K = positive(model, "cities", std::nullopt);
      const auto seed = model.count("network_seed", 1);
      const auto first = static_cast<int>(model.real("first_year", 1940));
      const auto last = static_cast<int>(model.real("last_year", 1950));
      if (last < first) throw ConfigError(model.path("last_year") + ": must be >= first_year");
      net = std::make_shared<MeaslesNetwork>(synthetic_measles_network(K, seed, first, last));
    }
    const double substep_days = model.real("substep_days", 1.0);
    if (!(substep_days > 0.0)) throw ConfigError(model.path("substep_days") + ": must be > 0");
    out.network = net;
    out.model = wrap_domain(model.path("network"), [&] {
      return std::make_shared<MeaslesModel>(net, substep_days / MeaslesModel::kDaysPerYear);
    });
  } else {
    throw ConfigError(model.path("name") + ": unknown model '" + out.name + "' (cbm, lorenz96, measles)");
  }

  out.params = out.model->default_params();
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    const std::string where = model.path("params." + it.key());
    const auto idx = out.params.find(it.key());
    if (!idx) throw ConfigError(where + ": unknown parameter for model '" + out.name + "'");
    const Json& v = it.value();
    wrap_domain(where, [&] {
      if (v.is_number()) {
        out.params.set(it.key(), v.get<double>());
        return 0;
      }
      Fields f(v, where);
      if (f.has("transform")) out.params.set_transform(it.key(), parse_transform(f.text("transform")));
      if (f.has("kind")) {
        try {
          out.params.set_kind(it.key(), parse_kind(f.text("kind")));
        } catch (const ConfigError& e) {
          throw ConfigError(where + ".kind: " + e.what());
        }
      }
      if (f.has("value")) out.params.set(it.key(), f.real("value"));
      f.finish();
      return 0;
    });
  }
  model.finish();
  return out;
}

GridSpec parse_grid(Fields grid) {
  GridSpec g;
  g.t0 = grid.real("t0", 0.0);
  if (grid.has("obs_times")) {
    if (grid.has("dt") || grid.has("n_obs")) throw ConfigError(grid.path("obs_times") + ": give obs_times or dt/n_obs");
    g.obs_times = grid.reals("obs_times");
  } else if (grid.has("dt") || grid.has("n_obs")) {
    const double dt = grid.real("dt");
    const auto n = grid.count("n_obs");
    if (!(dt > 0.0)) throw ConfigError(grid.path("dt") + ": must be > 0");
    for (std::uint64_t i = 1; i <= n; ++i) g.obs_times.push_back(g.t0 + dt * static_cast<double>(i));
  }
  g.S = static_cast<std::size_t>(grid.count("S", 0));
  double prev = g.t0;
  for (double t : g.obs_times) {
    if (!(t > prev)) throw ConfigError(grid.path("obs_times") + ": times must increase strictly from t0");
    prev = t;
  }
  grid.finish();
  return g;
}

EngineSpec parse_engine(Fields filter, const ModelBundle& bundle) {
  EngineSpec spec;
  spec.engine = filter.text("engine", "girf");
  spec.label = filter.text("label", spec.engine);
  static const std::set<std::string> engines{"girf", "bootstrap", "apf", "enkf", "kalman"};
  if (!engines.count(spec.engine)) {
    throw ConfigError(filter.path("engine") + ": unknown engine '" + spec.engine + "'");
  }
  auto& c = spec.config;
  const bool particle = spec.engine == "girf" || spec.engine == "bootstrap" || spec.engine == "apf";
  if (spec.engine != "kalman") c.J = static_cast<std::size_t>(filter.count("J", 1000));
  if (particle) {
    c.islands = static_cast<std::size_t>(filter.count("islands", 1));
    c.scheme = wrap_domain(filter.path("scheme"), [&] {
      try {
        return parse_scheme(filter.text("scheme", "systematic"));
      } catch (const ConfigError& e) {
        throw ConfigError(filter.path("scheme") + ": " + e.what());
      }
    });
    c.ess_threshold = filter.real("ess_threshold", 0.0);
  }
  c.record_filter_means = filter.flag("record_filter_means", false);
  if (filter.has("S")) {
    if (spec.engine != "girf") throw ConfigError(filter.path("S") + ": only the girf engine takes S");
    spec.S = static_cast<std::size_t>(filter.count("S"));
    if (*spec.S == 0) throw ConfigError(filter.path("S") + ": must be >= 1");
  }
  if (spec.engine == "kalman" && bundle.name != "cbm") {
    throw ConfigError(filter.path("engine") + ": kalman needs the linear-Gaussian cbm model");
  }

  if (spec.engine == "girf") {
    const Json empty = Json::object();
    Fields g = filter.has("guide") ? filter.object("guide") : Fields(empty, filter.path("guide"));
    spec.guide_kind = g.text("kind", bundle.name == "cbm" ? "cbm_exact" : "simulation");
    try {
      if (spec.guide_kind == "simulation") {
        GuideSpec gs;
        gs.B = static_cast<std::size_t>(g.count("B", gs.B));
        gs.power_schedule = parse_power_schedule(g.text("power_schedule", std::string(to_string(gs.power_schedule))));
        gs.n_variability_sims = static_cast<std::size_t>(g.count("n_variability_sims", gs.n_variability_sims));
        gs.refresh_policy = parse_refresh_policy(g.text("refresh_policy", std::string(to_string(gs.refresh_policy))));
        gs.variance_inflation = g.real("variance_inflation", 0.0);
        gs.validate();
        c.guide = make_simulation_guide(gs);
      } else if (spec.guide_kind == "cbm_exact" || spec.guide_kind == "cbm_diag") {
        if (bundle.name != "cbm") throw ConfigError("analytic cbm guides need the cbm model");
        const auto B = static_cast<std::size_t>(g.count("B", 2));
        if (B == 0) throw ConfigError("B must be >= 1");
        const auto schedule = parse_power_schedule(g.text("power_schedule", "all-ones"));
        c.guide = make_cbm_guide(B, spec.guide_kind == "cbm_exact" ? CbmGuideCovariance::kExact
                                                                 : CbmGuideCovariance::kDiagonal,
                                 schedule);
      } else if (spec.guide_kind == "bootstrap") {
        c.guide = make_bootstrap_guide();
      } else {
        throw ConfigError("unknown guide kind '" + spec.guide_kind + "'");
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      throw ConfigError(msg.rfind(filter.path("guide"), 0) == 0 ? msg : filter.path("guide") + ": " + msg);
    }
    g.finish();
  } else if (spec.engine == "bootstrap") {
    c.guide = make_bootstrap_guide();
    c = configure_bootstrap(c);
  } else if (spec.engine == "apf") {
    c.guide = make_apf_guide();
    c = configure_apf(c);
  }
  if (!particle && filter.has("guide")) throw ConfigError(filter.path("guide") + ": not used by " + spec.engine);
  if (particle) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(filter.path("") + " " + e.what());
    }
  } else if (spec.engine == "enkf" && c.J < 2) {
    throw ConfigError(filter.path("J") + ": enkf needs J >= 2");
  }
  filter.finish();
  return spec;
}

namespace {

IgirfSpec parse_igirf(Fields f, const ModelBundle& bundle, const EngineSpec& engine) {
  IgirfSpec spec;
  auto& c = spec.config;
  c.M = static_cast<std::size_t>(f.count("M", 20));
  c.cooling = f.real("cooling", 0.92);
  const std::string est = f.text("estimate", "mean");
  if (est == "mean") {
    c.estimate = PointEstimate::kMean;
  } else if (est == "median") {
    c.estimate = PointEstimate::kMedian;
  } else {
    throw ConfigError(f.path("estimate") + ": expected mean or median");
  }
  c.sigma.assign(bundle.params.size(), 0.0);
  if (f.has("sigma")) {
    const Json& s = f.raw("sigma");
    if (!s.is_object()) throw ConfigError(f.path("sigma") + ": expected an object of parameter sds");
    for (auto it = s.begin(); it != s.end(); ++it) {
      const auto idx = bundle.params.find(it.key());
      if (!idx) throw ConfigError(f.path("sigma." + it.key()) + ": unknown parameter");
      if (!it.value().is_number()) throw ConfigError(f.path("sigma." + it.key()) + ": expected a number");
      c.sigma[*idx] = it.value().get<double>();
    }
  }
  spec.start = bundle.params;
  if (f.has("start")) {
    const Json& s = f.raw("start");
    if (!s.is_object()) throw ConfigError(f.path("start") + ": expected an object of parameter values");
    for (auto it = s.begin(); it != s.end(); ++it) {
      if (!spec.start.find(it.key())) throw ConfigError(f.path("start." + it.key()) + ": unknown parameter");
      if (!it.value().is_number()) throw ConfigError(f.path("start." + it.key()) + ": expected a number");
      wrap_domain(f.path("start." + it.key()), [&] {
        spec.start.set(it.key(), it.value().get<double>());
        return 0;
      });
    }
  }
  spec.alternation = f.text("alternation", "joint");
  if (spec.alternation != "joint" && spec.alternation != "ivp-then-regular") {
    throw ConfigError(f.path("alternation") + ": expected joint or ivp-then-regular");
  }
  spec.ivp_data_prefix = static_cast<std::size_t>(f.count("ivp_data_prefix", 0));
  spec.ivp_passes = static_cast<std::size_t>(f.count("ivp_passes", 1));
  spec.rounds = static_cast<std::size_t>(f.count("rounds", 1));
  if (spec.alternation == "ivp-then-regular" && spec.ivp_data_prefix == 0) {
    throw ConfigError(f.path("ivp_data_prefix") + ": required for ivp-then-regular");
  }
  if (spec.rounds == 0) throw ConfigError(f.path("rounds") + ": must be >= 1");
  f.finish();
  c.filter = engine.config;
  try {
    c.validate(bundle.params);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("igirf: ") + e.what());
  }
  return spec;
}

ProfileSpec parse_profile(Fields f, const ModelBundle& bundle) {
  ProfileSpec spec;
  spec.parameter = f.text("parameter");
  if (!bundle.params.find(spec.parameter)) throw ConfigError(f.path("parameter") + ": unknown parameter");
  if (f.has("values")) {
    if (f.has("range")) throw ConfigError(f.path("values") + ": give values or range, not both");
    spec.values = f.reals("values");
  } else {
    Fields r = f.object("range");
    const double from = r.real("from"), to = r.real("to");
    const auto count = r.count("count");
    if (count < 2 || !(to > from)) throw ConfigError(f.path("range") + ": need from < to and count >= 2");
    for (std::uint64_t i = 0; i < count; ++i) {
      spec.values.push_back(i + 1 == count ? to
                                           : from + (to - from) * static_cast<double>(i) /
                                                        static_cast<double>(count - 1));
    }
    r.finish();
  }
  if (spec.values.empty()) throw ConfigError(f.path("values") + ": at least one value");
  spec.method = f.text("method", "filter");
  if (spec.method != "filter" && spec.method != "igirf") {
    throw ConfigError(f.path("method") + ": expected filter or igirf");
  }
  f.finish();
  return spec;
}

McapSpec parse_mcap(Fields f, const std::string& out_dir) {
  McapSpec spec;
  spec.input = f.text("input", out_dir + "/profile.csv");
  spec.options.alpha = f.real("alpha", 0.05);
  spec.options.span = f.real("span", 0.75);
  if (!(spec.options.alpha > 0.0 && spec.options.alpha < 1.0)) throw ConfigError(f.path("alpha") + ": in (0, 1)");
  if (!(spec.options.span > 0.0 && spec.options.span <= 1.0)) throw ConfigError(f.path("span") + ": in (0, 1]");
  if (f.has("mask")) {
    const Json& m = f.raw("mask");
    if (!m.is_array()) throw ConfigError(f.path("mask") + ": expected an array of booleans");
    for (const auto& v : m) {
      if (!v.is_boolean()) throw ConfigError(f.path("mask") + ": expected an array of booleans");
      spec.options.mask.push_back(v.get<bool>());
    }
  }
  spec.options.transform = parse_phi_transform(f.text("transform", "identity"));
  spec.smoothed_points = static_cast<std::size_t>(f.count("smoothed_points", 200));
  if (spec.smoothed_points < 2) throw ConfigError(f.path("smoothed_points") + ": must be >= 2");
  f.finish();
  return spec;
}

}  // namespace

Experiment parse_experiment(const Json& config, const std::string& task, std::optional<std::uint64_t> seed_override) {
  static const std::set<std::string> tasks{"simulate", "filter", "compare", "igirf", "profile", "mcap"};
  if (!tasks.count(task)) throw ConfigError("unknown task '" + task + "'");
  Fields top(config, "");
  Experiment exp;
  const auto version = top.count("schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion));
  }
  if (top.has("description")) top.text("description");
  exp.task = top.text("task", task);
  if (exp.task != task) throw ConfigError("task: config says '" + exp.task + "' but the subcommand is '" + task + "'");
  exp.seed = top.count("seed", 1);
  if (seed_override) exp.seed = *seed_override;
  exp.replicates = static_cast<std::size_t>(top.count("replicates", 1));
  if (exp.replicates == 0) throw ConfigError("replicates: must be >= 1");
  if (top.has("output")) {
    Fields o = top.object("output");
    exp.out_dir = o.text("dir", exp.out_dir);
    o.finish();
  }

  const bool needs_model = task != "mcap";
  if (needs_model || top.has("model")) exp.model = build_model(top.object("model"));
  if (exp.model) {
    exp.grid = top.has("grid") ? parse_grid(top.object("grid")) : GridSpec{};
    DataSpec data;
    data.seed = exp.seed;
    if (top.has("data")) {
      Fields d = top.object("data");
      data.file = d.text("file", "");
      data.seed = d.count("seed", exp.seed);
      d.finish();
      if (task == "simulate" && !data.file.empty()) throw ConfigError("data.file: simulate generates its own data");
    }
    if (data.file.empty() && exp.grid->obs_times.empty()) {
      throw ConfigError("grid: observation times (obs_times or dt/n_obs) are required without data.file");
    }
    exp.data = data;
  }

  const bool needs_filter = task == "filter" || task == "igirf" || task == "profile";
  if (needs_filter) {
    const Json empty = Json::object();
    exp.filter = parse_engine(top.has("filter") ? top.object("filter") : Fields(empty, "filter"), *exp.model);
  } else if (top.has("filter")) {
    throw ConfigError("filter: not used by task " + task);
  }
  if (task == "compare") {
    const Json& list = top.object("compare").raw("engines");
    Fields cmp = top.object("compare");
    cmp.raw("engines");
    cmp.finish();
    if (!list.is_array() || list.size() < 2) throw ConfigError("compare.engines: need at least two engines");
    for (std::size_t i = 0; i < list.size(); ++i) {
      exp.compare.push_back(parse_engine(Fields(list[i], "compare.engines[" + std::to_string(i) + "]"), *exp.model));
    }
  } else if (top.has("compare")) {
    throw ConfigError("compare: not used by task " + task);
  }
  const bool wants_igirf =
      task == "igirf" || (task == "profile" && config.contains("profile") && config["profile"].is_object() &&
                          config["profile"].value("method", std::string("filter")) == "igirf");
  if (wants_igirf) {
    const Json empty = Json::object();
    exp.igirf = parse_igirf(top.has("igirf") ? top.object("igirf") : Fields(empty, "igirf"), *exp.model, *exp.filter);
  } else if (top.has("igirf")) {
    throw ConfigError("igirf: not used by task " + task);
  }
  if (task == "profile") {
    exp.profile = parse_profile(top.object("profile"), *exp.model);
    if (exp.profile->method == "igirf") {
      const auto idx = *exp.model->params.find(exp.profile->parameter);
      exp.igirf->config.sigma[idx] = 0.0;
    }
  } else if (top.has("profile")) {
    throw ConfigError("profile: not used by task " + task);
  }
  if (task == "mcap") {
    const Json empty = Json::object();
    exp.mcap = parse_mcap(top.has("mcap") ? top.object("mcap") : Fields(empty, "mcap"), exp.out_dir);
  } else if (top.has("mcap")) {
    throw ConfigError("mcap: not used by task " + task);
  }
  if (task == "mcap" && top.has("data")) throw ConfigError("data: not used by task mcap");
  top.finish();

  exp.raw = config;
  exp.raw["seed"] = exp.seed;
  exp.raw["task"] = task;
  return exp;
}

}  // namespace girf::cli
