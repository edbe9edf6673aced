#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "girf/engine.hpp"
#include "girf/igirf.hpp"
#include "girf/mcap.hpp"
#include "girf/models/measles.hpp"
#include "json.hpp"

namespace girf::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Exit status of a failed run.
enum ExitCode : int { kOk = 0, kConfigFailure = 1, kModelFailure = 2, kFilterFailure = 3 };

/// Strict reader over a JSON object: every key must be consumed, unknown
/// keys are reported with their full path.
class Fields {
 public:
  Fields(const Json& j, std::string path);

  bool has(const std::string& key) const;
  const Json& raw(const std::string& key);
  double real(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  bool flag(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::vector<double> reals(const std::string& key);
  Fields object(const std::string& key);
  std::string path(const std::string& key) const;
  /// Throws ConfigError naming the first key not read.
  void finish() const;

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

struct ModelBundle {
  std::shared_ptr<const Model> model;
  ParamVector params;
  std::shared_ptr<const MeaslesNetwork> network;  ///< measles only
  std::string name;
};

/// model block: name plus per-model settings and parameter overrides.
ModelBundle build_model(Fields model);

struct GridSpec {
  double t0 = 0.0;
  std::vector<double> obs_times;
  std::size_t S = 0;  ///< 0 means the state dimension
};

GridSpec parse_grid(Fields grid);

struct EngineSpec {
  std::string engine = "girf";  ///< girf | bootstrap | apf | enkf | kalman
  std::string label;
  GirfConfig config;
  std::optional<std::size_t> S;  ///< overrides the grid block
  std::string guide_kind;
};

/// filter block (also used for each entry of compare.engines).
EngineSpec parse_engine(Fields filter, const ModelBundle& bundle);

struct DataSpec {
  std::string file;        ///< observations csv (or cases csv for measles)
  std::uint64_t seed = 0;  ///< simulation seed when no file is given
};

struct IgirfSpec {
  IgirfConfig config;
  std::size_t ivp_data_prefix = 0;
  std::size_t ivp_passes = 1;
  std::string alternation = "joint";
  std::size_t rounds = 1;
  ParamVector start;
};

struct ProfileSpec {
  std::string parameter;
  std::vector<double> values;
  std::string method = "filter";  ///< filter | igirf
};

struct McapSpec {
  std::string input;
  McapOptions options;
  std::size_t smoothed_points = 200;
};

struct Experiment {
  Json raw;
  std::string task;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::string out_dir = "out";
  std::optional<ModelBundle> model;
  std::optional<GridSpec> grid;
  std::optional<DataSpec> data;
  std::optional<EngineSpec> filter;
  std::vector<EngineSpec> compare;
  std::optional<IgirfSpec> igirf;
  std::optional<ProfileSpec> profile;
  std::optional<McapSpec> mcap;
};

/// Parses and validates a config for `task` (the subcommand). A "task"
/// field in the config, when present, must agree. Throws ConfigError.
Experiment parse_experiment(const Json& config, const std::string& task, std::optional<std::uint64_t> seed_override);

/// Code version embedded in provenance records.
std::string code_version();

/// Runs a parsed experiment, writing artifacts under exp.out_dir and JSON
/// lines to `lines`. Throws the library errors.
void run_experiment(const Experiment& exp, std::ostream& lines);

/// Full command line entry point; returns the process exit status.
int main(int argc, char** argv);

}  // namespace girf::cli
