#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "girf/cli.hpp"
#include "girf/errors.hpp"
#include "girf/io.hpp"
#include "girf/parallel.hpp"

namespace girf::cli {

namespace {

int fail(int code, const std::string& what) {
  std::cerr << "error: " << what << '\n';
  Json j;
  j["table"] = "error";
  j["exit_code"] = code;
  j["message"] = what;
  std::cout << j.dump() << std::endl;
  return code;
}

int threads_from_env() {
  const char* env = std::getenv("GIRF_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("GIRF_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided intermediate resampling filter toolkit"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
  static const char* const kTasks[] = {"simulate", "filter", "compare", "igirf", "profile", "mcap"};
  for (const char* t : kTasks) {
    auto* sub = app.add_subcommand(t, std::string("run the ") + t + " task");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--threads", threads, "worker threads (fallback: GIRF_THREADS)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigFailure;
  }
  const std::string task = app.get_subcommands().front()->get_name();

  try {
    const int n = threads > 0 ? threads : threads_from_env();
    if (n > 0) set_worker_count(n);
    Json config;
    try {
      config = Json::parse(read_text_file(config_path));
    } catch (const Json::parse_error& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    Experiment exp = parse_experiment(config, task, seed);
    if (!out_dir.empty()) exp.out_dir = out_dir;
    run_experiment(exp, std::cout);
    std::cout.flush();
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfigFailure, e.what());
  } catch (const DomainError& e) {
    return fail(kConfigFailure, e.what());
  } catch (const ModelError& e) {
    return fail(kModelFailure, e.what());
  } catch (const FilterError& e) {
    return fail(kFilterFailure, e.what());
  } catch (const FitError& e) {
    return fail(kFilterFailure, e.what());
  } catch (const std::exception& e) {
    return fail(kModelFailure, e.what());
  }
}

}  // namespace girf::cli
