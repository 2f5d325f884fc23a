// krmap: build, sample and assess self-reinforced KR maps from a JSON configuration.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "krmap/errors.hpp"
#include "krmap_cli/commands.hpp"
#include "krmap_cli/config.hpp"

namespace {

using nlohmann::json;
using namespace krmap::cli;

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("krmap");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("KRMAP_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("ignoring unknown KRMAP_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

int report(int code, const std::string& type, const std::string& message) {
  const json record = {{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}};
  std::cerr << record.dump() << std::endl;
  return code;
}

json read_config_document(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("configuration file " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Self-reinforced Knothe–Rosenblatt maps with sparse polynomial densities"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Overrides o;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out, map;
  std::size_t n = 0;
  std::string suite;
  int reps = 0;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for potential evaluations");
  auto* out_opt = app.add_option("--out", out, "output directory");

  auto* build = app.add_subcommand("build", "construct a layered map and write map.json and manifest.json");
  auto* sample = app.add_subcommand("sample", "draw samples from a saved map into samples.csv");
  auto* diagnose = app.add_subcommand("diagnose", "importance-sampling diagnostics into diagnostics.json");
  auto* bench = app.add_subcommand("benchmark", "run a benchmark suite into results.csv");
  for (auto* sub : {sample, diagnose}) {
    sub->add_option("--map", map, "saved map file");
    sub->add_option("--n", n, "number of samples");
  }
  bench->add_option("--suite", suite, "csir-k1, csir-k2 or single-vs-layered");
  bench->add_option("--reps", reps, "repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kFailure, "usage", e.what());
  }
  if (*seed_opt) o.seed = seed;
  if (*threads_opt) o.threads = threads;
  if (*out_opt) o.out = out;
  if (!map.empty()) o.map = map;
  if (n > 0) o.n = n;
  if (!suite.empty()) o.suite = suite;
  if (reps > 0) o.repetitions = reps;

  try {
    json doc = read_config_document(config_path);
    if (bench->parsed()) {
      std::string name = suite;
      if (name.empty() && doc.contains("benchmark") && doc["benchmark"].is_object() &&
          doc["benchmark"].contains("suite") && doc["benchmark"]["suite"].is_string()) {
        name = doc["benchmark"]["suite"].get<std::string>();
      }
      if (name.empty()) name = "csir-k1";
      json merged = suite_defaults(name);
      merged.merge_patch(doc);
      doc = std::move(merged);
      o.suite = name;
    }
    RunConfig cfg = parse_config(doc);
    apply_overrides(cfg, o);
    if (build->parsed()) return cmd_build(cfg);
    if (sample->parsed()) return cmd_sample(cfg);
    if (diagnose->parsed()) return cmd_diagnose(cfg);
    return cmd_benchmark(cfg);
  } catch (const ConfigError& e) {
    return report(kFailure, "config", e.what());
  } catch (const krmap::FormatError& e) {
    return report(kFailure, "format", e.what());
  } catch (const krmap::LayerBudgetError& e) {
    return report(kBudgetAbort, "budget", e.what());
  } catch (const std::invalid_argument& e) {
    return report(kFailure, "argument", e.what());
  } catch (const std::exception& e) {
    return report(kFailure, "internal", e.what());
  }
}
