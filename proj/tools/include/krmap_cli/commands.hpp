#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "krmap_cli/config.hpp"

namespace krmap::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kBudgetAbort = 2 };

// Values given on the command line take precedence over the configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> map;
  std::optional<std::size_t> n;
  std::optional<std::string> suite;
  std::optional<int> repetitions;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

struct BuildOutcome {
  LayeredResult result;
  double wall_seconds = 0.0;
};

BuildOutcome build_layered(const RunConfig& cfg, const ProblemInstance& inst, std::uint64_t seed);
nlohmann::json build_manifest(const RunConfig& cfg, const BuildOutcome& outcome, std::size_t integrator_failures);

// CSV with header x1..xd,logq and 17 significant digits.
void write_samples(const ComposedMap& map, std::size_t n, std::uint64_t seed, std::ostream& out);

nlohmann::json diagnostics_json(const ImportanceDiagnostics& d, std::uint64_t seed);

// Suite presets merged under a user configuration by the benchmark command.
nlohmann::json suite_defaults(const std::string& suite);

int cmd_build(const RunConfig& cfg);
int cmd_sample(const RunConfig& cfg);
int cmd_diagnose(const RunConfig& cfg);
int cmd_benchmark(const RunConfig& cfg);

}  // namespace krmap::cli
