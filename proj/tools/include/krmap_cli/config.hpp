#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "krmap/dirt.hpp"
#include "krmap/problems.hpp"

namespace krmap::cli {

// Schema violations and other unusable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string kind = "csir";
  int K = 1;
  std::uint64_t seed = 2024;
  double sigma_n = 1.0;
  std::vector<double> x_true;  // empty selects (0.1, 1, …)
  int d = 2;
  double sharpness = 20.0;
  std::vector<double> center;
  double curvature = 1.0;
  double scale = 1.0;
  double alpha = 2.0;
  double beta = 3.0;
};

struct ScheduleSpec {
  std::string kind = "adaptive";
  AdaptiveTempering adaptive{0.01, 0.8};
  std::vector<double> betas;
  std::optional<AdaptiveTempering> inner;
};

struct BenchmarkSpec {
  std::string suite = "csir-k1";
  int repetitions = 9;
  int single_degree = 60;
  int quadrature_points = 200;
  std::size_t diagnostic_samples = 10000;
};

struct RunConfig {
  ProblemSpec problem;
  BasisFamily family = BasisFamily::Legendre;
  ScheduleSpec schedule;
  LsConfig ls;
  LayeredConfig layered;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "out";
  std::string sample_map;
  std::size_t sample_n = 1000;
  std::string diagnose_map;
  std::size_t diagnose_n = 10000;
  BenchmarkSpec benchmark;
  nlohmann::json source = nlohmann::json::object();  // the validated input document
};

// Defaults used when a key is absent.
RunConfig default_config();

// Validates against the run-config schema, then fills a RunConfig. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const RunConfig& cfg);

// A target posterior with everything needed to build and assess maps for it.
struct ProblemInstance {
  std::optional<CsirModel> csir;
  std::optional<RegressionToy> regression;
  std::optional<AnalyticTarget> analytic;
  TargetProblem problem;
  std::vector<DomainMap> maps;
  std::vector<Interval> box;  // support of the prior
  // Unnormalized log posterior density with respect to Lebesgue measure on the box.
  LogDensity log_target;
  BridgingSchedule schedule;
};

ProblemInstance make_problem(const RunConfig& cfg);

}  // namespace krmap::cli
