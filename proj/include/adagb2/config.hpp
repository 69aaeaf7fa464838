#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adagb2/curvature.hpp"
#include "adagb2/oracle.hpp"
#include "adagb2/solver.hpp"

namespace adagb2 {

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(const std::string& name);

struct ProblemConfig {
  std::string name = "boxed_quadratic";
  int dim = 2;
  std::uint64_t seed = 0;
  std::optional<Vector> lower;  // bounds override
  std::optional<Vector> upper;
};

struct OutputConfig {
  std::filesystem::path directory = "adagb2_out";
  OutputFormat format = OutputFormat::csv;
  bool traces = true;
};

/// Experiment description. The file form is a JSON object with sections
/// problem, oracle, curvature, solver, run and (optionally) outputs; see
/// README.md for the key list. Unknown keys are rejected.
struct ExperimentConfig {
  ProblemConfig problem;
  NoiseModel oracle = NoiseModel::exact();
  CurvatureSpec curvature;
  SolverParams solver;
  std::int64_t horizon = 1000;
  std::int64_t replications = 1;
  std::uint64_t base_seed = 0;
  bool diagnostics = true;
  unsigned threads = 0;  // 0 = hardware concurrency
  double kappa_Gg = 0.0;  // user-supplied value for the constants report
  std::vector<double> epsilons;  // criticality targets for the probability report
  double delta = 0.5;
  OutputConfig outputs;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const NoiseModel& model);
nlohmann::json to_json(const ExperimentConfig& config);

NoiseModel parse_noise_model(const nlohmann::json& node, const std::string& path = "oracle");

}  // namespace adagb2
