#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adagb2/analysis.hpp"
#include "adagb2/config.hpp"
#include "adagb2/solver.hpp"
#include "adagb2/stats.hpp"

namespace adagb2 {

/// Problem named by the config, with the bounds override applied.
TestProblem build_problem(const ProblemConfig& config);

/// Per-iteration statistics over the replications in which event A occurred
/// (all replications when none did).
struct AggregateRow {
  std::int64_t k = 0;
  double mean_norm_d = 0.0;
  double se_norm_d = 0.0;
  double mean_norm_xi = 0.0;
  double se_norm_xi = 0.0;
  double mean_err = 0.0;
  double mean_rmse = 0.0;  // sqrt(mean ||g - G||^2)
  double running_avg_norm_d = 0.0;
  double running_avg_norm_xi = 0.0;
  double min_norm_xi_so_far = 0.0;  // min over j <= k of mean_norm_xi
  double p_A = 0.0;
  double beta = 0.0;  // running average of mean_err
  double mean_dir_err = 0.0;
  double mean_norm_s_sq = 0.0;
  /// Monitor firings at this k, summed over all replications.
  std::int64_t violations = 0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered by replication index
  std::vector<AggregateRow> aggregate;
  double p_A = 0.0;
  bool conditioned_on_A = false;
  nlohmann::json summary;
};

/// Executes config.replications independent runs (in parallel) and aggregates
/// them in replication order. Output is identical for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs, double p_A, bool condition_on_A);

/// Writes aggregate, traces (when enabled) and summary.json under
/// config.outputs.directory. Throws std::runtime_error on I/O failure.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& config);

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_traces_csv(std::ostream& os, const std::vector<RunResult>& runs);

/// %.17g formatting; NaN prints as "nan".
std::string format_double(double v);

/// Fit of log(series[k]) against log(k + 1) for k in [k_min, k_max].
LinearFit fit_rate(std::span<const double> series, std::int64_t k_min, std::int64_t k_max);
LinearFit fit_rate(const std::vector<AggregateRow>& aggregate, std::int64_t k_min, std::int64_t k_max);

struct DeterministicReport {
  bool applicable = false;
  std::string reason;
  double d0_sq = 0.0;
  double Gamma0 = 0.0;
  ConstantsReport constants;
  std::int64_t horizon = 0;
  /// max over k of avg_{j<=k} ||Xi_j|| / (kappa_conv / sqrt(k+1)).
  double max_ratio = 0.0;
  std::int64_t argmax_k = 0;
  std::int64_t violations = 0;  // k with avg > bound (1 + 1e-9)
  std::int64_t monitor_violations = 0;
  bool holds = false;
  double final_running_avg_xi = 0.0;
};

/// Exact-oracle run checking avg_{j<=k} ||Xi_j|| <= kappa_conv / sqrt(k+1) at
/// every k, with kappa_conv computed for kappa_Gg = 0. Inapplicable when
/// ||d_0||^2 <= sigma_init, when L is unknown, or when f(x_0) <= f_low.
DeterministicReport verify_deterministic_bound(const TestProblem& problem, const SolverParams& params,
                                               const CurvatureSpec& curvature, std::int64_t horizon);

nlohmann::json to_json(const DeterministicReport& report);
nlohmann::json to_json(const ConstantsReport& report);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Randomized sweeps of the lemma-level inequalities and projection
/// properties, as run by the `check` command.
std::vector<PropertyCheck> run_property_suite(std::uint64_t seed);

}  // namespace adagb2
