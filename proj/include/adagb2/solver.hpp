#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adagb2/curvature.hpp"
#include "adagb2/geometry.hpp"
#include "adagb2/oracle.hpp"
#include "adagb2/problem.hpp"

namespace adagb2 {

enum class StepMode { cauchy, first_order, sign_adagrad };

StepMode parse_step_mode(const std::string& name);
const char* to_string(StepMode mode);

struct SolverParams {
  double sigma_init = 0.01;  // initial weight, in (0, 1]
  double tau = 1.0;          // model-decrease fraction, in (0, 1]
  double kappa_s = 1.0;      // step/trust-radius ratio, >= 1
  StepMode step_mode = StepMode::cauchy;
  std::int64_t max_iter = 1000;
};

/// Throws ConfigError (path "solver.<field>") on out-of-range parameters, or
/// when sign_adagrad is paired with a non-zero curvature provider.
void validate(const SolverParams& params, CurvatureKind curvature);

struct SolverState {
  Vector x;
  Vector w;
  std::int64_t k = 0;

  /// x_0 = P_F(x_ini), w_{-1} = sigma_init.
  static SolverState initial(ConstSpan x_ini, const BoundBox& box, const SolverParams& params);
};

/// Per-iteration inequalities checked at runtime. Each one follows from the
/// construction of the step and must never fire.
enum class Monitor : std::size_t {
  feasibility,       // x_k + s_k in F
  trust_bound,       // |s_i| <= kappa_s Delta_i
  model_decrease,    // m(s) <= tau m(s_Q)
  gsl_decrease,      // g^T s_L <= -sigma sum d_i^2 / w_i
  gsl_curvature,     // |g^T s_L| >= sigma ||s_L||^2
  cauchy_decrease,   // m(s_Q) <= -(sigma^2 / 2 kappa_B) sum d_i^2 / w_i
  general_decrease,  // g^T s <= -(tau sigma^2 / 2 kappa_B) d^T Delta + kappa_s^2 kappa_B ||Delta||^2 / 2
  step_norm,         // ||s||^2 <= kappa_s^2 sum d_i^2 / w_i^2
  weights_monotone,  // sigma <= w_{k-1,i} <= w_{k,i}
  measure_gap,       // ||Xi|| <= ||d|| + ||g - G||
  count
};

inline constexpr std::size_t kMonitorCount = static_cast<std::size_t>(Monitor::count);
inline constexpr double kMonitorSlack = 1e-10;

const char* to_string(Monitor m);

using MonitorCounts = std::array<std::int64_t, kMonitorCount>;

/// Bitmask of monitors that fired in one iteration.
struct MonitorFlags {
  std::uint32_t bits = 0;
  void set(Monitor m) { bits |= 1u << static_cast<std::size_t>(m); }
  bool test(Monitor m) const { return (bits >> static_cast<std::size_t>(m)) & 1u; }
  bool any() const { return bits != 0; }
  int count() const;
};

/// lhs <= rhs up to kMonitorSlack relative to `scale` (default max(|lhs|, |rhs|)).
bool holds_with_slack(double lhs, double rhs, double scale = 0.0);

struct FirstOrderQuantities {
  Vector d;
  Vector w;
  Vector delta;
  Vector s_L;
};

/// d = P_F(x - g) - x, w_i = sqrt(w_i^2 + d_i^2), Delta_i = |d_i| / w_i and the
/// trust-box projected step s_L. Throws NumericalError on non-finite g.
FirstOrderQuantities first_order_quantities(const SolverState& state, ConstSpan g, const BoundBox& box);

struct CauchyStep {
  double gamma = 1.0;
  Vector s_Q;
};

/// gamma = min(1, -g^T s_L / s_L^T B s_L) when the curvature is positive, else 1.
CauchyStep cauchy_step(ConstSpan g, ConstSpan s_L, const CurvatureProvider& provider, ConstSpan x);

struct SelectedStep {
  Vector s;
  /// The mode's candidate failed the acceptance conditions and s_Q was used.
  bool fell_back = false;
};

SelectedStep select_step(StepMode mode, ConstSpan g, ConstSpan delta, ConstSpan s_L, ConstSpan s_Q,
                         const CurvatureProvider& provider, ConstSpan x, const BoundBox& box,
                         const SolverParams& params);

struct IterationTrace {
  std::int64_t k = 0;
  OracleDraw draw;
  Vector d;
  Vector delta;
  Vector s_L;
  double gamma = 1.0;
  Vector s_Q;
  Vector s;
  double norm_d = 0.0;
  double norm_xi = 0.0;   // true measure ||P_F(x - G) - x||
  double err_norm = 0.0;  // ||g - G||
  /// |<G - g, s>| and ||s||^2, for the directional error diagnostic.
  double dir_err = 0.0;
  double norm_s_sq = 0.0;
  std::optional<double> f_value;
  bool fell_back = false;
  MonitorFlags monitors;
};

/// One full iteration: first-order quantities, Cauchy step, step selection and
/// the update x_{k+1} = x_k + s_k. The iterate is clamped into F afterwards so
/// that rounding in x + s can never leave the box.
std::pair<SolverState, IterationTrace> step(const SolverState& state, const OracleDraw& draw,
                                            CurvatureProvider& provider, const BoundBox& box,
                                            const SolverParams& params);

/// Scalar summary of one iteration, kept for every k of a run.
struct TraceRow {
  std::int64_t k = 0;
  double norm_d = 0.0;
  double norm_xi = 0.0;
  double err_norm = 0.0;
  double gamma = 1.0;
  double f = 0.0;
  double dir_err = 0.0;
  double norm_s_sq = 0.0;
  std::uint32_t monitor_bits = 0;
};

struct RunOptions {
  std::uint64_t replication = 0;
  /// Record ||Xi_k||, ||g_k - G_k|| and f(x_k). When false they are NaN.
  bool diagnostics = true;
  /// Optional observer receiving every full IterationTrace.
  std::function<void(const IterationTrace&)> on_iteration;
};

struct RunResult {
  std::vector<TraceRow> rows;
  bool event_A = false;  // ||d_0||^2 >= sigma_init
  double d0_sq = 0.0;
  Vector running_avg_norm_d;
  Vector running_avg_norm_xi;
  double min_norm_xi = 0.0;
  MonitorCounts violations{};
  std::int64_t fallbacks = 0;
  Vector x_final;

  std::int64_t total_violations() const;
};

/// Runs `horizon` iterations from P_F(x_ini) with oracle draws taken from the
/// stream (seed, options.replication, k).
RunResult run(const TestProblem& problem, const NoiseModel& model, const CurvatureSpec& curvature,
              const SolverParams& params, std::uint64_t seed, std::int64_t horizon, const RunOptions& options = {});

}  // namespace adagb2
