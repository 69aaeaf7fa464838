#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adagb2/geometry.hpp"
#include "adagb2/problem.hpp"

namespace adagb2 {

/// ||P_F(x - G(x)) - x||; equals ||G(x)|| when the box is all of R^n.
double true_criticality(const Objective& obj, ConstSpan x, const BoundBox& box);

/// Lower real branch of the Lambert function on [-1/e, 0). Returns w <= -1
/// with w e^w = x. Throws InputError outside the domain.
double lambert_w_minus1(double x);

struct ConstantsInput {
  double sigma_init = 0.01;
  double tau = 1.0;
  double kappa_s = 1.0;
  double kappa_B = 1.0;
  double kappa_Gg = 0.0;
  double lipschitz_L = 0.0;
  double Gamma0 = 1.0;  // f(x_0) - f_low
  int dim = 1;
};

/// Constants of the expected-rate bound E[avg_j ||d_j||] <= kappa_conv / sqrt(k+1).
struct ConstantsReport {
  double kappa_star = 0.0;  // kappa_s^2 (kappa_Gg^2 + kappa_B/2 + L/2)
  double Gamma0 = 0.0;
  double kappa_W = 0.0;
  double kappa_conv_exact = 0.0;  // through W_{-1}(-1/kappa_W)
  double kappa_conv_upper = 0.0;  // through the logarithmic upper bound on |W_{-1}|
};

ConstantsReport compute_constants(const ConstantsInput& in);

/// kappa_conv / sqrt(k + 1).
double rate_bound(double kappa_conv, std::int64_t k);

struct MagicalCheck {
  double lhs = 0.0;  // sum_j a_j / (sigma + sum_{i<=j} a_i)
  double rhs = 0.0;  // log(1 + sum_j a_j / sigma)
  bool holds = false;
};

MagicalCheck lemma_magical_check(std::span<const double> a, double sigma);

struct LambertCheck {
  double root = 0.0;  // u_2 = -(g2/g1) W_{-1}(-g1/g2)
  std::size_t compliant_samples = 0;
  bool all_below_root = false;
};

/// Sweeps u over a log grid and verifies that every u with g1 u <= g2 log u
/// lies below the larger root u_2. Requires g2 >= 3 g1 > 0.
LambertCheck lemma_lambert_check(double gamma1, double gamma2, int samples);

struct ChatzigeorgiouCheck {
  double lhs = 0.0;  // |W_{-1}(-e^{-x-1})|
  double rhs = 0.0;  // 1 + sqrt(2x) + x
  bool holds = false;
};

/// Upper bound on |W_{-1}| used to pass from the exact to the logarithmic constant. x > 0.
ChatzigeorgiouCheck chatzigeorgiou_check(double x);

/// Closed forms of the one-dimensional unbiased-oracle example on [0, inf)
/// with x_k = 1/(k+1) and P(g_k = 1) = p_k.
struct CounterexampleClosedForm {
  double e_abs_d = 0.0;
  double abs_xi = 0.0;
  double p = 0.0;
};

CounterexampleClosedForm counterexample_closed_form(std::int64_t k);

struct CounterexampleRow {
  std::int64_t k = 0;
  double mean_abs_d = 0.0;
  double se_abs_d = 0.0;
  double abs_xi = 0.0;
  double mean_g = 0.0;
};

/// Monte Carlo estimate of E|d_k| with `reps` Bernoulli draws per k. When
/// `p_override` is set it replaces p_k (p = 0 gives d = 0 always).
std::vector<CounterexampleRow> counterexample_simulate(std::span<const std::int64_t> k_values, std::int64_t reps,
                                                       std::uint64_t seed,
                                                       std::optional<double> p_override = std::nullopt);

/// Per-iteration means over replications, the input of the scenario classifier.
struct MeasureSeries {
  std::vector<std::int64_t> k;
  std::vector<double> mean_norm_d;
  std::vector<double> mean_norm_xi;
  std::vector<double> mean_err;
  std::vector<double> mean_dir_err;     // E|<G - g, s>|
  std::vector<double> mean_norm_s_sq;   // E||s||^2
};

struct ScenarioReport {
  std::vector<double> coherence_ratio;  // mean||Xi|| / mean||d||
  std::vector<double> error_ratio;      // mean||g-G|| / mean||d||
  std::vector<double> directional_ratio;  // mean|<G-g,s>| / mean||s||^2
  double kappa_opt_estimate = 0.0;
  double kappa_err_estimate = 0.0;
  double kappa_Gg_sq_estimate = 0.0;
  /// log-log slopes of the ratios against k+1 over the second half of the series.
  double coherence_trend = 0.0;
  double error_trend = 0.0;
  bool coherent = false;
  bool controlled_error = false;
  bool general = true;
};

/// Descriptive classification: a ratio whose log-log trend exceeds
/// `divergence_slope` is treated as unbounded.
ScenarioReport scenario_classifier(const MeasureSeries& series, double divergence_slope = 0.25);

/// Iteration count after which P(min_j ||Xi_j|| <= eps) >= 1 - delta, from
/// Markov's inequality. delta must lie in (1 - p_A, 1).
double probability_complexity_k(double kappa_conv, double p_A, double delta, double eps);

}  // namespace adagb2
