#include "adagb2/analysis.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "adagb2/errors.hpp"
#include "adagb2/stats.hpp"
#include "adagb2/rng.hpp"

namespace adagb2 {
namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e rounded to nearest

double branch_residual(double w, double x) { return std::abs(w * std::exp(w) - x); }

double lambert_bisection(double x) {
  // w e^w is decreasing on (-inf, -1] from 0^- to -1/e.
  double hi = -1.0;
  double lo = -2.0;
  while (lo * std::exp(lo) <= x) lo *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (mid * std::exp(mid) > x)
      lo = mid;
    else
      hi = mid;
  }
  return branch_residual(lo, x) < branch_residual(hi, x) ? lo : hi;
}

}  // namespace

double true_criticality(const Objective& obj, ConstSpan x, const BoundBox& box) {
  const Vector G = obj.eval_grad(x);
  return norm(projected_step(x, scaled(-1.0, G), box));
}

double lambert_w_minus1(double x) {
  if (std::isnan(x) || x >= 0.0 || x < -kInvE * (1.0 + 1e-15))
    throw InputError("lambert_w_minus1: argument outside [-1/e, 0)");
  if (x <= -kInvE) return -1.0;

  double w;
  if (x < -0.25) {
    // Expansion about the branch point.
    const double p = -std::sqrt(2.0 * (1.0 + std::numbers::e * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  w = std::min(w, -1.0);

  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) {
      converged = true;
      break;
    }
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double next = w - f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    if (!std::isfinite(next)) break;
    const double step = std::abs(next - w);
    w = std::min(next, -1.0);
    if (step <= 1e-14 * std::abs(w)) {
      converged = true;
      break;
    }
  }
  if (!converged || branch_residual(w, x) > 1e-12 * std::abs(x)) w = lambert_bisection(x);
  return w;
}

ConstantsReport compute_constants(const ConstantsInput& in) {
  if (!(in.sigma_init > 0.0 && in.sigma_init <= 1.0)) throw InputError("compute_constants: sigma must lie in (0, 1]");
  if (!(in.tau > 0.0 && in.tau <= 1.0)) throw InputError("compute_constants: tau must lie in (0, 1]");
  if (!(in.kappa_s >= 1.0)) throw InputError("compute_constants: kappa_s must be >= 1");
  if (!(in.kappa_B >= 1.0)) throw InputError("compute_constants: kappa_B must be >= 1");
  if (!(in.kappa_Gg >= 0.0)) throw InputError("compute_constants: kappa_Gg must be >= 0");
  if (!(in.lipschitz_L >= 0.0)) throw InputError("compute_constants: L must be >= 0");
  if (!(in.Gamma0 > 0.0) || !std::isfinite(in.Gamma0)) throw InputError("compute_constants: Gamma0 must be > 0");
  if (in.dim < 1) throw InputError("compute_constants: dimension must be >= 1");

  const double ks2 = in.kappa_s * in.kappa_s;
  const double kGg2 = in.kappa_Gg * in.kappa_Gg;
  const double s = in.sigma_init;

  ConstantsReport r;
  r.Gamma0 = in.Gamma0;
  r.kappa_star = ks2 * (kGg2 + 0.5 * in.kappa_B + 0.5 * in.lipschitz_L);
  const double growth = in.dim * ks2 * (2.0 * kGg2 + in.kappa_B + in.lipschitz_L) / in.Gamma0;
  r.kappa_W = (8.0 * in.kappa_B / (in.tau * s * s * std::sqrt(s))) * std::max(1.0, in.Gamma0) * std::max(3.0, growth);

  const double lead = std::sqrt(s / 2.0) * r.kappa_W;
  r.kappa_conv_exact = lead * std::abs(lambert_w_minus1(-1.0 / r.kappa_W));
  const double lw = std::log(r.kappa_W);
  r.kappa_conv_upper = lead * std::abs(lw + std::sqrt(2.0 * (lw - 1.0)));
  return r;
}

double rate_bound(double kappa_conv, std::int64_t k) { return kappa_conv / std::sqrt(static_cast<double>(k) + 1.0); }

MagicalCheck lemma_magical_check(std::span<const double> a, double sigma) {
  if (!(sigma > 0.0)) throw InputError("lemma_magical_check: sigma must be > 0");
  MagicalCheck c;
  double partial = 0.0;
  for (double aj : a) {
    if (!(aj >= 0.0)) throw InputError("lemma_magical_check: entries must be non-negative");
    partial += aj;
    c.lhs += aj / (sigma + partial);
  }
  c.rhs = std::log1p(partial / sigma);
  c.holds = c.lhs <= c.rhs + 1e-12;
  return c;
}

LambertCheck lemma_lambert_check(double gamma1, double gamma2, int samples) {
  if (!(gamma1 > 0.0) || !(gamma2 >= 3.0 * gamma1 * (1.0 - 1e-15)))
    throw InputError("lemma_lambert_check: need gamma2 >= 3 gamma1 > 0");
  if (samples < 2) throw InputError("lemma_lambert_check: need at least two samples");
  LambertCheck c;
  const double ratio = gamma2 / gamma1;
  c.root = -ratio * lambert_w_minus1(-1.0 / ratio);
  // grid over [1e-3, 1e3 * u_2]
  const double log_lo = std::log(1e-3);
  const double log_hi = std::log(1e3 * c.root);
  c.all_below_root = true;
  for (int j = 0; j < samples; ++j) {
    const double u = std::exp(log_lo + (log_hi - log_lo) * j / (samples - 1));
    if (gamma1 * u <= gamma2 * std::log(u)) {
      ++c.compliant_samples;
      if (u > c.root * (1.0 + 1e-12)) c.all_below_root = false;
    }
  }
  return c;
}

ChatzigeorgiouCheck chatzigeorgiou_check(double x) {
  if (!(x > 0.0)) throw InputError("chatzigeorgiou_check: x must be > 0");
  ChatzigeorgiouCheck c;
  c.lhs = std::abs(lambert_w_minus1(-std::exp(-x - 1.0)));
  c.rhs = 1.0 + std::sqrt(2.0 * x) + x;
  c.holds = c.lhs <= c.rhs;
  return c;
}

CounterexampleClosedForm counterexample_closed_form(std::int64_t k) {
  if (k < 1) throw InputError("counterexample_closed_form: k must be >= 1");
  const double r = 1.0 / (static_cast<double>(k) + 1.0);
  return {r * r + r * r * r, r, r + r * r};
}

std::vector<CounterexampleRow> counterexample_simulate(std::span<const std::int64_t> k_values, std::int64_t reps,
                                                       std::uint64_t seed, std::optional<double> p_override) {
  if (reps < 1) throw InputError("counterexample_simulate: reps must be >= 1");
  std::vector<CounterexampleRow> out;
  for (std::int64_t k : k_values) {
    const CounterexampleClosedForm cf = counterexample_closed_form(k);
    const double p = p_override.value_or(cf.p);
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("counterexample_simulate: probability outside [0, 1]");
    const double x = cf.abs_xi;  // x_k = 1/(k+1)
    auto rng = make_engine(seed, static_cast<std::uint64_t>(k));
    std::bernoulli_distribution coin(p);
    RunningStats abs_d;
    std::int64_t ones = 0;
    for (std::int64_t r = 0; r < reps; ++r) {
      const double g = coin(rng) ? 1.0 : 0.0;
      ones += g == 1.0;
      const double d = std::max(0.0, x - g) - x;
      abs_d.push(std::abs(d));
    }
    out.push_back({k, abs_d.mean(), abs_d.standard_error(), cf.abs_xi,
                   static_cast<double>(ones) / static_cast<double>(reps)});
  }
  return out;
}

ScenarioReport scenario_classifier(const MeasureSeries& s, double divergence_slope) {
  const std::size_t n = s.k.size();
  ScenarioReport r;
  r.coherence_ratio.resize(n);
  r.error_ratio.resize(n);
  r.directional_ratio.resize(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lk, lc, le;
  for (std::size_t j = 0; j < n; ++j) {
    const double md = s.mean_norm_d[j];
    r.coherence_ratio[j] = md > 0.0 ? s.mean_norm_xi[j] / md : nan;
    r.error_ratio[j] = md > 0.0 && j < s.mean_err.size() ? s.mean_err[j] / md : nan;
    r.directional_ratio[j] = j < s.mean_norm_s_sq.size() && s.mean_norm_s_sq[j] > 0.0
                                 ? s.mean_dir_err[j] / s.mean_norm_s_sq[j]
                                 : nan;
    if (std::isfinite(r.coherence_ratio[j])) r.kappa_opt_estimate = std::max(r.kappa_opt_estimate, r.coherence_ratio[j]);
    if (std::isfinite(r.error_ratio[j])) r.kappa_err_estimate = std::max(r.kappa_err_estimate, r.error_ratio[j]);
    if (std::isfinite(r.directional_ratio[j]))
      r.kappa_Gg_sq_estimate = std::max(r.kappa_Gg_sq_estimate, r.directional_ratio[j]);
  }

  auto trend = [&](const std::vector<double>& ratio) {
    std::vector<double> xs, ys;
    for (std::size_t j = n / 2; j < n; ++j) {
      if (!(ratio[j] > 0.0) || !std::isfinite(ratio[j])) continue;
      xs.push_back(std::log(static_cast<double>(s.k[j]) + 1.0));
      ys.push_back(std::log(ratio[j]));
    }
    if (xs.size() < 2) return 0.0;
    return least_squares(xs, ys).slope;
  };
  r.coherence_trend = trend(r.coherence_ratio);
  r.error_trend = trend(r.error_ratio);
  r.coherent = r.kappa_opt_estimate > 0.0 ? r.coherence_trend <= divergence_slope : true;
  r.controlled_error = r.error_trend <= divergence_slope;
  r.general = true;
  return r;
}

double probability_complexity_k(double kappa_conv, double p_A, double delta, double eps) {
  if (!(p_A > 0.0 && p_A <= 1.0)) throw InputError("probability_complexity_k: p_A must lie in (0, 1]");
  if (!(delta > 1.0 - p_A && delta < 1.0)) throw InputError("probability_complexity_k: delta must lie in (1 - p_A, 1)");
  if (!(eps > 0.0)) throw InputError("probability_complexity_k: eps must be > 0");
  const double root = p_A * kappa_conv / ((p_A - (1.0 - delta)) * eps);
  return root * root;
}

}  // namespace adagb2
