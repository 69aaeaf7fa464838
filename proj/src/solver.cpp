#include "adagb2/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "adagb2/errors.hpp"
#include "adagb2/rng.hpp"

namespace adagb2 {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double model_value(ConstSpan g, ConstSpan s, const CurvatureProvider& provider, ConstSpan x) {
  return dot(g, s) + 0.5 * provider.quad_form(x, s);
}

// The three acceptance conditions on a candidate step.
bool acceptable(ConstSpan s, ConstSpan g, ConstSpan delta, double model_s_Q, const CurvatureProvider& provider,
                ConstSpan x, const BoundBox& box, const SolverParams& params) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double xi = x[i] + s[i];
    const double scale = std::max({1.0, std::abs(x[i]), std::abs(s[i])});
    if (!holds_with_slack(box.lower(i), xi, scale) || !holds_with_slack(xi, box.upper(i), scale)) return false;
    if (!holds_with_slack(std::abs(s[i]), params.kappa_s * delta[i])) return false;
  }
  return holds_with_slack(model_value(g, s, provider, x), params.tau * model_s_Q);
}

}  // namespace

StepMode parse_step_mode(const std::string& name) {
  if (name == "cauchy") return StepMode::cauchy;
  if (name == "first_order") return StepMode::first_order;
  if (name == "sign_adagrad") return StepMode::sign_adagrad;
  throw ConfigError("solver.step_mode", "unknown step mode '" + name + "'");
}

const char* to_string(StepMode mode) {
  switch (mode) {
    case StepMode::cauchy: return "cauchy";
    case StepMode::first_order: return "first_order";
    case StepMode::sign_adagrad: return "sign_adagrad";
  }
  return "?";
}

const char* to_string(Monitor m) {
  switch (m) {
    case Monitor::feasibility: return "feasibility";
    case Monitor::trust_bound: return "trust_bound";
    case Monitor::model_decrease: return "model_decrease";
    case Monitor::gsl_decrease: return "gsl_decrease";
    case Monitor::gsl_curvature: return "gsl_curvature";
    case Monitor::cauchy_decrease: return "cauchy_decrease";
    case Monitor::general_decrease: return "general_decrease";
    case Monitor::step_norm: return "step_norm";
    case Monitor::weights_monotone: return "weights_monotone";
    case Monitor::measure_gap: return "measure_gap";
    case Monitor::count: break;
  }
  return "?";
}

int MonitorFlags::count() const { return std::popcount(bits); }

bool holds_with_slack(double lhs, double rhs, double scale) {
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  const double s = std::max({scale, std::abs(lhs), std::abs(rhs)});
  return lhs <= rhs + kMonitorSlack * s;
}

void validate(const SolverParams& p, CurvatureKind curvature) {
  if (!(p.sigma_init > 0.0 && p.sigma_init <= 1.0)) throw ConfigError("solver.sigma_init", "must lie in (0, 1]");
  if (!(p.tau > 0.0 && p.tau <= 1.0)) throw ConfigError("solver.tau", "must lie in (0, 1]");
  if (!(p.kappa_s >= 1.0) || !std::isfinite(p.kappa_s)) throw ConfigError("solver.kappa_s", "must be finite and >= 1");
  if (p.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (p.step_mode == StepMode::sign_adagrad && curvature != CurvatureKind::zero)
    throw ConfigError("solver.step_mode", "sign_adagrad requires the zero curvature provider");
}

SolverState SolverState::initial(ConstSpan x_ini, const BoundBox& box, const SolverParams& params) {
  SolverState st;
  st.x = project_box(x_ini, box);
  st.w.assign(st.x.size(), params.sigma_init);
  st.k = 0;
  return st;
}

FirstOrderQuantities first_order_quantities(const SolverState& state, ConstSpan g, const BoundBox& box) {
  const std::size_t n = state.x.size();
  if (g.size() != n || state.w.size() != n) throw InputError("first_order_quantities: dimension mismatch");
  if (!all_finite(g)) throw NumericalError("non-finite oracle gradient at iteration " + std::to_string(state.k));

  const Vector minus_g = scaled(-1.0, g);
  FirstOrderQuantities q;
  q.d = projected_step(state.x, minus_g, box);
  q.w.resize(n);
  q.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.w[i] = std::sqrt(state.w[i] * state.w[i] + q.d[i] * q.d[i]);
    q.delta[i] = std::abs(q.d[i]) / q.w[i];  // w_i >= sigma_init > 0
  }
  q.s_L = projected_step_cap_trust(state.x, minus_g, box, q.delta);
  return q;
}

CauchyStep cauchy_step(ConstSpan g, ConstSpan s_L, const CurvatureProvider& provider, ConstSpan x) {
  CauchyStep out;
  const double curv = provider.quad_form(x, s_L);
  if (curv > 0.0) out.gamma = std::min(1.0, -dot(g, s_L) / curv);
  out.s_Q = scaled(out.gamma, s_L);
  return out;
}

SelectedStep select_step(StepMode mode, ConstSpan g, ConstSpan delta, ConstSpan s_L, ConstSpan s_Q,
                         const CurvatureProvider& provider, ConstSpan x, const BoundBox& box,
                         const SolverParams& params) {
  if (mode == StepMode::cauchy) return {Vector(s_Q.begin(), s_Q.end()), false};

  Vector candidate;
  if (mode == StepMode::first_order) {
    candidate.assign(s_L.begin(), s_L.end());
  } else {
    candidate.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      candidate[i] = std::clamp(-sign(g[i]) * delta[i], box.lower(i) - x[i], box.upper(i) - x[i]);
  }
  const double model_s_Q = model_value(g, s_Q, provider, x);
  if (acceptable(candidate, g, delta, model_s_Q, provider, x, box, params)) return {std::move(candidate), false};
  return {Vector(s_Q.begin(), s_Q.end()), true};
}

std::pair<SolverState, IterationTrace> step(const SolverState& state, const OracleDraw& draw,
                                            CurvatureProvider& provider, const BoundBox& box,
                                            const SolverParams& params) {
  const ConstSpan x = state.x;
  const ConstSpan g = draw.g;
  const std::size_t n = x.size();

  provider.observe(x, g);
  FirstOrderQuantities q = first_order_quantities(state, g, box);
  CauchyStep cp = cauchy_step(g, q.s_L, provider, x);
  SelectedStep sel = select_step(params.step_mode, g, q.delta, q.s_L, cp.s_Q, provider, x, box, params);

  IterationTrace tr;
  tr.k = state.k;
  tr.gamma = cp.gamma;
  tr.fell_back = sel.fell_back;
  tr.norm_d = norm(q.d);
  tr.norm_s_sq = dot(sel.s, sel.s);

  // Runtime monitors.
  const double sigma = params.sigma_init;
  const double kB = provider.kappa_B();
  const double ks = params.kappa_s;
  double sum_d2_w = 0.0, sum_d2_w2 = 0.0, abs_d_delta = 0.0, delta_sq = 0.0, abs_g_sL = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = q.d[i] * q.d[i];
    sum_d2_w += d2 / q.w[i];
    sum_d2_w2 += d2 / (q.w[i] * q.w[i]);
    abs_d_delta += std::abs(q.d[i]) * q.delta[i];
    delta_sq += q.delta[i] * q.delta[i];
    abs_g_sL += std::abs(g[i] * q.s_L[i]);

    const double xi = x[i] + sel.s[i];
    const double bscale = std::max({1.0, std::abs(x[i]), std::abs(sel.s[i])});
    if (!holds_with_slack(box.lower(i), xi, bscale) || !holds_with_slack(xi, box.upper(i), bscale))
      tr.monitors.set(Monitor::feasibility);
    if (!holds_with_slack(std::abs(sel.s[i]), ks * q.delta[i])) tr.monitors.set(Monitor::trust_bound);
    if (!(state.w[i] >= sigma) || !holds_with_slack(state.w[i], q.w[i])) tr.monitors.set(Monitor::weights_monotone);
  }

  const double g_sL = dot(g, q.s_L);
  const double g_sQ = dot(g, cp.s_Q);
  const double q_sQ = provider.quad_form(x, cp.s_Q);
  const double g_s = dot(g, sel.s);
  const double q_s = provider.quad_form(x, sel.s);
  const double m_sQ = g_sQ + 0.5 * q_sQ;
  const double m_s = g_s + 0.5 * q_s;

  if (!holds_with_slack(m_s, params.tau * m_sQ, std::abs(g_s) + std::abs(q_s) + std::abs(g_sQ) + std::abs(q_sQ)))
    tr.monitors.set(Monitor::model_decrease);
  if (!holds_with_slack(g_sL, -sigma * sum_d2_w, abs_g_sL + sigma * sum_d2_w)) tr.monitors.set(Monitor::gsl_decrease);
  if (!holds_with_slack(sigma * dot(q.s_L, q.s_L), std::abs(g_sL), abs_g_sL)) tr.monitors.set(Monitor::gsl_curvature);
  {
    const double rhs = -(sigma * sigma / (2.0 * kB)) * sum_d2_w;
    if (!holds_with_slack(m_sQ, rhs, std::abs(g_sQ) + std::abs(q_sQ) + std::abs(rhs)))
      tr.monitors.set(Monitor::cauchy_decrease);
  }
  {
    const double a = (params.tau * sigma * sigma / (2.0 * kB)) * abs_d_delta;
    const double b = 0.5 * ks * ks * kB * delta_sq;
    double abs_g_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_g_s += std::abs(g[i] * sel.s[i]);
    if (!holds_with_slack(g_s, -a + b, abs_g_s + a + b)) tr.monitors.set(Monitor::general_decrease);
  }
  if (!holds_with_slack(tr.norm_s_sq, ks * ks * sum_d2_w2)) tr.monitors.set(Monitor::step_norm);

  if (!draw.g_true.empty()) {
    const Vector xi = projected_step(x, scaled(-1.0, draw.g_true), box);
    tr.norm_xi = norm(xi);
    tr.err_norm = draw.err_norm;
    double ge_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) ge_s += (draw.g_true[i] - g[i]) * sel.s[i];
    tr.dir_err = std::abs(ge_s);
    if (!holds_with_slack(tr.norm_xi, tr.norm_d + tr.err_norm)) tr.monitors.set(Monitor::measure_gap);
  } else {
    tr.norm_xi = tr.err_norm = tr.dir_err = kNaN;
  }

  SolverState next;
  next.x = project_box(axpy(1.0, sel.s, x), box);
  next.w = q.w;
  next.k = state.k + 1;

  tr.draw = draw;
  tr.d = std::move(q.d);
  tr.delta = std::move(q.delta);
  tr.s_L = std::move(q.s_L);
  tr.s_Q = std::move(cp.s_Q);
  tr.s = std::move(sel.s);
  return {std::move(next), std::move(tr)};
}

std::int64_t RunResult::total_violations() const {
  std::int64_t t = 0;
  for (auto v : violations) t += v;
  return t;
}

RunResult run(const TestProblem& problem, const NoiseModel& model, const CurvatureSpec& curvature,
              const SolverParams& params, std::uint64_t seed, std::int64_t horizon, const RunOptions& options) {
  if (horizon < 1) throw InputError("run: horizon must be >= 1");
  const Objective& obj = problem.objective;
  const std::size_t n = problem.box.dim();
  if (problem.x_ini.size() != n) throw InputError("run: x_ini dimension does not match the box");
  validate(params, curvature.kind);
  validate(model, obj, n);
  auto provider = make_provider(curvature, obj);

  RunResult res;
  res.rows.reserve(static_cast<std::size_t>(horizon));
  res.running_avg_norm_d.reserve(static_cast<std::size_t>(horizon));
  res.running_avg_norm_xi.reserve(static_cast<std::size_t>(horizon));
  res.min_norm_xi = std::numeric_limits<double>::infinity();

  SolverState state = SolverState::initial(problem.x_ini, problem.box, params);
  double sum_d = 0.0, sum_xi = 0.0;
  for (std::int64_t k = 0; k < horizon; ++k) {
    Stream stream = make_stream(seed, options.replication, static_cast<std::uint64_t>(k));
    OracleDraw od = draw(obj, state.x, model, stream);
    if (!options.diagnostics) {
      od.g_true.clear();
      od.err_norm = kNaN;
    }

    TraceRow row;
    row.f = kNaN;
    if (options.diagnostics) {
      row.f = obj.eval_f(state.x);
      if (!std::isfinite(row.f))
        throw NumericalError("non-finite objective value at iteration " + std::to_string(k));
    }

    auto [next, tr] = step(state, od, *provider, problem.box, params);
    if (options.diagnostics) tr.f_value = row.f;
    if (!problem.box.contains(next.x)) tr.monitors.set(Monitor::feasibility);

    if (k == 0) {
      res.d0_sq = tr.norm_d * tr.norm_d;
      res.event_A = res.d0_sq >= params.sigma_init;
    }
    for (std::size_t m = 0; m < kMonitorCount; ++m)
      if (tr.monitors.test(static_cast<Monitor>(m))) ++res.violations[m];
    if (tr.fell_back) ++res.fallbacks;

    row.k = k;
    row.norm_d = tr.norm_d;
    row.norm_xi = tr.norm_xi;
    row.err_norm = tr.err_norm;
    row.gamma = tr.gamma;
    row.dir_err = tr.dir_err;
    row.norm_s_sq = tr.norm_s_sq;
    row.monitor_bits = tr.monitors.bits;
    res.rows.push_back(row);

    sum_d += tr.norm_d;
    sum_xi += tr.norm_xi;
    const double count = static_cast<double>(k + 1);
    res.running_avg_norm_d.push_back(sum_d / count);
    res.running_avg_norm_xi.push_back(sum_xi / count);
    if (tr.norm_xi < res.min_norm_xi) res.min_norm_xi = tr.norm_xi;

    if (options.on_iteration) options.on_iteration(tr);
    state = std::move(next);
  }
  if (!options.diagnostics) res.min_norm_xi = kNaN;
  res.x_final = std::move(state.x);
  return res;
}

}  // namespace adagb2
