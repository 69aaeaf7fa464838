#include "adagb2/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "adagb2/errors.hpp"
#include "adagb2/rng.hpp"

namespace adagb2 {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double objective_gap(const TestProblem& p) {
  const Vector x0 = project_box(p.x_ini, p.box);
  return p.objective.eval_f(x0) - p.objective.f_low;
}

json scenario_json(const ScenarioReport& s) {
  return {{"kappa_opt_estimate", number_or_null(s.kappa_opt_estimate)},
          {"kappa_err_estimate", number_or_null(s.kappa_err_estimate)},
          {"kappa_Gg_sq_estimate", number_or_null(s.kappa_Gg_sq_estimate)},
          {"coherence_trend", number_or_null(s.coherence_trend)},
          {"error_trend", number_or_null(s.error_trend)},
          {"coherently_distributed", s.coherent},
          {"controlled_error", s.controlled_error},
          {"general", s.general}};
}

json experiment_summary(const ExperimentConfig& config, const TestProblem& problem, const ExperimentResult& r) {
  json s;
  s["config"] = to_json(config);
  s["replications"] = config.replications;
  s["horizon"] = config.horizon;
  s["p_A"] = r.p_A;
  s["conditioned_on_A"] = r.conditioned_on_A;

  MonitorCounts totals{};
  std::int64_t fallbacks = 0;
  for (const RunResult& run : r.runs) {
    for (std::size_t m = 0; m < kMonitorCount; ++m) totals[m] += run.violations[m];
    fallbacks += run.fallbacks;
  }
  json v = json::object();
  std::int64_t total = 0;
  for (std::size_t m = 0; m < kMonitorCount; ++m) {
    v[to_string(static_cast<Monitor>(m))] = totals[m];
    total += totals[m];
  }
  s["violations"] = v;
  s["total_violations"] = total;
  s["fallbacks"] = fallbacks;

  const AggregateRow& last = r.aggregate.back();
  s["final"] = {{"k", last.k},
                {"running_avg_norm_d", number_or_null(last.running_avg_norm_d)},
                {"running_avg_norm_xi", number_or_null(last.running_avg_norm_xi)},
                {"beta", number_or_null(last.beta)},
                {"min_norm_xi", number_or_null(last.min_norm_xi_so_far)}};

  const std::int64_t k_max = config.horizon - 1;
  const std::int64_t k_min = std::max<std::int64_t>(1, std::min<std::int64_t>(100, config.horizon / 10));
  if (k_max > k_min) {
    try {
      const LinearFit fit = fit_rate(r.aggregate, k_min, k_max);
      s["rate_fit"] = {{"k_min", k_min},
                       {"k_max", k_max},
                       {"slope", fit.slope},
                       {"intercept", fit.intercept},
                       {"r_squared", fit.r_squared}};
    } catch (const std::exception&) {
      s["rate_fit"] = nullptr;
    }
  }

  if (config.diagnostics) {
    MeasureSeries series;
    for (const AggregateRow& row : r.aggregate) {
      series.k.push_back(row.k);
      series.mean_norm_d.push_back(row.mean_norm_d);
      series.mean_norm_xi.push_back(row.mean_norm_xi);
      series.mean_err.push_back(row.mean_err);
      series.mean_dir_err.push_back(row.mean_dir_err);
      series.mean_norm_s_sq.push_back(row.mean_norm_s_sq);
    }
    s["scenario"] = scenario_json(scenario_classifier(series));
  }

  const double gamma0 = objective_gap(problem);
  std::optional<ConstantsReport> constants;
  if (problem.objective.lipschitz_L && gamma0 > 0.0) {
    ConstantsInput in{config.solver.sigma_init, config.solver.tau,     config.solver.kappa_s,
                      config.curvature.kappa_B, config.kappa_Gg,       *problem.objective.lipschitz_L,
                      gamma0,                   static_cast<int>(problem.box.dim())};
    constants = compute_constants(in);
    s["constants"] = to_json(*constants);
  }

  if (config.diagnostics && !config.epsilons.empty()) {
    json probs = json::array();
    for (double eps : config.epsilons) {
      std::int64_t hit = 0;
      for (const RunResult& run : r.runs) hit += run.min_norm_xi <= eps;
      json e{{"epsilon", eps},
             {"empirical_fraction", static_cast<double>(hit) / static_cast<double>(r.runs.size())},
             {"delta", config.delta}};
      if (constants && r.p_A > 0.0 && config.delta > 1.0 - r.p_A)
        e["theoretical_k"] = probability_complexity_k(constants->kappa_conv_exact, r.p_A, config.delta, eps);
      else
        e["theoretical_k"] = nullptr;
      probs.push_back(e);
    }
    s["probability"] = probs;
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TestProblem build_problem(const ProblemConfig& config) {
  TestProblem p;
  try {
    p = make_test_problem(config.name, config.dim, config.seed);
  } catch (const InputError& e) {
    throw ConfigError("problem", e.what());
  }
  if (config.lower || config.upper) {
    Vector lo = config.lower.value_or(p.box.lower());
    Vector hi = config.upper.value_or(p.box.upper());
    if (lo.size() != p.box.dim()) throw ConfigError("problem.lower", "length must equal problem.dim");
    if (hi.size() != p.box.dim()) throw ConfigError("problem.upper", "length must equal problem.dim");
    BoundBox box;
    try {
      box = BoundBox(std::move(lo), std::move(hi));
    } catch (const InputError& e) {
      throw ConfigError("problem.lower", e.what());
    }
    if (p.name == "boxed_quadratic") {
      const std::size_t n = p.box.dim();
      Vector a(n), e(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = 1.0;
        a[i] = p.objective.eval_hess_vec(e, e)[i];
        e[i] = 0.0;
      }
      Vector b = scaled(-1.0, p.objective.eval_grad(Vector(n, 0.0)));
      return make_separable_quadratic(std::move(a), std::move(b), std::move(box), std::move(p.x_ini));
    }
    for (std::size_t i = 0; i < p.box.dim(); ++i)
      if (box.lower(i) < p.box.lower(i) || box.upper(i) > p.box.upper(i)) p.objective.lipschitz_L.reset();
    p.box = std::move(box);
    p.known_minimizer.reset();
    p.known_critical_value.reset();
  }
  return p;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs, double p_A, bool condition_on_A) {
  if (runs.empty()) return {};
  const std::size_t K = runs.front().rows.size();
  std::vector<const RunResult*> included;
  for (const RunResult& r : runs)
    if (!condition_on_A || r.event_A) included.push_back(&r);

  std::vector<AggregateRow> out(K);
  double sum_d = 0.0, sum_xi = 0.0, sum_err = 0.0;
  double min_xi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    RunningStats d, xi, err, dir, ssq;
    double sq_err = 0.0;
    for (const RunResult* r : included) {
      const TraceRow& row = r->rows[k];
      d.push(row.norm_d);
      xi.push(row.norm_xi);
      err.push(row.err_norm);
      dir.push(row.dir_err);
      ssq.push(row.norm_s_sq);
      sq_err += row.err_norm * row.err_norm;
    }
    std::int64_t fired = 0;
    for (const RunResult& r : runs) fired += MonitorFlags{r.rows[k].monitor_bits}.count();

    AggregateRow& a = out[k];
    a.k = static_cast<std::int64_t>(k);
    a.mean_norm_d = d.mean();
    a.se_norm_d = d.standard_error();
    a.mean_norm_xi = xi.mean();
    a.se_norm_xi = xi.standard_error();
    a.mean_err = err.mean();
    a.mean_rmse = std::sqrt(sq_err / static_cast<double>(included.size()));
    a.mean_dir_err = dir.mean();
    a.mean_norm_s_sq = ssq.mean();
    sum_d += a.mean_norm_d;
    sum_xi += a.mean_norm_xi;
    sum_err += a.mean_err;
    const double count = static_cast<double>(k + 1);
    a.running_avg_norm_d = sum_d / count;
    a.running_avg_norm_xi = sum_xi / count;
    a.beta = sum_err / count;
    min_xi = std::min(min_xi, a.mean_norm_xi);
    a.min_norm_xi_so_far = std::isnan(a.mean_norm_xi) ? kNaN : min_xi;
    a.p_A = p_A;
    a.violations = fired;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const TestProblem problem = build_problem(config.problem);
  validate(config.oracle, problem.objective, problem.box.dim());
  validate(config.solver, config.curvature.kind);
  make_provider(config.curvature, problem.objective);  // fail fast on provider configuration

  const auto R = static_cast<std::size_t>(config.replications);
  ExperimentResult result;
  result.runs.resize(R);

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, R));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t rep; (rep = next.fetch_add(1)) < R;) {
      try {
        RunOptions opts;
        opts.replication = rep;
        opts.diagnostics = config.diagnostics;
        result.runs[rep] = run(problem, config.oracle, config.curvature, config.solver, config.base_seed,
                               config.horizon, opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t n_A = 0;
  for (const RunResult& r : result.runs) n_A += r.event_A;
  result.p_A = static_cast<double>(n_A) / static_cast<double>(R);
  result.conditioned_on_A = n_A > 0;
  result.aggregate = aggregate_runs(result.runs, result.p_A, result.conditioned_on_A);
  result.summary = experiment_summary(config, problem, result);
  return result;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "k,mean_norm_d,se_norm_d,mean_norm_xi,se_norm_xi,mean_err,mean_rmse,run_avg_d,run_avg_xi,min_xi,p_A,"
        "violations\n";
  for (const AggregateRow& a : rows) {
    os << a.k << ',' << format_double(a.mean_norm_d) << ',' << format_double(a.se_norm_d) << ','
       << format_double(a.mean_norm_xi) << ',' << format_double(a.se_norm_xi) << ',' << format_double(a.mean_err)
       << ',' << format_double(a.mean_rmse) << ',' << format_double(a.running_avg_norm_d) << ','
       << format_double(a.running_avg_norm_xi) << ',' << format_double(a.min_norm_xi_so_far) << ','
       << format_double(a.p_A) << ',' << a.violations << '\n';
  }
}

void write_traces_csv(std::ostream& os, const std::vector<RunResult>& runs) {
  os << "rep,k,norm_d,norm_xi,err_norm,gamma,f,event_A\n";
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    const char* event = runs[rep].event_A ? "1" : "0";
    for (const TraceRow& t : runs[rep].rows) {
      os << rep << ',' << t.k << ',' << format_double(t.norm_d) << ',' << format_double(t.norm_xi) << ','
         << format_double(t.err_norm) << ',' << format_double(t.gamma) << ',' << format_double(t.f) << ',' << event
         << '\n';
    }
  }
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& config) {
  const auto& dir = config.outputs.directory;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  if (config.outputs.format == OutputFormat::csv) {
    std::ostringstream agg;
    write_aggregate_csv(agg, result.aggregate);
    write_file(dir / "aggregate.csv", agg.str());
    if (config.outputs.traces) {
      std::ostringstream tr;
      write_traces_csv(tr, result.runs);
      write_file(dir / "traces.csv", tr.str());
    }
  } else {
    json agg = json::array();
    for (const AggregateRow& a : result.aggregate)
      agg.push_back({{"k", a.k},
                     {"mean_norm_d", number_or_null(a.mean_norm_d)},
                     {"se_norm_d", number_or_null(a.se_norm_d)},
                     {"mean_norm_xi", number_or_null(a.mean_norm_xi)},
                     {"se_norm_xi", number_or_null(a.se_norm_xi)},
                     {"mean_err", number_or_null(a.mean_err)},
                     {"mean_rmse", number_or_null(a.mean_rmse)},
                     {"run_avg_d", number_or_null(a.running_avg_norm_d)},
                     {"run_avg_xi", number_or_null(a.running_avg_norm_xi)},
                     {"min_xi", number_or_null(a.min_norm_xi_so_far)},
                     {"p_A", a.p_A},
                     {"violations", a.violations}});
    write_file(dir / "aggregate.json", agg.dump(1) + "\n");
    if (config.outputs.traces) {
      json tr = json::array();
      for (std::size_t rep = 0; rep < result.runs.size(); ++rep)
        for (const TraceRow& t : result.runs[rep].rows)
          tr.push_back({{"rep", rep},
                        {"k", t.k},
                        {"norm_d", number_or_null(t.norm_d)},
                        {"norm_xi", number_or_null(t.norm_xi)},
                        {"err_norm", number_or_null(t.err_norm)},
                        {"gamma", number_or_null(t.gamma)},
                        {"f", number_or_null(t.f)},
                        {"event_A", result.runs[rep].event_A}});
      write_file(dir / "traces.json", tr.dump(1) + "\n");
    }
  }
  write_file(dir / "summary.json", result.summary.dump(2) + "\n");
}

LinearFit fit_rate(std::span<const double> series, std::int64_t k_min, std::int64_t k_max) {
  if (k_min < 0 || k_max <= k_min) throw InputError("fit_rate: need k_max > k_min >= 0");
  if (static_cast<std::size_t>(k_max) >= series.size()) throw InputError("fit_rate: series does not cover k_max");
  std::vector<double> xs, ys;
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    const double v = series[static_cast<std::size_t>(k)];
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(std::log(static_cast<double>(k) + 1.0));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) throw InputError("fit_rate: fewer than two positive points in range");
  return least_squares(xs, ys);
}

LinearFit fit_rate(const std::vector<AggregateRow>& aggregate, std::int64_t k_min, std::int64_t k_max) {
  std::vector<double> series(aggregate.size());
  for (std::size_t k = 0; k < aggregate.size(); ++k) series[k] = aggregate[k].running_avg_norm_d;
  return fit_rate(series, k_min, k_max);
}

DeterministicReport verify_deterministic_bound(const TestProblem& problem, const SolverParams& params,
                                               const CurvatureSpec& curvature, std::int64_t horizon) {
  DeterministicReport rep;
  rep.horizon = horizon;
  const SolverState s0 = SolverState::initial(problem.x_ini, problem.box, params);
  const Vector G0 = problem.objective.eval_grad(s0.x);
  const Vector d0 = projected_step(s0.x, scaled(-1.0, G0), problem.box);
  rep.d0_sq = dot(d0, d0);
  rep.Gamma0 = objective_gap(problem);

  if (!(params.sigma_init < rep.d0_sq)) {
    rep.reason = "bound inapplicable: sigma_init >= ||d_0||^2";
    return rep;
  }
  if (!problem.objective.lipschitz_L) {
    rep.reason = "bound inapplicable: Lipschitz constant unknown";
    return rep;
  }
  if (!(rep.Gamma0 > 0.0)) {
    rep.reason = "bound inapplicable: f(x_0) <= f_low";
    return rep;
  }
  rep.applicable = true;
  rep.constants = compute_constants({params.sigma_init, params.tau, params.kappa_s, curvature.kappa_B, 0.0,
                                     *problem.objective.lipschitz_L, rep.Gamma0,
                                     static_cast<int>(problem.box.dim())});

  RunOptions opts;
  opts.diagnostics = true;
  const RunResult run_result = run(problem, NoiseModel::exact(), curvature, params, 0, horizon, opts);
  rep.monitor_violations = run_result.total_violations();
  for (std::int64_t k = 0; k < horizon; ++k) {
    const double avg = run_result.running_avg_norm_xi[static_cast<std::size_t>(k)];
    const double bound = rate_bound(rep.constants.kappa_conv_exact, k);
    const double ratio = avg / bound;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax_k = k;
    }
    if (avg > bound * (1.0 + 1e-9)) ++rep.violations;
  }
  rep.final_running_avg_xi = run_result.running_avg_norm_xi.back();
  rep.holds = rep.violations == 0;
  return rep;
}

json to_json(const ConstantsReport& r) {
  return {{"kappa_star", r.kappa_star},
          {"Gamma0", r.Gamma0},
          {"kappa_W", r.kappa_W},
          {"kappa_conv_exact", r.kappa_conv_exact},
          {"kappa_conv_upper", r.kappa_conv_upper}};
}

json to_json(const DeterministicReport& r) {
  json j{{"applicable", r.applicable}, {"d0_sq", r.d0_sq}, {"Gamma0", number_or_null(r.Gamma0)},
         {"horizon", r.horizon}};
  if (!r.applicable) {
    j["reason"] = r.reason;
    return j;
  }
  j["constants"] = to_json(r.constants);
  j["max_ratio"] = r.max_ratio;
  j["argmax_k"] = r.argmax_k;
  j["bound_violations"] = r.violations;
  j["monitor_violations"] = r.monitor_violations;
  j["final_running_avg_xi"] = r.final_running_avg_xi;
  j["holds"] = r.holds;
  return j;
}

std::vector<PropertyCheck> run_property_suite(std::uint64_t seed) {
  std::vector<PropertyCheck> out;
  auto rng = make_engine(seed, 0xc4ec);
  auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  {  // lemma on sums a_j / (sigma + b_j)
    int failures = 0;
    for (int t = 0; t < 1000; ++t) {
      const int len = std::uniform_int_distribution<int>(0, 1000)(rng);
      const double sigma = unif(1e-3, 1.0);
      const double scale = std::pow(10.0, unif(-4.0, 3.0));
      std::vector<double> a(static_cast<std::size_t>(len));
      for (double& v : a) v = unif(0.0, 1.0) < 0.1 ? 0.0 : scale * unif(0.0, 1.0);
      failures += !lemma_magical_check(a, sigma).holds;
    }
    out.push_back({"lemma_magical", failures == 0, std::to_string(failures) + " failures / 1000 sequences"});
  }
  {  // u <= -(g2/g1) W_{-1}(-g1/g2) whenever g1 u <= g2 log u
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
      const double g1 = std::pow(10.0, unif(-3.0, 1.0));
      const double g2 = g1 * (3.0 + std::pow(10.0, unif(-3.0, 3.0)));
      failures += !lemma_lambert_check(g1, g2, 2000).all_below_root;
    }
    out.push_back({"lemma_lambert", failures == 0, std::to_string(failures) + " failures / 100 pairs"});
  }
  {
    int failures = 0;
    for (int t = 0; t < 1000; ++t) failures += !chatzigeorgiou_check(unif(0.0, 50.0) + 1e-12).holds;
    out.push_back({"chatzigeorgiou_bound", failures == 0, std::to_string(failures) + " failures / 1000 points"});
  }
  {
    double worst = 0.0;
    for (int j = 0; j < 1000; ++j) {
      const double x = -std::exp(-1.0) * std::pow(10.0, -15.0 * j / 999.0);
      const double w = lambert_w_minus1(x);
      worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::abs(x));
    }
    const bool branch = std::abs(lambert_w_minus1(-std::exp(-1.0)) + 1.0) <= 1e-9;
    out.push_back({"lambert_residual", worst <= 1e-12 && branch, "max relative residual " + format_double(worst)});
  }
  {
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
      ConstantsInput in;
      in.sigma_init = unif(1e-3, 1.0);
      in.tau = unif(1e-2, 1.0);
      in.kappa_s = unif(1.0, 5.0);
      in.kappa_B = unif(1.0, 100.0);
      in.kappa_Gg = unif(0.0, 3.0);
      in.lipschitz_L = unif(0.0, 100.0);
      in.Gamma0 = std::pow(10.0, unif(-3.0, 3.0));
      in.dim = std::uniform_int_distribution<int>(1, 100)(rng);
      const ConstantsReport r = compute_constants(in);
      failures += !(r.kappa_conv_exact <= r.kappa_conv_upper) || !(r.kappa_W > 3.0);
    }
    out.push_back({"kappa_conv_ordering", failures == 0, std::to_string(failures) + " failures / 100 tuples"});
  }
  {  // projections: idempotence, component-wise nonexpansiveness, trust-box feasibility
    int failures = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
      Vector lo(n), hi(n), y(n), y2(n), c(n), r(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double a = unif(-5.0, 5.0), b = unif(-5.0, 5.0);
        lo[i] = unif(0.0, 1.0) < 0.2 ? -kInf : std::min(a, b);
        hi[i] = unif(0.0, 1.0) < 0.2 ? kInf : std::max(a, b);
        y[i] = unif(-10.0, 10.0);
        y2[i] = unif(-10.0, 10.0);
        r[i] = unif(0.0, 1.0) < 0.1 ? 0.0 : unif(0.0, 3.0);
      }
      const BoundBox box(lo, hi);
      c = project_box(Vector(n, 0.0), box);
      const Vector z = project_box(y, box);
      const Vector z2 = project_box(y2, box);
      if (project_box(z, box) != z || !box.contains(z)) ++failures;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(z[i] - z2[i]) > std::abs(y[i] - y2[i])) ++failures;
      const Vector zt = project_box_cap_trust(y, box, c, r);
      if (!box.contains(zt)) ++failures;
      for (std::size_t i = 0; i < n; ++i)
        if (zt[i] < c[i] - r[i] || zt[i] > c[i] + r[i]) ++failures;
    }
    out.push_back({"projection_properties", failures == 0, std::to_string(failures) + " failures / 1000 cases"});
  }
  return out;
}

}  // namespace adagb2
