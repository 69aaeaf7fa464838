#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adagb2/errors.hpp"
#include "adagb2/harness.hpp"

using namespace adagb2;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.problem = {"boxed_quadratic", 3, 1, std::nullopt, std::nullopt};
  c.oracle = NoiseModel::gaussian(0.1);
  c.horizon = 200;
  c.replications = 6;
  c.base_seed = 42;
  c.solver.max_iter = c.horizon;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("adagb2_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("single exact replication reproduces its trace") {
  ExperimentConfig c = small_config();
  c.oracle = NoiseModel::exact();
  c.replications = 1;
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.aggregate.size() == 200);
  CHECK((r.p_A == 0.0 || r.p_A == 1.0));
  for (std::size_t k = 0; k < 200; ++k) {
    CHECK(r.aggregate[k].mean_norm_d == r.runs[0].rows[k].norm_d);
    CHECK(r.aggregate[k].mean_norm_xi == r.runs[0].rows[k].norm_xi);
    CHECK(r.aggregate[k].se_norm_d == 0.0);
    CHECK(r.aggregate[k].running_avg_norm_d == doctest::Approx(r.runs[0].running_avg_norm_d[k]).epsilon(1e-14));
  }
}

TEST_CASE("running averages equal recomputation from raw traces") {
  const ExperimentResult r = run_experiment(small_config());
  std::vector<const RunResult*> used;
  for (const RunResult& run : r.runs)
    if (!r.conditioned_on_A || run.event_A) used.push_back(&run);
  double acc_d = 0.0, acc_xi = 0.0, min_xi = INFINITY;
  for (std::size_t k = 0; k < r.aggregate.size(); ++k) {
    double md = 0.0, mx = 0.0;
    for (const RunResult* run : used) {
      md += run->rows[k].norm_d;
      mx += run->rows[k].norm_xi;
    }
    md /= static_cast<double>(used.size());
    mx /= static_cast<double>(used.size());
    acc_d += md;
    acc_xi += mx;
    min_xi = std::min(min_xi, mx);
    const double n = static_cast<double>(k + 1);
    CHECK(r.aggregate[k].running_avg_norm_d == doctest::Approx(acc_d / n).epsilon(1e-12));
    CHECK(r.aggregate[k].running_avg_norm_xi == doctest::Approx(acc_xi / n).epsilon(1e-12));
    CHECK(r.aggregate[k].min_norm_xi_so_far == doctest::Approx(min_xi).epsilon(1e-12));
    CHECK(r.aggregate[k].violations == 0);
  }
  CHECK(r.summary["total_violations"] == 0);
}

TEST_CASE("conditioning on event A") {
  ExperimentConfig c = small_config();
  c.solver.sigma_init = 1.0;
  c.problem.seed = 0;
  c.problem.dim = 1;  // G(0) = -1, ||d_0||^2 hovers around 1 under noise
  c.oracle = NoiseModel::gaussian(0.3);
  c.replications = 40;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.p_A > 0.0);
  CHECK(r.p_A < 1.0);
  std::size_t n_A = 0;
  for (const RunResult& run : r.runs) n_A += run.event_A;
  CHECK(r.p_A == doctest::Approx(static_cast<double>(n_A) / 40.0));
  double m0 = 0.0;
  for (const RunResult& run : r.runs)
    if (run.event_A) m0 += run.rows[0].norm_d;
  CHECK(r.aggregate[0].mean_norm_d == doctest::Approx(m0 / static_cast<double>(n_A)));
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
  ExperimentConfig c = small_config();
  c.replications = 100;
  c.horizon = 50;
  c.outputs.directory = scratch("a");
  c.threads = 1;
  write_outputs(run_experiment(c), c);
  ExperimentConfig d = c;
  d.outputs.directory = scratch("b");
  d.threads = 4;
  write_outputs(run_experiment(d), d);
  for (const char* f : {"aggregate.csv", "traces.csv", "summary.json"})
    CHECK(slurp(c.outputs.directory / f) == slurp(d.outputs.directory / f));
  const std::string agg = slurp(c.outputs.directory / "aggregate.csv");
  CHECK(agg.rfind("k,mean_norm_d,se_norm_d,mean_norm_xi,se_norm_xi,mean_err,mean_rmse,run_avg_d,run_avg_xi,min_xi,p_A,"
                  "violations\n",
                  0) == 0);
  CHECK(slurp(c.outputs.directory / "traces.csv").rfind("rep,k,norm_d,norm_xi,err_norm,gamma,f,event_A\n", 0) == 0);

  ExperimentConfig j = c;
  j.outputs.format = OutputFormat::json;
  j.outputs.directory = scratch("j");
  write_outputs(run_experiment(j), j);
  const auto agg_json = nlohmann::json::parse(slurp(j.outputs.directory / "aggregate.json"));
  CHECK(agg_json.size() == 50);
  CHECK(agg_json[0].contains("run_avg_d"));
  CHECK(std::filesystem::exists(j.outputs.directory / "traces.json"));
}

TEST_CASE("number formatting") {
  CHECK(format_double(24.0) == "24");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("rate fitting") {
  std::vector<double> s(1000), flat(1000, 0.7);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = 3.0 / std::sqrt(static_cast<double>(k) + 1.0);
  const LinearFit f = fit_rate(s, 1, 999);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_rate(flat, 10, 500).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_rate(s, 5, 5), InputError);
  CHECK_THROWS_AS(fit_rate(s, 1, 1000), InputError);
  std::vector<double> zeros(10, 0.0);
  CHECK_THROWS_AS(fit_rate(zeros, 1, 9), InputError);
}

TEST_CASE("deterministic bound") {
  SUBCASE("canonical quadratic") {
    const TestProblem p = make_test_problem("boxed_quadratic", 2, 0);
    const DeterministicReport r = verify_deterministic_bound(p, SolverParams{}, {}, 2000);
    CHECK(r.applicable);
    CHECK(r.holds);
    CHECK(r.max_ratio < 1.0);
    CHECK(r.monitor_violations == 0);
  }
  SUBCASE("critical start is inapplicable") {
    TestProblem p = make_test_problem("boxed_quadratic", 2, 0);
    p.x_ini = *p.known_minimizer;
    const DeterministicReport r = verify_deterministic_bound(p, SolverParams{}, {}, 10);
    CHECK_FALSE(r.applicable);
    CHECK(r.reason.find("inapplicable") != std::string::npos);
  }
  SUBCASE("unit example reproduces the hand constants") {
    // f = x^2/2 on R with f_low = -1/2 and x_0 = -1: L = 1, Gamma0 = 1, ||d_0||^2 = 1 > sigma.
    TestProblem p = make_separable_quadratic({1.0}, {0.0}, BoundBox::unbounded(1), {-1.0});
    p.objective.f_low = -0.5;
    SolverParams params;
    params.sigma_init = 0.999;
    const DeterministicReport r = verify_deterministic_bound(p, params, {}, 100);
    REQUIRE(r.applicable);
    const ConstantsReport expect = compute_constants({0.999, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1});
    CHECK(r.constants.kappa_W == expect.kappa_W);
    CHECK(r.constants.kappa_conv_exact == expect.kappa_conv_exact);
    CHECK(r.Gamma0 == 1.0);
    CHECK(r.holds);
  }
}

TEST_CASE("bounds override") {
  ProblemConfig pc{"boxed_quadratic", 2, 0, Vector{-1.0, -1.0}, Vector{0.5, 2.0}};
  const TestProblem p = build_problem(pc);
  CHECK(p.box.upper() == Vector{0.5, 2.0});
  REQUIRE(p.known_minimizer);
  CHECK((*p.known_minimizer)[0] == doctest::Approx(0.5));
  CHECK((*p.known_minimizer)[1] == doctest::Approx(0.25));
  CHECK(p.objective.f_low == doctest::Approx(0.125 - 0.5 - 0.125));

  ProblemConfig wide{"boxed_nonconvex_quartic", 2, 0, Vector{-5.0, -5.0}, std::nullopt};
  CHECK_FALSE(build_problem(wide).objective.lipschitz_L);
  ProblemConfig bad{"boxed_quadratic", 2, 0, Vector{-1.0}, std::nullopt};
  CHECK_THROWS_AS(build_problem(bad), ConfigError);
  ProblemConfig inverted{"boxed_quadratic", 2, 0, Vector{3.0, 3.0}, std::nullopt};
  CHECK_THROWS_AS(build_problem(inverted), ConfigError);
}

TEST_CASE("summary contents") {
  ExperimentConfig c = small_config();
  c.epsilons = {0.5, 0.05};
  const ExperimentResult r = run_experiment(c);
  const auto& s = r.summary;
  CHECK(s.contains("config"));
  CHECK(s.contains("violations"));
  CHECK(s.contains("rate_fit"));
  CHECK(s.contains("scenario"));
  CHECK(s.contains("constants"));
  REQUIRE(s["probability"].size() == 2);
  CHECK(s["probability"][0]["epsilon"] == 0.5);
  CHECK(s["final"]["beta"].get<double>() > 0.0);
}

TEST_CASE("property suite passes") {
  for (const PropertyCheck& c : run_property_suite(0)) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("invalid configurations surface as config errors") {
  ExperimentConfig c = small_config();
  c.oracle = NoiseModel::subsample(3);
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  c = small_config();
  c.problem.name = "unknown";
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}
