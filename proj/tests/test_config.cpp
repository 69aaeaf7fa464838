#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "adagb2/config.hpp"
#include "adagb2/errors.hpp"

using namespace adagb2;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.problem.name == "boxed_quadratic");
  CHECK(c.solver.sigma_init == 0.01);
  CHECK(c.solver.tau == 1.0);
  CHECK(c.solver.kappa_s == 1.0);
  CHECK(c.solver.step_mode == StepMode::cauchy);
  CHECK(c.curvature.kind == CurvatureKind::zero);
  CHECK(c.horizon == 1000);
  CHECK(c.replications == 1);
  CHECK(c.outputs.format == OutputFormat::csv);
}

TEST_CASE("full document") {
  const json doc = json::parse(R"({
    "problem": {"name": "boxed_rosenbrock", "dim": 3, "seed": 4, "lower": ["-inf", -1, 0], "upper": [1, "inf", 2]},
    "oracle": {"kind": "constant_bias", "bias": [0.1, 0.0, 0.0], "inner": {"kind": "gaussian", "sigma": 0.2}},
    "curvature": {"kind": "scalar_bb", "kappa_B": 5},
    "solver": {"sigma_init": 0.5, "tau": 0.9, "kappa_s": 2, "step_mode": "first_order"},
    "run": {"horizon": 50, "replications": 3, "base_seed": 8, "diagnostics": false, "threads": 2,
            "kappa_Gg": 0.3, "epsilons": [0.1], "delta": 0.25},
    "outputs": {"directory": "x/y", "format": "json", "traces": false}
  })");
  const ExperimentConfig c = parse_config(doc);
  CHECK(c.problem.dim == 3);
  CHECK((*c.problem.lower)[0] == -kInf);
  CHECK((*c.problem.upper)[1] == kInf);
  CHECK(c.oracle.name() == std::string("constant_bias"));
  CHECK(c.curvature.kappa_B == 5.0);
  CHECK(c.solver.step_mode == StepMode::first_order);
  CHECK(c.solver.max_iter == 50);
  CHECK(c.replications == 3);
  CHECK_FALSE(c.diagnostics);
  CHECK(c.delta == 0.25);
  CHECK(c.outputs.format == OutputFormat::json);
  CHECK(c.outputs.directory == "x/y");

  // The echo parses back to the same configuration.
  json echo = to_json(c);
  const ExperimentConfig d = parse_config(echo);
  CHECK(to_json(d) == echo);
}

TEST_CASE("errors carry the field path") {
  CHECK(error_path(json::parse(R"({"solver": {"sigma": 0.1}})")) == "solver.sigma");
  CHECK(error_path(json::parse(R"({"solvr": {}})")) == "solvr");
  CHECK(error_path(json::parse(R"({"solver": {"tau": 2}})")) == "solver.tau");
  CHECK(error_path(json::parse(R"({"solver": {"tau": "x"}})")) == "solver.tau");
  CHECK(error_path(json::parse(R"({"run": {"horizon": 0}})")) == "run.horizon");
  CHECK(error_path(json::parse(R"({"run": {"replications": 0}})")) == "run.replications");
  CHECK(error_path(json::parse(R"({"oracle": {"kind": "cauchy"}})")) == "oracle.kind");
  CHECK(error_path(json::parse(R"({"oracle": {"kind": "gaussian"}})")) == "oracle.sigma");
  CHECK(error_path(json::parse(R"({"oracle": {"kind": "relative_bias", "rho": 0.1, "inner": {"kind": "gaussian", "sigma": 0.1, "mu": 1}}})")) ==
        "oracle.inner.mu");
  CHECK(error_path(json::parse(R"({"curvature": {"kind": "zero", "kappa_B": 0.5}})")) == "curvature.kappa_B");
  CHECK(error_path(json::parse(R"({"outputs": {"format": "xml"}})")) == "outputs.format");
  CHECK(error_path(json::parse(R"({"problem": {"dim": 0}})")) == "problem.dim");
  CHECK(error_path(json::parse(R"({"curvature": {"kind": "scalar_bb"}, "solver": {"step_mode": "sign_adagrad"}})")) ==
        "solver.step_mode");
}

TEST_CASE("noise model parsing and echo") {
  const NoiseModel m = parse_noise_model(json::parse(R"({"kind": "affine_gaussian", "kappa1": 0.5, "kappa2": 0.25})"));
  const json j = to_json(m);
  CHECK(j["kappa1"] == 0.5);
  CHECK(j["kappa2"] == 0.25);
  CHECK(to_json(parse_noise_model(j)) == j);
  CHECK(to_json(parse_noise_model(json::parse(R"({"kind": "subsample", "batch_size": 5})")))["batch_size"] == 5);
}

TEST_CASE("loading from disk") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
