// Command-line front end: experiments, constants, the counterexample table and
// the property sweeps.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adagb2/analysis.hpp"
#include "adagb2/config.hpp"
#include "adagb2/errors.hpp"
#include "adagb2/harness.hpp"

namespace {

using namespace adagb2;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format;
  bool no_diagnostics = false;
  unsigned threads = 0;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg;
  bool directory_from_file = false;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw ConfigError("--config", "cannot open '" + g.config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("--config", e.what());
    }
    cfg = parse_config(doc);
    directory_from_file = doc.contains("outputs") && doc["outputs"].is_object() && doc["outputs"].contains("directory");
  }
  if (!g.out_dir.empty()) {
    cfg.outputs.directory = g.out_dir;
  } else if (!directory_from_file) {
    if (const char* env = std::getenv("ADAGB2_OUT_DIR"); env && *env) cfg.outputs.directory = env;
  }
  if (g.seed) cfg.base_seed = *g.seed;
  if (!g.format.empty()) cfg.outputs.format = parse_output_format(g.format);
  if (g.no_diagnostics) cfg.diagnostics = false;
  if (g.threads) cfg.threads = g.threads;
  return cfg;
}

std::string optional_out_dir(const GlobalOptions& g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("ADAGB2_OUT_DIR"); env && *env) return env;
  return {};
}

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + (dir / name).string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + (dir / name).string() + "'");
}

int cmd_experiment(const GlobalOptions& g, std::optional<std::int64_t> reps, bool single) {
  ExperimentConfig cfg = resolve_config(g);
  if (single) cfg.replications = 1;
  if (reps) {
    if (*reps < 1) throw ConfigError("--reps", "must be >= 1");
    cfg.replications = *reps;
  }
  const ExperimentResult result = run_experiment(cfg);
  write_outputs(result, cfg);
  const auto& s = result.summary;
  const auto& fin = s["final"];
  std::cout << "replications " << cfg.replications << " horizon " << cfg.horizon << " p_A "
            << format_double(result.p_A) << "\n";
  if (!fin["running_avg_norm_d"].is_null())
    std::cout << "run_avg_d " << format_double(fin["running_avg_norm_d"].get<double>()) << "\n";
  if (!fin["running_avg_norm_xi"].is_null())
    std::cout << "run_avg_xi " << format_double(fin["running_avg_norm_xi"].get<double>()) << "\n";
  if (s.contains("rate_fit") && !s["rate_fit"].is_null())
    std::cout << "rate_slope " << format_double(s["rate_fit"]["slope"].get<double>()) << "\n";
  const auto violations = s["total_violations"].get<std::int64_t>();
  std::cout << "violations " << violations << "\n";
  std::cout << "outputs " << cfg.outputs.directory.string() << "\n";
  return violations == 0 ? kExitOk : kExitViolation;
}

int cmd_constants(const ConstantsInput& in) {
  const ConstantsReport r = compute_constants(in);
  std::cout << "kappa_star = " << format_double(r.kappa_star) << "\n"
            << "Gamma0 = " << format_double(r.Gamma0) << "\n"
            << "kappa_W = " << format_double(r.kappa_W) << "\n"
            << "kappa_conv_exact = " << format_double(r.kappa_conv_exact) << "\n"
            << "kappa_conv_upper = " << format_double(r.kappa_conv_upper) << "\n";
  return kExitOk;
}

int cmd_counterexample(const GlobalOptions& g, const std::vector<std::int64_t>& ks, std::int64_t reps) {
  for (std::int64_t k : ks)
    if (k < 1) throw ConfigError("--k", "iteration indices must be >= 1");
  if (reps < 0) throw ConfigError("--reps", "must be >= 0");
  const std::uint64_t seed = g.seed.value_or(0);
  std::vector<CounterexampleRow> sim;
  if (reps > 0) sim = counterexample_simulate(ks, reps, seed);

  std::ostringstream os;
  os << "k,p,abs_xi,e_abs_d,ratio";
  if (reps > 0) os << ",mean_abs_d,se_abs_d,z";
  os << "\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const CounterexampleClosedForm cf = counterexample_closed_form(ks[i]);
    os << ks[i] << ',' << format_double(cf.p) << ',' << format_double(cf.abs_xi) << ',' << format_double(cf.e_abs_d)
       << ',' << format_double(cf.e_abs_d / cf.abs_xi);
    if (reps > 0) {
      const double z = sim[i].se_abs_d > 0.0 ? (sim[i].mean_abs_d - cf.e_abs_d) / sim[i].se_abs_d : 0.0;
      os << ',' << format_double(sim[i].mean_abs_d) << ',' << format_double(sim[i].se_abs_d) << ','
         << format_double(z);
    }
    os << "\n";
  }
  std::cout << os.str();
  if (const std::string dir = optional_out_dir(g); !dir.empty()) write_text(dir, "counterexample.csv", os.str());
  return kExitOk;
}

int cmd_check(const GlobalOptions& g) {
  const auto checks = run_property_suite(g.seed.value_or(0));
  std::ostringstream os;
  bool ok = true;
  for (const PropertyCheck& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.passed;
  }
  std::cout << os.str();
  if (const std::string dir = optional_out_dir(g); !dir.empty()) write_text(dir, "check.txt", os.str());
  return ok ? kExitOk : kExitViolation;
}

int cmd_verify_deterministic(const GlobalOptions& g, std::optional<std::int64_t> horizon) {
  ExperimentConfig cfg = resolve_config(g);
  if (horizon) {
    if (*horizon < 1) throw ConfigError("--horizon", "must be >= 1");
    cfg.horizon = *horizon;
  }
  if (cfg.oracle.name() != std::string("exact"))
    throw ConfigError("oracle", "verify-deterministic requires the exact oracle");
  validate(cfg.solver, cfg.curvature.kind);
  const TestProblem problem = build_problem(cfg.problem);
  const DeterministicReport rep = verify_deterministic_bound(problem, cfg.solver, cfg.curvature, cfg.horizon);
  const std::string text = to_json(rep).dump(2) + "\n";
  std::cout << text;
  if (!g.out_dir.empty() || !g.config_path.empty() || std::getenv("ADAGB2_OUT_DIR"))
    write_text(cfg.outputs.directory, "deterministic.json", text);
  return !rep.applicable || rep.holds ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADAGB2 bound-constrained Adagrad-type optimizer and verification harness"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON experiment configuration");
  app.add_option("--out", g.out_dir, "output directory (default: $ADAGB2_OUT_DIR, then the config value)");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--no-diagnostics", g.no_diagnostics, "skip true-gradient diagnostics");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");

  auto* run_cmd = app.add_subcommand("run", "single run from a config file");
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo experiment");
  std::int64_t reps = 0;
  auto* reps_opt = mc_cmd->add_option("--reps", reps, "override the replication count");

  auto* const_cmd = app.add_subcommand("constants", "print the rate-bound constants");
  ConstantsInput ci;
  const_cmd->add_option("--sigma", ci.sigma_init)->required();
  const_cmd->add_option("--tau", ci.tau)->required();
  const_cmd->add_option("--kappa-s", ci.kappa_s)->required();
  const_cmd->add_option("--kappa-b", ci.kappa_B)->required();
  const_cmd->add_option("--kappa-gg", ci.kappa_Gg)->required();
  const_cmd->add_option("--lipschitz", ci.lipschitz_L)->required();
  const_cmd->add_option("--gamma0", ci.Gamma0)->required();
  const_cmd->add_option("--dim", ci.dim)->required();

  auto* cex_cmd = app.add_subcommand("counterexample", "closed forms and simulation of the 1-D example");
  std::vector<std::int64_t> ks{9, 99, 999};
  std::int64_t cex_reps = 100000;
  cex_cmd->add_option("--k", ks, "iteration indices")->delimiter(',');
  cex_cmd->add_option("--reps", cex_reps, "Monte Carlo replications per k (0 = closed form only)");

  auto* check_cmd = app.add_subcommand("check", "randomized lemma and projection property sweeps");

  auto* det_cmd = app.add_subcommand("verify-deterministic", "check the exact-oracle rate bound");
  std::int64_t det_horizon = 0;
  auto* det_horizon_opt = det_cmd->add_option("--horizon", det_horizon, "iterations (default: config horizon)");

  for (CLI::App* sub : {run_cmd, mc_cmd, const_cmd, cex_cmd, check_cmd, det_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*run_cmd) {
      if (g.config_path.empty()) throw ConfigError("--config", "run requires a configuration file");
      return cmd_experiment(g, std::nullopt, true);
    }
    if (*mc_cmd) {
      if (g.config_path.empty()) throw ConfigError("--config", "mc requires a configuration file");
      return cmd_experiment(g, *reps_opt ? std::optional<std::int64_t>(reps) : std::nullopt, false);
    }
    if (*const_cmd) return cmd_constants(ci);
    if (*cex_cmd) return cmd_counterexample(g, ks, cex_reps);
    if (*check_cmd) return cmd_check(g);
    if (*det_cmd)
      return cmd_verify_deterministic(g, *det_horizon_opt ? std::optional<std::int64_t>(det_horizon) : std::nullopt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
