#include "adagb2/config.hpp"

#include <fstream>
#include <set>

#include "adagb2/errors.hpp"

namespace adagb2 {
namespace {

using nlohmann::json;

void reject_unknown(const json& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : node.items())
    if (!allowed.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

template <class T>
T get(const json& node, const std::string& key, const std::string& path, T fallback) {
  if (!node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

template <class T>
T require(const json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) throw ConfigError(path + "." + key, "missing required key");
  return get<T>(node, key, path, T{});
}

Vector parse_bound(const json& node, const std::string& path) {
  if (!node.is_array()) throw ConfigError(path, "expected an array");
  Vector v;
  for (const json& e : node) {
    if (e.is_number()) {
      v.push_back(e.get<double>());
    } else if (e.is_string() && (e == "inf" || e == "+inf")) {
      v.push_back(kInf);
    } else if (e.is_string() && e == "-inf") {
      v.push_back(-kInf);
    } else {
      throw ConfigError(path, "entries must be numbers or \"inf\"/\"-inf\"");
    }
  }
  return v;
}

json bound_to_json(const Vector& v) {
  json out = json::array();
  for (double x : v) {
    if (x == kInf)
      out.push_back("inf");
    else if (x == -kInf)
      out.push_back("-inf");
    else
      out.push_back(x);
  }
  return out;
}

}  // namespace

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("outputs.format", "expected csv or json, got '" + name + "'");
}

NoiseModel parse_noise_model(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  const auto kind = require<std::string>(node, "kind", path);
  if (kind == "exact") {
    reject_unknown(node, path, {"kind"});
    return NoiseModel::exact();
  }
  if (kind == "gaussian") {
    reject_unknown(node, path, {"kind", "sigma"});
    return NoiseModel::gaussian(require<double>(node, "sigma", path));
  }
  if (kind == "bounded_uniform") {
    reject_unknown(node, path, {"kind", "radius"});
    return NoiseModel::bounded_uniform(require<double>(node, "radius", path));
  }
  if (kind == "affine_gaussian") {
    reject_unknown(node, path, {"kind", "kappa1", "kappa2"});
    return NoiseModel::affine_gaussian(require<double>(node, "kappa1", path), require<double>(node, "kappa2", path));
  }
  if (kind == "constant_bias") {
    reject_unknown(node, path, {"kind", "bias", "inner"});
    if (!node.contains("bias")) throw ConfigError(path + ".bias", "missing required key");
    NoiseModel inner = node.contains("inner") ? parse_noise_model(node.at("inner"), path + ".inner") : NoiseModel::exact();
    return NoiseModel::constant_bias(parse_bound(node.at("bias"), path + ".bias"), std::move(inner));
  }
  if (kind == "relative_bias") {
    reject_unknown(node, path, {"kind", "rho", "inner"});
    NoiseModel inner = node.contains("inner") ? parse_noise_model(node.at("inner"), path + ".inner") : NoiseModel::exact();
    return NoiseModel::relative_bias(require<double>(node, "rho", path), std::move(inner));
  }
  if (kind == "subsample") {
    reject_unknown(node, path, {"kind", "batch_size"});
    const auto batch = require<std::int64_t>(node, "batch_size", path);
    if (batch < 1) throw ConfigError(path + ".batch_size", "must be >= 1");
    return NoiseModel::subsample(static_cast<std::size_t>(batch));
  }
  throw ConfigError(path + ".kind", "unknown noise model '" + kind + "'");
}

json to_json(const NoiseModel& model) {
  json j;
  j["kind"] = model.name();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, noise::Gaussian>) j["sigma"] = m.sigma;
        if constexpr (std::is_same_v<T, noise::BoundedUniform>) j["radius"] = m.radius;
        if constexpr (std::is_same_v<T, noise::AffineGaussian>) {
          j["kappa1"] = m.kappa1;
          j["kappa2"] = m.kappa2;
        }
        if constexpr (std::is_same_v<T, noise::ConstantBias>) {
          j["bias"] = m.bias;
          j["inner"] = to_json(*m.inner);
        }
        if constexpr (std::is_same_v<T, noise::RelativeBias>) {
          j["rho"] = m.rho;
          j["inner"] = to_json(*m.inner);
        }
        if constexpr (std::is_same_v<T, noise::Subsample>) j["batch_size"] = m.batch_size;
      },
      model.kind);
  return j;
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"problem", "oracle", "curvature", "solver", "run", "outputs"});
  ExperimentConfig c;

  if (doc.contains("problem")) {
    const json& p = doc.at("problem");
    reject_unknown(p, "problem", {"name", "dim", "seed", "lower", "upper"});
    c.problem.name = get<std::string>(p, "name", "problem", c.problem.name);
    c.problem.dim = get<int>(p, "dim", "problem", c.problem.dim);
    c.problem.seed = get<std::uint64_t>(p, "seed", "problem", c.problem.seed);
    if (p.contains("lower")) c.problem.lower = parse_bound(p.at("lower"), "problem.lower");
    if (p.contains("upper")) c.problem.upper = parse_bound(p.at("upper"), "problem.upper");
    if (c.problem.dim < 1) throw ConfigError("problem.dim", "must be >= 1");
  }
  if (doc.contains("oracle")) c.oracle = parse_noise_model(doc.at("oracle"), "oracle");

  if (doc.contains("curvature")) {
    const json& q = doc.at("curvature");
    reject_unknown(q, "curvature", {"kind", "kappa_B"});
    c.curvature.kind = parse_curvature_kind(get<std::string>(q, "kind", "curvature", "zero"));
    c.curvature.kappa_B = get<double>(q, "kappa_B", "curvature", c.curvature.kappa_B);
    if (!(c.curvature.kappa_B >= 1.0)) throw ConfigError("curvature.kappa_B", "must be >= 1");
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, "solver", {"sigma_init", "tau", "kappa_s", "step_mode"});
    c.solver.sigma_init = get<double>(s, "sigma_init", "solver", c.solver.sigma_init);
    c.solver.tau = get<double>(s, "tau", "solver", c.solver.tau);
    c.solver.kappa_s = get<double>(s, "kappa_s", "solver", c.solver.kappa_s);
    c.solver.step_mode = parse_step_mode(get<std::string>(s, "step_mode", "solver", "cauchy"));
  }

  if (doc.contains("run")) {
    const json& r = doc.at("run");
    reject_unknown(r, "run",
                   {"horizon", "replications", "base_seed", "diagnostics", "threads", "kappa_Gg", "epsilons", "delta"});
    c.horizon = get<std::int64_t>(r, "horizon", "run", c.horizon);
    c.replications = get<std::int64_t>(r, "replications", "run", c.replications);
    c.base_seed = get<std::uint64_t>(r, "base_seed", "run", c.base_seed);
    c.diagnostics = get<bool>(r, "diagnostics", "run", c.diagnostics);
    c.threads = get<unsigned>(r, "threads", "run", c.threads);
    c.kappa_Gg = get<double>(r, "kappa_Gg", "run", c.kappa_Gg);
    c.epsilons = get<std::vector<double>>(r, "epsilons", "run", c.epsilons);
    c.delta = get<double>(r, "delta", "run", c.delta);
    if (c.horizon < 1) throw ConfigError("run.horizon", "must be >= 1");
    if (c.replications < 1) throw ConfigError("run.replications", "must be >= 1");
    if (!(c.kappa_Gg >= 0.0)) throw ConfigError("run.kappa_Gg", "must be >= 0");
    for (double e : c.epsilons)
      if (!(e > 0.0)) throw ConfigError("run.epsilons", "entries must be > 0");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("run.delta", "must lie in (0, 1)");
  }
  c.solver.max_iter = c.horizon;

  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    reject_unknown(o, "outputs", {"directory", "format", "traces"});
    c.outputs.directory = get<std::string>(o, "directory", "outputs", c.outputs.directory.string());
    c.outputs.format = parse_output_format(get<std::string>(o, "format", "outputs", "csv"));
    c.outputs.traces = get<bool>(o, "traces", "outputs", c.outputs.traces);
  }
  validate(c.solver, c.curvature.kind);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed config file '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = {{"name", c.problem.name}, {"dim", c.problem.dim}, {"seed", c.problem.seed}};
  if (c.problem.lower) j["problem"]["lower"] = bound_to_json(*c.problem.lower);
  if (c.problem.upper) j["problem"]["upper"] = bound_to_json(*c.problem.upper);
  j["oracle"] = to_json(c.oracle);
  j["curvature"] = {{"kind", to_string(c.curvature.kind)}, {"kappa_B", c.curvature.kappa_B}};
  j["solver"] = {{"sigma_init", c.solver.sigma_init},
                 {"tau", c.solver.tau},
                 {"kappa_s", c.solver.kappa_s},
                 {"step_mode", to_string(c.solver.step_mode)}};
  j["run"] = {{"horizon", c.horizon},     {"replications", c.replications}, {"base_seed", c.base_seed},
              {"diagnostics", c.diagnostics}, {"kappa_Gg", c.kappa_Gg},       {"epsilons", c.epsilons},
              {"delta", c.delta}};
  return j;
}

}  // namespace adagb2
