#include "adagb2/oracle.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "adagb2/errors.hpp"
#include "adagb2/rng.hpp"

namespace adagb2 {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

Vector add_gaussian(ConstSpan base, double component_sd, Stream& stream) {
  Vector g(base.begin(), base.end());
  std::normal_distribution<double> normal;
  for (double& v : g) v += component_sd * normal(stream);
  return g;
}

Vector realize(const Objective& obj, ConstSpan x, ConstSpan G, const NoiseModel& model, Stream& stream) {
  return std::visit(
      overloaded{
          [&](const noise::Exact&) { return Vector(G.begin(), G.end()); },
          [&](const noise::Gaussian& m) { return add_gaussian(G, m.sigma, stream); },
          [&](const noise::BoundedUniform& m) {
            const std::size_t n = G.size();
            std::normal_distribution<double> normal;
            Vector dir(n);
            double len = 0.0;
            while (len == 0.0) {
              for (double& v : dir) v = normal(stream);
              len = norm(dir);
            }
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(stream);
            const double r = m.radius * std::pow(u, 1.0 / static_cast<double>(n));
            Vector g(G.begin(), G.end());
            for (std::size_t i = 0; i < n; ++i) g[i] += r * dir[i] / len;
            return g;
          },
          [&](const noise::AffineGaussian& m) {
            const double variance = m.kappa1 + m.kappa2 * dot(G, G);
            return add_gaussian(G, std::sqrt(variance / static_cast<double>(G.size())), stream);
          },
          [&](const noise::ConstantBias& m) {
            Vector g = realize(obj, x, G, *m.inner, stream);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += m.bias[i];
            return g;
          },
          [&](const noise::RelativeBias& m) {
            Vector g = realize(obj, x, G, *m.inner, stream);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += m.rho * G[i];
            return g;
          },
          [&](const noise::Subsample& m) {
            const FiniteSum& fs = *obj.finite_sum;
            if (m.batch_size == fs.num_terms) return Vector(G.begin(), G.end());
            std::vector<std::size_t> idx(fs.num_terms);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            // partial Fisher-Yates: the first batch_size entries form the batch
            for (std::size_t j = 0; j < m.batch_size; ++j) {
              std::uniform_int_distribution<std::size_t> pick(j, fs.num_terms - 1);
              std::swap(idx[j], idx[pick(stream)]);
            }
            Vector g(G.size(), 0.0);
            for (std::size_t j = 0; j < m.batch_size; ++j) {
              const Vector gj = fs.term_grad(x, idx[j]);
              for (std::size_t i = 0; i < g.size(); ++i) g[i] += gj[i];
            }
            for (double& v : g) v /= static_cast<double>(m.batch_size);
            return g;
          },
      },
      model.kind);
}

void validate_at(const NoiseModel& model, const Objective& obj, std::size_t dim, const std::string& path) {
  std::visit(overloaded{
                 [](const noise::Exact&) {},
                 [&](const noise::Gaussian& m) { require(m.sigma >= 0.0, path + ".sigma", "must be >= 0"); },
                 [&](const noise::BoundedUniform& m) { require(m.radius >= 0.0, path + ".radius", "must be >= 0"); },
                 [&](const noise::AffineGaussian& m) {
                   require(m.kappa1 >= 0.0, path + ".kappa1", "must be >= 0");
                   require(m.kappa2 >= 0.0, path + ".kappa2", "must be >= 0");
                 },
                 [&](const noise::ConstantBias& m) {
                   require(m.bias.size() == dim, path + ".bias", "length must equal the problem dimension");
                   require(all_finite(m.bias), path + ".bias", "entries must be finite");
                   require(m.inner != nullptr, path + ".inner", "missing inner model");
                   validate_at(*m.inner, obj, dim, path + ".inner");
                 },
                 [&](const noise::RelativeBias& m) {
                   require(std::isfinite(m.rho), path + ".rho", "must be finite");
                   require(m.inner != nullptr, path + ".inner", "missing inner model");
                   validate_at(*m.inner, obj, dim, path + ".inner");
                 },
                 [&](const noise::Subsample& m) {
                   require(obj.finite_sum.has_value(), path, "subsample requires a finite-sum objective");
                   require(m.batch_size >= 1 && m.batch_size <= obj.finite_sum->num_terms, path + ".batch_size",
                           "must lie in [1, number of terms]");
                 },
             },
             model.kind);
}

}  // namespace

const char* NoiseModel::name() const {
  return std::visit(overloaded{
                        [](const noise::Exact&) { return "exact"; },
                        [](const noise::Gaussian&) { return "gaussian"; },
                        [](const noise::BoundedUniform&) { return "bounded_uniform"; },
                        [](const noise::AffineGaussian&) { return "affine_gaussian"; },
                        [](const noise::ConstantBias&) { return "constant_bias"; },
                        [](const noise::RelativeBias&) { return "relative_bias"; },
                        [](const noise::Subsample&) { return "subsample"; },
                    },
                    kind);
}

void validate(const NoiseModel& model, const Objective& obj, std::size_t dim) { validate_at(model, obj, dim, "oracle"); }

OracleDraw draw(const Objective& obj, ConstSpan x, const NoiseModel& model, Stream& stream) {
  OracleDraw out;
  out.g_true = obj.eval_grad(x);
  out.g = realize(obj, x, out.g_true, model, stream);
  out.err_norm = distance(out.g, out.g_true);
  return out;
}

double empirical_rmse(const Objective& obj, ConstSpan x, const NoiseModel& model, int draws, std::uint64_t seed) {
  if (draws < 1) throw InputError("empirical_rmse: draws must be >= 1");
  validate(model, obj, x.size());
  const Vector G = obj.eval_grad(x);
  auto stream = make_engine(seed, 0x7235);
  double sum_sq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const Vector g = realize(obj, x, G, model, stream);
    const double e = distance(g, G);
    sum_sq += e * e;
  }
  return std::sqrt(sum_sq / draws);
}

}  // namespace adagb2
