#include "adagb2/problem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "adagb2/errors.hpp"
#include "adagb2/rng.hpp"

namespace adagb2 {
namespace {

constexpr double kWindow = 10.0;

std::pair<double, double> finite_interval(double lo, double hi) {
  if (std::isinf(lo) && std::isinf(hi)) return {-kWindow, kWindow};
  if (std::isinf(lo)) return {hi - 2 * kWindow, hi};
  if (std::isinf(hi)) return {lo, lo + 2 * kWindow};
  return {lo, hi};
}

Vector sample_in(const BoundBox& box, std::mt19937_64& rng) {
  Vector x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [lo, hi] = finite_interval(box.lower(i), box.upper(i));
    x[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
    x[i] = std::clamp(x[i], lo, hi);
  }
  return x;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

TestProblem boxed_quadratic(std::size_t n, std::uint64_t seed) {
  Vector a(n), b(n, 1.0);
  if (seed == 0) {
    for (std::size_t i = 0; i < n; ++i) a[i] = n == 1 ? 1.0 : 1.0 + 3.0 * static_cast<double>(i) / (n - 1);
    return make_separable_quadratic(std::move(a), std::move(b), BoundBox::uniform(n, 0.0, 1.0), Vector(n, 0.0));
  }
  auto rng = make_engine(seed, 0x9a11);
  Vector lo(n), hi(n), x0(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = uniform(rng, 0.5, 4.0);
    b[i] = uniform(rng, -1.0, 2.0);
    lo[i] = uniform(rng, -1.0, 0.0);
    hi[i] = lo[i] + uniform(rng, 0.5, 2.0);
    x0[i] = uniform(rng, -2.0, 2.0);  // may be infeasible; the solver projects it
  }
  return make_separable_quadratic(std::move(a), std::move(b), BoundBox(std::move(lo), std::move(hi)), std::move(x0));
}

// Chained Rosenbrock sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2 on [-2, 2]^n.
TestProblem boxed_rosenbrock(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InputError("boxed_rosenbrock needs dim >= 2");
  TestProblem p;
  p.name = "boxed_rosenbrock";
  p.box = BoundBox::uniform(n, -2.0, 2.0);
  Objective& o = p.objective;
  o.eval_f = [](ConstSpan x) {
    double f = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      f += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
    }
    return f;
  };
  o.eval_grad = [](ConstSpan x) {
    Vector g(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * t;
    }
    return g;
  };
  o.eval_hess_vec = [](ConstSpan x, ConstSpan v) {
    Vector hv(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double hii = 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
      const double hij = -400.0 * x[i];
      hv[i] += hii * v[i] + hij * v[i + 1];
      hv[i + 1] += hij * v[i] + 200.0 * v[i + 1];
    }
    return hv;
  };
  o.f_low = 0.0;
  // Gershgorin bound on [-2, 2]^n: diagonal <= 4800 + 800 + 2 + 200, two off-diagonals <= 800 each.
  o.lipschitz_L = 7402.0;
  p.known_critical_value = 0.0;
  p.known_minimizer = Vector(n, 1.0);
  if (seed == 0) {
    p.x_ini = Vector(n, 1.0);
    for (std::size_t i = 0; i < n; i += 2) p.x_ini[i] = -1.2;
  } else {
    auto rng = make_engine(seed, 0x905e);
    p.x_ini = sample_in(p.box, rng);
  }
  return p;
}

// sum_i x_i^4/4 - x_i^2/2 + beta_i x_i on [-2, 2]^n: three stationary points per coordinate.
TestProblem boxed_nonconvex_quartic(std::size_t n, std::uint64_t seed) {
  Vector beta(n, 0.1);
  Vector x0(n, 0.05);
  if (seed != 0) {
    auto rng = make_engine(seed, 0x4a27);
    for (std::size_t i = 0; i < n; ++i) beta[i] = uniform(rng, -0.3, 0.3);
    for (std::size_t i = 0; i < n; ++i) x0[i] = uniform(rng, -2.0, 2.0);
  }
  TestProblem p;
  p.name = "boxed_nonconvex_quartic";
  p.box = BoundBox::uniform(n, -2.0, 2.0);
  p.x_ini = std::move(x0);
  Objective& o = p.objective;
  o.eval_f = [beta](ConstSpan x) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x2 = x[i] * x[i];
      f += 0.25 * x2 * x2 - 0.5 * x2 + beta[i] * x[i];
    }
    return f;
  };
  o.eval_grad = [beta](ConstSpan x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] * x[i] * x[i] - x[i] + beta[i];
    return g;
  };
  o.eval_hess_vec = [](ConstSpan x, ConstSpan v) {
    Vector hv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) hv[i] = (3.0 * x[i] * x[i] - 1.0) * v[i];
    return hv;
  };
  // x^4/4 - x^2/2 >= -1/4 and |beta x| <= 2 |beta| on the box.
  o.f_low = 0.0;
  for (double bi : beta) o.f_low += -0.25 - 2.0 * std::abs(bi);
  o.lipschitz_L = 11.0;
  return p;
}

// (1/m) sum_j log(1 + exp(-y_j a_j^T x)) + lambda/2 ||x||^2 on [-1, 1]^n.
TestProblem finite_sum_logistic(std::size_t n, std::uint64_t seed) {
  constexpr std::size_t m = 50;
  constexpr double lambda = 0.01;
  auto rng = make_engine(seed, 0x1061);
  std::normal_distribution<double> normal;
  auto features = std::make_shared<std::vector<Vector>>(m, Vector(n));
  auto labels = std::make_shared<Vector>(m);
  Vector truth(n);
  for (double& t : truth) t = normal(rng);
  for (std::size_t j = 0; j < m; ++j) {
    for (double& v : (*features)[j]) v = normal(rng);
    const double margin = dot((*features)[j], truth) + 0.5 * normal(rng);
    (*labels)[j] = margin >= 0.0 ? 1.0 : -1.0;
  }

  auto term_grad = [features, labels](ConstSpan x, std::size_t j) {
    const Vector& aj = (*features)[j];
    const double yj = (*labels)[j];
    const double z = -yj * dot(aj, x);
    const double sig = 1.0 / (1.0 + std::exp(-z));  // d/dz log(1 + e^z)
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -yj * sig * aj[i] + lambda * x[i];
    return g;
  };

  TestProblem p;
  p.name = "finite_sum_logistic";
  p.box = BoundBox::uniform(n, -1.0, 1.0);
  p.x_ini = Vector(n, 0.0);
  if (seed != 0) p.x_ini = sample_in(p.box, rng);
  Objective& o = p.objective;
  o.eval_f = [features, labels](ConstSpan x) {
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double z = -(*labels)[j] * dot((*features)[j], x);
      f += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    return f / m + 0.5 * lambda * dot(x, x);
  };
  o.eval_grad = [term_grad](ConstSpan x) {
    Vector g(x.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Vector gj = term_grad(x, j);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gj[i];
    }
    for (double& v : g) v /= m;
    return g;
  };
  o.eval_hess_vec = [features, labels](ConstSpan x, ConstSpan v) {
    Vector hv(x.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Vector& aj = (*features)[j];
      const double z = -(*labels)[j] * dot(aj, x);
      const double sig = 1.0 / (1.0 + std::exp(-z));
      const double c = sig * (1.0 - sig) * dot(aj, v) / m;
      for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += c * aj[i];
    }
    for (std::size_t i = 0; i < hv.size(); ++i) hv[i] += lambda * v[i];
    return hv;
  };
  o.f_low = 0.0;
  double trace = 0.0;
  for (const Vector& aj : *features) trace += dot(aj, aj);
  o.lipschitz_L = 0.25 * trace / m + lambda;
  o.finite_sum = FiniteSum{m, term_grad};
  return p;
}

}  // namespace

const std::vector<std::string>& test_problem_names() {
  static const std::vector<std::string> names{"boxed_quadratic", "boxed_rosenbrock", "boxed_nonconvex_quartic",
                                              "finite_sum_logistic"};
  return names;
}

TestProblem make_separable_quadratic(Vector a, Vector b, BoundBox box, Vector x_ini) {
  const std::size_t n = a.size();
  if (b.size() != n || box.dim() != n || x_ini.size() != n)
    throw InputError("make_separable_quadratic: dimension mismatch");
  double lmax = 0.0;
  for (double ai : a) {
    if (!(ai > 0.0)) throw InputError("make_separable_quadratic: curvatures must be positive");
    lmax = std::max(lmax, ai);
  }
  Vector xstar(n);
  double fstar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xstar[i] = std::clamp(b[i] / a[i], box.lower(i), box.upper(i));
    fstar += 0.5 * a[i] * xstar[i] * xstar[i] - b[i] * xstar[i];
  }

  TestProblem p;
  p.name = "boxed_quadratic";
  p.box = std::move(box);
  p.x_ini = std::move(x_ini);
  p.known_critical_value = fstar;
  p.known_minimizer = xstar;
  Objective& o = p.objective;
  o.eval_f = [a, b](ConstSpan x) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * a[i] * x[i] * x[i] - b[i] * x[i];
    return f;
  };
  o.eval_grad = [a, b](ConstSpan x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = a[i] * x[i] - b[i];
    return g;
  };
  o.eval_hess_vec = [a](ConstSpan, ConstSpan v) {
    Vector hv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) hv[i] = a[i] * v[i];
    return hv;
  };
  o.f_low = fstar;
  o.lipschitz_L = lmax;
  return p;
}

TestProblem make_test_problem(const std::string& name, int dim, std::uint64_t seed) {
  if (dim < 1) throw InputError("make_test_problem: dim must be >= 1");
  const auto n = static_cast<std::size_t>(dim);
  if (name == "boxed_quadratic") return boxed_quadratic(n, seed);
  if (name == "boxed_rosenbrock") return boxed_rosenbrock(n, seed);
  if (name == "boxed_nonconvex_quartic") return boxed_nonconvex_quartic(n, seed);
  if (name == "finite_sum_logistic") return finite_sum_logistic(n, seed);
  throw InputError("make_test_problem: unknown problem '" + name + "'");
}

Vector sample_feasible(const BoundBox& box, std::uint64_t seed) {
  auto rng = make_engine(seed, 0x5a3d);
  return sample_in(box, rng);
}

SmoothnessReport check_smoothness(const Objective& obj, const BoundBox& box, int samples, std::uint64_t seed) {
  if (samples < 1) throw InputError("check_smoothness: samples must be >= 1");
  auto rng = make_engine(seed, 0x5300);
  SmoothnessReport report;
  for (int s = 0; s < samples; ++s) {
    const Vector x = sample_in(box, rng);
    const Vector y = sample_in(box, rng);
    const double dxy = distance(x, y);
    if (dxy == 0.0) continue;
    const double ratio = distance(obj.eval_grad(x), obj.eval_grad(y)) / dxy;
    report.max_ratio = std::max(report.max_ratio, ratio);
    ++report.pairs_used;
  }
  if (obj.lipschitz_L) report.within_lipschitz = report.max_ratio <= *obj.lipschitz_L * (1.0 + 1e-9);
  return report;
}

}  // namespace adagb2
