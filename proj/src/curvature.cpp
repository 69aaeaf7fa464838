#include "adagb2/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "adagb2/errors.hpp"

namespace adagb2 {
namespace {

constexpr int kPowerSteps = 20;

class ZeroProvider final : public CurvatureProvider {
 public:
  explicit ZeroProvider(double kappa_B) : CurvatureProvider(kappa_B) {}
  void observe(ConstSpan, ConstSpan) override {}
  Vector matvec(ConstSpan, ConstSpan v) const override { return Vector(v.size(), 0.0); }
  CurvatureKind kind() const override { return CurvatureKind::zero; }
};

// Exact Hessian scaled by kappa_B / max(kappa_B, ||H||).
class ExactClippedProvider final : public CurvatureProvider {
 public:
  ExactClippedProvider(double kappa_B, const Objective& obj) : CurvatureProvider(kappa_B), hess_(obj.eval_hess_vec) {}

  void observe(ConstSpan x, ConstSpan) override { refresh(x); }

  Vector matvec(ConstSpan x, ConstSpan v) const override {
    refresh(x);
    return scaled(scale_, hess_(x, v));
  }

  CurvatureKind kind() const override { return CurvatureKind::exact_clipped; }

 private:
  void refresh(ConstSpan x) const {
    if (at_.size() == x.size() && std::equal(at_.begin(), at_.end(), x.begin())) return;
    at_.assign(x.begin(), x.end());
    const double est = power_iteration_norm([&](ConstSpan v) { return hess_(x, v); }, x.size(), kPowerSteps);
    scale_ = kappa_B() / std::max(kappa_B(), est);
  }

  std::function<Vector(ConstSpan, ConstSpan)> hess_;
  mutable Vector at_;
  mutable double scale_ = 1.0;
};

// sigma_k I with sigma_k the safeguarded Barzilai-Borwein scalar of the last
// (x, g) pair difference. sigma_0 = 0.
class ScalarBBProvider final : public CurvatureProvider {
 public:
  explicit ScalarBBProvider(double kappa_B) : CurvatureProvider(kappa_B) {}

  void observe(ConstSpan x, ConstSpan g) override {
    if (!prev_x_.empty()) {
      const Vector s = difference(x, prev_x_);
      const Vector y = difference(g, prev_g_);
      if (auto sigma = barzilai_borwein_scalar(s, y, kappa_B())) sigma_ = *sigma;
    }
    prev_x_.assign(x.begin(), x.end());
    prev_g_.assign(g.begin(), g.end());
  }

  Vector matvec(ConstSpan, ConstSpan v) const override { return scaled(sigma_, v); }
  CurvatureKind kind() const override { return CurvatureKind::scalar_bb; }

 private:
  Vector prev_x_;
  Vector prev_g_;
  double sigma_ = 0.0;
};

// Central differences of the true gradient along each axis, clipped entrywise.
class DiagonalFDProvider final : public CurvatureProvider {
 public:
  DiagonalFDProvider(double kappa_B, const Objective& obj) : CurvatureProvider(kappa_B), grad_(obj.eval_grad) {}

  void observe(ConstSpan x, ConstSpan) override { refresh(x); }

  Vector matvec(ConstSpan x, ConstSpan v) const override {
    refresh(x);
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag_[i] * v[i];
    return out;
  }

  CurvatureKind kind() const override { return CurvatureKind::diagonal_fd; }

 private:
  void refresh(ConstSpan x) const {
    if (at_.size() == x.size() && std::equal(at_.begin(), at_.end(), x.begin())) return;
    at_.assign(x.begin(), x.end());
    diag_.assign(x.size(), 0.0);
    Vector probe(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      probe[i] = x[i] + h;
      const double gp = grad_(probe)[i];
      probe[i] = x[i] - h;
      const double gm = grad_(probe)[i];
      probe[i] = x[i];
      diag_[i] = std::clamp((gp - gm) / (2.0 * h), -kappa_B(), kappa_B());
    }
  }

  std::function<Vector(ConstSpan)> grad_;
  mutable Vector at_;
  mutable Vector diag_;
};

}  // namespace

CurvatureKind parse_curvature_kind(const std::string& name) {
  if (name == "zero") return CurvatureKind::zero;
  if (name == "exact_clipped") return CurvatureKind::exact_clipped;
  if (name == "scalar_bb") return CurvatureKind::scalar_bb;
  if (name == "diagonal_fd") return CurvatureKind::diagonal_fd;
  throw ConfigError("curvature.kind", "unknown curvature provider '" + name + "'");
}

const char* to_string(CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::zero: return "zero";
    case CurvatureKind::exact_clipped: return "exact_clipped";
    case CurvatureKind::scalar_bb: return "scalar_bb";
    case CurvatureKind::diagonal_fd: return "diagonal_fd";
  }
  return "?";
}

std::unique_ptr<CurvatureProvider> make_provider(const CurvatureSpec& spec, const Objective& obj) {
  if (!(spec.kappa_B >= 1.0) || !std::isfinite(spec.kappa_B))
    throw ConfigError("curvature.kappa_B", "must be a finite value >= 1");
  switch (spec.kind) {
    case CurvatureKind::zero: return std::make_unique<ZeroProvider>(spec.kappa_B);
    case CurvatureKind::exact_clipped:
      if (!obj.has_hessian())
        throw ConfigError("curvature.kind", "exact_clipped requires a Hessian action on the objective");
      return std::make_unique<ExactClippedProvider>(spec.kappa_B, obj);
    case CurvatureKind::scalar_bb: return std::make_unique<ScalarBBProvider>(spec.kappa_B);
    case CurvatureKind::diagonal_fd: return std::make_unique<DiagonalFDProvider>(spec.kappa_B, obj);
  }
  throw ConfigError("curvature.kind", "unhandled provider");
}

std::optional<double> barzilai_borwein_scalar(ConstSpan s, ConstSpan y, double kappa_B) {
  const double ss = dot(s, s);
  if (ss == 0.0) return std::nullopt;
  return std::clamp(dot(s, y) / ss, 0.0, kappa_B);
}

double power_iteration_norm(const std::function<Vector(ConstSpan)>& op, std::size_t n, int steps) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  double len = norm(v);
  for (double& c : v) c /= len;
  double est = 0.0;
  for (int t = 0; t < steps; ++t) {
    Vector w = op(v);
    est = norm(w);
    if (est == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / est;
  }
  return est;
}

}  // namespace adagb2
