#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "adagb2/linalg.hpp"
#include "adagb2/problem.hpp"

namespace adagb2 {

enum class CurvatureKind { zero, exact_clipped, scalar_bb, diagonal_fd };

CurvatureKind parse_curvature_kind(const std::string& name);
const char* to_string(CurvatureKind kind);

struct CurvatureSpec {
  CurvatureKind kind = CurvatureKind::zero;
  double kappa_B = 1.0;
};

/// Symmetric approximation B_k with ||B_k|| <= kappa_B.
///
/// The solver calls observe(x_k, g_k) once per iteration before querying the
/// operator at x_k. Providers may keep history across calls (scalar_bb), so an
/// instance belongs to a single run.
class CurvatureProvider {
 public:
  virtual ~CurvatureProvider() = default;

  virtual void observe(ConstSpan x, ConstSpan g) = 0;
  virtual Vector matvec(ConstSpan x, ConstSpan v) const = 0;
  double quad_form(ConstSpan x, ConstSpan v) const { return dot(v, matvec(x, v)); }

  virtual CurvatureKind kind() const = 0;
  double kappa_B() const noexcept { return kappa_B_; }

 protected:
  explicit CurvatureProvider(double kappa_B) : kappa_B_(kappa_B) {}

 private:
  double kappa_B_;
};

/// Throws ConfigError on kappa_B < 1 or exact_clipped without a Hessian action.
std::unique_ptr<CurvatureProvider> make_provider(const CurvatureSpec& spec, const Objective& obj);

/// s^T y / s^T s clipped into [0, kappa_B]; nullopt when s = 0.
std::optional<double> barzilai_borwein_scalar(ConstSpan s, ConstSpan y, double kappa_B);

/// Largest |eigenvalue| of a symmetric operator by power iteration from a fixed
/// start vector.
double power_iteration_norm(const std::function<Vector(ConstSpan)>& op, std::size_t n, int steps);

}  // namespace adagb2
