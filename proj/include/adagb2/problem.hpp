#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adagb2/geometry.hpp"
#include "adagb2/linalg.hpp"

namespace adagb2 {

/// Finite-sum structure f = (1/m) sum_j f_j, used by subsampling oracles.
struct FiniteSum {
  std::size_t num_terms = 0;
  std::function<Vector(ConstSpan x, std::size_t term)> term_grad;
};

/// Smooth objective with its true gradient. Evaluations must be free of shared
/// mutable state so replications may call them concurrently.
struct Objective {
  std::function<double(ConstSpan)> eval_f;
  std::function<Vector(ConstSpan)> eval_grad;
  /// Action of the Hessian, (x, v) -> H(x) v. Optional.
  std::function<Vector(ConstSpan, ConstSpan)> eval_hess_vec;
  double f_low = 0.0;
  std::optional<double> lipschitz_L;
  std::optional<FiniteSum> finite_sum;

  bool has_hessian() const noexcept { return static_cast<bool>(eval_hess_vec); }
};

struct TestProblem {
  std::string name;
  Objective objective;
  BoundBox box;
  Vector x_ini;
  std::optional<double> known_critical_value;
  /// Known constrained minimizer, when available in closed form.
  std::optional<Vector> known_minimizer;
};

/// Names accepted by make_test_problem.
const std::vector<std::string>& test_problem_names();

/// Build one of the harness problems. Seed 0 gives the canonical instance;
/// other seeds randomize data, bounds and starting point.
TestProblem make_test_problem(const std::string& name, int dim, std::uint64_t seed);

/// f(x) = 1/2 sum_i a_i x_i^2 - b^T x over `box`. L = max a_i; f_low and the
/// minimizer come from the per-coordinate clamp of b_i / a_i.
TestProblem make_separable_quadratic(Vector a, Vector b, BoundBox box, Vector x_ini);

struct SmoothnessReport {
  double max_ratio = 0.0;
  std::size_t pairs_used = 0;
  /// Set only when the objective carries lipschitz_L.
  std::optional<bool> within_lipschitz;
};

/// Largest observed ||G(x) - G(y)|| / ||x - y|| over sampled feasible pairs.
/// Zero-distance pairs are skipped.
SmoothnessReport check_smoothness(const Objective& obj, const BoundBox& box, int samples, std::uint64_t seed);

/// Uniform feasible point; infinite sides are replaced by a window of width 10.
Vector sample_feasible(const BoundBox& box, std::uint64_t seed);

}  // namespace adagb2
