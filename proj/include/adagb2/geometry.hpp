#pragma once

#include <limits>

#include "adagb2/linalg.hpp"

namespace adagb2 {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Feasible box l <= x <= u. Infinite entries are allowed; l_i == u_i pins a
/// component.
class BoundBox {
 public:
  BoundBox() = default;
  BoundBox(Vector lower, Vector upper);

  /// All of R^n.
  static BoundBox unbounded(std::size_t n);
  /// The same interval [lo, hi] in every coordinate.
  static BoundBox uniform(std::size_t n, double lo, double hi);

  std::size_t dim() const noexcept { return lower_.size(); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  double lower(std::size_t i) const { return lower_[i]; }
  double upper(std::size_t i) const { return upper_[i]; }

  bool contains(ConstSpan x) const;
  bool is_unbounded() const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Component-wise clamp max(l_i, min(y_i, u_i)).
Vector project_box(ConstSpan y, const BoundBox& box);

/// Projection onto the box intersected with the trust box |z_i - center_i| <= radii_i:
/// max(l_i, center_i - radii_i, min(y_i, center_i + radii_i, u_i)).
Vector project_box_cap_trust(ConstSpan y, const BoundBox& box, ConstSpan center, ConstSpan radii);

/// P_F(x + v) - x evaluated in step coordinates as max(l_i - x_i, min(v_i, u_i - x_i)).
/// For x in the box this avoids the cancellation of forming x + v first.
Vector projected_step(ConstSpan x, ConstSpan v, const BoundBox& box);

/// P_{F cap T}(x + v) - x with T the trust box of half-widths `radii` around x.
/// Every component satisfies |result_i| <= radii_i exactly.
Vector projected_step_cap_trust(ConstSpan x, ConstSpan v, const BoundBox& box, ConstSpan radii);

}  // namespace adagb2
