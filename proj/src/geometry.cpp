#include "adagb2/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adagb2/errors.hpp"

namespace adagb2 {
namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw InputError(std::string(what) + ": dimension " + std::to_string(got) + " does not match box dimension " +
                     std::to_string(want));
}

}  // namespace

BoundBox::BoundBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw InputError("BoundBox: lower and upper bounds differ in dimension");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (std::isnan(lower_[i]) || std::isnan(upper_[i])) throw InputError("BoundBox: NaN bound");
    if (!(lower_[i] <= upper_[i]))
      throw InputError("BoundBox: empty interval at component " + std::to_string(i));
    if (lower_[i] == kInf || upper_[i] == -kInf)
      throw InputError("BoundBox: empty interval at component " + std::to_string(i));
  }
}

BoundBox BoundBox::unbounded(std::size_t n) { return {Vector(n, -kInf), Vector(n, kInf)}; }

BoundBox BoundBox::uniform(std::size_t n, double lo, double hi) { return {Vector(n, lo), Vector(n, hi)}; }

bool BoundBox::contains(ConstSpan x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(lower_[i] <= x[i] && x[i] <= upper_[i])) return false;
  return true;
}

bool BoundBox::is_unbounded() const {
  return std::all_of(lower_.begin(), lower_.end(), [](double v) { return v == -kInf; }) &&
         std::all_of(upper_.begin(), upper_.end(), [](double v) { return v == kInf; });
}

Vector project_box(ConstSpan y, const BoundBox& box) {
  require_dim(y.size(), box.dim(), "project_box");
  Vector z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = std::max(box.lower(i), std::min(y[i], box.upper(i)));
  return z;
}

Vector project_box_cap_trust(ConstSpan y, const BoundBox& box, ConstSpan center, ConstSpan radii) {
  require_dim(y.size(), box.dim(), "project_box_cap_trust");
  require_dim(center.size(), box.dim(), "project_box_cap_trust (center)");
  require_dim(radii.size(), box.dim(), "project_box_cap_trust (radii)");
  Vector z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(radii[i] >= 0.0)) throw InputError("project_box_cap_trust: negative radius at component " + std::to_string(i));
    const double hi = std::min({y[i], center[i] + radii[i], box.upper(i)});
    z[i] = std::max({box.lower(i), center[i] - radii[i], hi});
  }
  return z;
}

Vector projected_step(ConstSpan x, ConstSpan v, const BoundBox& box) {
  require_dim(x.size(), box.dim(), "projected_step");
  require_dim(v.size(), box.dim(), "projected_step (step)");
  Vector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    s[i] = std::max(box.lower(i) - x[i], std::min(v[i], box.upper(i) - x[i]));
  return s;
}

Vector projected_step_cap_trust(ConstSpan x, ConstSpan v, const BoundBox& box, ConstSpan radii) {
  require_dim(x.size(), box.dim(), "projected_step_cap_trust");
  require_dim(v.size(), box.dim(), "projected_step_cap_trust (step)");
  require_dim(radii.size(), box.dim(), "projected_step_cap_trust (radii)");
  Vector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(radii[i] >= 0.0))
      throw InputError("projected_step_cap_trust: negative radius at component " + std::to_string(i));
    const double hi = std::min({v[i], radii[i], box.upper(i) - x[i]});
    s[i] = std::max({box.lower(i) - x[i], -radii[i], hi});
  }
  return s;
}

}  // namespace adagb2
