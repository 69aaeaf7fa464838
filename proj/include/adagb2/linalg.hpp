#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace adagb2 {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;

inline double dot(ConstSpan a, ConstSpan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(ConstSpan a) { return std::sqrt(dot(a, a)); }

inline double distance(ConstSpan a, ConstSpan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Vector axpy(double alpha, ConstSpan x, ConstSpan y) {
  Vector out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
  return out;
}

inline Vector scaled(double alpha, ConstSpan x) {
  Vector out(x.begin(), x.end());
  for (double& v : out) v *= alpha;
  return out;
}

inline Vector difference(ConstSpan a, ConstSpan b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline bool all_finite(ConstSpan a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace adagb2
