#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <variant>

#include "adagb2/linalg.hpp"
#include "adagb2/problem.hpp"

namespace adagb2 {

struct NoiseModel;

namespace noise {

struct Exact {};
/// g = G + sigma z, z standard normal.
struct Gaussian {
  double sigma = 0.0;
};
/// g = G + u with u uniform in the ball of the given radius.
struct BoundedUniform {
  double radius = 0.0;
};
/// Gaussian with total variance kappa1 + kappa2 ||G||^2 spread evenly over components.
struct AffineGaussian {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};
/// inner draw + b.
struct ConstantBias {
  Vector bias;
  std::shared_ptr<const NoiseModel> inner;
};
/// inner draw + rho G.
struct RelativeBias {
  double rho = 0.0;
  std::shared_ptr<const NoiseModel> inner;
};
/// Mean of term gradients over a batch drawn without replacement.
struct Subsample {
  std::size_t batch_size = 1;
};

}  // namespace noise

struct NoiseModel {
  std::variant<noise::Exact, noise::Gaussian, noise::BoundedUniform, noise::AffineGaussian, noise::ConstantBias,
               noise::RelativeBias, noise::Subsample>
      kind;

  static NoiseModel exact() { return {noise::Exact{}}; }
  static NoiseModel gaussian(double sigma) { return {noise::Gaussian{sigma}}; }
  static NoiseModel bounded_uniform(double radius) { return {noise::BoundedUniform{radius}}; }
  static NoiseModel affine_gaussian(double k1, double k2) { return {noise::AffineGaussian{k1, k2}}; }
  static NoiseModel constant_bias(Vector b, NoiseModel inner) {
    return {noise::ConstantBias{std::move(b), std::make_shared<const NoiseModel>(std::move(inner))}};
  }
  static NoiseModel relative_bias(double rho, NoiseModel inner) {
    return {noise::RelativeBias{rho, std::make_shared<const NoiseModel>(std::move(inner))}};
  }
  static NoiseModel subsample(std::size_t batch) { return {noise::Subsample{batch}}; }

  /// Short name of the outermost kind ("gaussian", "constant_bias", ...).
  const char* name() const;
};

/// Throws ConfigError when parameters are out of range or the model does not
/// fit the objective (subsampling without a finite sum, bias of wrong size).
void validate(const NoiseModel& model, const Objective& obj, std::size_t dim);

struct OracleDraw {
  Vector g;
  Vector g_true;
  double err_norm = 0.0;
};

using Stream = std::mt19937_64;

OracleDraw draw(const Objective& obj, ConstSpan x, const NoiseModel& model, Stream& stream);

/// sqrt of the mean of ||g - G||^2 over `draws` independent draws at x.
double empirical_rmse(const Objective& obj, ConstSpan x, const NoiseModel& model, int draws, std::uint64_t seed);

}  // namespace adagb2
