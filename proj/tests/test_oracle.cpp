#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adagb2/errors.hpp"
#include "adagb2/oracle.hpp"
#include "adagb2/rng.hpp"
#include "adagb2/stats.hpp"

using namespace adagb2;

namespace {

const TestProblem& quadratic() {
  static const TestProblem p = make_test_problem("boxed_quadratic", 4, 0);
  return p;
}

}  // namespace

TEST_CASE("exact draws return the true gradient") {
  const Vector x{0.1, 0.2, 0.3, 0.4};
  Stream s = make_stream(1, 0, 0);
  const OracleDraw d = draw(quadratic().objective, x, NoiseModel::exact(), s);
  CHECK(d.g == quadratic().objective.eval_grad(x));
  CHECK(d.g_true == d.g);
  CHECK(d.err_norm == 0.0);
  CHECK(empirical_rmse(quadratic().objective, x, NoiseModel::exact(), 100, 3) == 0.0);
}

TEST_CASE("zero-variance gaussian equals exact") {
  const Vector x{0.5, 0.5, 0.5, 0.5};
  Stream s = make_stream(4, 2, 7);
  const OracleDraw d = draw(quadratic().objective, x, NoiseModel::gaussian(0.0), s);
  CHECK(d.g == quadratic().objective.eval_grad(x));
  CHECK(d.err_norm == 0.0);
}

TEST_CASE("draws are reproducible per stream") {
  const Vector x{0.5, 0.1, 0.2, 0.9};
  for (const NoiseModel& m : {NoiseModel::gaussian(0.3), NoiseModel::bounded_uniform(0.5),
                              NoiseModel::affine_gaussian(0.1, 0.2)}) {
    Stream a = make_stream(11, 3, 5), b = make_stream(11, 3, 5), c = make_stream(11, 3, 6);
    const Vector ga = draw(quadratic().objective, x, m, a).g;
    CHECK(ga == draw(quadratic().objective, x, m, b).g);
    CHECK(ga != draw(quadratic().objective, x, m, c).g);
  }
}

TEST_CASE("gaussian noise RMSE is sigma sqrt(n)") {
  const Vector x{0.5, 0.5, 0.5, 0.5};
  // E||sigma z||^2 = sigma^2 n, so sqrt = 0.2; the squared-error mean is checked within 3 SE.
  const int draws = 1000000;
  RunningStats sq;
  Stream s = make_engine(21, 0);
  for (int i = 0; i < draws; ++i) {
    const OracleDraw d = draw(quadratic().objective, x, NoiseModel::gaussian(0.1), s);
    sq.push(d.err_norm * d.err_norm);
  }
  CHECK(std::abs(sq.mean() - 0.04) <= 3.0 * sq.standard_error());
  CHECK(empirical_rmse(quadratic().objective, x, NoiseModel::gaussian(0.1), 200000, 5) == doctest::Approx(0.2).epsilon(5e-3));
}

TEST_CASE("affine gaussian has total variance kappa1 + kappa2 ||G||^2") {
  const Vector x{0.0, 0.0, 0.0, 0.0};  // G = -b, ||G||^2 = 4
  RunningStats sq;
  Stream s = make_engine(8, 0);
  for (int i = 0; i < 400000; ++i) {
    const double e = draw(quadratic().objective, x, NoiseModel::affine_gaussian(1.0, 0.0), s).err_norm;
    sq.push(e * e);
  }
  CHECK(std::abs(sq.mean() - 1.0) <= 3.0 * sq.standard_error());

  RunningStats sq2;
  for (int i = 0; i < 400000; ++i) {
    const double e = draw(quadratic().objective, x, NoiseModel::affine_gaussian(0.5, 0.25), s).err_norm;
    sq2.push(e * e);
  }
  CHECK(std::abs(sq2.mean() - 1.5) <= 3.0 * sq2.standard_error());
}

TEST_CASE("unbiased models have zero-mean error") {
  const Vector x{0.2, 0.4, 0.6, 0.8};
  const Vector G = quadratic().objective.eval_grad(x);
  for (const NoiseModel& m : {NoiseModel::gaussian(0.5), NoiseModel::bounded_uniform(0.5)}) {
    CAPTURE(m.name());
    std::vector<RunningStats> comp(4);
    Stream s = make_engine(31, 0);
    for (int i = 0; i < 200000; ++i) {
      const Vector g = draw(quadratic().objective, x, m, s).g;
      for (std::size_t j = 0; j < 4; ++j) comp[j].push(g[j] - G[j]);
    }
    for (const RunningStats& c : comp) CHECK(std::abs(c.mean()) <= 4.0 * c.standard_error());
  }
}

TEST_CASE("bounded uniform noise stays in the ball") {
  const Vector x{0.2, 0.4, 0.6, 0.8};
  Stream s = make_engine(2, 0);
  for (int i = 0; i < 10000; ++i)
    CHECK(draw(quadratic().objective, x, NoiseModel::bounded_uniform(0.3), s).err_norm <= 0.3 + 1e-15);
}

TEST_CASE("biased models") {
  const Vector x{0.2, 0.4, 0.6, 0.8};
  const Vector G = quadratic().objective.eval_grad(x);
  Stream s = make_engine(2, 0);
  const Vector b{0.03, 0.0, -0.04, 0.0};
  const OracleDraw d = draw(quadratic().objective, x, NoiseModel::constant_bias(b, NoiseModel::exact()), s);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.g[i] == doctest::Approx(G[i] + b[i]));
  CHECK(d.err_norm == doctest::Approx(0.05));

  const OracleDraw r = draw(quadratic().objective, x, NoiseModel::relative_bias(0.5, NoiseModel::exact()), s);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.g[i] == doctest::Approx(1.5 * G[i]));
  CHECK(r.err_norm == doctest::Approx(0.5 * norm(G)));
}

TEST_CASE("subsampling") {
  const TestProblem p = make_test_problem("finite_sum_logistic", 3, 0);
  const Vector x{0.3, -0.1, 0.2};
  const std::size_t m = p.objective.finite_sum->num_terms;
  Stream s = make_engine(5, 0);
  const OracleDraw full = draw(p.objective, x, NoiseModel::subsample(m), s);
  for (std::size_t i = 0; i < 3; ++i) CHECK(full.g[i] == doctest::Approx(full.g_true[i]).epsilon(1e-14));
  CHECK(full.err_norm <= 1e-14);

  std::vector<RunningStats> comp(3);
  for (int i = 0; i < 50000; ++i) {
    const OracleDraw d = draw(p.objective, x, NoiseModel::subsample(5), s);
    for (std::size_t j = 0; j < 3; ++j) comp[j].push(d.g[j] - d.g_true[j]);
  }
  for (const RunningStats& c : comp) CHECK(std::abs(c.mean()) <= 4.0 * c.standard_error());
}

TEST_CASE("model validation") {
  const Objective& q = quadratic().objective;
  CHECK_THROWS_AS(validate(NoiseModel::subsample(2), q, 4), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::gaussian(-1.0), q, 4), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::bounded_uniform(-1.0), q, 4), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::affine_gaussian(-1.0, 0.0), q, 4), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::constant_bias({0.1}, NoiseModel::exact()), q, 4), ConfigError);
  const TestProblem p = make_test_problem("finite_sum_logistic", 3, 0);
  CHECK_THROWS_AS(validate(NoiseModel::subsample(0), p.objective, 3), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::subsample(51), p.objective, 3), ConfigError);
  CHECK_NOTHROW(validate(NoiseModel::subsample(50), p.objective, 3));
  try {
    validate(NoiseModel::constant_bias({0.1, 0.1, 0.1, 0.1}, NoiseModel::gaussian(-2.0)), q, 4);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.path()) == "oracle.inner.sigma");
  }
}
