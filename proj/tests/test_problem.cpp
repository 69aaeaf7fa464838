#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adagb2/analysis.hpp"
#include "adagb2/errors.hpp"
#include "adagb2/problem.hpp"

using namespace adagb2;

namespace {

double fd_directional(const Objective& o, const Vector& x, const Vector& v, double h) {
  Vector xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += h * v[i];
    xm[i] -= h * v[i];
  }
  return (o.eval_f(xp) - o.eval_f(xm)) / (2.0 * h);
}

}  // namespace

TEST_CASE("canonical boxed quadratic") {
  const TestProblem p = make_test_problem("boxed_quadratic", 2, 0);
  CHECK(*p.objective.lipschitz_L == 4.0);
  CHECK(p.box.lower() == Vector{0.0, 0.0});
  CHECK(p.box.upper() == Vector{1.0, 1.0});
  // A = diag(1, 4), b = (1, 1): minimizer (1, 1/4), f = -1/2 - 1/8.
  REQUIRE(p.known_minimizer);
  CHECK((*p.known_minimizer)[0] == doctest::Approx(1.0));
  CHECK((*p.known_minimizer)[1] == doctest::Approx(0.25));
  CHECK(p.objective.f_low == doctest::Approx(-0.625));
  CHECK(p.objective.eval_grad(Vector{0.0, 0.0}) == Vector{-1.0, -1.0});
  CHECK(p.objective.eval_hess_vec(Vector{0.0, 0.0}, Vector{1.0, 1.0}) == Vector{1.0, 4.0});
  CHECK(true_criticality(p.objective, *p.known_minimizer, p.box) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("one-dimensional interior quadratic") {
  const TestProblem p = make_separable_quadratic({1.0}, {0.0}, BoundBox({-1.0}, {1.0}), {0.5});
  CHECK((*p.known_minimizer)[0] == 0.0);
  CHECK(true_criticality(p.objective, Vector{0.0}, p.box) == 0.0);
}

TEST_CASE("rosenbrock gradient vanishes at the all-ones point") {
  const TestProblem p = make_test_problem("boxed_rosenbrock", 2, 0);
  const Vector g = p.objective.eval_grad(Vector{1.0, 1.0});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(p.box.lower() == Vector{-2.0, -2.0});
  CHECK(p.x_ini == Vector{-1.2, 1.0});
}

TEST_CASE("gradients and Hessian actions match finite differences") {
  for (const std::string& name : test_problem_names()) {
    for (std::uint64_t seed : {0u, 3u}) {
      CAPTURE(name);
      CAPTURE(seed);
      const TestProblem p = make_test_problem(name, 4, seed);
      for (std::uint64_t s = 0; s < 5; ++s) {
        const Vector x = sample_feasible(p.box, 100 + s);
        const Vector v = sample_feasible(BoundBox::uniform(4, -1.0, 1.0), 200 + s);
        const Vector g = p.objective.eval_grad(x);
        CHECK(dot(g, v) == doctest::Approx(fd_directional(p.objective, x, v, 1e-5)).epsilon(1e-6));
        if (p.objective.has_hessian()) {
          Vector xp = x, xm = x;
          for (std::size_t i = 0; i < 4; ++i) {
            xp[i] += 1e-6 * v[i];
            xm[i] -= 1e-6 * v[i];
          }
          const Vector hv = p.objective.eval_hess_vec(x, v);
          const Vector gp = p.objective.eval_grad(xp), gm = p.objective.eval_grad(xm);
          for (std::size_t i = 0; i < 4; ++i)
            CHECK(hv[i] == doctest::Approx((gp[i] - gm[i]) / 2e-6).epsilon(1e-5).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("f_low and the Lipschitz constant hold on sampled feasible points") {
  for (const std::string& name : test_problem_names()) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      CAPTURE(name);
      const TestProblem p = make_test_problem(name, 3, seed);
      for (std::uint64_t s = 0; s < 200; ++s) CHECK(p.objective.eval_f(sample_feasible(p.box, s)) >= p.objective.f_low);
      const SmoothnessReport r = check_smoothness(p.objective, p.box, 200, seed);
      CHECK(r.pairs_used > 0);
      REQUIRE(r.within_lipschitz);
      CHECK(*r.within_lipschitz);
      CHECK(project_box(p.x_ini, p.box).size() == 3);
    }
  }
}

TEST_CASE("smoothness report on simple objectives") {
  const TestProblem q = make_test_problem("boxed_quadratic", 2, 0);
  CHECK(check_smoothness(q.objective, q.box, 500, 1).max_ratio <= 4.0 + 1e-12);

  Objective linear;
  linear.eval_f = [](ConstSpan x) { return x[0] + 2.0 * x[1]; };
  linear.eval_grad = [](ConstSpan) { return Vector{1.0, 2.0}; };
  const SmoothnessReport r = check_smoothness(linear, BoundBox::uniform(2, 0.0, 1.0), 50, 1);
  CHECK(r.max_ratio == 0.0);
  CHECK_FALSE(r.within_lipschitz);

  // A degenerate box yields only zero-distance pairs, which are skipped.
  const SmoothnessReport z = check_smoothness(q.objective, BoundBox::uniform(2, 0.5, 0.5), 20, 1);
  CHECK(z.pairs_used == 0);
  CHECK(z.max_ratio == 0.0);
}

TEST_CASE("problem construction errors") {
  CHECK_THROWS_AS(make_test_problem("no_such_problem", 2, 0), InputError);
  CHECK_THROWS_AS(make_test_problem("boxed_quadratic", 0, 0), InputError);
  CHECK_THROWS_AS(make_separable_quadratic({1.0, 2.0}, {1.0}, BoundBox::unbounded(2), {0.0, 0.0}), InputError);
  CHECK_THROWS_AS(make_separable_quadratic({0.0}, {1.0}, BoundBox::unbounded(1), {0.0}), InputError);
}

TEST_CASE("seeded problems are reproducible and feasible starts are projected") {
  const TestProblem a = make_test_problem("boxed_quadratic", 5, 9);
  const TestProblem b = make_test_problem("boxed_quadratic", 5, 9);
  CHECK(a.box.lower() == b.box.lower());
  CHECK(a.x_ini == b.x_ini);
  const Vector x = sample_feasible(a.box, 4);
  CHECK(a.box.contains(x));
  CHECK(a.objective.eval_f(x) == b.objective.eval_f(x));
}

TEST_CASE("finite-sum structure is consistent with the full gradient") {
  const TestProblem p = make_test_problem("finite_sum_logistic", 3, 0);
  REQUIRE(p.objective.finite_sum);
  const FiniteSum& fs = *p.objective.finite_sum;
  const Vector x{0.1, -0.2, 0.3};
  Vector mean(3, 0.0);
  for (std::size_t j = 0; j < fs.num_terms; ++j) mean = axpy(1.0 / static_cast<double>(fs.num_terms), fs.term_grad(x, j), mean);
  const Vector g = p.objective.eval_grad(x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(mean[i] == doctest::Approx(g[i]).epsilon(1e-12));
}
