#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "adagb2/errors.hpp"
#include "adagb2/geometry.hpp"

using namespace adagb2;

TEST_CASE("box construction validates bounds") {
  CHECK_NOTHROW(BoundBox({0.0, -kInf}, {2.0, kInf}));
  CHECK_THROWS_AS(BoundBox({1.0}, {0.0}), InputError);
  CHECK_THROWS_AS(BoundBox({0.0, 0.0}, {1.0}), InputError);
  CHECK_THROWS_AS(BoundBox({std::nan("")}, {1.0}), InputError);
  CHECK_THROWS_AS(BoundBox({kInf}, {kInf}), InputError);
  const BoundBox u = BoundBox::unbounded(3);
  CHECK(u.dim() == 3);
  CHECK(u.is_unbounded());
  CHECK_FALSE(BoundBox::uniform(2, 0.0, 1.0).is_unbounded());
}

TEST_CASE("project_box clamps component-wise") {
  CHECK(project_box(Vector{3.0}, BoundBox({0.0}, {2.0})) == Vector{2.0});
  CHECK(project_box(Vector{1.0}, BoundBox({0.0}, {2.0})) == Vector{1.0});
  CHECK(project_box(Vector{-1.0, 5.0}, BoundBox({0.0, -kInf}, {2.0, kInf})) == Vector{0.0, 5.0});
  CHECK_THROWS_AS(project_box(Vector{1.0, 2.0}, BoundBox({0.0}, {2.0})), InputError);
}

TEST_CASE("trust-box projection") {
  SUBCASE("radius binds before the bound") {
    CHECK(project_box_cap_trust(Vector{3.0}, BoundBox({0.0}, {10.0}), Vector{1.0}, Vector{0.5}) == Vector{1.5});
  }
  SUBCASE("bound binds before the radius") {
    CHECK(project_box_cap_trust(Vector{3.0}, BoundBox({0.0}, {1.2}), Vector{1.0}, Vector{0.5}) == Vector{1.2});
  }
  SUBCASE("zero radius returns the center") {
    CHECK(project_box_cap_trust(Vector{3.0, -4.0}, BoundBox::uniform(2, -5.0, 5.0), Vector{0.25, 0.5},
                                Vector{0.0, 0.0}) == Vector{0.25, 0.5});
  }
  CHECK_THROWS_AS(project_box_cap_trust(Vector{3.0}, BoundBox({0.0}, {1.0}), Vector{0.5}, Vector{-0.1}), InputError);
  CHECK_THROWS_AS(project_box_cap_trust(Vector{3.0}, BoundBox({0.0}, {1.0}), Vector{0.5, 0.0}, Vector{0.1}),
                  InputError);
}

TEST_CASE("projected steps agree with projecting the shifted point") {
  const BoundBox box({0.0, -kInf, -1.0}, {1.0, kInf, 3.0});
  const Vector x{0.25, 7.0, 3.0};
  const Vector v{-2.0, 0.5, 1.0};
  const Vector s = projected_step(x, v, box);
  CHECK(s[0] == doctest::Approx(-0.25));
  CHECK(s[1] == doctest::Approx(0.5));
  CHECK(s[2] == 0.0);

  const Vector r{0.1, 0.2, 0.3};
  const Vector t = projected_step_cap_trust(x, v, box, r);
  CHECK(t[0] == doctest::Approx(-0.1));
  CHECK(t[1] == doctest::Approx(0.2));
  CHECK(t[2] == 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(t[i]) <= r[i]);
  CHECK_THROWS_AS(projected_step_cap_trust(x, v, box, Vector{0.1, -1.0, 0.0}), InputError);
}

TEST_CASE("contains") {
  const BoundBox box({0.0, -kInf}, {1.0, 0.0});
  CHECK(box.contains(Vector{0.5, -100.0}));
  CHECK_FALSE(box.contains(Vector{1.5, -1.0}));
  CHECK_FALSE(box.contains(Vector{0.5, 1e-12}));
}
