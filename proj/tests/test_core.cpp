#include <cmath>
#include <vector>

#include <doctest.h>

#include "gdsa/core.hpp"

using namespace gdsa;

TEST_CASE("inner products of small vectors") {
  CHECK(inner(Vector{1, 0}, Vector{0, 1}) == 0.0);
  CHECK(inner(Vector{1, 2}, Vector{1, 2}) == 5.0);
  CHECK(inner(Vector{2, 3}, Vector{1, 0}) == 2.0);
  CHECK_THROWS_AS(inner(Vector{1, 2}, Vector{1}), DimensionMismatch);
}

TEST_CASE("norms") {
  CHECK(norm(Vector{3, 4}) == 5.0);
  CHECK(norm(Vector{0, 0, 0}) == 0.0);
  CHECK(norm(Vector{1}) == 1.0);
  CHECK(squared_norm(Vector{1, 2}) == 5.0);
}

TEST_CASE("distance to a point sample") {
  const std::vector<Vector> a{{1, 0}, {0, 2}};
  CHECK(dist_to_point_set(Vector{0, 0}, a) == 1.0);
  const std::vector<Vector> b{{1, 1}};
  CHECK(dist_to_point_set(Vector{1, 1}, b) == 0.0);
  const std::vector<Vector> c{{-2}, {3}};
  CHECK(dist_to_point_set(Vector{0}, c) == 2.0);
  CHECK_THROWS(dist_to_point_set(Vector{0}, std::vector<Vector>{}));
}

TEST_CASE("vector arithmetic") {
  const Vector x{1, 2};
  const Vector y{3, -1};
  CHECK(x + y == Vector{4, 1});
  CHECK(x - y == Vector{-2, 3});
  CHECK(-x == Vector{-1, -2});
  CHECK(2.0 * x == Vector{2, 4});
  CHECK(axpy(x, 2.0, y) == Vector{7, 0});
  CHECK_THROWS_AS(x + Vector{1}, DimensionMismatch);
  CHECK(Vector::zeros(3).size() == 3);
  CHECK_FALSE(Vector{1.0, NAN}.is_finite());
  CHECK(x.is_finite());
}

TEST_CASE("tolerance validation") {
  CHECK_NOTHROW(Tolerances{}.validate());
  Tolerances t;
  t.conv_tol = -1.0;
  CHECK_THROWS(t.validate());
  t = Tolerances{};
  t.eq_tol = 1e-3;
  CHECK_THROWS(t.validate());
}

TEST_CASE("property: Cauchy-Schwarz, parallelogram law and symmetric distance") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 1 + i % 4;
    const Vector x = rng.uniform_box(Vector::zeros(dim), 5.0);
    const Vector y = rng.uniform_box(Vector::zeros(dim), 5.0);
    CHECK(std::abs(inner(x, y)) <= norm(x) * norm(y) * (1 + 1e-15));
    const double lhs = squared_norm(x + y) + squared_norm(x - y);
    const double rhs = 2 * squared_norm(x) + 2 * squared_norm(y);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + rhs));
    CHECK(distance(x, y) == distance(y, x));
    CHECK(squared_distance(x, y) == squared_distance(y, x));
  }
}

TEST_CASE("seeded sampling is reproducible") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 20; ++i) {
    CHECK(a.uniform_box(Vector{1, 1}, 2.0) == b.uniform_box(Vector{1, 1}, 2.0));
  }
  Rng r(5);
  for (int i = 0; i < 200; ++i) {
    const Vector u = r.unit_vector(3);
    CHECK(std::abs(norm(u) - 1.0) <= 1e-12);
    const Vector p = r.uniform_box(Vector{1, -1}, 0.5);
    CHECK(p[0] >= 0.5);
    CHECK(p[0] <= 1.5);
    CHECK(p[1] >= -1.5);
    CHECK(p[1] <= -0.5);
  }
}
