#include <cmath>
#include <vector>

#include <doctest.h>

#include "gdsa/iteration.hpp"
#include "gdsa/oracles.hpp"

using namespace gdsa;

namespace {

const std::vector<double> kHalf{0.5, 0.5};

Operator simultaneous_operator(const ProblemInstance& p) {
  return ControlSchedule(p.sets(), {}, {StringPlan::simultaneous(kHalf)}).operator_at(0);
}

}  // namespace

TEST_CASE("proximity function values") {
  const ProblemInstance p = problems::two_intervals();
  // Distances are 1 and 1 at the origin, and 2 and 0 at x = 1.
  CHECK(proximity_value(p, kHalf, Vector{0.0}) == 0.5);
  CHECK(proximity_value(p, kHalf, Vector{1.0}) == 1.0);
  CHECK(proximity_value(problems::overlapping_balls(), kHalf, Vector{0.0, 0.0}) == 0.0);
  CHECK_THROWS(proximity_value(p, std::vector<double>{0.5, 0.6}, Vector{0.0}));
  CHECK_THROWS(proximity_value(p, std::vector<double>{1.0}, Vector{0.0}));
  CHECK_THROWS(proximity_value(p, std::vector<double>{-0.5, 1.5}, Vector{0.0}));
}

TEST_CASE("property: proximity value vanishes exactly on the intersection") {
  const ProblemInstance p = problems::overlapping_balls();
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = rng.uniform_box(Vector{0, 0}, 2.0);
    const double f = proximity_value(p, kHalf, x);
    CHECK(f >= 0.0);
    CHECK((f == 0.0) == (p.max_set_residual(x) == 0.0));
  }
}

TEST_CASE("proximity argmin oracle") {
  CHECK(std::abs(proximity_argmin_oracle(problems::two_intervals(), kHalf)[0]) <= 1e-8);
  const Vector balls = proximity_argmin_oracle(problems::two_balls(), kHalf);
  CHECK(norm(balls - Vector{0.0, 1.0}) <= 1e-7);
  const Vector lens = proximity_argmin_oracle(problems::overlapping_balls(), kHalf);
  CHECK(proximity_value(problems::overlapping_balls(), kHalf, lens) <= 1e-20);
  CHECK_THROWS(proximity_argmin_oracle(
      ProblemInstance({Operator::ball(Vector(4), 1.0)}), std::vector<double>{1.0}));
}

TEST_CASE("fixed point oracle") {
  const FixedPointResult ball =
      fixed_point_oracle(Operator::ball(Vector{0, 0}, 1), Vector{5, 0});
  CHECK(ball.converged);
  CHECK(ball.point == Vector{1, 0});
  const FixedPointResult id = fixed_point_oracle(Operator::identity(2), Vector{3, -1});
  CHECK(id.point == Vector{3, -1});
  CHECK(id.iterations == 0);
  const FixedPointResult mid =
      fixed_point_oracle(simultaneous_operator(problems::two_intervals()), Vector{7.3});
  CHECK(mid.converged);
  CHECK(std::abs(mid.point[0]) <= 1e-8);
  CHECK(residual(simultaneous_operator(problems::two_intervals()), mid.point) <= 1e-9);

  // A hard cap is reported rather than thrown.
  const FixedPointResult capped =
      fixed_point_oracle(simultaneous_operator(problems::two_balls()), Vector{30, 30}, 1e-8, 3);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 3);
}

TEST_CASE("fixed point and proximity oracles agree on the singleton problems") {
  for (const ProblemInstance& p : {problems::two_intervals(), problems::two_balls()}) {
    const Vector a = proximity_argmin_oracle(p, kHalf);
    const FixedPointResult b =
        fixed_point_oracle(simultaneous_operator(p), Vector(p.dim(), 3.0));
    REQUIRE(b.converged);
    for (std::size_t i = 0; i < p.dim(); ++i) CHECK(std::abs(a[i] - b.point[i]) <= 1e-7);
  }
}

TEST_CASE("problem instances") {
  CHECK_FALSE(problems::two_intervals().consistent());
  CHECK_FALSE(problems::two_balls().consistent());
  CHECK(problems::overlapping_balls().consistent());
  CHECK(problems::segment().consistent());
  CHECK(problems::halfspace_plane_ball().consistent());
  CHECK(problems::halfspace_plane_ball().dim() == 3);
  for (const Vector& z : problems::segment().known_c_points()) {
    CHECK(problems::segment().max_set_residual(z) == 0.0);
  }
  CHECK_THROWS(ProblemInstance({}));
  CHECK_THROWS(ProblemInstance({Operator::relaxation(Operator::ball(Vector{0}, 1), 0.5)}));
  CHECK_THROWS(ProblemInstance({Operator::ball(Vector{0}, 1), Operator::ball(Vector{0, 0}, 1)}));
  // Known points must be certified.
  CHECK_THROWS(ProblemInstance({Operator::ball(Vector{-0.5, 0}, 1), Operator::ball(Vector{0.5, 0}, 1)},
                               {Vector{1.2, 0}}));
  CHECK_THROWS(ProblemInstance({Operator::box(Vector{-3}, Vector{-1}), Operator::box(Vector{1}, Vector{3})},
                               {Vector{0.5}}));
}

TEST_CASE("data bounds cover the sets and the origin") {
  const auto [lo, hi] = data_bounds(problems::two_balls(), 1.0);
  CHECK(lo == Vector{-4.0, -1.0});
  CHECK(hi == Vector{4.0, 3.0});
}

TEST_CASE("GDSA limits minimize the proximity function over random samples") {
  for (const ProblemInstance& p : {problems::two_intervals(), problems::two_balls()}) {
    const ControlSchedule s(p.sets(), {}, {StringPlan::simultaneous(kHalf)});
    const IterationTrace t = run(s, RelaxationSchedule::constant(1.0), Vector(p.dim(), 4.0));
    const double at_limit = proximity_value(p, kHalf, t.final_iterate());
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
      const Vector x = rng.uniform_box(Vector::zeros(p.dim()), 5.0);
      CHECK(at_limit <= proximity_value(p, kHalf, x) + 1e-12);
    }
  }
}
