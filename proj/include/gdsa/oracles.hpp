// Convex feasibility problem instances, the proximity function of the
// simultaneous projection method, and brute-force oracles used to certify
// fixed-point witnesses independently of the GDSA iteration.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdsa/core.hpp"
#include "gdsa/operators.hpp"
#include "gdsa/strings.hpp"

namespace gdsa {

/// Closed convex sets C_1..C_m, each given by its metric projection.
class ProblemInstance {
 public:
  /// `sets` must be primitive projections of a common dimension. Known C points must lie
  /// in every set (consistent case) or be fixed by the equal-weight simultaneous projection.
  explicit ProblemInstance(std::vector<Operator> sets, std::vector<Vector> known_c_points = {});

  std::size_t dim() const { return sets_.front().dim(); }
  std::size_t size() const noexcept { return sets_.size(); }
  const std::vector<Operator>& sets() const noexcept { return sets_; }
  const std::vector<Vector>& known_c_points() const noexcept { return known_c_points_; }
  /// Nonempty intersection, decided by Picard iteration of the equal-weight simultaneous
  /// projection (whose fixed points are exactly the intersection when it is nonempty).
  bool consistent() const noexcept { return consistent_; }
  /// Largest set residual at x.
  double max_set_residual(const Vector& x) const;

 private:
  std::vector<Operator> sets_;
  std::vector<Vector> known_c_points_;
  bool consistent_ = false;
};

/// f(x) = 1/2 sum_i w_i ||P_i(x) - x||^2
double proximity_value(const ProblemInstance& problem, std::span<const double> weights,
                       const Vector& x);

struct ProximityGrid {
  /// Defaults to a box around the set data with a margin of 1.
  std::optional<Vector> lo;
  std::optional<Vector> hi;
  std::size_t points_per_axis = 41;
};

/// Grid search followed by a halving compass search of the proximity function, dim <= 3.
Vector proximity_argmin_oracle(const ProblemInstance& problem, std::span<const double> weights,
                               const ProximityGrid& grid = {},
                               double conv_tol = Tolerances{}.conv_tol);

struct FixedPointResult {
  Vector point;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Plain Picard iteration x <- T(x), stopping once ||T(x) - x|| <= conv_tol / 100.
FixedPointResult fixed_point_oracle(const Operator& op, const Vector& x0,
                                    double conv_tol = Tolerances{}.conv_tol,
                                    std::size_t max_iters = 10'000'000);

/// Bounding box of the set data (centers, box corners, points on planes) widened by margin.
std::pair<Vector, Vector> data_bounds(const ProblemInstance& problem, double margin = 1.0);

// Named desk-scale problems used by the tests, the acceptance suite and the examples.
namespace problems {

/// [-3, -1] and [1, 3] in R; inconsistent, proximity argmin {0}.
ProblemInstance two_intervals();
/// Unit balls around (-2, 1) and (2, 1); inconsistent, proximity argmin {(0, 1)}.
ProblemInstance two_balls();
/// Unit balls around (-0.5, 0) and (0.5, 0); consistent.
ProblemInstance overlapping_balls();
/// [-1, 1]^2 and [-2, 2] x {0}; intersection is the segment from (-1, 0) to (1, 0).
ProblemInstance segment();
/// Half-space x1 + x2 + x3 <= 1, plane x3 = 0.2 and the ball of radius 2 in R^3; consistent.
ProblemInstance halfspace_plane_ball();

}  // namespace problems

}  // namespace gdsa
