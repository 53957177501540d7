#include "gdsa/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace gdsa {

ProblemInstance::ProblemInstance(std::vector<Operator> sets, std::vector<Vector> known_c_points)
    : sets_(std::move(sets)), known_c_points_(std::move(known_c_points)) {
  if (sets_.empty()) throw std::invalid_argument("problem needs at least one set");
  for (const Operator& s : sets_) {
    if (!s.is_primitive_projection()) {
      throw std::invalid_argument(
          fmt::format("problem sets must be primitive projections, got {}", to_string(s.kind())));
    }
    if (s.dim() != dim()) throw DimensionMismatch(dim(), s.dim(), "problem sets");
  }

  std::vector<std::pair<double, Operator>> terms;
  const double w = 1.0 / static_cast<double>(sets_.size());
  for (const Operator& s : sets_) terms.emplace_back(w, s);
  const Operator simultaneous =
      sets_.size() == 1 ? sets_.front() : Operator::combination(std::move(terms));
  const auto [lo, hi] = data_bounds(*this, 1.0);
  const FixedPointResult fp = fixed_point_oracle(simultaneous, 0.5 * (lo + hi), 1e-10, 1'000'000);
  consistent_ = fp.converged && max_set_residual(fp.point) <= Tolerances{}.eq_tol;

  // Consistent: C is the intersection. Otherwise C is Fix of the equal-weight average.
  for (std::size_t i = 0; i < known_c_points_.size(); ++i) {
    const Vector& z = known_c_points_[i];
    require_same_dim(z, Vector::zeros(dim()), "known C point");
    const double r = consistent_ ? max_set_residual(z) : residual(simultaneous, z);
    if (r > Tolerances{}.eq_tol) {
      throw std::invalid_argument(
          fmt::format("known C point {} is not certified (residual {:.3e})", i, r));
    }
  }
}

double ProblemInstance::max_set_residual(const Vector& x) const {
  double worst = 0.0;
  for (const Operator& s : sets_) worst = std::max(worst, residual(s, x));
  return worst;
}

double proximity_value(const ProblemInstance& problem, std::span<const double> weights,
                       const Vector& x) {
  if (weights.size() != problem.size()) {
    throw std::invalid_argument(fmt::format("proximity_value: {} weights for {} sets",
                                            weights.size(), problem.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("proximity_value: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > Tolerances{}.eq_tol) {
    throw std::invalid_argument(fmt::format("proximity_value: weights sum to {}", sum));
  }
  double f = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    f += weights[i] * squared_distance(problem.sets()[i].apply(x), x);
  }
  return 0.5 * f;
}

std::pair<Vector, Vector> data_bounds(const ProblemInstance& problem, double margin) {
  const std::size_t n = problem.dim();
  Vector lo(n, std::numeric_limits<double>::infinity());
  Vector hi(n, -std::numeric_limits<double>::infinity());
  auto include = [&](const Vector& p) {
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  };
  for (const Operator& s : problem.sets()) {
    if (const auto* b = s.as_ball()) {
      include(axpy(b->center, -b->radius, Vector(n, 1.0)));
      include(axpy(b->center, b->radius, Vector(n, 1.0)));
    } else if (const auto* b = s.as_box()) {
      include(b->lo);
      include(b->hi);
    } else if (const auto* h = s.as_halfspace()) {
      include((h->b / h->a_sq) * h->a);
    } else if (const auto* h = s.as_hyperplane()) {
      include((h->b / h->a_sq) * h->a);
    }
  }
  include(Vector::zeros(n));
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] -= margin;
    hi[i] += margin;
  }
  return {lo, hi};
}

Vector proximity_argmin_oracle(const ProblemInstance& problem, std::span<const double> weights,
                               const ProximityGrid& grid, double conv_tol) {
  const std::size_t n = problem.dim();
  if (n > 3) throw std::invalid_argument("proximity_argmin_oracle: dimension must be <= 3");
  auto [lo, hi] = data_bounds(problem);
  if (grid.lo) lo = *grid.lo;
  if (grid.hi) hi = *grid.hi;
  require_same_dim(lo, Vector::zeros(n), "ProximityGrid lo");
  require_same_dim(hi, Vector::zeros(n), "ProximityGrid hi");
  const std::size_t per_axis = std::max<std::size_t>(grid.points_per_axis, 2);

  auto f = [&](const Vector& x) { return proximity_value(problem, weights, x); };

  std::size_t total = 1;
  for (std::size_t d = 0; d < n; ++d) total *= per_axis;
  Vector best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector g(n);
    std::size_t rest = flat;
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t i = rest % per_axis;
      rest /= per_axis;
      g[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / static_cast<double>(per_axis - 1);
    }
    const double v = f(g);
    if (v < best_value) {
      best_value = v;
      best = std::move(g);
    }
  }

  double h = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    h = std::max(h, (hi[d] - lo[d]) / static_cast<double>(per_axis - 1));
  }
  while (h > conv_tol) {
    bool improved = false;
    for (std::size_t d = 0; d < n; ++d) {
      for (double sign : {-1.0, 1.0}) {
        Vector trial = best;
        trial[d] += sign * h;
        const double v = f(trial);
        if (v < best_value) {
          best_value = v;
          best = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

FixedPointResult fixed_point_oracle(const Operator& op, const Vector& x0, double conv_tol,
                                    std::size_t max_iters) {
  const double target = conv_tol / 100.0;
  FixedPointResult result;
  result.point = x0;
  for (;;) {
    Vector next = op.apply(result.point);
    result.residual = distance(next, result.point);
    if (result.residual <= target) {
      result.converged = true;
      return result;
    }
    if (result.iterations == max_iters) return result;
    result.point = std::move(next);
    ++result.iterations;
  }
}

namespace problems {

ProblemInstance two_intervals() {
  return ProblemInstance(
      {Operator::box(Vector{-3.0}, Vector{-1.0}), Operator::box(Vector{1.0}, Vector{3.0})},
      {Vector{0.0}});
}

ProblemInstance two_balls() {
  return ProblemInstance(
      {Operator::ball(Vector{-2.0, 1.0}, 1.0), Operator::ball(Vector{2.0, 1.0}, 1.0)},
      {Vector{0.0, 1.0}});
}

ProblemInstance overlapping_balls() {
  return ProblemInstance({Operator::ball(Vector{-0.5, 0.0}, 1.0),
                          Operator::ball(Vector{0.5, 0.0}, 1.0)},
                         {Vector{0.0, 0.0}, Vector{0.0, 0.5}});
}

ProblemInstance segment() {
  return ProblemInstance({Operator::box(Vector{-1.0, -1.0}, Vector{1.0, 1.0}),
                          Operator::box(Vector{-2.0, 0.0}, Vector{2.0, 0.0})},
                         {Vector{-1.0, 0.0}, Vector{0.0, 0.0}, Vector{1.0, 0.0}});
}

ProblemInstance halfspace_plane_ball() {
  return ProblemInstance({Operator::halfspace(Vector{1.0, 1.0, 1.0}, 1.0),
                          Operator::hyperplane(Vector{0.0, 0.0, 1.0}, 0.2),
                          Operator::ball(Vector{0.0, 0.0, 0.0}, 2.0)},
                         {Vector{0.0, 0.0, 0.2}, Vector{0.4, 0.4, 0.2}, Vector{-1.0, 0.5, 0.2}});
}

}  // namespace problems

}  // namespace gdsa
