// Superiorized GDSA: objective-reducing, summable perturbations interleaved with
// the feasibility-seeking steps, and the strict Fejer monitor for the resulting
// iterates.
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gdsa/core.hpp"
#include "gdsa/iteration.hpp"

namespace gdsa {

/// Convex continuous objective with a deterministic subgradient selection.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double evaluate(const Vector& x) const = 0;
  virtual Vector subgradient(const Vector& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// w ||x - c||^2
class WeightedSquaredNorm final : public Objective {
 public:
  WeightedSquaredNorm(Vector center, double weight);
  double evaluate(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  nlohmann::json to_json() const override;

 private:
  Vector center_;
  double weight_;
};

/// sum_i |x_i|; the selection uses 0 on zero coordinates.
class L1Norm final : public Objective {
 public:
  double evaluate(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  nlohmann::json to_json() const override;
};

/// max_i (<a_i, x> + b_i); ties go to the lowest piece index.
class MaxOfAffine final : public Objective {
 public:
  explicit MaxOfAffine(std::vector<std::pair<Vector, double>> pieces);
  double evaluate(const Vector& x) const override;
  Vector subgradient(const Vector& x) const override;
  nlohmann::json to_json() const override;
  std::size_t active_piece(const Vector& x) const;

 private:
  std::vector<std::pair<Vector, double>> pieces_;
};

/// { "kind": "l1" } | { "kind": "wsqnorm", "center": [...], "weight": w }
/// | { "kind": "max_affine", "pieces": [ { "a": [...], "b": b }, ... ] }
ObjectivePtr objective_from_json(const nlohmann::json& doc);

/// N_k = n (constant) and beta_{k,j} = beta0 r^k / n.
class SuperiorizationSchedule {
 public:
  SuperiorizationSchedule(double beta0 = 0.5, double ratio = 0.9, std::size_t n = 1);

  double beta0() const noexcept { return beta0_; }
  double ratio() const noexcept { return ratio_; }
  std::size_t n() const noexcept { return n_; }
  std::vector<double> betas(std::size_t k) const;
  /// sum_j beta_{k,j}
  double step_budget(std::size_t k) const;
  /// sum over steps >= k of the step budgets.
  double remaining_budget(std::size_t k) const;

 private:
  double beta0_;
  double ratio_;
  std::size_t n_;
};

/// v^{j+1} = -s/||s|| for a selected subgradient s at y + sum_{i<=j} beta_i v^i,
/// or 0 when ||s|| <= zero_tol.
std::vector<Vector> perturbation_directions(const Vector& y, const Objective& phi,
                                            std::span<const double> betas,
                                            double zero_tol = Tolerances{}.subgrad_zero_tol);

/// Trace of the superiorized recurrence; phi(y^k) is recorded per iterate and each
/// step's perturbation is the aggregate sum_j beta_{k,j} v^{k,j}.
IterationTrace superiorized_run(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                                const Objective& phi, const SuperiorizationSchedule& sup,
                                const Vector& y0, const StopRule& stop = {},
                                const Tolerances& tol = {});

struct StrictFejerReport {
  enum class Outcome { kLimitInCmin, kPass, kFail };
  Outcome outcome = Outcome::kFail;
  std::size_t k0 = 0;
  /// ||y^k - z||^2 - ||y^{k+1} - z||^2 for k >= k0
  std::vector<double> decrements;
  double min_decrement = 0.0;
};

std::string to_string(StrictFejerReport::Outcome outcome);

/// Strict decrease of the distance to a C_min point from step k0 on. Reports
/// kLimitInCmin when the final iterate is within limit_tol of the witness.
StrictFejerReport strict_fejer_monitor(const IterationTrace& trace, const Vector& cmin_witness,
                                       std::size_t k0, double slack_tol = Tolerances{}.slack_tol,
                                       double limit_tol = 1e-6);

/// Smallest k0 <= trace length - 2 - min_tail from which every decrement exceeds slack_tol.
std::optional<std::size_t> find_strict_fejer_start(const IterationTrace& trace,
                                                   const Vector& cmin_witness,
                                                   double slack_tol = Tolerances{}.slack_tol,
                                                   std::size_t min_tail = 8);

struct DichotomyReport {
  bool limit_in_cmin = false;
  double limit_distance = 0.0;
  std::optional<std::size_t> strict_k0;
  bool strict_fejer = false;
  /// Exactly one of the two alternatives holds.
  bool exactly_one = false;
};

/// Classifies a superiorized trace into "limit in C_min" versus "strictly Fejer
/// monotone w.r.t. C_min from some k0 <= len - 10".
DichotomyReport classify_dichotomy(const IterationTrace& trace, const Vector& cmin_point,
                                   double limit_tol = 1e-6,
                                   double slack_tol = Tolerances{}.slack_tol);

struct GridSpec {
  Vector lo;
  Vector hi;
  std::size_t points_per_axis = 41;
};

/// Grid minimizer of phi over C = Fix(averaged), dim <= 3. Grid points are mapped
/// into C by Picard iteration of `averaged`, then refined by a compass search whose
/// trial points are mapped back into C the same way.
Vector constrained_min_oracle(const Operator& averaged, const Objective& phi, const GridSpec& grid,
                              double conv_tol = Tolerances{}.conv_tol);

}  // namespace gdsa
