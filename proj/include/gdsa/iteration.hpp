// The GDSA fixed-point iteration x^{k+1} = x^k + lambda_k (T_k(x^k) - x^k), its
// bounded-perturbation form, and the monitors that check its guarantees along a
// recorded trace.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gdsa/core.hpp"
#include "gdsa/operators.hpp"
#include "gdsa/strings.hpp"

namespace gdsa {

/// Raised before iterating when some lambda_k leaves [eps, 1 + rho - eps].
class RelaxationRangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterate stops being finite.
class NonFiniteIterate : public std::runtime_error {
 public:
  NonFiniteIterate(std::size_t step, const std::string& detail);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class RelaxationSchedule {
 public:
  struct Constant {
    double value;
  };
  struct Cyclic {
    std::vector<double> values;
  };
  /// lambda_k = base + scale / (k + 1)
  struct Formula {
    double base;
    double scale;
  };
  using Rule = std::variant<Constant, Cyclic, Formula>;

  static constexpr double kDefaultEpsilon = 0.05;

  RelaxationSchedule(double epsilon, Rule rule);
  static RelaxationSchedule constant(double lambda, double epsilon = kDefaultEpsilon) {
    return RelaxationSchedule(epsilon, Constant{lambda});
  }

  double epsilon() const noexcept { return epsilon_; }
  const Rule& rule() const noexcept { return rule_; }
  double at(std::size_t k) const;

  /// Smallest and largest value the rule can produce (limits included for Formula).
  std::pair<double, double> bounds() const;
  /// Throws RelaxationRangeError unless every lambda_k lies in [eps, 1 + rho - eps].
  void validate(double rho) const;

 private:
  double epsilon_;
  Rule rule_;
};

/// beta_k v^k with beta_k = beta0 r^k and v^k either seeded random unit vectors or a
/// fixed list cycled in order.
class PerturbationSchedule {
 public:
  struct RandomUnit {
    std::uint64_t seed;
  };
  struct FixedList {
    std::vector<Vector> directions;
  };
  using Directions = std::variant<RandomUnit, FixedList>;

  PerturbationSchedule(double beta0, double ratio, Directions directions,
                       double eq_tol = Tolerances{}.eq_tol);

  double beta0() const noexcept { return beta0_; }
  double ratio() const noexcept { return ratio_; }
  const Directions& directions() const noexcept { return directions_; }
  double beta(std::size_t k) const;
  /// sum_k beta_k = beta0 / (1 - r)
  double total() const noexcept { return beta0_ / (1.0 - ratio_); }

 private:
  double beta0_;
  double ratio_;
  Directions directions_;
};

struct StopRule {
  double conv_tol = 1e-8;
  /// Converged once this many consecutive steps have norm <= conv_tol.
  std::size_t window = 10;
  std::size_t max_iters = 100000;
};

struct StepRecord {
  double lambda = 0.0;
  double step_norm = 0.0;
  std::string plan_signature;
  /// Perturbation added before the operator (zero vector when unperturbed).
  Vector perturbation;
};

struct IterationTrace {
  /// x^0 .. x^K
  std::vector<Vector> iterates;
  /// steps[k] describes the move x^k -> x^{k+1}.
  std::vector<StepRecord> steps;
  /// phi(x^k) per iterate; empty for plain runs.
  std::vector<double> phi;
  bool converged = false;
  std::optional<std::uint64_t> seed;

  std::size_t iterations() const noexcept { return steps.size(); }
  const Vector& final_iterate() const { return iterates.back(); }
};

/// x + lambda (T(x) - x); exactly T(x) when lambda == 1.
Vector gdsa_step(const Vector& x, const Operator& plan_op, double lambda);

/// Produces the aggregate perturbation added to x^k before step k.
using PerturbationSource = std::function<Vector(std::size_t k, const Vector& x)>;

/// Core loop shared by the plain, perturbed and superiorized runs. Validates the
/// relaxation range first; `observe` (optional) is called with each new iterate.
IterationTrace iterate(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                       const Vector& x0, const PerturbationSource& perturb, const StopRule& stop,
                       const std::function<void(const Vector&)>& observe = {});

IterationTrace run(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                   const Vector& x0, const std::optional<PerturbationSchedule>& perturb = {},
                   const StopRule& stop = {});

struct FejerReport {
  double coefficient = 0.0;
  double min_slack = 0.0;
  std::size_t worst_step = 0;
  std::size_t worst_witness = 0;
  /// Minimum slack over witnesses, per step.
  std::vector<double> step_min_slack;
  bool pass = true;
};

/// slack = ||x^k - z||^2 - eps/(1 + rho - eps) ||x^{k+1} - x^k||^2 - ||x^{k+1} - z||^2
FejerReport fejer_monitor(const IterationTrace& trace, std::span<const Vector> witnesses,
                          double epsilon, double rho, double slack_tol = Tolerances{}.slack_tol);

struct StepNormReport {
  double last_step_norm = 0.0;
  /// Empty when the trace is too short to judge, or the run did not claim convergence.
  std::optional<bool> pass;
};

StepNormReport step_norm_decay(const IterationTrace& trace, double conv_tol = StopRule{}.conv_tol,
                               std::size_t window = StopRule{}.window);

struct DistanceDecayReport {
  /// residuals[k][j] = ||P_j(x^k) - x^k||
  std::vector<std::vector<double>> residuals;
  /// Oracle distance d(x^k, C) per iterate, when an oracle was supplied.
  std::vector<double> oracle_distance;
  /// Largest residual per column over the last `tail` iterates.
  std::vector<double> tail_max;
  /// Fraction of steps where each column did not increase.
  std::vector<double> monotone_fraction;
};

DistanceDecayReport distance_decay_diagnostic(
    const IterationTrace& trace, std::span<const Operator> projectors,
    const std::function<double(const Vector&)>& oracle_distance = {}, std::size_t tail = 10);

}  // namespace gdsa
