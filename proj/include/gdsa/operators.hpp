// Operator expressions: closed-form metric projections and the relaxation,
// convex-combination and composition closures built on top of them, together
// with sampling verifiers for the nonexpansive / rho-firmly-nonexpansive /
// cutter inequalities.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gdsa/core.hpp"

namespace gdsa {

class Operator;

struct IdentityNode {};
/// {u : <a, u> <= b}
struct HalfspaceNode {
  Vector a;
  double b;
  double a_sq;
};
/// {u : <a, u> = b}
struct HyperplaneNode {
  Vector a;
  double b;
  double a_sq;
};
struct BallNode {
  Vector center;
  double radius;
};
struct BoxNode {
  Vector lo;
  Vector hi;
};
struct RelaxationNode;
struct CombinationNode;
struct CompositionNode;

enum class OperatorKind {
  kIdentity,
  kHalfspace,
  kHyperplane,
  kBall,
  kBox,
  kRelaxation,
  kCombination,
  kComposition,
};

std::string to_string(OperatorKind kind);

/// Immutable operator expression. Copies share the underlying tree.
class Operator {
 public:
  static Operator identity(std::size_t dim);
  static Operator halfspace(Vector a, double b);
  static Operator hyperplane(Vector a, double b);
  static Operator ball(Vector center, double radius);
  static Operator box(Vector lo, Vector hi);
  /// (1 - lambda) Id + lambda inner, lambda in [0, 2].
  static Operator relaxation(Operator inner, double lambda);
  /// sum_i weight_i op_i; weights strictly positive and summing to one.
  static Operator combination(std::vector<std::pair<double, Operator>> terms);
  /// ops.back() o ... o ops[1] o ops[0]: the first listed operator is applied first.
  static Operator composition(std::vector<Operator> ops);

  /// Copy of this expression carrying an explicit alpha for which it is claimed
  /// to be alpha-relaxed firmly nonexpansive.
  Operator with_declared_alpha(double alpha) const;

  OperatorKind kind() const;
  std::size_t dim() const;
  std::optional<double> declared_alpha() const;
  bool is_primitive_projection() const;

  Vector apply(const Vector& x) const;

  const IdentityNode* as_identity() const;
  const HalfspaceNode* as_halfspace() const;
  const HyperplaneNode* as_hyperplane() const;
  const BallNode* as_ball() const;
  const BoxNode* as_box() const;
  const RelaxationNode* as_relaxation() const;
  const CombinationNode* as_combination() const;
  const CompositionNode* as_composition() const;

  struct Node;

 private:
  explicit Operator(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct RelaxationNode {
  Operator inner;
  double lambda;
};
struct CombinationNode {
  std::vector<std::pair<double, Operator>> terms;
};
struct CompositionNode {
  std::vector<Operator> ops;
};

/// ||op(x) - x||
double residual(const Operator& op, const Vector& x);

/// Best alpha in (0, 2] for which op is alpha-relaxed firmly nonexpansive,
/// derived from the tree shape; nullopt when the relaxation calculus does not
/// cover the shape and no alpha was declared.
std::optional<double> propagate_alpha(const Operator& op);

/// rho for which an alpha-relaxed FNE operator is rho-FNE: (2 - alpha) / alpha.
double rho_from_alpha(double alpha);
/// Inverse of rho_from_alpha: a rho-FNE operator is 2/(1+rho)-relaxed FNE.
double alpha_from_rho(double rho);

/// Where the verifiers draw their points: uniform in center + [-half_width, half_width]^n.
struct SampleSpec {
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  double half_width = 5.0;
  std::optional<Vector> center;
};

struct InequalityReport {
  double max_violation = 0.0;
  std::size_t evaluations = 0;
  bool pass = true;
};

/// max over sampled pairs of ||Tx - Ty|| - ||x - y||.
InequalityReport check_nonexpansive(const Operator& op, const SampleSpec& samples,
                                    double slack_tol = Tolerances{}.slack_tol);
/// max over sampled pairs of ||Tx - Ty||^2 - ||x - y||^2 + rho ||(x - Tx) - (y - Ty)||^2.
InequalityReport check_rho_fne(const Operator& op, double rho, const SampleSpec& samples,
                               double slack_tol = Tolerances{}.slack_tol);
/// max over sampled x and witnesses z of <z - Tx, x - Tx>.
InequalityReport check_cutter(const Operator& op, std::span<const Vector> witnesses,
                              const SampleSpec& samples,
                              double slack_tol = Tolerances{}.slack_tol);

/// Points certified as fixed points of an operator.
class FixedPointWitness {
 public:
  /// Throws std::invalid_argument if some point moves by more than eq_tol.
  FixedPointWitness(const Operator& op, std::vector<Vector> points,
                    double eq_tol = Tolerances{}.eq_tol);
  std::span<const Vector> points() const noexcept { return points_; }

 private:
  std::vector<Vector> points_;
};

nlohmann::json to_json(const Operator& op);
/// Throws std::invalid_argument on malformed documents.
Operator operator_from_json(const nlohmann::json& doc);

}  // namespace gdsa
