#include "gdsa/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace gdsa {

struct Operator::Node {
  std::variant<IdentityNode, HalfspaceNode, HyperplaneNode, BallNode, BoxNode, RelaxationNode,
               CombinationNode, CompositionNode>
      body;
  std::size_t dim;
  std::optional<double> declared_alpha;
};

namespace {

constexpr double kWeightSumTol = 1e-10;

void require_dim(const Vector& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(fmt::format("{}: dimension must be >= 1", what));
  if (!v.is_finite()) throw std::invalid_argument(fmt::format("{}: non-finite entries", what));
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(fmt::format("{}: non-finite value", what));
}

}  // namespace

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kIdentity: return "identity";
    case OperatorKind::kHalfspace: return "halfspace";
    case OperatorKind::kHyperplane: return "hyperplane";
    case OperatorKind::kBall: return "ball";
    case OperatorKind::kBox: return "box";
    case OperatorKind::kRelaxation: return "relaxation";
    case OperatorKind::kCombination: return "combination";
    case OperatorKind::kComposition: return "composition";
  }
  return "unknown";
}

Operator Operator::identity(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("identity: dimension must be >= 1");
  return Operator(std::make_shared<const Node>(Node{IdentityNode{}, dim, std::nullopt}));
}

Operator Operator::halfspace(Vector a, double b) {
  require_dim(a, "halfspace");
  require_finite(b, "halfspace offset");
  const double a_sq = squared_norm(a);
  if (a_sq == 0.0) throw std::invalid_argument("halfspace: normal vector must be nonzero");
  const std::size_t dim = a.size();
  return Operator(
      std::make_shared<const Node>(Node{HalfspaceNode{std::move(a), b, a_sq}, dim, std::nullopt}));
}

Operator Operator::hyperplane(Vector a, double b) {
  require_dim(a, "hyperplane");
  require_finite(b, "hyperplane offset");
  const double a_sq = squared_norm(a);
  if (a_sq == 0.0) throw std::invalid_argument("hyperplane: normal vector must be nonzero");
  const std::size_t dim = a.size();
  return Operator(std::make_shared<const Node>(
      Node{HyperplaneNode{std::move(a), b, a_sq}, dim, std::nullopt}));
}

Operator Operator::ball(Vector center, double radius) {
  require_dim(center, "ball");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ball: radius must be positive and finite");
  }
  const std::size_t dim = center.size();
  return Operator(
      std::make_shared<const Node>(Node{BallNode{std::move(center), radius}, dim, std::nullopt}));
}

Operator Operator::box(Vector lo, Vector hi) {
  require_dim(lo, "box");
  require_dim(hi, "box");
  require_same_dim(lo, hi, "box");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw std::invalid_argument(fmt::format("box: lo[{}] = {} exceeds hi[{}] = {}", i, lo[i], i,
                                              hi[i]));
    }
  }
  const std::size_t dim = lo.size();
  return Operator(
      std::make_shared<const Node>(Node{BoxNode{std::move(lo), std::move(hi)}, dim, std::nullopt}));
}

Operator Operator::relaxation(Operator inner, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw std::invalid_argument(fmt::format("relaxation: lambda = {} outside [0, 2]", lambda));
  }
  const std::size_t dim = inner.dim();
  return Operator(std::make_shared<const Node>(
      Node{RelaxationNode{std::move(inner), lambda}, dim, std::nullopt}));
}

Operator Operator::combination(std::vector<std::pair<double, Operator>> terms) {
  if (terms.empty()) throw std::invalid_argument("combination: no terms");
  const std::size_t dim = terms.front().second.dim();
  double sum = 0.0;
  for (const auto& [w, op] : terms) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(fmt::format("combination: weight {} is not positive", w));
    }
    if (op.dim() != dim) throw DimensionMismatch(dim, op.dim(), "combination");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw std::invalid_argument(fmt::format("combination: weights sum to {}, expected 1", sum));
  }
  return Operator(
      std::make_shared<const Node>(Node{CombinationNode{std::move(terms)}, dim, std::nullopt}));
}

Operator Operator::composition(std::vector<Operator> ops) {
  if (ops.empty()) throw std::invalid_argument("composition: no operators");
  const std::size_t dim = ops.front().dim();
  for (const Operator& op : ops) {
    if (op.dim() != dim) throw DimensionMismatch(dim, op.dim(), "composition");
  }
  return Operator(
      std::make_shared<const Node>(Node{CompositionNode{std::move(ops)}, dim, std::nullopt}));
}

Operator Operator::with_declared_alpha(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument(fmt::format("declared alpha = {} outside (0, 2]", alpha));
  }
  Node copy = *node_;
  copy.declared_alpha = alpha;
  return Operator(std::make_shared<const Node>(std::move(copy)));
}

OperatorKind Operator::kind() const { return static_cast<OperatorKind>(node_->body.index()); }
std::size_t Operator::dim() const { return node_->dim; }
std::optional<double> Operator::declared_alpha() const { return node_->declared_alpha; }

bool Operator::is_primitive_projection() const {
  switch (kind()) {
    case OperatorKind::kHalfspace:
    case OperatorKind::kHyperplane:
    case OperatorKind::kBall:
    case OperatorKind::kBox: return true;
    default: return false;
  }
}

const IdentityNode* Operator::as_identity() const { return std::get_if<IdentityNode>(&node_->body); }
const HalfspaceNode* Operator::as_halfspace() const {
  return std::get_if<HalfspaceNode>(&node_->body);
}
const HyperplaneNode* Operator::as_hyperplane() const {
  return std::get_if<HyperplaneNode>(&node_->body);
}
const BallNode* Operator::as_ball() const { return std::get_if<BallNode>(&node_->body); }
const BoxNode* Operator::as_box() const { return std::get_if<BoxNode>(&node_->body); }
const RelaxationNode* Operator::as_relaxation() const {
  return std::get_if<RelaxationNode>(&node_->body);
}
const CombinationNode* Operator::as_combination() const {
  return std::get_if<CombinationNode>(&node_->body);
}
const CompositionNode* Operator::as_composition() const {
  return std::get_if<CompositionNode>(&node_->body);
}

namespace {

struct ApplyVisitor {
  const Vector& x;

  Vector operator()(const IdentityNode&) const { return x; }

  Vector operator()(const HalfspaceNode& h) const {
    const double excess = inner(h.a, x) - h.b;
    // Boundary points stay put.
    if (excess <= 0.0) return x;
    return axpy(x, -excess / h.a_sq, h.a);
  }

  Vector operator()(const HyperplaneNode& h) const {
    const double excess = inner(h.a, x) - h.b;
    if (excess == 0.0) return x;
    return axpy(x, -excess / h.a_sq, h.a);
  }

  Vector operator()(const BallNode& b) const {
    const double d = distance(x, b.center);
    if (d <= b.radius) return x;
    return axpy(b.center, b.radius / d, x - b.center);
  }

  Vector operator()(const BoxNode& b) const {
    require_same_dim(x, b.lo, "box projection");
    Vector out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], b.lo[i], b.hi[i]);
    return out;
  }

  Vector operator()(const RelaxationNode& r) const {
    if (r.lambda == 0.0) return x;
    Vector tx = r.inner.apply(x);
    if (r.lambda == 1.0) return tx;
    return axpy(x, r.lambda, tx - x);
  }

  Vector operator()(const CombinationNode& c) const {
    Vector out = Vector::zeros(x.size());
    for (const auto& [w, op] : c.terms) out += w * op.apply(x);
    return out;
  }

  Vector operator()(const CompositionNode& c) const {
    Vector out = x;
    for (const Operator& op : c.ops) out = op.apply(out);
    return out;
  }
};

}  // namespace

Vector Operator::apply(const Vector& x) const {
  if (x.size() != node_->dim) throw DimensionMismatch(node_->dim, x.size(), "Operator::apply");
  return std::visit(ApplyVisitor{x}, node_->body);
}

double residual(const Operator& op, const Vector& x) { return distance(op.apply(x), x); }

double rho_from_alpha(double alpha) { return (2.0 - alpha) / alpha; }
double alpha_from_rho(double rho) { return 2.0 / (1.0 + rho); }

std::optional<double> propagate_alpha(const Operator& op) {
  if (auto declared = op.declared_alpha()) return declared;
  switch (op.kind()) {
    case OperatorKind::kIdentity:
    case OperatorKind::kHalfspace:
    case OperatorKind::kHyperplane:
    case OperatorKind::kBall:
    case OperatorKind::kBox: return 1.0;
    case OperatorKind::kRelaxation: {
      const RelaxationNode& r = *op.as_relaxation();
      if (r.lambda == 0.0) return 1.0;
      auto inner = propagate_alpha(r.inner);
      if (!inner) return std::nullopt;
      // (S_a)_l = S_{a l} for firmly nonexpansive S; beyond 2 the class is not closed.
      const double alpha = r.lambda * *inner;
      if (alpha > 2.0) return std::nullopt;
      return alpha;
    }
    case OperatorKind::kCombination: {
      double alpha = 0.0;
      for (const auto& [w, term] : op.as_combination()->terms) {
        auto a = propagate_alpha(term);
        if (!a) return std::nullopt;
        alpha = std::max(alpha, *a);
      }
      return alpha;
    }
    case OperatorKind::kComposition: {
      const auto& ops = op.as_composition()->ops;
      double rho = std::numeric_limits<double>::infinity();
      for (const Operator& factor : ops) {
        auto a = propagate_alpha(factor);
        if (!a) return std::nullopt;
        rho = std::min(rho, rho_from_alpha(*a));
      }
      return alpha_from_rho(rho / static_cast<double>(ops.size()));
    }
  }
  return std::nullopt;
}

namespace {

Vector sample_center(const Operator& op, const SampleSpec& spec) {
  if (spec.center) {
    require_same_dim(*spec.center, Vector::zeros(op.dim()), "SampleSpec center");
    return *spec.center;
  }
  return Vector::zeros(op.dim());
}

InequalityReport finish(double worst, std::size_t n, double slack_tol) {
  return InequalityReport{worst, n, worst <= slack_tol};
}

}  // namespace

InequalityReport check_nonexpansive(const Operator& op, const SampleSpec& samples,
                                    double slack_tol) {
  Rng rng(samples.seed);
  const Vector center = sample_center(op, samples);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.count; ++i) {
    const Vector x = rng.uniform_box(center, samples.half_width);
    const Vector y = rng.uniform_box(center, samples.half_width);
    worst = std::max(worst, distance(op.apply(x), op.apply(y)) - distance(x, y));
  }
  return finish(samples.count == 0 ? 0.0 : worst, samples.count, slack_tol);
}

InequalityReport check_rho_fne(const Operator& op, double rho, const SampleSpec& samples,
                               double slack_tol) {
  if (!(rho >= 0.0)) throw std::invalid_argument("check_rho_fne: rho must be >= 0");
  Rng rng(samples.seed);
  const Vector center = sample_center(op, samples);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.count; ++i) {
    const Vector x = rng.uniform_box(center, samples.half_width);
    const Vector y = rng.uniform_box(center, samples.half_width);
    const Vector tx = op.apply(x);
    const Vector ty = op.apply(y);
    const double lhs = squared_distance(tx, ty);
    const double rhs = squared_distance(x, y) - rho * squared_distance(x - tx, y - ty);
    worst = std::max(worst, lhs - rhs);
  }
  return finish(samples.count == 0 ? 0.0 : worst, samples.count, slack_tol);
}

InequalityReport check_cutter(const Operator& op, std::span<const Vector> witnesses,
                              const SampleSpec& samples, double slack_tol) {
  if (witnesses.empty()) throw std::invalid_argument("check_cutter: empty witness set");
  Rng rng(samples.seed);
  const Vector center = sample_center(op, samples);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.count; ++i) {
    const Vector x = rng.uniform_box(center, samples.half_width);
    const Vector tx = op.apply(x);
    const Vector step = x - tx;
    for (const Vector& z : witnesses) worst = std::max(worst, inner(z - tx, step));
  }
  return finish(samples.count == 0 ? 0.0 : worst, samples.count * witnesses.size(), slack_tol);
}

FixedPointWitness::FixedPointWitness(const Operator& op, std::vector<Vector> points,
                                     double eq_tol)
    : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double r = residual(op, points_[i]);
    if (r > eq_tol) {
      throw std::invalid_argument(
          fmt::format("witness {} is not a fixed point (residual {:.3e})", i, r));
    }
  }
}

// JSON ------------------------------------------------------------------------

nlohmann::json to_json(const Operator& op) {
  using nlohmann::json;
  json doc;
  doc["kind"] = to_string(op.kind());
  switch (op.kind()) {
    case OperatorKind::kIdentity: doc["dim"] = op.dim(); break;
    case OperatorKind::kHalfspace:
      doc["a"] = op.as_halfspace()->a.data();
      doc["b"] = op.as_halfspace()->b;
      break;
    case OperatorKind::kHyperplane:
      doc["a"] = op.as_hyperplane()->a.data();
      doc["b"] = op.as_hyperplane()->b;
      break;
    case OperatorKind::kBall:
      doc["center"] = op.as_ball()->center.data();
      doc["radius"] = op.as_ball()->radius;
      break;
    case OperatorKind::kBox:
      doc["lo"] = op.as_box()->lo.data();
      doc["hi"] = op.as_box()->hi.data();
      break;
    case OperatorKind::kRelaxation:
      doc["op"] = to_json(op.as_relaxation()->inner);
      doc["lambda"] = op.as_relaxation()->lambda;
      break;
    case OperatorKind::kCombination: {
      json terms = json::array();
      for (const auto& [w, term] : op.as_combination()->terms) {
        terms.push_back({{"weight", w}, {"op", to_json(term)}});
      }
      doc["terms"] = std::move(terms);
      break;
    }
    case OperatorKind::kComposition: {
      json ops = json::array();
      for (const Operator& factor : op.as_composition()->ops) ops.push_back(to_json(factor));
      doc["ops"] = std::move(ops);
      break;
    }
  }
  if (op.declared_alpha()) doc["alpha"] = *op.declared_alpha();
  return doc;
}

namespace {

const nlohmann::json& field(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw std::invalid_argument(fmt::format("operator JSON: missing field '{}'", key));
  }
  return *it;
}

Vector vector_field(const nlohmann::json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_array()) {
    throw std::invalid_argument(fmt::format("operator JSON: '{}' must be an array", key));
  }
  return Vector(v.get<std::vector<double>>());
}

double number_field(const nlohmann::json& doc, const char* key) {
  const auto& v = field(doc, key);
  if (!v.is_number()) {
    throw std::invalid_argument(fmt::format("operator JSON: '{}' must be a number", key));
  }
  return v.get<double>();
}

}  // namespace

Operator operator_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("operator JSON: expected an object");
  const std::string kind = field(doc, "kind").get<std::string>();
  auto build = [&]() -> Operator {
    if (kind == "identity") return Operator::identity(field(doc, "dim").get<std::size_t>());
    if (kind == "halfspace") {
      return Operator::halfspace(vector_field(doc, "a"), number_field(doc, "b"));
    }
    if (kind == "hyperplane") {
      return Operator::hyperplane(vector_field(doc, "a"), number_field(doc, "b"));
    }
    if (kind == "ball") {
      return Operator::ball(vector_field(doc, "center"), number_field(doc, "radius"));
    }
    if (kind == "box") return Operator::box(vector_field(doc, "lo"), vector_field(doc, "hi"));
    if (kind == "relaxation") {
      return Operator::relaxation(operator_from_json(field(doc, "op")),
                                  number_field(doc, "lambda"));
    }
    if (kind == "combination") {
      std::vector<std::pair<double, Operator>> terms;
      for (const auto& t : field(doc, "terms")) {
        terms.emplace_back(number_field(t, "weight"), operator_from_json(field(t, "op")));
      }
      return Operator::combination(std::move(terms));
    }
    if (kind == "composition") {
      std::vector<Operator> ops;
      for (const auto& o : field(doc, "ops")) ops.push_back(operator_from_json(o));
      return Operator::composition(std::move(ops));
    }
    throw std::invalid_argument(fmt::format("operator JSON: unknown kind '{}'", kind));
  };
  Operator op = build();
  if (doc.contains("alpha")) op = op.with_declared_alpha(number_field(doc, "alpha"));
  return op;
}

}  // namespace gdsa
