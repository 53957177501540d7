#include "gdsa/superiorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "gdsa/oracles.hpp"

namespace gdsa {

// Objectives ------------------------------------------------------------------

WeightedSquaredNorm::WeightedSquaredNorm(Vector center, double weight)
    : center_(std::move(center)), weight_(weight) {
  if (center_.empty() || !center_.is_finite()) {
    throw std::invalid_argument("wsqnorm: center must be a finite nonempty vector");
  }
  if (!(weight_ > 0.0) || !std::isfinite(weight_)) {
    throw std::invalid_argument("wsqnorm: weight must be positive");
  }
}

double WeightedSquaredNorm::evaluate(const Vector& x) const {
  return weight_ * squared_distance(x, center_);
}

Vector WeightedSquaredNorm::subgradient(const Vector& x) const {
  return (2.0 * weight_) * (x - center_);
}

nlohmann::json WeightedSquaredNorm::to_json() const {
  return {{"kind", "wsqnorm"}, {"center", center_.data()}, {"weight", weight_}};
}

double L1Norm::evaluate(const Vector& x) const {
  double sum = 0.0;
  for (double v : x) sum += std::abs(v);
  return sum;
}

Vector L1Norm::subgradient(const Vector& x) const {
  Vector s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  return s;
}

nlohmann::json L1Norm::to_json() const { return {{"kind", "l1"}}; }

MaxOfAffine::MaxOfAffine(std::vector<std::pair<Vector, double>> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("max_affine: no pieces");
  for (const auto& [a, b] : pieces_) {
    require_same_dim(a, pieces_.front().first, "max_affine pieces");
    if (a.empty() || !a.is_finite() || !std::isfinite(b)) {
      throw std::invalid_argument("max_affine: pieces must be finite");
    }
  }
}

std::size_t MaxOfAffine::active_piece(const Vector& x) const {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double v = inner(pieces_[i].first, x) + pieces_[i].second;
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

double MaxOfAffine::evaluate(const Vector& x) const {
  const auto& [a, b] = pieces_[active_piece(x)];
  return inner(a, x) + b;
}

Vector MaxOfAffine::subgradient(const Vector& x) const { return pieces_[active_piece(x)].first; }

nlohmann::json MaxOfAffine::to_json() const {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& [a, b] : pieces_) pieces.push_back({{"a", a.data()}, {"b", b}});
  return {{"kind", "max_affine"}, {"pieces", pieces}};
}

ObjectivePtr objective_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind")) {
    throw std::invalid_argument("objective JSON: expected an object with 'kind'");
  }
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "l1") return std::make_shared<L1Norm>();
  if (kind == "wsqnorm") {
    return std::make_shared<WeightedSquaredNorm>(
        Vector(doc.at("center").get<std::vector<double>>()), doc.value("weight", 1.0));
  }
  if (kind == "max_affine") {
    std::vector<std::pair<Vector, double>> pieces;
    for (const auto& p : doc.at("pieces")) {
      pieces.emplace_back(Vector(p.at("a").get<std::vector<double>>()), p.value("b", 0.0));
    }
    return std::make_shared<MaxOfAffine>(std::move(pieces));
  }
  throw std::invalid_argument(fmt::format("objective JSON: unknown kind '{}'", kind));
}

// Schedule --------------------------------------------------------------------

SuperiorizationSchedule::SuperiorizationSchedule(double beta0, double ratio, std::size_t n)
    : beta0_(beta0), ratio_(ratio), n_(n) {
  if (!(beta0_ > 0.0) || !std::isfinite(beta0_)) {
    throw std::invalid_argument("superiorization beta0 must be positive");
  }
  if (!(ratio_ > 0.0 && ratio_ < 1.0)) {
    throw std::invalid_argument(fmt::format("superiorization ratio = {} outside (0, 1)", ratio_));
  }
  if (n_ == 0) throw std::invalid_argument("superiorization N must be >= 1");
}

double SuperiorizationSchedule::step_budget(std::size_t k) const {
  return beta0_ * std::pow(ratio_, static_cast<double>(k));
}

std::vector<double> SuperiorizationSchedule::betas(std::size_t k) const {
  return std::vector<double>(n_, step_budget(k) / static_cast<double>(n_));
}

double SuperiorizationSchedule::remaining_budget(std::size_t k) const {
  return step_budget(k) / (1.0 - ratio_);
}

// Directions and run ----------------------------------------------------------

std::vector<Vector> perturbation_directions(const Vector& y, const Objective& phi,
                                            std::span<const double> betas, double zero_tol) {
  std::vector<Vector> directions;
  directions.reserve(betas.size());
  Vector point = y;
  for (double beta : betas) {
    if (!std::isfinite(phi.evaluate(point))) {
      throw std::domain_error("objective is not finite at the perturbation point");
    }
    const Vector s = phi.subgradient(point);
    require_same_dim(s, point, "subgradient");
    const double s_norm = norm(s);
    Vector v = s_norm <= zero_tol ? Vector::zeros(point.size()) : (-1.0 / s_norm) * s;
    point = axpy(point, beta, v);
    directions.push_back(std::move(v));
  }
  return directions;
}

IterationTrace superiorized_run(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                                const Objective& phi, const SuperiorizationSchedule& sup,
                                const Vector& y0, const StopRule& stop, const Tolerances& tol) {
  auto source = [&](std::size_t k, const Vector& y) {
    const std::vector<double> betas = sup.betas(k);
    const std::vector<Vector> dirs = perturbation_directions(y, phi, betas, tol.subgrad_zero_tol);
    Vector total = Vector::zeros(y.size());
    for (std::size_t j = 0; j < dirs.size(); ++j) total = axpy(total, betas[j], dirs[j]);
    return total;
  };
  std::vector<double> phi_values;
  IterationTrace trace = iterate(schedule, relax, y0, source, stop, [&](const Vector& y) {
    phi_values.push_back(phi.evaluate(y));
  });
  trace.phi = std::move(phi_values);
  return trace;
}

// Strict Fejer ----------------------------------------------------------------

std::string to_string(StrictFejerReport::Outcome outcome) {
  switch (outcome) {
    case StrictFejerReport::Outcome::kLimitInCmin: return "limit in C_min";
    case StrictFejerReport::Outcome::kPass: return "strictly Fejer monotone";
    case StrictFejerReport::Outcome::kFail: return "not strictly Fejer monotone";
  }
  return "unknown";
}

namespace {

std::vector<double> decrements_from(const IterationTrace& trace, const Vector& z, std::size_t k0) {
  std::vector<double> out;
  for (std::size_t k = k0; k + 1 < trace.iterates.size(); ++k) {
    out.push_back(squared_distance(trace.iterates[k], z) -
                  squared_distance(trace.iterates[k + 1], z));
  }
  return out;
}

}  // namespace

StrictFejerReport strict_fejer_monitor(const IterationTrace& trace, const Vector& cmin_witness,
                                       std::size_t k0, double slack_tol, double limit_tol) {
  if (trace.iterates.size() < k0 + 2) {
    throw std::invalid_argument(fmt::format(
        "strict_fejer_monitor: trace of length {} is shorter than k0 + 2 = {}",
        trace.iterates.size(), k0 + 2));
  }
  StrictFejerReport report;
  report.k0 = k0;
  report.decrements = decrements_from(trace, cmin_witness, k0);
  report.min_decrement = *std::min_element(report.decrements.begin(), report.decrements.end());
  if (distance(trace.final_iterate(), cmin_witness) <= limit_tol) {
    report.outcome = StrictFejerReport::Outcome::kLimitInCmin;
  } else {
    report.outcome = report.min_decrement > slack_tol ? StrictFejerReport::Outcome::kPass
                                                      : StrictFejerReport::Outcome::kFail;
  }
  return report;
}

std::optional<std::size_t> find_strict_fejer_start(const IterationTrace& trace,
                                                   const Vector& cmin_witness, double slack_tol,
                                                   std::size_t min_tail) {
  if (trace.iterates.size() < 2) return std::nullopt;
  const std::vector<double> dec = decrements_from(trace, cmin_witness, 0);
  std::size_t k0 = dec.size();
  while (k0 > 0 && dec[k0 - 1] > slack_tol) --k0;
  if (k0 == dec.size() || dec.size() - k0 < min_tail) return std::nullopt;
  return k0;
}

DichotomyReport classify_dichotomy(const IterationTrace& trace, const Vector& cmin_point,
                                   double limit_tol, double slack_tol) {
  constexpr std::size_t kMinTail = 10;
  DichotomyReport report;
  report.limit_distance = distance(trace.final_iterate(), cmin_point);
  report.limit_in_cmin = report.limit_distance <= limit_tol;
  if (!report.limit_in_cmin) {
    // k0 <= len - 10 leaves at least 9 recorded decrements.
    report.strict_k0 = find_strict_fejer_start(trace, cmin_point, slack_tol, kMinTail - 1);
    report.strict_fejer = report.strict_k0.has_value();
  }
  report.exactly_one = report.limit_in_cmin != report.strict_fejer;
  return report;
}

// Constrained minimum oracle --------------------------------------------------

Vector constrained_min_oracle(const Operator& averaged, const Objective& phi, const GridSpec& grid,
                              double conv_tol) {
  const std::size_t dim = averaged.dim();
  if (dim > 3) throw std::invalid_argument("constrained_min_oracle: dimension must be <= 3");
  require_same_dim(grid.lo, grid.hi, "GridSpec");
  if (grid.lo.size() != dim) throw DimensionMismatch(dim, grid.lo.size(), "GridSpec");
  const std::size_t per_axis = std::max<std::size_t>(grid.points_per_axis, 2);

  auto into_c = [&](const Vector& x) -> std::optional<Vector> {
    FixedPointResult r = fixed_point_oracle(averaged, x, conv_tol, 100000);
    if (!r.converged) return std::nullopt;
    return r.point;
  };

  std::optional<Vector> best;
  double best_value = std::numeric_limits<double>::infinity();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= per_axis;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector g(dim);
    std::size_t rest = flat;
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t i = rest % per_axis;
      rest /= per_axis;
      g[d] = grid.lo[d] + (grid.hi[d] - grid.lo[d]) * static_cast<double>(i) /
                              static_cast<double>(per_axis - 1);
    }
    auto c = into_c(g);
    if (!c) continue;
    const double v = phi.evaluate(*c);
    if (v < best_value) {
      best_value = v;
      best = std::move(c);
    }
  }
  if (!best) throw std::runtime_error("constrained_min_oracle: grid does not reach C");

  double h = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    h = std::max(h, (grid.hi[d] - grid.lo[d]) / static_cast<double>(per_axis - 1));
  }
  Vector x = *best;
  while (h > conv_tol) {
    bool improved = false;
    for (std::size_t d = 0; d < dim && !improved; ++d) {
      for (double sign : {-1.0, 1.0}) {
        Vector trial = x;
        trial[d] += sign * h;
        auto c = into_c(trial);
        if (!c) continue;
        const double v = phi.evaluate(*c);
        if (v < best_value) {
          best_value = v;
          x = std::move(*c);
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return x;
}

}  // namespace gdsa
