// String plans, string-averaged operators and eventually periodic control
// schedules, including the limsup-admissibility decision procedure.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdsa/operators.hpp"

namespace gdsa {

/// A string t: {1..q} -> {1..m}, stored with 1-based operator indices.
class IndexString {
 public:
  explicit IndexString(std::vector<int> indices);
  IndexString(std::initializer_list<int> indices) : IndexString(std::vector<int>(indices)) {}

  std::size_t length() const noexcept { return indices_.size(); }
  const std::vector<int>& indices() const noexcept { return indices_; }
  int max_index() const;

  friend bool operator==(const IndexString&, const IndexString&) = default;
  friend auto operator<=>(const IndexString&, const IndexString&) = default;

 private:
  std::vector<int> indices_;
};

/// One step's control data: a finite set of strings with positive weights summing to one.
class StringPlan {
 public:
  StringPlan(std::vector<IndexString> strings, std::vector<double> weights);

  /// Equal weights over the given strings.
  static StringPlan uniform(std::vector<IndexString> strings);
  /// The fully simultaneous plan: strings (1), ..., (m) with the given weights.
  static StringPlan simultaneous(std::vector<double> weights);

  const std::vector<IndexString>& strings() const noexcept { return strings_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t max_length() const;

  /// Exact structural key: strings and weights (hex-float), order-insensitive.
  const std::string& signature() const noexcept { return signature_; }

 private:
  std::vector<IndexString> strings_;
  std::vector<double> weights_;
  std::string signature_;
};

/// V[t] = U_{t(q)} ... U_{t(1)}: U_{t(1)} is applied first.
Operator string_operator(std::span<const Operator> operators, const IndexString& t);

/// sum_t w(t) V[t]. A single string of weight one yields V[t] itself.
Operator averaged_operator(const StringPlan& plan, std::span<const Operator> operators);

/// True iff the strings jointly cover every index 1..m.
bool is_fit(const StringPlan& plan, int m);

/// Preamble followed by a cycle repeated forever, over the base operators U_1..U_m.
class ControlSchedule {
 public:
  ControlSchedule(std::vector<Operator> operators, std::vector<StringPlan> preamble,
                  std::vector<StringPlan> cycle);

  const std::vector<Operator>& operators() const noexcept { return operators_; }
  const std::vector<StringPlan>& preamble() const noexcept { return preamble_; }
  const std::vector<StringPlan>& cycle() const noexcept { return cycle_; }
  int m() const noexcept { return static_cast<int>(operators_.size()); }
  std::size_t dim() const { return operators_.front().dim(); }

  /// Max string length over preamble and cycle.
  std::size_t max_string_length() const;

  const StringPlan& plan_at(std::size_t k) const;
  /// Averaged operator used at step k (built once per plan).
  const Operator& operator_at(std::size_t k) const;
  /// Every distinct averaged operator in the schedule, in first-occurrence order.
  std::vector<Operator> distinct_operators() const;
  /// Averaged operators of the cycle: the ones occurring infinitely often.
  std::vector<Operator> limsup_operators() const;

 private:
  std::vector<Operator> operators_;
  std::vector<StringPlan> preamble_;
  std::vector<StringPlan> cycle_;
  std::vector<Operator> preamble_ops_;
  std::vector<Operator> cycle_ops_;
};

/// min{ M^{-1} min_i (2 - alpha_i)/alpha_i, 1 }. Throws std::domain_error if some alpha_i
/// cannot be determined.
double rho_constant(const ControlSchedule& schedule);

struct AdmissibilityReport {
  bool admissible = false;
  /// Distinct plan signatures of the cycle, in first-occurrence order.
  std::vector<std::string> limsup_set;
  /// Valid gap bound per limsup signature for the full sequence (preamble + cycle length).
  std::map<std::string, std::size_t> gap_bound;
  /// Smallest gap per limsup signature over the full sequence; filled when the cycle
  /// has at most 64 plans.
  std::map<std::string, std::size_t> tight_gap;
  /// First step whose plan is outside the limsup set.
  std::optional<std::size_t> violating_index;
  /// The shifted sequence starting at k0 (= preamble length) is always admissible.
  bool tail_admissible = true;
  std::size_t k0 = 0;
};

AdmissibilityReport check_admissibility(const ControlSchedule& schedule);

nlohmann::json to_json(const StringPlan& plan);
StringPlan plan_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ControlSchedule& schedule);
/// Reads { "operators": [...], "preamble": [...], "cycle": [...] }.
ControlSchedule schedule_from_json(const nlohmann::json& doc);

}  // namespace gdsa
