#include "gdsa/strings.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include <fmt/core.h>

namespace gdsa {

namespace {
constexpr double kWeightSumTol = 1e-10;
constexpr std::size_t kTightGapCycleLimit = 64;
}  // namespace

IndexString::IndexString(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw std::invalid_argument("string must have length >= 1");
  for (int i : indices_) {
    if (i < 1) throw std::invalid_argument(fmt::format("string index {} must be >= 1", i));
  }
}

int IndexString::max_index() const { return *std::max_element(indices_.begin(), indices_.end()); }

StringPlan::StringPlan(std::vector<IndexString> strings, std::vector<double> weights)
    : strings_(std::move(strings)), weights_(std::move(weights)) {
  if (strings_.empty()) throw std::invalid_argument("plan must contain at least one string");
  if (strings_.size() != weights_.size()) {
    throw std::invalid_argument(fmt::format("plan has {} strings but {} weights", strings_.size(),
                                            weights_.size()));
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0 && w <= 1.0)) {
      throw std::invalid_argument(fmt::format("plan weight {} outside (0, 1]", w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw std::invalid_argument(fmt::format("plan weights sum to {}, expected 1", sum));
  }

  std::vector<std::pair<IndexString, double>> keyed;
  keyed.reserve(strings_.size());
  for (std::size_t i = 0; i < strings_.size(); ++i) keyed.emplace_back(strings_[i], weights_[i]);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < keyed.size(); ++i) {
    if (keyed[i].first == keyed[i - 1].first) {
      throw std::invalid_argument("plan lists the same string twice");
    }
  }
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0) signature_ += '|';
    const auto& idx = keyed[i].first.indices();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j > 0) signature_ += ',';
      signature_ += std::to_string(idx[j]);
    }
    signature_ += fmt::format("@{:a}", keyed[i].second);
  }
}

StringPlan StringPlan::uniform(std::vector<IndexString> strings) {
  const double w = 1.0 / static_cast<double>(strings.size());
  std::vector<double> weights(strings.size(), w);
  return StringPlan(std::move(strings), std::move(weights));
}

StringPlan StringPlan::simultaneous(std::vector<double> weights) {
  std::vector<IndexString> strings;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    strings.push_back(IndexString{static_cast<int>(i + 1)});
  }
  return StringPlan(std::move(strings), std::move(weights));
}

std::size_t StringPlan::max_length() const {
  std::size_t q = 0;
  for (const auto& s : strings_) q = std::max(q, s.length());
  return q;
}

Operator string_operator(std::span<const Operator> operators, const IndexString& t) {
  std::vector<Operator> factors;
  factors.reserve(t.length());
  for (int i : t.indices()) {
    if (i < 1 || static_cast<std::size_t>(i) > operators.size()) {
      throw std::out_of_range(
          fmt::format("string index {} out of range 1..{}", i, operators.size()));
    }
    factors.push_back(operators[static_cast<std::size_t>(i - 1)]);
  }
  if (factors.size() == 1) return factors.front();
  return Operator::composition(std::move(factors));
}

Operator averaged_operator(const StringPlan& plan, std::span<const Operator> operators) {
  const auto& strings = plan.strings();
  if (strings.size() == 1) return string_operator(operators, strings.front());
  std::vector<std::pair<double, Operator>> terms;
  terms.reserve(strings.size());
  for (std::size_t i = 0; i < strings.size(); ++i) {
    terms.emplace_back(plan.weights()[i], string_operator(operators, strings[i]));
  }
  return Operator::combination(std::move(terms));
}

bool is_fit(const StringPlan& plan, int m) {
  std::set<int> covered;
  for (const auto& s : plan.strings()) covered.insert(s.indices().begin(), s.indices().end());
  if (static_cast<int>(covered.size()) < m) return false;
  for (int i = 1; i <= m; ++i) {
    if (!covered.count(i)) return false;
  }
  return std::all_of(covered.begin(), covered.end(), [m](int i) { return i <= m; });
}

ControlSchedule::ControlSchedule(std::vector<Operator> operators, std::vector<StringPlan> preamble,
                                 std::vector<StringPlan> cycle)
    : operators_(std::move(operators)), preamble_(std::move(preamble)), cycle_(std::move(cycle)) {
  if (operators_.empty()) throw std::invalid_argument("schedule needs at least one operator");
  if (cycle_.empty()) throw std::invalid_argument("schedule cycle must be nonempty");
  const std::size_t n = operators_.front().dim();
  for (const Operator& op : operators_) {
    if (op.dim() != n) throw DimensionMismatch(n, op.dim(), "schedule operators");
  }
  auto check_plan = [this](const StringPlan& plan) {
    for (const auto& s : plan.strings()) {
      if (s.max_index() > m()) {
        throw std::invalid_argument(
            fmt::format("plan references operator {} but only {} are defined", s.max_index(), m()));
      }
    }
  };
  for (const auto& p : preamble_) check_plan(p);
  for (const auto& p : cycle_) check_plan(p);
  for (const auto& p : preamble_) preamble_ops_.push_back(averaged_operator(p, operators_));
  for (const auto& p : cycle_) cycle_ops_.push_back(averaged_operator(p, operators_));
}

std::size_t ControlSchedule::max_string_length() const {
  std::size_t q = 0;
  for (const auto& p : preamble_) q = std::max(q, p.max_length());
  for (const auto& p : cycle_) q = std::max(q, p.max_length());
  return q;
}

const StringPlan& ControlSchedule::plan_at(std::size_t k) const {
  if (k < preamble_.size()) return preamble_[k];
  return cycle_[(k - preamble_.size()) % cycle_.size()];
}

const Operator& ControlSchedule::operator_at(std::size_t k) const {
  if (k < preamble_ops_.size()) return preamble_ops_[k];
  return cycle_ops_[(k - preamble_.size()) % cycle_.size()];
}

std::vector<Operator> ControlSchedule::distinct_operators() const {
  std::vector<Operator> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < preamble_.size() + cycle_.size(); ++k) {
    if (seen.insert(plan_at(k).signature()).second) out.push_back(operator_at(k));
  }
  return out;
}

std::vector<Operator> ControlSchedule::limsup_operators() const {
  std::vector<Operator> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cycle_.size(); ++i) {
    if (seen.insert(cycle_[i].signature()).second) out.push_back(cycle_ops_[i]);
  }
  return out;
}

double rho_constant(const ControlSchedule& schedule) {
  double min_rho = std::numeric_limits<double>::infinity();
  for (int i = 0; i < schedule.m(); ++i) {
    auto alpha = propagate_alpha(schedule.operators()[static_cast<std::size_t>(i)]);
    if (!alpha) {
      throw std::domain_error(
          fmt::format("alpha unknown for operator {}; declare it explicitly", i + 1));
    }
    min_rho = std::min(min_rho, rho_from_alpha(*alpha));
  }
  const double big_m = static_cast<double>(schedule.max_string_length());
  return std::min(min_rho / big_m, 1.0);
}

AdmissibilityReport check_admissibility(const ControlSchedule& schedule) {
  AdmissibilityReport report;
  const std::size_t pre = schedule.preamble().size();
  const std::size_t len = schedule.cycle().size();

  std::set<std::string> limsup;
  for (const auto& plan : schedule.cycle()) {
    if (limsup.insert(plan.signature()).second) report.limsup_set.push_back(plan.signature());
  }
  for (std::size_t k = 0; k < pre; ++k) {
    if (!limsup.count(schedule.preamble()[k].signature())) {
      report.violating_index = k;
      break;
    }
  }
  report.admissible = !report.violating_index.has_value();
  report.tail_admissible = true;
  report.k0 = pre;

  for (const auto& sig : report.limsup_set) report.gap_bound[sig] = pre + len;

  if (len <= kTightGapCycleLimit) {
    // Past pre + len the window pattern repeats, so those start points suffice.
    for (const auto& sig : report.limsup_set) {
      std::size_t worst = 0;
      for (std::size_t k = 0; k < pre + len; ++k) {
        std::size_t n = k;
        while (schedule.plan_at(n).signature() != sig) ++n;
        worst = std::max(worst, n - k + 1);
      }
      report.tight_gap[sig] = worst;
    }
  }
  return report;
}

nlohmann::json to_json(const StringPlan& plan) {
  nlohmann::json strings = nlohmann::json::array();
  for (const auto& s : plan.strings()) strings.push_back(s.indices());
  return {{"strings", strings}, {"weights", plan.weights()}};
}

StringPlan plan_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("strings")) {
    throw std::invalid_argument("plan JSON: expected an object with 'strings'");
  }
  std::vector<IndexString> strings;
  for (const auto& s : doc.at("strings")) strings.emplace_back(s.get<std::vector<int>>());
  if (!doc.contains("weights")) return StringPlan::uniform(std::move(strings));
  return StringPlan(std::move(strings), doc.at("weights").get<std::vector<double>>());
}

nlohmann::json to_json(const ControlSchedule& schedule) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : schedule.operators()) ops.push_back(to_json(op));
  nlohmann::json preamble = nlohmann::json::array();
  for (const auto& p : schedule.preamble()) preamble.push_back(to_json(p));
  nlohmann::json cycle = nlohmann::json::array();
  for (const auto& p : schedule.cycle()) cycle.push_back(to_json(p));
  return {{"operators", ops}, {"preamble", preamble}, {"cycle", cycle}};
}

ControlSchedule schedule_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("operators") || !doc.contains("cycle")) {
    throw std::invalid_argument("schedule JSON: 'operators' and 'cycle' are required");
  }
  std::vector<Operator> ops;
  for (const auto& o : doc.at("operators")) ops.push_back(operator_from_json(o));
  std::vector<StringPlan> preamble;
  if (doc.contains("preamble")) {
    for (const auto& p : doc.at("preamble")) preamble.push_back(plan_from_json(p));
  }
  std::vector<StringPlan> cycle;
  for (const auto& p : doc.at("cycle")) cycle.push_back(plan_from_json(p));
  return ControlSchedule(std::move(ops), std::move(preamble), std::move(cycle));
}

}  // namespace gdsa
