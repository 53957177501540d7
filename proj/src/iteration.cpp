#include "gdsa/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/core.h>

namespace gdsa {

NonFiniteIterate::NonFiniteIterate(std::size_t step, const std::string& detail)
    : std::runtime_error(fmt::format("non-finite iterate at step {}: {}", step, detail)),
      step_(step) {}

// Relaxation ------------------------------------------------------------------

RelaxationSchedule::RelaxationSchedule(double epsilon, Rule rule)
    : epsilon_(epsilon), rule_(std::move(rule)) {
  if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) {
    throw std::invalid_argument(fmt::format("epsilon = {} outside (0, 1]", epsilon_));
  }
  if (const auto* c = std::get_if<Cyclic>(&rule_); c && c->values.empty()) {
    throw std::invalid_argument("cyclic relaxation schedule needs at least one value");
  }
  const auto [lo, hi] = bounds();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("relaxation schedule produces non-finite values");
  }
}

double RelaxationSchedule::at(std::size_t k) const {
  struct Visitor {
    std::size_t k;
    double operator()(const Constant& c) const { return c.value; }
    double operator()(const Cyclic& c) const { return c.values[k % c.values.size()]; }
    double operator()(const Formula& f) const {
      return f.base + f.scale / static_cast<double>(k + 1);
    }
  };
  return std::visit(Visitor{k}, rule_);
}

std::pair<double, double> RelaxationSchedule::bounds() const {
  struct Visitor {
    std::pair<double, double> operator()(const Constant& c) const { return {c.value, c.value}; }
    std::pair<double, double> operator()(const Cyclic& c) const {
      const auto [lo, hi] = std::minmax_element(c.values.begin(), c.values.end());
      return {*lo, *hi};
    }
    std::pair<double, double> operator()(const Formula& f) const {
      const double first = f.base + f.scale;
      return {std::min(first, f.base), std::max(first, f.base)};
    }
  };
  return std::visit(Visitor{}, rule_);
}

void RelaxationSchedule::validate(double rho) const {
  const double lower = epsilon_;
  const double upper = 1.0 + rho - epsilon_;
  const auto [lo, hi] = bounds();
  if (lo < lower || hi > upper) {
    throw RelaxationRangeError(fmt::format(
        "relaxation parameters span [{}, {}] but must lie in [eps, 1 + rho - eps] = [{}, {}] "
        "(eps = {}, rho = {})",
        lo, hi, lower, upper, epsilon_, rho));
  }
}

// Perturbation ----------------------------------------------------------------

PerturbationSchedule::PerturbationSchedule(double beta0, double ratio, Directions directions,
                                           double eq_tol)
    : beta0_(beta0), ratio_(ratio), directions_(std::move(directions)) {
  if (!(beta0_ >= 0.0) || !std::isfinite(beta0_)) {
    throw std::invalid_argument("perturbation beta0 must be >= 0");
  }
  if (!(ratio_ > 0.0 && ratio_ < 1.0)) {
    throw std::invalid_argument(fmt::format("perturbation ratio = {} outside (0, 1)", ratio_));
  }
  if (const auto* list = std::get_if<FixedList>(&directions_)) {
    if (list->directions.empty()) throw std::invalid_argument("empty perturbation direction list");
    for (const Vector& v : list->directions) {
      if (norm(v) > 1.0 + eq_tol) {
        throw std::invalid_argument(
            fmt::format("perturbation direction has norm {} > 1", norm(v)));
      }
    }
  }
}

double PerturbationSchedule::beta(std::size_t k) const {
  return beta0_ * std::pow(ratio_, static_cast<double>(k));
}

// Iteration -------------------------------------------------------------------

Vector gdsa_step(const Vector& x, const Operator& plan_op, double lambda) {
  Vector tx = plan_op.apply(x);
  if (lambda == 1.0) return tx;
  return axpy(x, lambda, tx - x);
}

IterationTrace iterate(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                       const Vector& x0, const PerturbationSource& perturb, const StopRule& stop,
                       const std::function<void(const Vector&)>& observe) {
  relax.validate(rho_constant(schedule));
  if (x0.size() != schedule.dim()) throw DimensionMismatch(schedule.dim(), x0.size(), "x0");
  if (!x0.is_finite()) throw NonFiniteIterate(0, "starting point");

  const std::size_t window = std::max<std::size_t>(stop.window, 1);
  IterationTrace trace;
  trace.iterates.push_back(x0);
  if (observe) observe(x0);

  Vector x = x0;
  std::size_t small_steps = 0;
  for (std::size_t k = 0; k < stop.max_iters; ++k) {
    const double lambda = relax.at(k);
    StepRecord record;
    record.lambda = lambda;
    record.plan_signature = schedule.plan_at(k).signature();

    Vector next;
    if (perturb) {
      record.perturbation = perturb(k, x);
      next = gdsa_step(x + record.perturbation, schedule.operator_at(k), lambda);
    } else {
      record.perturbation = Vector::zeros(x.size());
      next = gdsa_step(x, schedule.operator_at(k), lambda);
    }
    if (!next.is_finite()) throw NonFiniteIterate(k + 1, "operator produced NaN or Inf");

    record.step_norm = distance(next, x);
    small_steps = record.step_norm <= stop.conv_tol ? small_steps + 1 : 0;
    x = std::move(next);
    trace.steps.push_back(std::move(record));
    trace.iterates.push_back(x);
    if (observe) observe(x);
    if (small_steps >= window) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

IterationTrace run(const ControlSchedule& schedule, const RelaxationSchedule& relax,
                   const Vector& x0, const std::optional<PerturbationSchedule>& perturb,
                   const StopRule& stop) {
  if (!perturb) return iterate(schedule, relax, x0, {}, stop);

  const std::size_t dim = x0.size();
  PerturbationSource source;
  std::optional<std::uint64_t> seed;
  if (const auto* random = std::get_if<PerturbationSchedule::RandomUnit>(&perturb->directions())) {
    seed = random->seed;
    auto rng = std::make_shared<Rng>(random->seed);
    source = [rng, dim, sched = *perturb](std::size_t k, const Vector&) {
      return sched.beta(k) * rng->unit_vector(dim);
    };
  } else {
    const auto& list = std::get<PerturbationSchedule::FixedList>(perturb->directions());
    for (const Vector& v : list.directions) require_same_dim(v, x0, "perturbation direction");
    source = [sched = *perturb, dirs = list.directions](std::size_t k, const Vector&) {
      return sched.beta(k) * dirs[k % dirs.size()];
    };
  }
  IterationTrace trace = iterate(schedule, relax, x0, source, stop);
  trace.seed = seed;
  return trace;
}

// Monitors --------------------------------------------------------------------

FejerReport fejer_monitor(const IterationTrace& trace, std::span<const Vector> witnesses,
                          double epsilon, double rho, double slack_tol) {
  if (witnesses.empty()) throw std::invalid_argument("fejer_monitor: empty witness set");
  FejerReport report;
  report.coefficient = epsilon / (1.0 + rho - epsilon);
  report.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
    const Vector& xk = trace.iterates[k];
    const Vector& xn = trace.iterates[k + 1];
    const double step_sq = squared_distance(xn, xk);
    double step_min = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < witnesses.size(); ++w) {
      const Vector& z = witnesses[w];
      const double slack =
          squared_distance(xk, z) - report.coefficient * step_sq - squared_distance(xn, z);
      step_min = std::min(step_min, slack);
      if (slack < report.min_slack) {
        report.min_slack = slack;
        report.worst_step = k;
        report.worst_witness = w;
      }
    }
    report.step_min_slack.push_back(step_min);
  }
  if (report.step_min_slack.empty()) report.min_slack = 0.0;
  report.pass = report.min_slack >= -slack_tol;
  return report;
}

StepNormReport step_norm_decay(const IterationTrace& trace, double conv_tol, std::size_t window) {
  if (trace.iterates.size() < 2) throw std::invalid_argument("step_norm_decay: trace too short");
  StepNormReport report;
  report.last_step_norm = trace.steps.back().step_norm;
  if (window == 0 || trace.steps.size() < window) return report;
  report.pass = std::all_of(trace.steps.end() - static_cast<std::ptrdiff_t>(window),
                            trace.steps.end(),
                            [conv_tol](const StepRecord& s) { return s.step_norm <= conv_tol; });
  return report;
}

DistanceDecayReport distance_decay_diagnostic(
    const IterationTrace& trace, std::span<const Operator> projectors,
    const std::function<double(const Vector&)>& oracle_distance, std::size_t tail) {
  DistanceDecayReport report;
  const std::size_t cols = projectors.size();
  for (const Vector& x : trace.iterates) {
    std::vector<double> row;
    row.reserve(cols);
    for (const Operator& p : projectors) row.push_back(residual(p, x));
    report.residuals.push_back(std::move(row));
    if (oracle_distance) report.oracle_distance.push_back(oracle_distance(x));
  }
  const std::size_t n = report.residuals.size();
  const std::size_t start = n > tail ? n - tail : 0;
  report.tail_max.assign(cols, 0.0);
  report.monotone_fraction.assign(cols, 1.0);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t k = start; k < n; ++k) {
      report.tail_max[j] = std::max(report.tail_max[j], report.residuals[k][j]);
    }
    if (n >= 2) {
      std::size_t nonincreasing = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        if (report.residuals[k + 1][j] <= report.residuals[k][j]) ++nonincreasing;
      }
      report.monotone_fraction[j] = static_cast<double>(nonincreasing) / static_cast<double>(n - 1);
    }
  }
  return report;
}

}  // namespace gdsa
