#include "gdsa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/core.h>

namespace gdsa {

namespace {

constexpr int kMaxIncludeDepth = 8;

Vector read_vector(const nlohmann::json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(fmt::format("'{}' must be an array of numbers", what));
  return Vector(v.get<std::vector<double>>());
}

RelaxationSchedule parse_relaxation(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("'relaxation' must be an object");
  const double eps = doc.value("epsilon", RelaxationSchedule::kDefaultEpsilon);
  const int rules = static_cast<int>(doc.contains("lambda")) +
                    static_cast<int>(doc.contains("cyclic")) +
                    static_cast<int>(doc.contains("formula"));
  if (rules > 1) throw ConfigError("'relaxation' takes one of 'lambda', 'cyclic', 'formula'");
  if (doc.contains("cyclic")) {
    return RelaxationSchedule(
        eps, RelaxationSchedule::Cyclic{doc.at("cyclic").get<std::vector<double>>()});
  }
  if (doc.contains("formula")) {
    const auto& f = doc.at("formula");
    return RelaxationSchedule(eps, RelaxationSchedule::Formula{f.at("base").get<double>(),
                                                               f.value("scale", 0.0)});
  }
  return RelaxationSchedule(eps, RelaxationSchedule::Constant{doc.value("lambda", 1.0)});
}

ExperimentConfig parse_unchecked(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("x0")) throw ConfigError("config needs a starting point 'x0'");

  ControlSchedule schedule = schedule_from_json(doc);
  std::optional<ProblemInstance> problem;
  const auto& ops = schedule.operators();
  if (std::all_of(ops.begin(), ops.end(),
                  [](const Operator& op) { return op.is_primitive_projection(); })) {
    problem.emplace(ops);
  }

  Tolerances tol;
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    tol.eq_tol = t.value("eq_tol", tol.eq_tol);
    tol.conv_tol = t.value("conv_tol", tol.conv_tol);
    tol.slack_tol = t.value("slack_tol", tol.slack_tol);
    tol.subgrad_zero_tol = t.value("subgrad_zero_tol", tol.subgrad_zero_tol);
  }
  StopRule stop;
  stop.conv_tol = tol.conv_tol;
  if (doc.contains("stop")) {
    const auto& s = doc.at("stop");
    stop.max_iters = s.value("max_iters", stop.max_iters);
    stop.conv_tol = s.value("conv_tol", stop.conv_tol);
    stop.window = s.value("window", stop.window);
  }
  tol.conv_tol = stop.conv_tol;
  tol.validate();

  const std::uint64_t seed = doc.value("seed", std::uint64_t{1});
  const Vector x0 = read_vector(doc.at("x0"), "x0");
  if (x0.size() != schedule.dim()) throw DimensionMismatch(schedule.dim(), x0.size(), "x0");

  RelaxationSchedule relax = doc.contains("relaxation") ? parse_relaxation(doc.at("relaxation"))
                                                        : RelaxationSchedule::constant(1.0);

  std::optional<PerturbationSchedule> perturbation;
  if (doc.contains("perturbation")) {
    const auto& p = doc.at("perturbation");
    PerturbationSchedule::Directions dirs = PerturbationSchedule::RandomUnit{seed};
    if (p.contains("directions")) {
      std::vector<Vector> list;
      for (const auto& d : p.at("directions")) {
        list.push_back(read_vector(d, "perturbation.directions"));
        require_same_dim(list.back(), x0, "perturbation direction");
      }
      dirs = PerturbationSchedule::FixedList{std::move(list)};
    }
    perturbation.emplace(p.value("beta0", 0.5), p.value("ratio", 0.9), std::move(dirs),
                         tol.eq_tol);
  }

  std::optional<SuperiorizeConfig> superiorize;
  if (doc.contains("superiorize")) {
    const auto& s = doc.at("superiorize");
    if (!s.contains("objective")) throw ConfigError("'superiorize' needs an 'objective'");
    ObjectivePtr objective = objective_from_json(s.at("objective"));
    const Vector probe = objective->subgradient(x0);
    require_same_dim(probe, x0, "objective");
    superiorize = SuperiorizeConfig{
        std::move(objective),
        SuperiorizationSchedule(s.value("beta0", 0.5), s.value("ratio", 0.9),
                                s.value("n", std::size_t{1}))};
  }

  std::vector<Vector> witnesses;
  if (doc.contains("witnesses")) {
    for (const auto& w : doc.at("witnesses")) {
      witnesses.push_back(read_vector(w, "witnesses"));
      require_same_dim(witnesses.back(), x0, "witness");
    }
  }
  std::optional<Vector> cmin;
  if (doc.contains("cmin")) {
    cmin = read_vector(doc.at("cmin"), "cmin");
    require_same_dim(*cmin, x0, "cmin");
  }
  std::optional<std::vector<double>> weights;
  if (doc.contains("proximity_weights")) {
    weights = doc.at("proximity_weights").get<std::vector<double>>();
    if (weights->size() != ops.size()) {
      throw ConfigError("'proximity_weights' must have one entry per operator");
    }
  }

  return ExperimentConfig{doc,
                          doc.value("name", std::string{}),
                          std::move(schedule),
                          std::move(problem),
                          std::move(relax),
                          x0,
                          std::move(perturbation),
                          std::move(superiorize),
                          seed,
                          stop,
                          tol,
                          std::move(witnesses),
                          std::move(cmin),
                          std::move(weights)};
}

}  // namespace

nlohmann::json resolve_includes(nlohmann::json doc, const std::filesystem::path& base_dir,
                                int depth) {
  if (!doc.is_object() || !doc.contains("include")) return doc;
  if (depth >= kMaxIncludeDepth) throw ConfigError("include nesting too deep");
  nlohmann::json includes = doc.at("include");
  if (includes.is_string()) includes = nlohmann::json::array({includes});
  if (!includes.is_array()) throw ConfigError("'include' must be a path or a list of paths");
  doc.erase("include");

  nlohmann::json merged = nlohmann::json::object();
  for (const auto& inc : includes) {
    const std::filesystem::path path = base_dir / inc.get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open included file {}", path.string()));
    nlohmann::json child;
    try {
      child = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    merged.update(resolve_includes(std::move(child), path.parent_path(), depth + 1));
  }
  merged.update(doc);
  return merged;
}

void apply_overrides(nlohmann::json& doc, const ConfigOverrides& overrides) {
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.max_iters) doc["stop"]["max_iters"] = *overrides.max_iters;
  if (overrides.conv_tol) doc["stop"]["conv_tol"] = *overrides.conv_tol;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  try {
    return parse_unchecked(doc);
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  doc = resolve_includes(std::move(doc), path.parent_path());
  apply_overrides(doc, overrides);
  ExperimentConfig config = parse_config(doc);
  if (config.name.empty()) config.name = path.stem().string();
  return config;
}

std::uint64_t config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

IterationTrace execute(const ExperimentConfig& config, bool with_perturbation) {
  if (with_perturbation && config.superiorize) {
    return superiorized_run(config.schedule, config.relax, *config.superiorize->objective,
                            config.superiorize->schedule, config.x0, config.stop, config.tol);
  }
  return run(config.schedule, config.relax, config.x0,
             with_perturbation ? config.perturbation : std::nullopt, config.stop);
}

WitnessSet collect_witnesses(const ExperimentConfig& config) {
  const std::vector<Operator> ops = config.schedule.distinct_operators();
  auto worst_residual = [&](const Vector& z) {
    double r = 0.0;
    for (const Operator& op : ops) r = std::max(r, residual(op, z));
    return r;
  };

  WitnessSet set;
  for (std::size_t i = 0; i < config.witnesses.size(); ++i) {
    const double r = worst_residual(config.witnesses[i]);
    if (r > config.tol.eq_tol) {
      throw ConfigError(fmt::format(
          "witness {} is not a common fixed point of the schedule (residual {:.3e})", i, r));
    }
    set.points.push_back(config.witnesses[i]);
    set.max_residual = std::max(set.max_residual, r);
  }
  if (!set.points.empty()) return set;

  const Operator chained = ops.size() == 1 ? ops.front() : Operator::composition(ops);
  const FixedPointResult fp = fixed_point_oracle(chained, config.x0, config.tol.conv_tol);
  if (fp.converged) {
    const double r = worst_residual(fp.point);
    if (r <= config.tol.conv_tol) {
      set.points.push_back(fp.point);
      set.max_residual = r;
      set.exact = false;
    }
  }
  return set;
}

std::vector<double> proximity_weights(const ExperimentConfig& config) {
  if (config.proximity_weights) return *config.proximity_weights;
  const auto m = static_cast<std::size_t>(config.schedule.m());
  const auto& cycle = config.schedule.cycle();
  if (cycle.size() == 1 && config.schedule.preamble().empty()) {
    const StringPlan& plan = cycle.front();
    if (plan.strings().size() == m && plan.max_length() == 1 && is_fit(plan, config.schedule.m())) {
      std::vector<double> w(m);
      for (std::size_t i = 0; i < m; ++i) {
        w[static_cast<std::size_t>(plan.strings()[i].indices().front() - 1)] = plan.weights()[i];
      }
      return w;
    }
  }
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_trace_csv(std::ostream& out, const IterationTrace& trace, const TraceCsvOptions& opts) {
  const std::size_t dim = trace.iterates.front().size();
  std::optional<FejerReport> fejer;
  if (!opts.witnesses.empty()) {
    fejer = fejer_monitor(trace, opts.witnesses, opts.epsilon, opts.rho);
  }
  const bool sup = opts.superiorize.has_value() && !trace.phi.empty();

  out << "k";
  for (std::size_t i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << ",step_norm,lambda,plan_signature,perturb_norm,fejer_slack_min";
  if (sup) out << ",phi_value,perturb_l1_budget_remaining";
  out << '\n';

  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    out << k;
    for (double v : trace.iterates[k]) out << ',' << format_double(v);
    if (k < trace.steps.size()) {
      const StepRecord& s = trace.steps[k];
      out << ',' << format_double(s.step_norm) << ',' << format_double(s.lambda) << ",\""
          << s.plan_signature << "\"," << format_double(norm(s.perturbation)) << ',';
      if (fejer) out << format_double(fejer->step_min_slack[k]);
    } else {
      out << ",,,,,";
    }
    if (sup) {
      out << ',' << format_double(trace.phi[k]) << ','
          << format_double(opts.superiorize->remaining_budget(k));
    }
    out << '\n';
  }
}

nlohmann::json run_summary(const ExperimentConfig& config, const IterationTrace& trace,
                           const std::optional<FejerReport>& fejer) {
  nlohmann::json averaged = nlohmann::json::array();
  for (const Operator& op : config.schedule.limsup_operators()) {
    averaged.push_back(residual(op, trace.final_iterate()));
  }
  nlohmann::json sets = nlohmann::json::array();
  for (const Operator& op : config.schedule.operators()) {
    sets.push_back(residual(op, trace.final_iterate()));
  }
  nlohmann::json summary;
  summary["config_hash"] = fmt::format("{:016x}", config_hash(config.document));
  summary["seed"] = config.seed;
  summary["iters"] = trace.iterations();
  summary["converged"] = trace.converged;
  summary["final_iterate"] = trace.final_iterate().data();
  summary["final_residuals"] = {{"averaged", averaged}, {"operators", sets}};
  summary["fejer_min_slack"] = fejer ? nlohmann::json(fejer->min_slack) : nlohmann::json(nullptr);
  summary["phi_final"] = trace.phi.empty() ? nlohmann::json(nullptr) : nlohmann::json(trace.phi.back());
  return summary;
}

}  // namespace gdsa
