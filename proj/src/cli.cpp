#include "gdsa/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "gdsa/experiment.hpp"

namespace gdsa {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string out_dir = "out";
  ConfigOverrides overrides;
  bool quiet = false;
};

class Checklist {
 public:
  explicit Checklist(std::ostream& out) : out_(out) {}

  void record(bool pass, const std::string& name, const std::string& detail) {
    out_ << (pass ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) out_ << "  " << detail;
    out_ << '\n';
    if (!pass) ++failures_;
  }
  void skip(const std::string& name, const std::string& why) {
    out_ << "SKIP " << name << "  " << why << '\n';
  }
  int failures() const { return failures_; }

 private:
  std::ostream& out_;
  int failures_ = 0;
};

double max_residual(std::span<const Operator> ops, const Vector& x) {
  double r = 0.0;
  for (const Operator& op : ops) r = std::max(r, residual(op, x));
  return r;
}

double fejer_allowance(const WitnessSet& w, const IterationTrace& trace, double slack_tol) {
  if (w.exact) return slack_tol;
  double radius = 0.0;
  for (const Vector& x : trace.iterates) {
    for (const Vector& z : w.points) radius = std::max(radius, distance(x, z));
  }
  return slack_tol + 4.0 * w.max_residual * radius;
}

std::string vector_text(const Vector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt::format("{:.10g}", v[i]);
  }
  return s + ")";
}

std::optional<Vector> computed_cmin(const ExperimentConfig& config) {
  if (config.cmin) return config.cmin;
  if (!config.superiorize || config.schedule.dim() > 3) return std::nullopt;
  const std::vector<Operator> limsup = config.schedule.limsup_operators();
  if (limsup.size() != 1) return std::nullopt;
  GridSpec grid;
  if (config.problem) {
    std::tie(grid.lo, grid.hi) = data_bounds(*config.problem);
  } else {
    grid.lo = axpy(config.x0, -5.0, Vector(config.x0.size(), 1.0));
    grid.hi = axpy(config.x0, 5.0, Vector(config.x0.size(), 1.0));
  }
  grid.points_per_axis = config.schedule.dim() <= 2 ? 41 : 11;
  return constrained_min_oracle(limsup.front(), *config.superiorize->objective, grid,
                                config.tol.conv_tol);
}

void write_outputs(const fs::path& dir, const std::string& stem, const ExperimentConfig& config,
                   const IterationTrace& trace, const std::optional<WitnessSet>& witnesses) {
  fs::create_directories(dir);
  TraceCsvOptions opts;
  opts.epsilon = config.relax.epsilon();
  opts.rho = rho_constant(config.schedule);
  if (witnesses) opts.witnesses = witnesses->points;
  if (config.superiorize) opts.superiorize = config.superiorize->schedule;

  std::optional<FejerReport> fejer;
  if (witnesses && !witnesses->points.empty()) {
    fejer = fejer_monitor(trace, witnesses->points, opts.epsilon, opts.rho,
                          fejer_allowance(*witnesses, trace, config.tol.slack_tol));
  }
  std::ofstream csv(dir / (stem + ".csv"));
  write_trace_csv(csv, trace, opts);
  std::ofstream summary(dir / (stem + ".summary.json"));
  summary << run_summary(config, trace, fejer).dump(2) << '\n';
}

// Fejer monitoring is only meaningful for the unperturbed iteration.
std::optional<WitnessSet> run_witnesses(const ExperimentConfig& config) {
  if (config.perturbation || config.superiorize) return std::nullopt;
  return collect_witnesses(config);
}

int cmd_run(const fs::path& path, const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig config = load_config(path, g.overrides);
  const IterationTrace trace = execute(config);
  const std::string stem = path.stem().string();
  write_outputs(g.out_dir, stem, config, trace, run_witnesses(config));
  if (!g.quiet) {
    out << fmt::format("{}: {} iterations, {}, final {}, residual {:.3e}\n", config.name,
                       trace.iterations(), trace.converged ? "converged" : "not converged",
                       vector_text(trace.final_iterate()),
                       max_residual(config.schedule.limsup_operators(), trace.final_iterate()));
    out << "wrote " << (fs::path(g.out_dir) / (stem + ".csv")).string() << '\n';
  }
  return 0;
}

void verify_operator(Checklist& checks, const std::string& label, const Operator& op,
                     const SampleSpec& samples, std::span<const Vector> witnesses,
                     double slack_tol) {
  const InequalityReport ne = check_nonexpansive(op, samples, slack_tol);
  checks.record(ne.pass, label + " nonexpansive", fmt::format("max violation {:.3e}", ne.max_violation));
  const std::optional<double> alpha = propagate_alpha(op);
  if (!alpha) {
    checks.skip(label + " rho-FNE", "relaxation constant unknown");
    return;
  }
  const double rho = rho_from_alpha(*alpha);
  const InequalityReport fne = check_rho_fne(op, rho, samples, slack_tol);
  checks.record(fne.pass, fmt::format("{} {:.6g}-FNE", label, rho),
                fmt::format("max violation {:.3e}", fne.max_violation));
  if (*alpha <= 1.0 && !witnesses.empty()) {
    const InequalityReport cut = check_cutter(op, witnesses, samples, slack_tol);
    checks.record(cut.pass, label + " cutter", fmt::format("max violation {:.3e}", cut.max_violation));
  }
}

int cmd_verify(const fs::path& path, const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig config = load_config(path, g.overrides);
  const double rho = rho_constant(config.schedule);
  config.relax.validate(rho);
  Checklist checks(out);
  const Tolerances& tol = config.tol;
  const auto [lo, hi] = config.relax.bounds();
  checks.record(true, "relaxation range",
                fmt::format("lambda in [{:.6g}, {:.6g}] within [{:.6g}, {:.6g}]", lo, hi,
                            config.relax.epsilon(), 1.0 + rho - config.relax.epsilon()));
  SampleSpec samples;
  samples.seed = config.seed;
  samples.center = config.x0;

  const std::vector<Operator>& ops = config.schedule.operators();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::vector<Vector> own;
    if (ops[i].is_primitive_projection()) own.push_back(ops[i].apply(config.x0));
    verify_operator(checks, fmt::format("operator {}", i + 1), ops[i], samples, own,
                    tol.slack_tol);
  }

  const WitnessSet witnesses = collect_witnesses(config);
  if (witnesses.points.empty()) {
    checks.skip("witnesses", "no common fixed point found");
  } else {
    checks.record(true, "witnesses",
                  fmt::format("{} {} point(s), max residual {:.3e}", witnesses.points.size(),
                              witnesses.exact ? "certified" : "approximate",
                              witnesses.max_residual));
  }
  const std::vector<Vector> exact_points =
      witnesses.exact ? witnesses.points : std::vector<Vector>{};
  const std::vector<Operator> distinct = config.schedule.distinct_operators();
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    verify_operator(checks, fmt::format("averaged operator {}", i + 1), distinct[i], samples,
                    exact_points, tol.slack_tol);
  }

  const AdmissibilityReport adm = check_admissibility(config.schedule);
  checks.record(adm.admissible, "admissibility",
                adm.violating_index
                    ? fmt::format("plan at step {} never recurs; the tail from k0 = {} is admissible",
                                  *adm.violating_index, adm.k0)
                    : fmt::format("{} plan(s) in the limsup set", adm.limsup_set.size()));

  const std::vector<Operator> limsup = config.schedule.limsup_operators();
  const double residual_bound = 10.0 * tol.conv_tol;
  const IterationTrace plain = execute(config, false);
  if (plain.iterations() >= 1) {
    const StepNormReport decay = step_norm_decay(plain, config.stop.conv_tol, config.stop.window);
    if (decay.pass) {
      checks.record(*decay.pass, "step norm decay",
                    fmt::format("last step {:.3e} after {} iterations", decay.last_step_norm,
                                plain.iterations()));
    } else {
      checks.skip("step norm decay", "fewer steps than the stop window");
    }
  }
  if (!witnesses.points.empty()) {
    const double allowance = fejer_allowance(witnesses, plain, tol.slack_tol);
    const FejerReport fejer =
        fejer_monitor(plain, witnesses.points, config.relax.epsilon(), rho, allowance);
    checks.record(fejer.pass, "Fejer monotonicity",
                  fmt::format("min slack {:.3e} at step {}", fejer.min_slack, fejer.worst_step));
  }
  const double plain_res = max_residual(limsup, plain.final_iterate());
  checks.record(plain_res <= residual_bound, "final residual",
                fmt::format("{:.3e} at {}", plain_res, vector_text(plain.final_iterate())));

  if (config.perturbation) {
    const IterationTrace perturbed = run(config.schedule, config.relax, config.x0,
                                         config.perturbation, config.stop);
    const double r = max_residual(limsup, perturbed.final_iterate());
    checks.record(r <= residual_bound, "perturbed residual",
                  fmt::format("{:.3e} after {} iterations", r, perturbed.iterations()));
  }

  if (config.superiorize) {
    const IterationTrace sup = execute(config);
    const double r = max_residual(limsup, sup.final_iterate());
    checks.record(r <= residual_bound, "superiorized residual",
                  fmt::format("{:.3e}, phi {:.10g}", r, sup.phi.back()));
    const std::optional<Vector> cmin = computed_cmin(config);
    if (!cmin) {
      checks.skip("superiorization dichotomy", "no C_min point available");
    } else {
      const DichotomyReport d = classify_dichotomy(sup, *cmin, 1e-6, tol.slack_tol);
      std::string detail = d.limit_in_cmin
                               ? fmt::format("limit within {:.3e} of C_min", d.limit_distance)
                               : std::string("limit outside C_min");
      if (d.strict_k0) detail += fmt::format(", strictly Fejer from k0 = {}", *d.strict_k0);
      checks.record(d.exactly_one, "superiorization dichotomy", detail);
    }
  }

  out << (checks.failures() == 0 ? "all checks passed\n"
                                  : fmt::format("{} check(s) failed\n", checks.failures()));
  return checks.failures() == 0 ? 0 : 1;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) values.push_back(item);
  return values;
}

int cmd_sweep(const fs::path& path, const std::string& param, const std::string& values_text,
              const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig base = load_config(path, g.overrides);
  const nlohmann::json::json_pointer pointer(param);
  const std::vector<std::string> values = split_values(values_text);
  if (values.empty()) throw ConfigError("--values needs at least one value");

  std::vector<ExperimentConfig> configs;
  for (const std::string& v : values) {
    nlohmann::json doc = base.document;
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(v);
    } catch (const nlohmann::json::exception&) {
      parsed = v;
    }
    doc[pointer] = parsed;
    configs.push_back(parse_config(doc));
    configs.back().name = base.name;
    // Each run needs a finite relaxation range before any thread starts.
    configs.back().relax.validate(rho_constant(configs.back().schedule));
  }

  std::vector<std::future<IterationTrace>> jobs;
  for (const ExperimentConfig& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&c] { return execute(c); }));
  }

  const std::string stem = path.stem().string();
  out << fmt::format("{:<16} {:>8} {:>10} {:>14} {:>16}\n", param, "iters", "converged",
                     "residual", "phi_final");
  int status = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    IterationTrace trace;
    try {
      trace = jobs[i].get();
    } catch (const NonFiniteIterate& e) {
      out << fmt::format("{:<16} non-finite iterate: {}\n", values[i], e.what());
      status = 1;
      continue;
    }
    const double r =
        max_residual(configs[i].schedule.limsup_operators(), trace.final_iterate());
    out << fmt::format("{:<16} {:>8} {:>10} {:>14.6e} {:>16}\n", values[i], trace.iterations(),
                       trace.converged ? "yes" : "no", r,
                       trace.phi.empty() ? std::string("-") : fmt::format("{:.10g}", trace.phi.back()));
    write_outputs(g.out_dir, fmt::format("{}.sweep-{}", stem, i), configs[i], trace,
                  run_witnesses(configs[i]));
  }
  return status;
}

int cmd_oracle(const fs::path& path, const GlobalOptions& g, std::ostream& out) {
  const ExperimentConfig config = load_config(path, g.overrides);
  nlohmann::json report;
  const WitnessSet witnesses = collect_witnesses(config);
  nlohmann::json points = nlohmann::json::array();
  for (const Vector& z : witnesses.points) {
    points.push_back({{"point", z.data()},
                      {"residual", max_residual(config.schedule.distinct_operators(), z)}});
  }
  report["c_witnesses"] = {{"exact", witnesses.exact}, {"points", points}};

  report["proximity_argmin"] = nullptr;
  if (config.problem && config.schedule.dim() <= 3) {
    const std::vector<double> w = proximity_weights(config);
    const Vector x = proximity_argmin_oracle(*config.problem, w, {}, config.tol.conv_tol);
    report["proximity_argmin"] = {{"point", x.data()},
                                  {"weights", w},
                                  {"value", proximity_value(*config.problem, w, x)},
                                  {"consistent", config.problem->consistent()}};
  }
  report["cmin"] = nullptr;
  if (const std::optional<Vector> cmin = computed_cmin(config)) {
    report["cmin"] = {{"point", cmin->data()},
                      {"phi", config.superiorize->objective->evaluate(*cmin)},
                      {"given", config.cmin.has_value()}};
  }
  out << report.dump(2) << '\n';
  return 0;
}

std::vector<char*> argv_view(std::vector<std::string>& storage) {
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  return argv;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized dynamic string-averaging projection methods"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iters;
  std::optional<double> conv_tol;
  app.add_option("--out", g.out_dir, "Directory for trace and summary files")
      ->capture_default_str();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--max-iters", max_iters, "Override the iteration cap");
  app.add_option("--tol", conv_tol, "Override the convergence tolerance");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a configured experiment");
  auto* verify_cmd = app.add_subcommand("verify", "Check operator and convergence properties");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config for several values of one field");
  auto* oracle_cmd = app.add_subcommand("oracle", "Print brute-force reference points");
  std::string param;
  std::string values;
  for (auto* cmd : {run_cmd, verify_cmd, sweep_cmd, oracle_cmd}) {
    cmd->fallthrough();
    cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
  }
  sweep_cmd->add_option("--param", param, "JSON pointer of the swept field")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

  std::vector<std::string> storage = args;
  std::vector<char*> argv = argv_view(storage);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  g.overrides = {seed, max_iters, conv_tol};

  try {
    if (*run_cmd) return cmd_run(config_path, g, out);
    if (*verify_cmd) return cmd_verify(config_path, g, out);
    if (*sweep_cmd) return cmd_sweep(config_path, param, values, g, out);
    return cmd_oracle(config_path, g, out);
  } catch (const NonFiniteIterate& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const RelaxationRangeError& e) {
    err << "relaxation out of range: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace gdsa
