// Experiment configuration (single JSON document with optional includes),
// witness collection, and trace / summary persistence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdsa/iteration.hpp"
#include "gdsa/oracles.hpp"
#include "gdsa/strings.hpp"
#include "gdsa/superiorize.hpp"

namespace gdsa {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SuperiorizeConfig {
  ObjectivePtr objective;
  SuperiorizationSchedule schedule;
};

struct ExperimentConfig {
  /// Effective document after includes and overrides; the config hash is taken over it.
  nlohmann::json document;
  std::string name;
  ControlSchedule schedule;
  /// Present when every base operator is a primitive projection.
  std::optional<ProblemInstance> problem;
  RelaxationSchedule relax;
  Vector x0;
  std::optional<PerturbationSchedule> perturbation;
  std::optional<SuperiorizeConfig> superiorize;
  std::uint64_t seed = 0;
  StopRule stop;
  Tolerances tol;
  /// Caller-certified points of C.
  std::vector<Vector> witnesses;
  std::optional<Vector> cmin;
  std::optional<std::vector<double>> proximity_weights;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iters;
  std::optional<double> conv_tol;
};

/// Replaces "include" entries (string or list of strings, relative to base_dir) by the
/// referenced documents; keys of the including document win.
nlohmann::json resolve_includes(nlohmann::json doc, const std::filesystem::path& base_dir,
                                int depth = 0);

void apply_overrides(nlohmann::json& doc, const ConfigOverrides& overrides);

/// Throws ConfigError on malformed documents.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigOverrides& overrides = {});

/// FNV-1a over the compact dump of the document.
std::uint64_t config_hash(const nlohmann::json& doc);

/// The configured run. Without perturbation, the plain unperturbed GDSA run.
IterationTrace execute(const ExperimentConfig& config, bool with_perturbation = true);

struct WitnessSet {
  std::vector<Vector> points;
  /// True when every point came from the config or a certified problem point.
  bool exact = true;
  /// Largest residual of any point under the schedule's averaged operators.
  double max_residual = 0.0;
};

/// Points of C = common fixed points of every averaged operator in the schedule:
/// configured witnesses and known problem points first, Picard oracle points otherwise.
WitnessSet collect_witnesses(const ExperimentConfig& config);

/// Weights for the proximity function: configured, else those of a fully simultaneous
/// single-plan cycle, else equal.
std::vector<double> proximity_weights(const ExperimentConfig& config);

struct TraceCsvOptions {
  std::vector<Vector> witnesses;
  double epsilon = 0.05;
  double rho = 1.0;
  /// Adds phi_value and perturb_l1_budget_remaining columns.
  std::optional<SuperiorizationSchedule> superiorize;
};

/// Columns: k, x1..xn, step_norm, lambda, plan_signature, perturb_norm, fejer_slack_min
/// [, phi_value, perturb_l1_budget_remaining]. Doubles use 17 significant digits.
void write_trace_csv(std::ostream& out, const IterationTrace& trace, const TraceCsvOptions& opts);

/// { config_hash, seed, iters, converged, final_iterate, final_residuals, fejer_min_slack,
///   phi_final }
nlohmann::json run_summary(const ExperimentConfig& config, const IterationTrace& trace,
                           const std::optional<FejerReport>& fejer);

std::string format_double(double v);

}  // namespace gdsa
