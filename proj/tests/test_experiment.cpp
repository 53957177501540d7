#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "gdsa/experiment.hpp"

using namespace gdsa;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = GDSA_CONFIG_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gdsa-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

const char* kMinimal = R"({
  "operators": [{"kind": "box", "lo": [-3], "hi": [-1]}, {"kind": "box", "lo": [1], "hi": [3]}],
  "cycle": [{"strings": [[1], [2]]}],
  "x0": [5.0]
})";

}  // namespace

TEST_CASE("minimal config defaults") {
  const ExperimentConfig c = parse_config(nlohmann::json::parse(kMinimal));
  CHECK(c.relax.epsilon() == 0.05);
  CHECK(c.relax.at(0) == 1.0);
  CHECK(c.stop.max_iters == 100000);
  CHECK(c.stop.conv_tol == 1e-8);
  CHECK(c.tol.eq_tol == 1e-10);
  CHECK(c.problem.has_value());
  CHECK_FALSE(c.perturbation.has_value());
  CHECK_FALSE(c.superiorize.has_value());
  CHECK(proximity_weights(c) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("includes and overrides") {
  const fs::path dir = scratch_dir("include");
  fs::create_directories(dir / "shared");
  write_file(dir / "shared" / "base.json", kMinimal);
  write_file(dir / "run.json",
             R"({"include": "shared/base.json", "x0": [-4.0], "seed": 3, "stop": {"max_iters": 50}})");
  const ExperimentConfig c = load_config(dir / "run.json");
  CHECK(c.x0 == Vector{-4.0});
  CHECK(c.seed == 3);
  CHECK(c.stop.max_iters == 50);
  CHECK(c.schedule.m() == 2);
  CHECK(c.name == "run");

  const ExperimentConfig o = load_config(dir / "run.json", ConfigOverrides{9, 20, 1e-6});
  CHECK(o.seed == 9);
  CHECK(o.stop.max_iters == 20);
  CHECK(o.stop.conv_tol == 1e-6);
  CHECK(o.tol.conv_tol == 1e-6);
  CHECK(config_hash(o.document) != config_hash(c.document));
  CHECK(config_hash(load_config(dir / "run.json").document) == config_hash(c.document));

  write_file(dir / "loop.json", R"({"include": "loop.json"})");
  CHECK_THROWS_AS(load_config(dir / "loop.json"), ConfigError);
  write_file(dir / "missing.json", R"({"include": "nowhere.json"})");
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("malformed configs") {
  auto bad = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(text)), ConfigError);
  };
  bad("[]");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}]})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}], "x0": [1, 2]})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[2]]}], "x0": [1]})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": -1}], "cycle": [{"strings": [[1]]}], "x0": [1]})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}], "x0": [1],
          "relaxation": {"lambda": 1.0, "cyclic": [1.0]}})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}], "x0": [1],
          "superiorize": {"beta0": 0.5}})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}], "x0": [1],
          "tolerances": {"eq_tol": 1e-3}})");
  bad(R"({"operators": [{"kind": "ball", "center": [0], "radius": 1}], "cycle": [{"strings": [[1]]}], "x0": ["a"]})");
  const fs::path dir = scratch_dir("malformed");
  write_file(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("witness collection") {
  nlohmann::json doc = nlohmann::json::parse(kMinimal);
  const WitnessSet oracle = collect_witnesses(parse_config(doc));
  REQUIRE(oracle.points.size() == 1);
  CHECK_FALSE(oracle.exact);
  CHECK(std::abs(oracle.points[0][0]) <= 1e-8);

  doc["witnesses"] = {{0.0}};
  const WitnessSet given = collect_witnesses(parse_config(doc));
  CHECK(given.exact);
  CHECK(given.max_residual == 0.0);

  doc["witnesses"] = {{0.5}};
  CHECK_THROWS_AS(collect_witnesses(parse_config(doc)), ConfigError);
}

TEST_CASE("trace csv layout") {
  const ExperimentConfig c = load_config(kConfigs / "two_intervals.json");
  const IterationTrace t = execute(c);
  TraceCsvOptions opts;
  opts.witnesses = c.witnesses;
  std::ostringstream out;
  write_trace_csv(out, t, opts);
  const std::vector<std::string> lines = lines_of(out.str());
  REQUIRE(lines.size() == t.iterates.size() + 1);
  CHECK(lines[0] == "k,x1,step_norm,lambda,plan_signature,perturb_norm,fejer_slack_min");
  const std::vector<std::string> first = fields_of(lines[1]);
  REQUIRE(first.size() == 7);
  CHECK(first[0] == "0");
  CHECK(std::stod(first[1]) == -10.0);
  CHECK(std::stod(first[2]) == t.steps[0].step_norm);
  CHECK(first[4] == t.steps[0].plan_signature);
  CHECK(std::stod(first[6]) >= -1e-12);
  const std::vector<std::string> last = fields_of(lines.back());
  CHECK(last.size() == 7);
  CHECK(last[2].empty());
}

TEST_CASE("superiorized csv adds objective columns") {
  const ExperimentConfig c = load_config(kConfigs / "two_balls_superiorized.json");
  const IterationTrace t = execute(c);
  TraceCsvOptions opts;
  opts.superiorize = c.superiorize->schedule;
  std::ostringstream out;
  write_trace_csv(out, t, opts);
  const std::vector<std::string> lines = lines_of(out.str());
  CHECK(lines[0] ==
        "k,x1,x2,step_norm,lambda,plan_signature,perturb_norm,fejer_slack_min,phi_value,"
        "perturb_l1_budget_remaining");
  const std::vector<std::string> row = fields_of(lines[1]);
  REQUIRE(row.size() == 10);
  CHECK(std::stod(row[8]) == t.phi[0]);
  CHECK(std::stod(row[9]) == c.superiorize->schedule.remaining_budget(0));
}

TEST_CASE("doubles survive the text round trip") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("run summary") {
  const ExperimentConfig c = load_config(kConfigs / "two_intervals.json");
  const IterationTrace t = execute(c);
  const nlohmann::json s = run_summary(c, t, std::nullopt);
  for (const char* key : {"config_hash", "seed", "iters", "converged", "final_iterate",
                          "final_residuals", "fejer_min_slack", "phi_final"}) {
    CHECK(s.contains(key));
  }
  CHECK(s["iters"] == t.iterations());
  CHECK(s["fejer_min_slack"].is_null());
  CHECK(s["phi_final"].is_null());
  CHECK(s["final_residuals"]["averaged"][0] == 0.0);
}
