#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "gdsa/strings.hpp"

using namespace gdsa;

namespace {

const Operator kA = Operator::box(Vector{-1, -1}, Vector{1, 1});
const Operator kB = Operator::box(Vector{-2, 0}, Vector{2, 0});
const std::vector<Operator> kOps{kA, kB};

// Largest distance from any start k to the next occurrence of sig, counted inclusively,
// over the first `horizon` steps of the schedule.
std::size_t scanned_gap(const ControlSchedule& s, const std::string& sig, std::size_t horizon) {
  std::vector<std::string> seq;
  for (std::size_t k = 0; k < horizon + 64; ++k) seq.push_back(s.plan_at(k).signature());
  std::size_t worst = 0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const auto it = std::find(seq.begin() + static_cast<long>(k), seq.end(), sig);
    worst = std::max(worst, static_cast<std::size_t>(it - seq.begin()) - k + 1);
  }
  return worst;
}

}  // namespace

TEST_CASE("index strings") {
  const IndexString t{1, 2, 1};
  CHECK(t.length() == 3);
  CHECK(t.max_index() == 2);
  CHECK_THROWS(IndexString(std::vector<int>{}));
  CHECK_THROWS(IndexString{0, 1});
}

TEST_CASE("string operators apply t(1) first") {
  const Vector x{3, 3};
  CHECK(string_operator(kOps, IndexString{1}).apply(x) == kA.apply(x));
  CHECK(string_operator(kOps, IndexString{1, 2}).apply(x) == kB.apply(kA.apply(x)));
  CHECK(string_operator(kOps, IndexString{2, 1}).apply(x) == kA.apply(kB.apply(x)));
  CHECK_THROWS(string_operator(kOps, IndexString{3}));

  Rng rng(2);
  const Operator twice = string_operator(kOps, IndexString{1, 1});
  for (int i = 0; i < 200; ++i) {
    const Vector y = twice.apply(rng.uniform_box(Vector{0, 0}, 5.0));
    CHECK(residual(kA, y) <= 1e-10);
  }
}

TEST_CASE("averaged operators") {
  const Vector x{3, -2};
  CHECK(averaged_operator(StringPlan({IndexString{1}}, {1.0}), kOps).apply(x) == kA.apply(x));
  const Operator sim = averaged_operator(StringPlan::simultaneous({0.5, 0.5}), kOps);
  const Vector expected = 0.5 * kA.apply(x) + 0.5 * kB.apply(x);
  CHECK(norm(sim.apply(x) - expected) <= 1e-15);
  const Vector z{0.5, 0.0};
  const Operator both = averaged_operator(StringPlan::uniform({{1, 2}, {2, 1}}), kOps);
  CHECK(both.apply(z) == z);
}

TEST_CASE("plan validation and signatures") {
  CHECK_THROWS(StringPlan({IndexString{1}, IndexString{2}}, {0.5, 0.6}));
  CHECK_THROWS(StringPlan({IndexString{1}, IndexString{2}}, {0.0, 1.0}));
  CHECK_THROWS(StringPlan({IndexString{1}, IndexString{1}}, {0.5, 0.5}));
  CHECK_THROWS(StringPlan({IndexString{1}}, {0.5, 0.5}));
  const StringPlan p({IndexString{1}, IndexString{2}}, {0.25, 0.75});
  const StringPlan q({IndexString{2}, IndexString{1}}, {0.75, 0.25});
  const StringPlan r({IndexString{1}, IndexString{2}}, {0.75, 0.25});
  CHECK(p.signature() == q.signature());
  CHECK(p.signature() != r.signature());
  CHECK(StringPlan::uniform({{1, 2, 3}, {3}}).max_length() == 3);
}

TEST_CASE("fit string sets") {
  CHECK(is_fit(StringPlan::uniform({{1, 2}}), 2));
  CHECK_FALSE(is_fit(StringPlan::uniform({{1}, {2}}), 3));
  CHECK(is_fit(StringPlan::uniform({{1}, {2}, {1, 1}}), 2));
}

TEST_CASE("rho constant") {
  const Operator p = Operator::ball(Vector{0, 0}, 1);
  const std::vector<Operator> fne{p, p};
  const ControlSchedule m1(fne, {}, {StringPlan::simultaneous({0.5, 0.5})});
  CHECK(rho_constant(m1) == 1.0);
  const ControlSchedule m2(fne, {}, {StringPlan::uniform({{1, 2}})});
  CHECK(rho_constant(m2) == 0.5);
  CHECK(check_rho_fne(m2.operator_at(0), 0.5, SampleSpec{}).pass);
  const std::vector<Operator> ne{p.with_declared_alpha(2.0), p.with_declared_alpha(2.0)};
  for (const auto& cycle : {StringPlan::simultaneous({0.5, 0.5}), StringPlan::uniform({{1, 2}}),
                            StringPlan::uniform({{1, 2, 1, 2}})}) {
    CHECK(rho_constant(ControlSchedule(ne, {}, {cycle})) == 0.0);
  }
  // Three FNE operators along strings of length three.
  const std::vector<Operator> three{p, p, p};
  CHECK(rho_constant(ControlSchedule(three, {}, {StringPlan::uniform({{1, 2, 3}, {3, 2, 1}})})) ==
        1.0 / 3.0);
}

TEST_CASE("schedule lookup") {
  const StringPlan a = StringPlan::simultaneous({0.5, 0.5});
  const StringPlan b = StringPlan::uniform({{1, 2}});
  const ControlSchedule s(kOps, {b}, {a, b});
  CHECK(s.plan_at(0).signature() == b.signature());
  CHECK(s.plan_at(1).signature() == a.signature());
  CHECK(s.plan_at(2).signature() == b.signature());
  CHECK(s.plan_at(101).signature() == a.signature());
  CHECK(s.distinct_operators().size() == 2);
  CHECK(s.limsup_operators().size() == 2);
  CHECK(s.max_string_length() == 2);
  CHECK_THROWS(ControlSchedule(kOps, {}, {}));
  CHECK_THROWS(ControlSchedule(kOps, {}, {StringPlan::uniform({{1, 3}})}));
}

TEST_CASE("admissibility") {
  const StringPlan a = StringPlan::simultaneous({0.5, 0.5});
  const StringPlan b = StringPlan::uniform({{1, 2}});

  const ControlSchedule ab(kOps, {}, {a, b});
  const AdmissibilityReport r1 = check_admissibility(ab);
  CHECK(r1.admissible);
  CHECK(r1.limsup_set.size() == 2);
  CHECK(r1.gap_bound.at(a.signature()) == 2);
  CHECK(r1.gap_bound.at(b.signature()) == 2);
  CHECK(r1.tight_gap.at(a.signature()) == 2);

  const ControlSchedule pre(kOps, {b}, {a});
  const AdmissibilityReport r2 = check_admissibility(pre);
  CHECK_FALSE(r2.admissible);
  REQUIRE(r2.violating_index);
  CHECK(*r2.violating_index == 0);
  CHECK(r2.tail_admissible);
  CHECK(r2.k0 == 1);

  const ControlSchedule aab(kOps, {}, {a, a, b});
  const AdmissibilityReport r3 = check_admissibility(aab);
  CHECK(r3.admissible);
  CHECK(r3.gap_bound.at(a.signature()) == 3);
  CHECK(r3.gap_bound.at(b.signature()) == 3);
  CHECK(r3.tight_gap.at(a.signature()) == scanned_gap(aab, a.signature(), 60));
  CHECK(r3.tight_gap.at(b.signature()) == scanned_gap(aab, b.signature(), 60));
  CHECK(scanned_gap(aab, a.signature(), 60) == 2);
  CHECK(scanned_gap(aab, b.signature(), 60) == 3);
}

TEST_CASE("property: tight gaps match a window scan and never exceed the bound") {
  const StringPlan a = StringPlan::simultaneous({0.5, 0.5});
  const StringPlan b = StringPlan::uniform({{1, 2}});
  const StringPlan c = StringPlan::uniform({{2, 1}});
  const std::vector<StringPlan> pool{a, b, c};
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<StringPlan> cycle;
    const int len = 1 + trial % 7;
    for (int i = 0; i < len; ++i) cycle.push_back(pool[static_cast<std::size_t>(rng.uniform(0, 3)) % 3]);
    std::vector<StringPlan> preamble;
    if (trial % 3 == 0) preamble.push_back(cycle.front());
    const ControlSchedule s(kOps, preamble, cycle);
    const AdmissibilityReport r = check_admissibility(s);
    CHECK(r.admissible);
    for (const auto& sig : r.limsup_set) {
      const std::size_t scan = scanned_gap(s, sig, 80);
      CHECK(r.tight_gap.at(sig) == scan);
      CHECK(scan <= r.gap_bound.at(sig));
    }
  }
}

TEST_CASE("schedule json round trip") {
  const StringPlan a({IndexString{1}, IndexString{2}}, {0.3, 0.7});
  const StringPlan b = StringPlan::uniform({{1, 2}, {2}});
  const ControlSchedule s(kOps, {b}, {a, b});
  const ControlSchedule back = schedule_from_json(to_json(s));
  CHECK(back.preamble().size() == 1);
  CHECK(back.cycle().size() == 2);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(back.plan_at(k).signature() == s.plan_at(k).signature());
    CHECK(back.operator_at(k).apply(Vector{3, 2}) == s.operator_at(k).apply(Vector{3, 2}));
  }
  const StringPlan u = plan_from_json(nlohmann::json::parse(R"({"strings": [[1], [2]]})"));
  CHECK(u.weights() == std::vector<double>{0.5, 0.5});
  CHECK_THROWS(schedule_from_json(nlohmann::json::parse(R"({"operators": []})")));
}
