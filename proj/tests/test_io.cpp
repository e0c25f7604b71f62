#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "engage/io.hpp"
#include "engage/rng.hpp"
#include "support.hpp"

using namespace engage;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("io_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

Instance valid_instance() {
  GeneratorConfig config = preset_config("synthetic");
  config.m = 12;
  config.budget = 3;
  config.seed = 5;
  return generate_synthetic(config);
}

}  // namespace

TEST_CASE("instance round trip is exact field for field") {
  const Instance original = valid_instance();
  TempFile file("roundtrip.json");
  save_instance(original, file.path);
  const Instance loaded = load_instance(file.path);

  CHECK(loaded.budget == original.budget);
  CHECK(loaded.max_period == original.max_period);
  REQUIRE(loaded.size() == original.size());
  for (int v = 0; v < original.size(); ++v) {
    const Location& a = original.locations[static_cast<std::size_t>(v)];
    const Location& b = loaded.locations[static_cast<std::size_t>(v)];
    CHECK(a.id == b.id);
    CHECK(a.population == b.population);
    CHECK(a.initial_good == b.initial_good);
    CHECK(a.transitions.p_a_gb == b.transitions.p_a_gb);
    CHECK(a.transitions.p_a_bg == b.transitions.p_a_bg);
    CHECK(a.transitions.p_p_gb == b.transitions.p_p_gb);
    CHECK(a.transitions.p_p_bg == b.transitions.p_p_bg);
  }
  for (int u = 0; u < original.size(); ++u)
    for (int v = 0; v < original.size(); ++v)
      CHECK(loaded.network.at(u, v) == original.network.at(u, v));
}

TEST_CASE("load rejects a short column with the violation report") {
  Instance broken = valid_instance();
  broken.network.scale_column(0, 0.8);
  TempFile file("badcolumn.json");
  save_instance(broken, file.path);
  try {
    load_instance(file.path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("column-stochastic") != std::string::npos);
    bool found = false;
    for (const Violation& v : e.violations) found = found || v.constraint == "column-stochastic";
    CHECK(found);
  }
}

TEST_CASE("load rejects an empty locations list") {
  TempFile file("empty.json");
  std::ofstream(file.path) << R"({"budget":1,"max_period":2,"locations":[],"commute":[]})";
  CHECK_THROWS(load_instance(file.path));
}

TEST_CASE("parse applies defaults and renormalizes mildly off columns") {
  nlohmann::json j;
  j["budget"] = 1;
  j["max_period"] = 3;
  j["locations"] = {{{"id", 0},
                     {"population", 10},
                     {"initial_good", 5},
                     {"p_a_gb", 0.05},
                     {"p_a_bg", 0.5},
                     {"p_p_gb", 0.2},
                     {"p_p_bg", 0.05}},
                    {{"id", 1},
                     {"population", 10},
                     {"initial_good", 5},
                     {"p_a_gb", 0.05},
                     {"p_a_bg", 0.5},
                     {"p_p_gb", 0.2},
                     {"p_p_bg", 0.05}}};
  // Location 1 has no self weight entry at all; column 0 is off by 1e-7.
  j["commute"] = {{{"at", 0}, {"home", 0}, {"weight", 0.5 - 1e-7}},
                  {{"at", 1}, {"home", 0}, {"weight", 0.5}},
                  {{"at", 0}, {"home", 1}, {"weight", 1.0}}};

  const Instance instance = parse_instance_json(j);
  CHECK(instance.network.at(1, 1) == 0.0);
  CHECK(instance.network.column_sum(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(validate_instance(instance).empty());
}

TEST_CASE("generated instances always validate") {
  for (const char* preset : {"synthetic", "urban", "rural", "food"}) {
    GeneratorConfig config = preset_config(preset);
    config.m = std::min(config.m, 60);  // keep the unit suite quick
    config.budget = std::min(config.budget, config.m);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      config.seed = seed;
      const Instance instance = generate_synthetic(config);
      CHECK(validate_instance(instance).empty());
    }
  }
}

TEST_CASE("full self stay produces a diagonal network") {
  GeneratorConfig config = preset_config("synthetic");
  config.m = 15;
  config.self_stay = 1.0;
  config.seed = 2;
  const Instance instance = generate_synthetic(config);
  for (int u = 0; u < 15; ++u)
    for (int v = 0; v < 15; ++v)
      CHECK(instance.network.at(u, v) == (u == v ? 1.0 : 0.0));
}

TEST_CASE("food preset has no prevention effect") {
  GeneratorConfig config = preset_config("food");
  config.m = 20;
  config.seed = 9;
  const Instance instance = generate_synthetic(config);
  for (const Location& loc : instance.locations)
    CHECK(loc.transitions.prevention() == 0.0);
}

TEST_CASE("preferential attachment is heavier tailed than a regular graph") {
  GeneratorConfig config = preset_config("synthetic");
  config.m = 60;
  std::vector<int> max_degrees;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    config.seed = seed;
    const Instance instance = generate_synthetic(config);
    int max_degree = 0;
    for (int v = 0; v < config.m; ++v) {
      int degree = 0;
      for (int u = 0; u < config.m; ++u)
        if (u != v && instance.network.at(u, v) > 0.0) ++degree;
      max_degree = std::max(max_degree, degree);
    }
    max_degrees.push_back(max_degree);
  }
  std::sort(max_degrees.begin(), max_degrees.end());
  // An equal-size random regular graph has every degree near 2 * attach_degree.
  CHECK(max_degrees[25] > static_cast<int>(2.0 * config.attach_degree));
}

TEST_CASE("generate_transitions respects the assumptions and the seed") {
  TransitionRanges ranges;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TransitionPair t = generate_transitions(seed, ranges);
    CHECK(t.p_p_gb >= t.p_a_gb);
    CHECK(t.p_a_bg >= t.p_p_bg);
    CHECK(1.0 - t.p_p_gb > t.p_p_bg);
    CHECK(1.0 - t.p_a_gb > t.p_a_bg);
    CHECK(t.cure() > t.prevention());
  }
  const TransitionPair a = generate_transitions(7, ranges);
  const TransitionPair b = generate_transitions(7, ranges);
  CHECK(a.p_a_gb == b.p_a_gb);
  CHECK(a.p_a_bg == b.p_a_bg);
}

TEST_CASE("generate_transitions fails cleanly on infeasible ranges") {
  TransitionRanges ranges;
  ranges.p_a_bg_lo = ranges.p_a_bg_hi = 0.3;
  ranges.p_p_bg_lo = ranges.p_p_bg_hi = 0.3;  // cure pinned to zero
  ranges.p_p_gb_lo = 0.3;
  ranges.p_p_gb_hi = 0.4;
  ranges.p_a_gb_lo = 0.0;
  ranges.p_a_gb_hi = 0.1;  // prevention strictly positive
  CHECK_THROWS(generate_transitions(1, ranges));
}

TEST_CASE("csv writers produce the documented headers") {
  const Instance ring = testsupport::make_ring4(0.5, 2);
  std::vector<RewardTable> tables;
  for (int v = 0; v < 4; ++v) tables.push_back(build_reward_table(ring, v));
  const PeriodAssignment periods = solve_periods_greedy(tables, 2);

  std::ostringstream periods_csv;
  write_periods_csv(tables, periods, periods_csv);
  CHECK(periods_csv.str().rfind("location_id,period,table_value\n", 0) == 0);

  const Schedule schedule = engage_policy(ring, periods, 4);
  std::ostringstream schedule_csv;
  write_schedule_csv(schedule, schedule_csv);
  CHECK(schedule_csv.str().rfind("round,pulled_ids\n", 0) == 0);
  CHECK(schedule_csv.str().find('"') != std::string::npos);  // multi-pull rounds quoted

  std::ostringstream stats_csv;
  write_stats_csv({{"engage", RunStats{1.0, 0.1, 30}, 100, 7}}, stats_csv);
  CHECK(stats_csv.str().rfind("policy,mean,ci_half_width,reps,horizon,seed\n", 0) == 0);
}
