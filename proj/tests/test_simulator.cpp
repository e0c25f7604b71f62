#include "doctest.h"

#include <cmath>
#include <vector>

#include "engage/dynamics.hpp"
#include "engage/io.hpp"
#include "engage/simulator.hpp"
#include "support.hpp"

using namespace engage;

namespace {

Schedule repeat_cycle(const std::vector<ActionVector>& cycle, int horizon) {
  Schedule s;
  s.horizon = horizon;
  for (int t = 0; t < horizon; ++t)
    s.actions.push_back(cycle[static_cast<std::size_t>(t) % cycle.size()]);
  return s;
}

}  // namespace

TEST_CASE("simulate is deterministic per seed") {
  const Instance ring = testsupport::make_ring4(0.5, 2, 50);
  const Schedule schedule = repeat_cycle(testsupport::ring4_nb_cycle(), 40);
  const SimTrace a = simulate(ring, schedule, 42);
  const SimTrace b = simulate(ring, schedule, 42);
  const SimTrace c = simulate(ring, schedule, 43);
  CHECK(a.rewards == b.rewards);
  CHECK(a.rewards != c.rewards);
}

TEST_CASE("a certain cure with full reach empties the bad state in one round") {
  Instance instance;
  instance.budget = 1;
  instance.max_period = 2;
  Location loc;
  loc.id = 0;
  loc.population = 1000;
  loc.initial_good = 0;
  loc.transitions = {0.0, 1.0, 0.0, 0.0};  // certain cure, no decay
  instance.locations.push_back(loc);
  instance.network = TravelNetwork(1);
  instance.network.set(0, 0, 1.0);

  const Schedule schedule = repeat_cycle({ActionVector::of(1, {0})}, 3);
  const SimTrace trace = simulate(instance, schedule, 5);
  CHECK(trace.states[0].good[0] == 0);
  CHECK(trace.states[1].good[0] == 1000);
  CHECK(trace.states[2].good[0] == 1000);
  CHECK(trace.rewards[0] == doctest::Approx(1000.0));
  CHECK(trace.rewards[1] == doctest::Approx(0.0));
}

TEST_CASE("population counts stay within bounds every round") {
  const Instance ring = testsupport::make_ring4(0.7, 2, 37);
  const Schedule schedule = random_policy(ring, 300, 8);
  const SimTrace trace = simulate(ring, schedule, 8);
  for (const PopulationState& state : trace.states)
    for (int v = 0; v < 4; ++v) {
      CHECK(state.good[static_cast<std::size_t>(v)] >= 0);
      CHECK(state.good[static_cast<std::size_t>(v)] <= 37);
    }
}

TEST_CASE("summarize on equal values has zero half width") {
  const RunStats stats = summarize({1.5, 1.5, 1.5, 1.5});
  CHECK(stats.mean == doctest::Approx(1.5));
  CHECK(stats.ci_half_width == doctest::Approx(0.0));
  CHECK(stats.replications == 4);
}

TEST_CASE("replicate needs at least two replications") {
  const Instance ring = testsupport::make_ring4(0.5, 2);
  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t seed) {
    return random_policy(inst, horizon, seed);
  };
  CHECK_THROWS_AS(replicate(ring, policy, 10, 1, 3), std::invalid_argument);
}

TEST_CASE("deterministic transitions give zero variance across replications") {
  Instance instance;
  instance.budget = 1;
  instance.max_period = 2;
  Location loc;
  loc.id = 0;
  loc.population = 100;
  loc.initial_good = 0;
  loc.transitions = {0.0, 1.0, 0.0, 0.0};
  instance.locations.push_back(loc);
  instance.network = TravelNetwork(1);
  instance.network.set(0, 0, 1.0);

  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t) {
    Schedule s;
    s.horizon = horizon;
    s.actions.assign(static_cast<std::size_t>(horizon), ActionVector::of(1, {0}));
    return s;
  };
  const RunStats stats = replicate(instance, policy, 20, 10, 77);
  CHECK(stats.ci_half_width == doctest::Approx(0.0));
}

TEST_CASE("replication mean tracks the exact cycle evaluation") {
  const double p = 0.5;
  const int n = 2000;
  Instance ring = testsupport::make_ring4(p, 1, n);
  const CycleEvaluation eval = evaluate_cycle(ring, testsupport::ring4_nn_cycle());
  for (int v = 0; v < 4; ++v)
    ring.locations[static_cast<std::size_t>(v)].initial_good =
        static_cast<long long>(std::llround(eval.stationary[static_cast<std::size_t>(v)].good));

  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t) {
    return repeat_cycle(testsupport::ring4_nn_cycle(), horizon);
  };
  const RunStats stats = replicate(ring, policy, 100, 12, 2025);
  const double exact = static_cast<double>(n) * testsupport::table1_nn_s1(p);
  CHECK(std::abs(stats.mean - exact) / exact <= 0.02);
}

TEST_CASE("long-horizon sample average stays inside the reported interval") {
  const double p = 0.5;
  Instance ring = testsupport::make_ring4(p, 2, 5000);
  const double exact = 5000.0 * testsupport::table1_nb_s2(p);
  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t) {
    return repeat_cycle(testsupport::ring4_nb_cycle(), horizon);
  };
  const RunStats stats = replicate(ring, policy, 2000, 8, 31);
  CHECK(std::abs(stats.mean - exact) <= std::max(stats.ci_half_width, 1e-3 * exact) * 3.0);
}

TEST_CASE("parallel replication equals sequential replication") {
  const Instance ring = testsupport::make_ring4(0.4, 2, 60);
  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t seed) {
    return random_policy(inst, horizon, seed);
  };
  const RunStats sequential = replicate(ring, policy, 50, 12, 9, 1);
  const RunStats parallel = replicate(ring, policy, 50, 12, 9, 4);
  CHECK(sequential.mean == parallel.mean);
  CHECK(sequential.ci_half_width == parallel.ci_half_width);
}

TEST_CASE("confidence interval shrinks roughly as the square root of reps") {
  const Instance ring = testsupport::make_ring4(0.5, 2, 30);
  const PolicyFn policy = [](const Instance& inst, int horizon, std::uint64_t seed) {
    return random_policy(inst, horizon, seed);
  };
  const double hw10 = replicate(ring, policy, 30, 10, 4, 1).ci_half_width;
  const double hw40 = replicate(ring, policy, 30, 40, 4, 1).ci_half_width;
  const double hw160 = replicate(ring, policy, 30, 160, 4, 1).ci_half_width;
  CHECK(hw40 >= hw10 / 2.0 / 2.0);
  CHECK(hw40 <= hw10 / 2.0 * 2.0);
  CHECK(hw160 >= hw40 / 2.0 / 2.0);
  CHECK(hw160 <= hw40 / 2.0 * 2.0);
}

TEST_CASE("disadvantaged_rates under a uniform random schedule is near k/m") {
  Instance instance = testsupport::make_ring4(0.5, 2, 10);
  // Spread the risk profile so the ranking is unambiguous.
  for (int v = 0; v < 4; ++v) {
    instance.locations[static_cast<std::size_t>(v)].transitions = {
        0.05, 0.6, 0.1 + 0.05 * v, 0.20 - 0.04 * v};
  }
  const Schedule schedule = random_policy(instance, 20000, 3);
  const auto [risky, rest] = disadvantaged_rates(instance, schedule, 0.25);
  const double f = 2.0 / 4.0;
  const double sigma = std::sqrt(f * (1.0 - f) / 20000.0);
  CHECK(std::abs(risky - f) <= 3.0 * sigma);
  CHECK(std::abs(rest - f) <= 3.0 * sigma);
}

TEST_CASE("disadvantaged_rates when only the riskiest arm is pulled") {
  Instance instance = testsupport::make_ring4(0.5, 2, 10);
  for (int v = 0; v < 4; ++v)
    instance.locations[static_cast<std::size_t>(v)].transitions = {
        0.05, 0.6, 0.1 + 0.05 * v, 0.20 - 0.04 * v};
  // Location 3 has the highest decay and the lowest recovery.
  const Schedule schedule = repeat_cycle({ActionVector::of(4, {3})}, 50);
  const auto [risky, rest] = disadvantaged_rates(instance, schedule, 0.25);
  CHECK(risky == doctest::Approx(1.0));
  CHECK(rest == doctest::Approx(0.0));
}

TEST_CASE("engage serves the riskiest communities at least as often as the rest") {
  GeneratorConfig config = preset_config("synthetic");
  config.m = 24;
  config.budget = 4;
  config.seed = 33;
  Instance instance = generate_synthetic(config);
  // Skew the risk profile: the first quarter decays fast and barely recovers.
  for (int v = 0; v < 6; ++v) {
    TransitionPair& t = instance.locations[static_cast<std::size_t>(v)].transitions;
    t.p_p_gb = 0.35;
    t.p_p_bg = 0.0;
    t.p_a_gb = 0.05;
    t.p_a_bg = 0.7;
  }
  REQUIRE(validate_instance(instance).empty());

  const Schedule schedule = engage_plan(instance, 100).schedule;
  const auto [risky, rest] = disadvantaged_rates(instance, schedule, 0.25);
  CHECK(risky >= rest);
}

TEST_CASE("perturb_network: zero fraction is the identity") {
  const Instance ring = testsupport::make_ring4(0.5, 2);
  const Instance same = perturb_network(ring, 0.0, 11);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v) CHECK(same.network.at(u, v) == ring.network.at(u, v));
}

TEST_CASE("perturb_network preserves edge count and column sums") {
  const GeneratorConfig config = [] {
    GeneratorConfig c = preset_config("synthetic");
    c.m = 40;
    c.seed = 17;
    return c;
  }();
  const Instance instance = generate_synthetic(config);

  auto count_edges = [](const Instance& inst) {
    int edges = 0;
    for (int u = 0; u < inst.size(); ++u)
      for (int v = u + 1; v < inst.size(); ++v)
        if (inst.network.at(u, v) > 0.0 || inst.network.at(v, u) > 0.0) ++edges;
    return edges;
  };

  for (double fraction : {0.1, 0.25, 0.5}) {
    const Instance perturbed = perturb_network(instance, fraction, 23);
    CHECK(count_edges(perturbed) == count_edges(instance));
    for (int v = 0; v < perturbed.size(); ++v)
      CHECK(std::abs(perturbed.network.column_sum(v) - 1.0) <= 1e-9);
  }

  const Instance a = perturb_network(instance, 0.25, 23);
  const Instance b = perturb_network(instance, 0.25, 23);
  for (int u = 0; u < a.size(); ++u)
    for (int v = 0; v < a.size(); ++v) CHECK(a.network.at(u, v) == b.network.at(u, v));
}
