#pragma once

#include <cmath>
#include <vector>

#include "engage/dynamics.hpp"
#include "engage/io.hpp"
#include "engage/model.hpp"

// Shared instance builders for the test and acceptance suites.

namespace testsupport {

// Four identical arms on a cycle with (p_p_gb, p_p_bg, p_a_gb, p_a_bg) =
// (p, 0, p, 1): the intervention cures with certainty and prevents nothing.
// Scenario 1 sends everyone to the two ring neighbours; scenario 2 keeps
// half of each population at home.
inline engage::Instance make_ring4(double p, int scenario, long long population = 1,
                                   int budget = 2, int max_period = 4) {
  engage::Instance instance;
  instance.budget = budget;
  instance.max_period = max_period;
  for (int v = 0; v < 4; ++v) {
    engage::Location loc;
    loc.id = v;
    loc.population = population;
    loc.initial_good = population;
    loc.transitions = {p, 1.0, p, 0.0};  // p_a_gb, p_a_bg, p_p_gb, p_p_bg
    instance.locations.push_back(loc);
  }
  instance.network = engage::TravelNetwork(4);
  const double self = scenario == 1 ? 0.0 : 0.5;
  const double edge = scenario == 1 ? 0.5 : 0.25;
  for (int v = 0; v < 4; ++v) {
    instance.network.set(v, v, self);
    instance.network.set((v + 1) % 4, v, edge);
    instance.network.set((v + 3) % 4, v, edge);
  }
  return instance;
}

// Alternating diagonal pairs {0,2}, {1,3}.
inline std::vector<engage::ActionVector> ring4_nn_cycle() {
  return {engage::ActionVector::of(4, {0, 2}), engage::ActionVector::of(4, {1, 3})};
}

// Alternating adjacent pairs {0,1}, {2,3}.
inline std::vector<engage::ActionVector> ring4_nb_cycle() {
  return {engage::ActionVector::of(4, {0, 1}), engage::ActionVector::of(4, {2, 3})};
}

inline double table1_nn_s1(double p) { return (4.0 * p - 2.0 * p * p) / (1.0 + p - p * p); }
inline double table1_nb_s1(double p) { return 4.0 * p / (2.0 * p + 1.0); }
inline double table1_nn_s2(double p) { return table1_nb_s1(p); }
inline double table1_nb_s2(double p) {
  return (52.0 * p - 32.0 * p * p) / (13.0 + 16.0 * p - 16.0 * p * p);
}

// Star with a zero-population centre: every leaf's residents are always at
// the centre. The centre is padded to population 1 so the instance stays
// constructible; its reward effects are still exactly zero.
inline engage::Instance make_star(int leaves, long long leaf_population = 10) {
  engage::Instance instance;
  const int m = leaves + 1;
  instance.budget = 1;
  instance.max_period = 4;
  for (int v = 0; v < m; ++v) {
    engage::Location loc;
    loc.id = v;
    loc.population = v == 0 ? 1 : leaf_population;
    loc.initial_good = v == 0 ? 1 : leaf_population / 2;
    loc.transitions = {0.05, 0.6, 0.2, 0.05};
    instance.locations.push_back(loc);
  }
  instance.network = engage::TravelNetwork(m);
  instance.network.set(0, 0, 1.0);  // the centre's single resident stays put
  for (int v = 1; v < m; ++v) instance.network.set(0, v, 1.0);
  return instance;
}

// gamma disjoint cliques of identical nodes, component i given period
// periods[i]. Budget equals the component size.
inline engage::Instance make_components(int gamma, int component_size,
                                        const engage::TransitionPair& transitions,
                                        int max_period, long long population = 10) {
  engage::Instance instance;
  const int m = gamma * component_size;
  instance.budget = component_size;
  instance.max_period = max_period;
  for (int v = 0; v < m; ++v) {
    engage::Location loc;
    loc.id = v;
    loc.population = population;
    loc.initial_good = population;
    loc.transitions = transitions;
    instance.locations.push_back(loc);
  }
  instance.network = engage::TravelNetwork(m);
  for (int c = 0; c < gamma; ++c) {
    for (int i = 0; i < component_size; ++i) {
      const int v = c * component_size + i;
      if (component_size == 1) {
        instance.network.set(v, v, 1.0);
        continue;
      }
      instance.network.set(v, v, 0.5);
      const double share = 0.5 / (component_size - 1);
      for (int jj = 0; jj < component_size; ++jj) {
        if (jj == i) continue;
        instance.network.set(c * component_size + jj, v, share);
      }
    }
  }
  return instance;
}

}  // namespace testsupport
