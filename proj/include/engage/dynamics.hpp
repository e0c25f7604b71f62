#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "engage/model.hpp"

// Expected-state evolution and exact reward evaluation. Everything here is
// deterministic arithmetic on 2x2 chains: one-step expectation updates, the
// closed form for repeated passive steps, steady states of pull cycles, the
// per-pull reward bounds used by the period optimizer, and exact average
// reward of a repeating action cycle.

namespace engage {

struct ExpectedState {
  double good = 0.0;
  double bad = 0.0;

  double total() const { return good + bad; }
  double good_fraction() const { return total() > 0.0 ? good / total() : 0.0; }
};

inline ExpectedState step_expected(const ExpectedState& state, const Matrix2& matrix) {
  return {state.good * matrix[0][0] + state.bad * matrix[1][0],
          state.good * matrix[0][1] + state.bad * matrix[1][1]};
}

inline ExpectedState initial_state(const Location& loc) {
  return {static_cast<double>(loc.initial_good),
          static_cast<double>(loc.population - loc.initial_good)};
}

// Expected one-round reward: each location contributes its reached fraction
// times the intervention benefit for the individuals reached, given the
// current expected split between good and bad.
inline double expected_round_reward(const Instance& instance,
                                    const std::vector<ExpectedState>& states,
                                    const ActionVector& action) {
  const int m = instance.size();
  if (static_cast<int>(states.size()) != m)
    throw std::invalid_argument("expected_round_reward: state count mismatch");
  const std::vector<double> reached = reached_fractions(instance.network, action);
  double total = 0.0;
  for (int v = 0; v < m; ++v) {
    const TransitionPair& t = instance.locations[static_cast<std::size_t>(v)].transitions;
    const ExpectedState& s = states[static_cast<std::size_t>(v)];
    total += reached[static_cast<std::size_t>(v)] * (t.prevention() * s.good + t.cure() * s.bad);
  }
  return total;
}

// Fraction of a population expected in the good state after tau rounds of
// purely passive evolution, in closed form. Matches tau-fold application of
// step_expected with the passive matrix. A frozen chain (both passive rates
// zero) keeps the initial fraction.
inline double passive_good_fraction(const TransitionPair& transitions,
                                    double s0_frac, int tau) {
  if (!(s0_frac >= 0.0 && s0_frac <= 1.0))
    throw std::invalid_argument("passive_good_fraction: s0_frac out of [0,1]");
  if (tau < 0) throw std::invalid_argument("passive_good_fraction: negative tau");
  const double rate_sum = transitions.p_p_gb + transitions.p_p_bg;
  if (rate_sum <= 0.0) return s0_frac;
  const double steady = transitions.p_p_bg / rate_sum;
  return steady + std::pow(1.0 - rate_sum, static_cast<double>(tau)) * (s0_frac - steady);
}

// Stationary expected state of a two-state chain with flip rates
// (q_gb, q_bg), scaled to the given population.
inline ExpectedState chain_steady_state(double q_gb, double q_bg, double population) {
  if (q_gb + q_bg <= 0.0)
    throw std::invalid_argument("chain_steady_state: degenerate chain (q_gb = q_bg = 0)");
  const double good = population * q_bg / (q_gb + q_bg);
  return {good, population - good};
}

struct StationaryResult {
  ExpectedState state;
  bool frozen = false;  // chain was the identity; fallback state returned
};

inline StationaryResult stationary_of(const Matrix2& chain, double population,
                                      const ExpectedState& fallback) {
  const double to_bad = chain[0][1];
  const double to_good = chain[1][0];
  if (to_bad + to_good <= 0.0) return {fallback, true};
  const double good = population * to_good / (to_bad + to_good);
  return {{good, population - good}, false};
}

enum class Regime { upper, lower };

struct CycleMatrix {
  Matrix2 entries;
};

// Transition of the expected state over one full visiting cycle of length
// tau, from just before one pull to just before the next. The upper regime
// assumes no other location is ever visited; the lower regime assumes every
// neighbouring location is visited in every round.
inline CycleMatrix cycle_matrix(const Location& loc, const TravelNetwork& network,
                                int tau, Regime regime) {
  if (tau < 1) throw std::invalid_argument("cycle_matrix: tau must be >= 1");
  const double self = network.at(loc.id, loc.id);
  const Matrix2 pull = mixed_transition(loc.transitions,
                                        regime == Regime::upper ? self : 1.0);
  const Matrix2 between = regime == Regime::upper
                              ? loc.transitions.passive()
                              : mixed_transition(loc.transitions, 1.0 - self);
  Matrix2 out = pull;
  for (int t = 1; t < tau; ++t) out = multiply(out, between);
  return {out};
}

// Cycle transition for an explicit per-round exposure profile; position 0 is
// the pull round.
inline Matrix2 exposure_cycle_matrix(const TransitionPair& transitions,
                                     const std::vector<double>& exposures) {
  if (exposures.empty())
    throw std::invalid_argument("exposure_cycle_matrix: empty profile");
  Matrix2 out = mixed_transition(transitions, exposures.front());
  for (std::size_t t = 1; t < exposures.size(); ++t)
    out = multiply(out, mixed_transition(transitions, exposures[t]));
  return out;
}

struct PullRewardBound {
  int period = 1;
  double value = 0.0;
  Regime regime = Regime::upper;
};

// Average per-round reward of pulling a location every tau rounds, at the
// steady state of the corresponding cycle chain. Both regimes price the pull
// by the self-exposure it delivers; they differ only in the neighbour
// activity baked into the cycle chain, so lower <= upper for every tau.
inline PullRewardBound pull_reward_bound(const Location& loc,
                                         const TravelNetwork& network, int tau,
                                         Regime regime) {
  const Matrix2 chain = cycle_matrix(loc, network, tau, regime).entries;
  if (chain[0][1] + chain[1][0] <= 0.0)
    throw std::invalid_argument("pull_reward_bound: cycle chain does not mix (all rates zero)");
  const StationaryResult st =
      stationary_of(chain, static_cast<double>(loc.population), initial_state(loc));
  const double self = network.at(loc.id, loc.id);
  const TransitionPair& t = loc.transitions;
  const double value =
      (self / tau) * (t.prevention() * st.state.good + t.cure() * st.state.bad);
  return {tau, value, regime};
}

// Same steady-cycle evaluation for an arbitrary exposure profile, pricing the
// pull round by its own exposure. Used to evaluate a concrete policy's
// per-arm reward and by the network-blind baseline (profile {1, 0, ...}).
inline double profile_pull_reward(const Location& loc,
                                  const std::vector<double>& exposures) {
  const Matrix2 chain = exposure_cycle_matrix(loc.transitions, exposures);
  const StationaryResult st =
      stationary_of(chain, static_cast<double>(loc.population), initial_state(loc));
  const TransitionPair& t = loc.transitions;
  return (exposures.front() / static_cast<double>(exposures.size())) *
         (t.prevention() * st.state.good + t.cure() * st.state.bad);
}

// Reward weights of one pull at v over everything it reaches: residents of
// each location u are present at v in expected numbers n_u * w(v, u) and
// contribute their own prevention and cure effects. The self term alone is
// what pull_reward_bound prices; the cross terms are what make pulling a
// well-connected location with a small home population worthwhile.
struct ReachProjection {
  double prevention_mass = 0.0;
  double cure_mass = 0.0;
};

inline ReachProjection reach_projection(const Instance& instance, int v) {
  ReachProjection out;
  for (int u = 0; u < instance.size(); ++u) {
    const Location& home = instance.locations[static_cast<std::size_t>(u)];
    const double present =
        instance.network.at(v, u) * static_cast<double>(home.population);
    out.prevention_mass += present * home.transitions.prevention();
    out.cure_mass += present * home.transitions.cure();
  }
  return out;
}

// Reward of a single pull reaching fraction w_hat of a population that
// evolved passively for tau rounds from s0_frac. Requires the start to be no
// worse than the passive steady state.
inline double pull_gain(const Location& loc, int tau, double w_hat, double s0_frac) {
  if (tau < 1) throw std::invalid_argument("pull_gain: tau must be >= 1");
  const TransitionPair& t = loc.transitions;
  const double rate_sum = t.p_p_gb + t.p_p_bg;
  const double steady = rate_sum > 0.0 ? t.p_p_bg / rate_sum : s0_frac;
  if (s0_frac < steady - 1e-12)
    throw std::invalid_argument("pull_gain: initial state below passive steady state");
  const double frac = passive_good_fraction(t, s0_frac, tau);
  const double n = static_cast<double>(loc.population);
  return t.prevention() * w_hat * n * frac + t.cure() * w_hat * n * (1.0 - frac);
}

struct CycleEvaluation {
  double average_reward = 0.0;
  std::vector<ExpectedState> stationary;  // state just before cycle position 0
  std::vector<int> frozen_locations;      // cycle chain was the identity there
};

// Exact long-run average reward of a repeating action cycle: per location,
// the stationary state of the cycle-product chain is rolled through the
// cycle and the expected round rewards are averaged. No sampling involved.
// Locations whose cycle chain is the identity keep their initial state and
// are reported in frozen_locations.
inline CycleEvaluation evaluate_cycle(const Instance& instance,
                                      const std::vector<ActionVector>& cycle) {
  if (cycle.empty()) throw std::invalid_argument("evaluate_cycle: empty cycle");
  const int m = instance.size();
  const int span = static_cast<int>(cycle.size());

  std::vector<std::vector<double>> exposures;
  exposures.reserve(cycle.size());
  for (const ActionVector& action : cycle) {
    if (action.pulls() > instance.budget)
      throw std::invalid_argument("evaluate_cycle: action exceeds budget");
    exposures.push_back(reached_fractions(instance.network, action));
  }

  CycleEvaluation out;
  out.stationary.resize(static_cast<std::size_t>(m));
  double total = 0.0;
  for (int v = 0; v < m; ++v) {
    const Location& loc = instance.locations[static_cast<std::size_t>(v)];
    Matrix2 chain = identity2();
    for (int t = 0; t < span; ++t)
      chain = multiply(chain, mixed_transition(loc.transitions,
                                               exposures[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)]));
    const StationaryResult st = stationary_of(
        chain, static_cast<double>(loc.population), initial_state(loc));
    if (st.frozen) out.frozen_locations.push_back(v);
    out.stationary[static_cast<std::size_t>(v)] = st.state;

    ExpectedState s = st.state;
    for (int t = 0; t < span; ++t) {
      const double w = exposures[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)];
      total += w * (loc.transitions.prevention() * s.good + loc.transitions.cure() * s.bad);
      s = step_expected(s, mixed_transition(loc.transitions, w));
    }
  }
  out.average_reward = total / span;
  return out;
}

inline double periodic_average_reward(const Instance& instance,
                                      const std::vector<ActionVector>& cycle) {
  return evaluate_cycle(instance, cycle).average_reward;
}

// Exact average expected reward of a finite action sequence, rolled forward
// from the instance's initial states. Unlike evaluate_cycle this includes
// the transient, so it ranks concrete schedules rather than repeating
// patterns.
inline double expected_sequence_reward(const Instance& instance,
                                       const std::vector<ActionVector>& actions) {
  if (actions.empty())
    throw std::invalid_argument("expected_sequence_reward: empty schedule");
  const int m = instance.size();
  std::vector<ExpectedState> states;
  states.reserve(static_cast<std::size_t>(m));
  for (const Location& loc : instance.locations) states.push_back(initial_state(loc));

  double total = 0.0;
  for (const ActionVector& action : actions) {
    total += expected_round_reward(instance, states, action);
    const std::vector<double> reached = reached_fractions(instance.network, action);
    for (int v = 0; v < m; ++v)
      states[static_cast<std::size_t>(v)] = step_expected(
          states[static_cast<std::size_t>(v)],
          mixed_transition(instance.locations[static_cast<std::size_t>(v)].transitions,
                           reached[static_cast<std::size_t>(v)]));
  }
  return total / static_cast<double>(actions.size());
}

}  // namespace engage
