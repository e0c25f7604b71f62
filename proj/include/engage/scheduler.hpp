#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "engage/coupling.hpp"
#include "engage/dynamics.hpp"
#include "engage/model.hpp"
#include "engage/period.hpp"
#include "engage/rng.hpp"

// Schedulers. The main policy combines the visiting periods with a spectral
// pull-set selection on the coupling graph and a timer-based dispatcher; the
// three baselines (random, myopic, recharging) mirror the standard
// comparison suite.

namespace engage {

struct Schedule {
  int horizon = 0;
  std::vector<ActionVector> actions;
};

// Timer bookkeeping for periodic dispatch. Candidates and waiting arms
// partition the assigned arms; timer values live in [1, tau_v].
struct SchedulerState {
  std::vector<char> candidate;  // by location id
  std::vector<int> timer;       // remaining waiting rounds, 0 when candidate
  std::vector<int> due_since;   // round the arm (re)joined the candidates

  explicit SchedulerState(int m)
      : candidate(static_cast<std::size_t>(m), 0),
        timer(static_cast<std::size_t>(m), 0),
        due_since(static_cast<std::size_t>(m), 0) {}
};

namespace detail {

// Earliest-deadline ordering among due arms: an arm due since round r with
// period tau should be served again before round r + tau. Ties prefer the
// shorter period, then the lower id.
inline std::vector<int> earliest_deadline_set(const std::vector<int>& candidates,
                                              const SchedulerState& state,
                                              const PeriodAssignment& periods,
                                              int count) {
  std::vector<int> order = candidates;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int da = state.due_since[static_cast<std::size_t>(a)] + periods.period_of(a);
    const int db = state.due_since[static_cast<std::size_t>(b)] + periods.period_of(b);
    return std::tie(da, periods.periods[static_cast<std::size_t>(a)], a) <
           std::tie(db, periods.periods[static_cast<std::size_t>(b)], b);
  });
  order.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(order.size()))));
  return order;
}

inline void advance_timers(const std::vector<int>& assigned, SchedulerState& state,
                           int round) {
  for (int v : assigned) {
    if (state.timer[static_cast<std::size_t>(v)] > 0 &&
        --state.timer[static_cast<std::size_t>(v)] == 0) {
      state.candidate[static_cast<std::size_t>(v)] = 1;
      state.due_since[static_cast<std::size_t>(v)] = round;
    }
  }
}

inline void commit_pull(const std::vector<int>& chosen, SchedulerState& state,
                        const PeriodAssignment& periods, ActionVector& action) {
  for (int v : chosen) {
    action.bits[static_cast<std::size_t>(v)] = 1;
    state.candidate[static_cast<std::size_t>(v)] = 0;
    state.timer[static_cast<std::size_t>(v)] = periods.period_of(v);
  }
}

}  // namespace detail

// Periodic schedule with spectrally synchronized pull sets. Per round, due
// arms return to the candidate pool and a pull set is chosen among several
// proposals: the earliest-deadline set, the set of candidates with the
// largest per-round table values, and, for every spectral vector, the k
// candidates with the smallest and with the largest entries (ties at the
// threshold trimmed by removing the highest ids). Each proposal is scored
// by its coupling cut minus the summed per-round values of the arms it
// serves; leaving an arm out costs its value for the round, so the score
// weighs synchronization loss and deferral loss in the same units. With
// identical arm values this reduces to the plain cut minimum. Fewer than k
// due candidates are all pulled as they are.
inline Schedule engage_policy(const Instance& instance, const PeriodAssignment& periods,
                              int horizon, double fiedler_tol = 1e-8) {
  if (horizon < 1) throw std::invalid_argument("engage_policy: horizon must be >= 1");
  const int m = instance.size();
  std::vector<int> assigned;
  for (int v = 0; v < m && v < static_cast<int>(periods.periods.size()); ++v)
    if (periods.assigned(v)) assigned.push_back(v);
  if (assigned.empty()) throw std::invalid_argument("engage_policy: empty assignment");

  const CouplingGraph graph = build_coupling_graph(instance, periods);
  std::vector<std::vector<double>> etas;
  for (const FiedlerSet& set : fiedler_set(graph, fiedler_tol))
    for (const std::vector<double>& vec : set.vectors) etas.push_back(vec);

  std::vector<int> graph_index(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < graph.size(); ++i)
    graph_index[static_cast<std::size_t>(graph.node_ids[static_cast<std::size_t>(i)])] = i;

  std::vector<double> value_rate(static_cast<std::size_t>(m), 0.0);
  for (int v : assigned)
    value_rate[static_cast<std::size_t>(v)] =
        reach_cycle_value(instance, v, periods.period_of(v));

  auto score_of = [&](const std::vector<int>& ids) {
    std::vector<int> local;
    local.reserve(ids.size());
    double served = 0.0;
    for (int v : ids) {
      local.push_back(graph_index[static_cast<std::size_t>(v)]);
      served += value_rate[static_cast<std::size_t>(v)];
    }
    return cut_capacity(graph, local) - served;
  };

  const int k = instance.budget;
  SchedulerState state(m);
  for (int v : assigned) state.candidate[static_cast<std::size_t>(v)] = 1;

  Schedule out;
  out.horizon = horizon;
  out.actions.reserve(static_cast<std::size_t>(horizon));

  for (int round = 0; round < horizon; ++round) {
    detail::advance_timers(assigned, state, round);

    std::vector<int> candidates;
    for (int v : assigned)
      if (state.candidate[static_cast<std::size_t>(v)]) candidates.push_back(v);

    ActionVector action = ActionVector::none(m);
    if (!candidates.empty()) {
      const int k_eff = std::min<int>(k, static_cast<int>(candidates.size()));
      std::vector<int> best =
          detail::earliest_deadline_set(candidates, state, periods, k_eff);
      double best_score = score_of(best);

      if (static_cast<int>(candidates.size()) > k) {
        std::vector<int> greedy = candidates;
        std::sort(greedy.begin(), greedy.end(), [&](int a, int b) {
          const double va = value_rate[static_cast<std::size_t>(a)];
          const double vb = value_rate[static_cast<std::size_t>(b)];
          return va != vb ? va > vb : a < b;
        });
        greedy.resize(static_cast<std::size_t>(k));
        const double greedy_score = score_of(greedy);
        if (greedy_score < best_score) {
          best = greedy;
          best_score = greedy_score;
        }

        std::vector<std::pair<double, int>> entries;
        entries.reserve(candidates.size());
        for (const std::vector<double>& eta : etas) {
          entries.clear();
          for (int v : candidates)
            entries.emplace_back(eta[static_cast<std::size_t>(graph_index[static_cast<std::size_t>(v)])], v);

          std::sort(entries.begin(), entries.end());
          std::vector<int> smallest;
          for (int i = 0; i < k; ++i) smallest.push_back(entries[static_cast<std::size_t>(i)].second);

          std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
          });
          std::vector<int> largest;
          for (int i = 0; i < k; ++i) largest.push_back(entries[static_cast<std::size_t>(i)].second);

          for (std::vector<int>* proposal : {&smallest, &largest}) {
            const double score = score_of(*proposal);
            if (score < best_score) {
              best = *proposal;
              best_score = score;
            }
          }
        }
      }
      detail::commit_pull(best, state, periods, action);
    }
    out.actions.push_back(std::move(action));
  }
  return out;
}

struct EngagePlan {
  PeriodAssignment periods;
  Schedule schedule;
};

// Full planning pipeline: candidate assignments from several refinement
// depths and period grids (the full grid plus harmonic chains, whose pulls
// pack into the budget without deferral losses) are scheduled and ranked by
// exact expected-state evaluation over the horizon. Instances whose tables
// are all zero get an idle plan.
inline EngagePlan engage_plan(const Instance& instance, int horizon, int t_min = 1) {
  std::vector<std::vector<int>> grids{{}};  // every period in [t_min, T]
  std::vector<int> chain;
  for (int t = 1; t <= instance.max_period; t *= 2) chain.push_back(t);
  grids.push_back(chain);
  chain.clear();
  for (int t = 1; t <= instance.max_period; t *= (t == 1 ? 3 : 2)) chain.push_back(t);
  grids.push_back(chain);

  EngagePlan best;
  double best_value = -1.0;
  for (const std::vector<int>& grid : grids) {
    for (int sweeps = 0; sweeps <= 3; ++sweeps) {
      const PeriodAssignment periods =
          refine_periods(instance, instance.budget, t_min, sweeps, grid);
      bool any = false;
      for (int t : periods.periods) any = any || t != PeriodAssignment::kNever;
      if (!any) continue;
      Schedule schedule = engage_policy(instance, periods, horizon);
      const double value = expected_sequence_reward(instance, schedule.actions);
      if (value > best_value) {
        best_value = value;
        best = {periods, std::move(schedule)};
      }
    }
  }
  if (best_value < 0.0) {
    best.periods.periods.assign(static_cast<std::size_t>(instance.size()),
                                PeriodAssignment::kNever);
    best.schedule.horizon = horizon;
    best.schedule.actions.assign(static_cast<std::size_t>(horizon),
                                 ActionVector::none(instance.size()));
  }
  return best;
}

// Uniformly random k-subset each round, deterministic per seed.
inline Schedule random_policy(const Instance& instance, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("random_policy: horizon must be >= 1");
  const int m = instance.size();
  const int k = std::min(instance.budget, m);
  Substream stream(fold(seed, 0x706f6c6963ull));  // policy stream salt

  Schedule out;
  out.horizon = horizon;
  out.actions.reserve(static_cast<std::size_t>(horizon));
  std::vector<int> pool(static_cast<std::size_t>(m));
  for (int round = 0; round < horizon; ++round) {
    std::iota(pool.begin(), pool.end(), 0);
    ActionVector action = ActionVector::none(m);
    for (int i = 0; i < k; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) + stream.below(static_cast<std::uint64_t>(m - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      action.bits[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    }
    out.actions.push_back(std::move(action));
  }
  return out;
}

// Greedy immediate-reward maximizer: k additions per round, each taking the
// arm with the largest marginal expected reward given the arms already
// chosen, network reach included. Expected states advance between rounds.
inline Schedule myopic_policy(const Instance& instance, int horizon) {
  if (horizon < 1) throw std::invalid_argument("myopic_policy: horizon must be >= 1");
  const int m = instance.size();
  const int k = std::min(instance.budget, m);

  std::vector<ExpectedState> states;
  states.reserve(static_cast<std::size_t>(m));
  for (const Location& loc : instance.locations) states.push_back(initial_state(loc));

  Schedule out;
  out.horizon = horizon;
  out.actions.reserve(static_cast<std::size_t>(horizon));
  for (int round = 0; round < horizon; ++round) {
    ActionVector action = ActionVector::none(m);
    double current = 0.0;
    for (int step = 0; step < k; ++step) {
      int best_arm = -1;
      double best_reward = current;
      for (int v = 0; v < m; ++v) {
        if (action.bits[static_cast<std::size_t>(v)]) continue;
        action.bits[static_cast<std::size_t>(v)] = 1;
        const double reward = expected_round_reward(instance, states, action);
        action.bits[static_cast<std::size_t>(v)] = 0;
        if (best_arm == -1 || reward > best_reward) {
          best_arm = v;
          best_reward = reward;
        }
      }
      if (best_arm == -1) break;
      action.bits[static_cast<std::size_t>(best_arm)] = 1;
      current = best_reward;
    }

    const std::vector<double> reached = reached_fractions(instance.network, action);
    for (int v = 0; v < m; ++v) {
      const Location& loc = instance.locations[static_cast<std::size_t>(v)];
      states[static_cast<std::size_t>(v)] = step_expected(
          states[static_cast<std::size_t>(v)],
          mixed_transition(loc.transitions, reached[static_cast<std::size_t>(v)]));
    }
    out.actions.push_back(std::move(action));
  }
  return out;
}

// Period baseline without network awareness: periods come from tables built
// as if each pull reached the full home population and neighbours never
// contributed, then due arms dispatch earliest-deadline-first with no
// spectral synchronization.
inline Schedule recharging_policy(const Instance& instance, int horizon) {
  if (horizon < 1) throw std::invalid_argument("recharging_policy: horizon must be >= 1");
  const int m = instance.size();

  std::vector<RewardTable> tables;
  tables.reserve(static_cast<std::size_t>(m));
  for (int v = 0; v < m; ++v) {
    const Location& loc = instance.locations[static_cast<std::size_t>(v)];
    RewardTable table;
    table.location_id = v;
    table.values.resize(static_cast<std::size_t>(instance.max_period));
    std::vector<double> profile;
    for (int t = 1; t <= instance.max_period; ++t) {
      profile.assign(static_cast<std::size_t>(t), 0.0);
      profile[0] = 1.0;
      table.values[static_cast<std::size_t>(t - 1)] = profile_pull_reward(loc, profile);
    }
    tables.push_back(std::move(table));
  }
  const PeriodAssignment periods = solve_periods_greedy(tables, instance.budget);

  std::vector<int> assigned;
  for (int v = 0; v < m; ++v)
    if (periods.assigned(v)) assigned.push_back(v);

  Schedule out;
  out.horizon = horizon;
  out.actions.reserve(static_cast<std::size_t>(horizon));
  SchedulerState state(m);
  for (int v : assigned) state.candidate[static_cast<std::size_t>(v)] = 1;

  for (int round = 0; round < horizon; ++round) {
    detail::advance_timers(assigned, state, round);
    std::vector<int> candidates;
    for (int v : assigned)
      if (state.candidate[static_cast<std::size_t>(v)]) candidates.push_back(v);

    ActionVector action = ActionVector::none(m);
    if (!candidates.empty()) {
      const std::vector<int> chosen = detail::earliest_deadline_set(
          candidates, state, periods, std::min<int>(instance.budget,
                                                    static_cast<int>(candidates.size())));
      detail::commit_pull(chosen, state, periods, action);
    }
    out.actions.push_back(std::move(action));
  }
  return out;
}

}  // namespace engage
