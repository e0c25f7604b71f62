#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "engage/dynamics.hpp"
#include "engage/model.hpp"

// Visiting-period selection. Each arm gets a table of steady-cycle reward
// upper bounds per candidate period; the selection problem (one period per
// arm, total visit frequency within budget) is solved by sorting the slopes
// of each arm's concave value envelope and consuming the budget greedily.
// A small exact dynamic program over integer frequency units serves as the
// verification oracle.

namespace engage {

struct RewardTable {
  int location_id = 0;
  int t_min = 1;                // periods below this are excluded
  std::vector<double> values;   // values[t-1] holds the bound for period t

  int max_period() const { return static_cast<int>(values.size()); }

  double value_at(int t) const {
    if (t < 1 || t > max_period())
      throw std::out_of_range("RewardTable: period out of range");
    return values[static_cast<std::size_t>(t - 1)];
  }
};

// Steady per-round reward of pulling location v every t rounds, assuming no
// other location is ever visited. The pull treats the residents of every
// location u present at v (expected share w(v, u)); between pulls those
// populations evolve passively. Each reached population follows its own
// pull cycle chain, and its steady split just before the pull is priced
// with its own prevention and cure effects, so a location with a tiny home
// population but heavy commuter traffic still earns a large value.
inline double reach_cycle_value(const Instance& instance, int v, int t) {
  if (t < 1) throw std::invalid_argument("reach_cycle_value: t must be >= 1");
  double value = 0.0;
  for (int u = 0; u < instance.size(); ++u) {
    const double presence = instance.network.at(v, u);
    if (presence <= 0.0) continue;
    const Location& home = instance.locations[static_cast<std::size_t>(u)];
    const double mass = presence * static_cast<double>(home.population);
    double fallback_good = 1.0;
    if (home.population > 0)
      fallback_good = static_cast<double>(home.initial_good) /
                      static_cast<double>(home.population);

    Matrix2 chain = mixed_transition(home.transitions, presence);
    const Matrix2 passive = home.transitions.passive();
    for (int i = 1; i < t; ++i) chain = multiply(chain, passive);
    const StationaryResult st =
        stationary_of(chain, 1.0, ExpectedState{fallback_good, 1.0 - fallback_good});
    value += mass *
             (st.state.good * home.transitions.prevention() +
              st.state.bad * home.transitions.cure()) /
             t;
  }
  return value;
}

// Marginal steady per-round reward of adding a pull of v every t rounds on
// top of a fixed background exposure rate per population. background[u] is
// the average per-round exposure u receives from every other assigned arm;
// with an all-zero background this reduces to reach_cycle_value. Populations
// already covered by the background contribute only their uplift, which is
// what keeps the budget from being spent twice on the same commuters.
inline double marginal_cycle_value(const Instance& instance, int v, int t,
                                   const std::vector<double>& background) {
  if (t < 1) throw std::invalid_argument("marginal_cycle_value: t must be >= 1");
  double value = 0.0;
  for (int u = 0; u < instance.size(); ++u) {
    const double presence = instance.network.at(v, u);
    if (presence <= 0.0) continue;
    const Location& home = instance.locations[static_cast<std::size_t>(u)];
    const TransitionPair& tr = home.transitions;
    const double rest = std::min(1.0, background[static_cast<std::size_t>(u)]);
    const double pull = std::min(1.0, rest + presence);
    double fallback_good = 1.0;
    if (home.population > 0)
      fallback_good = static_cast<double>(home.initial_good) /
                      static_cast<double>(home.population);
    const ExpectedState fallback{fallback_good, 1.0 - fallback_good};

    const Matrix2 pull_step = mixed_transition(tr, pull);
    const Matrix2 rest_step = mixed_transition(tr, rest);
    Matrix2 cycle = pull_step;
    for (int i = 1; i < t; ++i) cycle = multiply(cycle, rest_step);

    auto benefit = [&](const ExpectedState& s, double exposure) {
      return exposure * (tr.prevention() * s.good + tr.cure() * s.bad);
    };

    ExpectedState s = stationary_of(cycle, 1.0, fallback).state;
    double with_pull = benefit(s, pull);
    s = step_expected(s, pull_step);
    for (int i = 1; i < t; ++i) {
      with_pull += benefit(s, rest);
      s = step_expected(s, rest_step);
    }
    with_pull /= t;

    const double without_pull =
        benefit(stationary_of(rest_step, 1.0, fallback).state, rest);
    value += static_cast<double>(home.population) *
             std::max(0.0, with_pull - without_pull);
  }
  return value;
}

// Table of the reach-weighted per-period bounds for one arm. Entries below
// t_min (a minimum-frequency fairness floor) are excluded and stored as NaN.
inline RewardTable build_reward_table(const Instance& instance, int location_id,
                                      int t_min = 1) {
  if (location_id < 0 || location_id >= instance.size())
    throw std::invalid_argument("build_reward_table: bad location id");
  if (t_min < 1 || t_min > instance.max_period)
    throw std::invalid_argument("build_reward_table: t_min out of range");
  RewardTable table;
  table.location_id = location_id;
  table.t_min = t_min;
  table.values.assign(static_cast<std::size_t>(instance.max_period),
                      std::numeric_limits<double>::quiet_NaN());
  for (int t = t_min; t <= instance.max_period; ++t)
    table.values[static_cast<std::size_t>(t - 1)] =
        reach_cycle_value(instance, location_id, t);
  return table;
}

// Entrywise (H/n)^alpha / alpha. alpha = 1 is plain per-capita value;
// alpha < 1 compresses large values, favouring arms with small rewards.
inline RewardTable welfare_transform(const RewardTable& table, long long population,
                                     double alpha) {
  if (alpha == 0.0 || alpha > 1.0)
    throw std::invalid_argument("welfare_transform: alpha must be nonzero and <= 1");
  if (population < 1)
    throw std::invalid_argument("welfare_transform: population must be positive");
  RewardTable out = table;
  for (double& v : out.values) {
    if (!std::isfinite(v)) continue;
    if (v == 0.0 && alpha < 0.0) {
      v = -std::numeric_limits<double>::infinity();
      continue;
    }
    v = std::pow(v / static_cast<double>(population), alpha) / alpha;
  }
  return out;
}

struct EnvelopeSegment {
  int location_id = 0;
  double freq_lo = 0.0;
  double freq_hi = 0.0;
  double slope = 0.0;
  int period_hi = 0;  // period whose frequency is freq_hi (0 at the origin)
};

// Upper concave envelope of {(0, 0)} plus the points (1/t, value[t]) in
// frequency space. Segments with nonpositive slope are dropped, so the
// returned segments tile [0, x*] with strictly decreasing slopes, where x*
// is the frequency maximising the envelope.
inline std::vector<EnvelopeSegment> concave_envelope(const RewardTable& table) {
  struct Point {
    double x;
    double y;
    int period;
  };
  std::vector<Point> pts{{0.0, 0.0, 0}};
  for (int t = table.max_period(); t >= std::max(1, table.t_min); --t) {
    const double v = table.value_at(t);
    if (!std::isfinite(v)) continue;
    pts.push_back({1.0 / t, v, t});
  }
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x; });

  auto slope = [](const Point& a, const Point& b) {
    return (b.y - a.y) / (b.x - a.x);
  };

  std::vector<Point> hull;
  for (const Point& p : pts) {
    while (hull.size() >= 2 &&
           slope(hull[hull.size() - 2], hull.back()) <= slope(hull.back(), p))
      hull.pop_back();
    hull.push_back(p);
  }

  std::vector<EnvelopeSegment> out;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    const double s = slope(hull[i - 1], hull[i]);
    if (!(s > 0.0)) break;  // slopes only decrease from here on
    out.push_back({table.location_id, hull[i - 1].x, hull[i].x, s, hull[i].period});
  }
  return out;
}

struct PeriodAssignment {
  static constexpr int kNever = 0;
  std::vector<int> periods;  // indexed by location id; kNever = not visited

  int period_of(int v) const { return periods.at(static_cast<std::size_t>(v)); }
  bool assigned(int v) const { return period_of(v) != kNever; }

  double total_frequency() const {
    double f = 0.0;
    for (int t : periods)
      if (t != kNever) f += 1.0 / t;
    return f;
  }
};

struct PeriodSolve {
  PeriodAssignment assignment;
  double objective = 0.0;         // sum of table values at assigned periods
  double fractional_bound = 0.0;  // value of the fractional relaxation
};

// Greedy concave-knapsack solve: all arms' envelope segments are sorted by
// decreasing slope and the frequency budget is consumed left to right. The
// single arm whose last segment does not fit is rounded down to its previous
// breakpoint, which keeps the assignment budget-feasible and loses at most
// that one segment relative to the fractional optimum.
inline PeriodSolve solve_periods_greedy_detailed(const std::vector<RewardTable>& tables,
                                                 int budget) {
  if (budget < 1) throw std::invalid_argument("solve_periods_greedy: budget must be >= 1");
  int max_id = -1;
  for (const RewardTable& t : tables) max_id = std::max(max_id, t.location_id);

  std::vector<EnvelopeSegment> segments;
  for (const RewardTable& t : tables) {
    const std::vector<EnvelopeSegment> env = concave_envelope(t);
    segments.insert(segments.end(), env.begin(), env.end());
  }
  std::sort(segments.begin(), segments.end(),
            [](const EnvelopeSegment& a, const EnvelopeSegment& b) {
              if (a.slope != b.slope) return a.slope > b.slope;
              if (a.location_id != b.location_id) return a.location_id < b.location_id;
              return a.freq_lo < b.freq_lo;
            });

  PeriodSolve out;
  out.assignment.periods.assign(static_cast<std::size_t>(max_id + 1),
                                PeriodAssignment::kNever);
  double remaining = static_cast<double>(budget);
  for (const EnvelopeSegment& seg : segments) {
    if (remaining <= 1e-12) break;
    const double width = seg.freq_hi - seg.freq_lo;
    if (width <= remaining + 1e-12) {
      remaining = std::max(0.0, remaining - width);
      out.fractional_bound += seg.slope * width;
      out.assignment.periods[static_cast<std::size_t>(seg.location_id)] = seg.period_hi;
    } else {
      out.fractional_bound += seg.slope * remaining;  // truncated segment
      remaining = 0.0;
      break;
    }
  }

  std::vector<const RewardTable*> by_id(static_cast<std::size_t>(max_id + 1), nullptr);
  for (const RewardTable& t : tables) by_id[static_cast<std::size_t>(t.location_id)] = &t;
  for (int v = 0; v <= max_id; ++v) {
    const int tau = out.assignment.periods[static_cast<std::size_t>(v)];
    if (tau != PeriodAssignment::kNever && by_id[static_cast<std::size_t>(v)])
      out.objective += by_id[static_cast<std::size_t>(v)]->value_at(tau);
  }
  return out;
}

inline PeriodAssignment solve_periods_greedy(const std::vector<RewardTable>& tables,
                                             int budget) {
  return solve_periods_greedy_detailed(tables, budget).assignment;
}

// Exact optimum by dynamic programming over integer frequency units M/t with
// M = lcm(1..T). Oracle scale only: up to 10 arms and T <= 8. Ties are
// broken toward smaller total frequency, then lower location id.
inline PeriodSolve solve_periods_exact_detailed(const std::vector<RewardTable>& tables,
                                                int budget) {
  if (budget < 1) throw std::invalid_argument("solve_periods_exact: budget must be >= 1");
  const int n = static_cast<int>(tables.size());
  int t_max = 0;
  for (const RewardTable& t : tables) t_max = std::max(t_max, t.max_period());
  if (n > 10 || t_max > 8)
    throw std::invalid_argument("solve_periods_exact: oracle limited to 10 arms, T <= 8");

  long long unit = 1;
  for (int t = 1; t <= t_max; ++t) unit = std::lcm(unit, static_cast<long long>(t));
  const int total_units = static_cast<int>(unit * budget);

  // best[i][u]: best value over arms i.. with u frequency units available.
  std::vector<std::vector<double>> best(static_cast<std::size_t>(n + 1),
                                        std::vector<double>(static_cast<std::size_t>(total_units + 1), 0.0));
  std::vector<std::vector<int>> choice(static_cast<std::size_t>(n),
                                       std::vector<int>(static_cast<std::size_t>(total_units + 1), 0));
  for (int i = n - 1; i >= 0; --i) {
    const RewardTable& table = tables[static_cast<std::size_t>(i)];
    for (int u = 0; u <= total_units; ++u) {
      double best_value = best[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(u)];
      int best_cost = 0;
      int best_t = 0;
      for (int t = std::max(1, table.t_min); t <= table.max_period(); ++t) {
        const double v = table.value_at(t);
        if (!std::isfinite(v)) continue;
        const int cost = static_cast<int>(unit / t);
        if (cost > u) continue;
        const double candidate =
            v + best[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(u - cost)];
        if (candidate > best_value ||
            (candidate == best_value && cost < best_cost)) {
          best_value = candidate;
          best_cost = cost;
          best_t = t;
        }
      }
      best[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)] = best_value;
      choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)] = best_t;
    }
  }

  PeriodSolve out;
  int max_id = -1;
  for (const RewardTable& t : tables) max_id = std::max(max_id, t.location_id);
  out.assignment.periods.assign(static_cast<std::size_t>(max_id + 1),
                                PeriodAssignment::kNever);
  int u = total_units;
  for (int i = 0; i < n; ++i) {
    const int t = choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)];
    if (t != 0) {
      out.assignment.periods[static_cast<std::size_t>(tables[static_cast<std::size_t>(i)].location_id)] = t;
      out.objective += tables[static_cast<std::size_t>(i)].value_at(t);
      u -= static_cast<int>(unit / t);
    }
  }
  out.fractional_bound = out.objective;
  return out;
}

inline PeriodAssignment solve_periods_exact(const std::vector<RewardTable>& tables,
                                            int budget) {
  return solve_periods_exact_detailed(tables, budget).assignment;
}

// Self-consistent period selection. The upper-bound tables assume no other
// location is ever visited, which spends budget twice on shared commuter
// populations. Each refinement sweep derives every population's average
// background exposure from the current assignment, rebuilds the tables as
// marginal gains over that background, and re-solves the knapsack. An
// optional period grid restricts the candidate periods; harmonic grids
// (powers of two, or any chain where each period divides the next) let the
// dispatcher pack pulls into the budget with no deferral loss.
inline PeriodAssignment refine_periods(const Instance& instance, int budget,
                                       int t_min = 1, int sweeps = 2,
                                       const std::vector<int>& grid = {}) {
  const auto allowed = [&](int t) {
    if (t < t_min) return false;
    if (grid.empty()) return true;
    return std::find(grid.begin(), grid.end(), t) != grid.end();
  };

  std::vector<RewardTable> tables;
  tables.reserve(static_cast<std::size_t>(instance.size()));
  for (int v = 0; v < instance.size(); ++v) {
    RewardTable table = build_reward_table(instance, v, t_min);
    for (int t = 1; t <= table.max_period(); ++t)
      if (!allowed(t))
        table.values[static_cast<std::size_t>(t - 1)] =
            std::numeric_limits<double>::quiet_NaN();
    tables.push_back(std::move(table));
  }
  PeriodAssignment assignment = solve_periods_greedy(tables, budget);

  const int m = instance.size();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    std::vector<double> rate(static_cast<std::size_t>(m), 0.0);
    for (int x = 0; x < m; ++x) {
      if (!assignment.assigned(x)) continue;
      const double freq = 1.0 / assignment.period_of(x);
      for (int u = 0; u < m; ++u)
        rate[static_cast<std::size_t>(u)] += instance.network.at(x, u) * freq;
    }

    std::vector<double> background(static_cast<std::size_t>(m));
    for (int v = 0; v < m; ++v) {
      const double own_freq =
          assignment.assigned(v) ? 1.0 / assignment.period_of(v) : 0.0;
      for (int u = 0; u < m; ++u)
        background[static_cast<std::size_t>(u)] =
            std::max(0.0, rate[static_cast<std::size_t>(u)] -
                              instance.network.at(v, u) * own_freq);
      for (int t = 1; t <= instance.max_period; ++t)
        tables[static_cast<std::size_t>(v)].values[static_cast<std::size_t>(t - 1)] =
            allowed(t) ? marginal_cycle_value(instance, v, t, background)
                       : std::numeric_limits<double>::quiet_NaN();
    }
    assignment = solve_periods_greedy(tables, budget);
  }
  return assignment;
}

}  // namespace engage
