#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "engage/model.hpp"
#include "engage/rng.hpp"
#include "engage/scheduler.hpp"

// Individual-level stochastic simulation with seeded substreams, replication
// statistics, and the analysis metrics for intervention-rate fairness and
// network-perturbation sensitivity.

namespace engage {

struct PopulationState {
  std::vector<long long> good;  // per-location count in the good state
};

struct SimTrace {
  std::vector<double> rewards;
  std::vector<ActionVector> actions;
  std::vector<PopulationState> states;  // state the reward was computed on

  double average_reward() const {
    if (rewards.empty()) return 0.0;
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return sum / static_cast<double>(rewards.size());
  }
};

namespace detail {

constexpr std::uint64_t kSimStream = 0x73696d756cull;

inline long long binomial_draw(Substream& stream, long long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<long long> dist(n, p);
  return dist(stream);
}

}  // namespace detail

// One realized run of a schedule. Per round, each individual independently
// transitions by the mixed law of its home location (active with probability
// equal to the reached fraction, passive otherwise), realized per compartment
// as a single binomial draw with the mixed rate. The round reward is the
// expected intervention benefit given the realized state. Substreams are
// keyed by (round, location), so the seed alone fixes the whole trace.
inline SimTrace simulate(const Instance& instance, const Schedule& schedule,
                         std::uint64_t seed) {
  const int m = instance.size();
  std::vector<long long> good(static_cast<std::size_t>(m));
  for (int v = 0; v < m; ++v)
    good[static_cast<std::size_t>(v)] = instance.locations[static_cast<std::size_t>(v)].initial_good;

  const std::uint64_t base = fold(seed, detail::kSimStream);
  SimTrace trace;
  trace.rewards.reserve(schedule.actions.size());
  trace.actions.reserve(schedule.actions.size());
  trace.states.reserve(schedule.actions.size());

  for (std::size_t round = 0; round < schedule.actions.size(); ++round) {
    const ActionVector& action = schedule.actions[round];
    const std::vector<double> reached = reached_fractions(instance.network, action);

    double reward = 0.0;
    for (int v = 0; v < m; ++v) {
      const Location& loc = instance.locations[static_cast<std::size_t>(v)];
      const long long s = good[static_cast<std::size_t>(v)];
      reward += reached[static_cast<std::size_t>(v)] *
                (loc.transitions.prevention() * static_cast<double>(s) +
                 loc.transitions.cure() * static_cast<double>(loc.population - s));
    }
    trace.rewards.push_back(reward);
    trace.actions.push_back(action);
    trace.states.push_back(PopulationState{good});

    for (int v = 0; v < m; ++v) {
      const Location& loc = instance.locations[static_cast<std::size_t>(v)];
      const double w = reached[static_cast<std::size_t>(v)];
      const double p_gb = w * loc.transitions.p_a_gb + (1.0 - w) * loc.transitions.p_p_gb;
      const double p_bg = w * loc.transitions.p_a_bg + (1.0 - w) * loc.transitions.p_p_bg;
      Substream stream(fold(fold(base, round), static_cast<std::uint64_t>(v)));
      const long long s = good[static_cast<std::size_t>(v)];
      const long long turned_bad = detail::binomial_draw(stream, s, p_gb);
      const long long turned_good = detail::binomial_draw(stream, loc.population - s, p_bg);
      good[static_cast<std::size_t>(v)] = s - turned_bad + turned_good;
    }
  }
  return trace;
}

// A policy produces a schedule from the instance, the horizon and a seed;
// deterministic policies ignore the seed.
using PolicyFn = std::function<Schedule(const Instance&, int, std::uint64_t)>;

inline SimTrace simulate(const Instance& instance, const PolicyFn& policy,
                         int horizon, std::uint64_t seed) {
  return simulate(instance, policy(instance, horizon, seed), seed);
}

struct RunStats {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 1.96 * sample std / sqrt(replications)
  int replications = 0;
};

inline RunStats summarize(const std::vector<double>& values) {
  RunStats stats;
  stats.replications = static_cast<int>(values.size());
  if (values.empty()) return stats;
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return stats;
  double sq = 0.0;
  for (double v : values) sq += (v - stats.mean) * (v - stats.mean);
  const double sd = std::sqrt(sq / static_cast<double>(values.size() - 1));
  stats.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  return stats;
}

// Independent replications with per-replication seeds derived from the
// master seed. Replications run on a small thread pool; results are stored
// by index, so parallel and sequential execution agree exactly.
inline RunStats replicate(const Instance& instance, const PolicyFn& policy,
                          int horizon, int reps, std::uint64_t master_seed,
                          int threads = 0) {
  if (reps < 2) throw std::invalid_argument("replicate: need at least 2 replications");
  std::vector<double> results(static_cast<std::size_t>(reps), 0.0);

  auto run_range = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      const std::uint64_t seed = fold(master_seed, static_cast<std::uint64_t>(r));
      const Schedule schedule = policy(instance, horizon, seed);
      results[static_cast<std::size_t>(r)] = simulate(instance, schedule, seed).average_reward();
    }
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, reps));
  if (workers == 1) {
    run_range(0, reps);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (reps + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(reps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (std::thread& t : pool) t.join();
  }
  return summarize(results);
}

// Average per-round pull frequency for the highest-risk quantile of
// locations versus the rest. Risk ranks locations by high passive decay and
// low passive recovery (rank sum, lowest id breaking ties).
inline std::pair<double, double> disadvantaged_rates(const Instance& instance,
                                                     const Schedule& schedule,
                                                     double quantile = 0.15) {
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("disadvantaged_rates: quantile must be in (0,1)");
  const int m = instance.size();

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> rank_decay(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double pa = instance.locations[static_cast<std::size_t>(a)].transitions.p_p_gb;
    const double pb = instance.locations[static_cast<std::size_t>(b)].transitions.p_p_gb;
    return pa != pb ? pa > pb : a < b;
  });
  for (int i = 0; i < m; ++i) rank_decay[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

  std::iota(order.begin(), order.end(), 0);
  std::vector<int> rank_recovery(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double pa = instance.locations[static_cast<std::size_t>(a)].transitions.p_p_bg;
    const double pb = instance.locations[static_cast<std::size_t>(b)].transitions.p_p_bg;
    return pa != pb ? pa < pb : a < b;
  });
  for (int i = 0; i < m; ++i)
    rank_recovery[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;

  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int sa = rank_decay[static_cast<std::size_t>(a)] + rank_recovery[static_cast<std::size_t>(a)];
    const int sb = rank_decay[static_cast<std::size_t>(b)] + rank_recovery[static_cast<std::size_t>(b)];
    return sa != sb ? sa < sb : a < b;
  });

  const int top = std::max(1, static_cast<int>(quantile * m));
  std::vector<char> risky(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < top && i < m; ++i)
    risky[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  std::vector<long long> pulls(static_cast<std::size_t>(m), 0);
  for (const ActionVector& action : schedule.actions)
    for (int v = 0; v < m; ++v) pulls[static_cast<std::size_t>(v)] += action.bits[static_cast<std::size_t>(v)];

  const double horizon = static_cast<double>(std::max<std::size_t>(1, schedule.actions.size()));
  double risky_rate = 0.0, rest_rate = 0.0;
  int rest_count = 0;
  for (int v = 0; v < m; ++v) {
    const double rate = static_cast<double>(pulls[static_cast<std::size_t>(v)]) / horizon;
    if (risky[static_cast<std::size_t>(v)])
      risky_rate += rate;
    else {
      rest_rate += rate;
      ++rest_count;
    }
  }
  risky_rate /= static_cast<double>(top);
  if (rest_count > 0) rest_rate /= static_cast<double>(rest_count);
  return {risky_rate, rest_rate};
}

// Rewires a fraction of the commuting edges: removes that many off-diagonal
// positive pairs uniformly at random, inserts the same number of previously
// absent pairs carrying the removed weight, then renormalizes every column.
// fraction = 0 returns the instance unchanged.
inline Instance perturb_network(const Instance& instance, double fraction,
                                std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("perturb_network: fraction out of [0,1]");
  Instance out = instance;
  const int m = instance.size();
  if (fraction == 0.0 || m < 2) return out;

  std::vector<std::pair<int, int>> edges, absent;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      if (instance.network.at(u, v) > 0.0 || instance.network.at(v, u) > 0.0)
        edges.emplace_back(u, v);
      else
        absent.emplace_back(u, v);
    }

  const int remove_count = static_cast<int>(fraction * static_cast<double>(edges.size()));
  if (remove_count == 0) return out;

  Substream stream(fold(seed, 0x70657274ull));
  for (int i = 0; i < remove_count; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          stream.below(static_cast<std::uint64_t>(edges.size() - static_cast<std::size_t>(i)));
    std::swap(edges[static_cast<std::size_t>(i)], edges[j]);
  }

  std::vector<double> removed_mass;
  for (int i = 0; i < remove_count; ++i) {
    const auto [u, v] = edges[static_cast<std::size_t>(i)];
    removed_mass.push_back(out.network.at(u, v) + out.network.at(v, u));
    out.network.set(u, v, 0.0);
    out.network.set(v, u, 0.0);
  }

  const int insert_count = std::min<int>(remove_count, static_cast<int>(absent.size()));
  for (int i = 0; i < insert_count; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          stream.below(static_cast<std::uint64_t>(absent.size() - static_cast<std::size_t>(i)));
    std::swap(absent[static_cast<std::size_t>(i)], absent[j]);
    const auto [u, v] = absent[static_cast<std::size_t>(i)];
    const double half = removed_mass[static_cast<std::size_t>(i)] / 2.0;
    out.network.set(u, v, half);
    out.network.set(v, u, half);
  }

  for (int v = 0; v < m; ++v) {
    const double sum = out.network.column_sum(v);
    if (sum <= 1e-12)
      out.network.set(v, v, 1.0);  // everyone stays home if the column emptied
    else
      out.network.scale_column(v, 1.0 / sum);
  }
  return out;
}

}  // namespace engage
