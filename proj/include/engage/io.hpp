#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "engage/model.hpp"
#include "engage/period.hpp"
#include "engage/rng.hpp"
#include "engage/scheduler.hpp"
#include "engage/simulator.hpp"

// Instance (de)serialization, synthetic instance generation, and the CSV
// output formats used by the command-line tool.

namespace engage {

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string message, std::vector<Violation> violations)
      : std::runtime_error(std::move(message)), violations(std::move(violations)) {}
  std::vector<Violation> violations;
};

inline nlohmann::json instance_to_json(const Instance& instance) {
  nlohmann::json j;
  j["budget"] = instance.budget;
  j["max_period"] = instance.max_period;
  j["locations"] = nlohmann::json::array();
  for (const Location& loc : instance.locations) {
    j["locations"].push_back({{"id", loc.id},
                              {"population", loc.population},
                              {"initial_good", loc.initial_good},
                              {"p_a_gb", loc.transitions.p_a_gb},
                              {"p_a_bg", loc.transitions.p_a_bg},
                              {"p_p_gb", loc.transitions.p_p_gb},
                              {"p_p_bg", loc.transitions.p_p_bg}});
  }
  j["commute"] = nlohmann::json::array();
  const int m = instance.size();
  for (int at = 0; at < m; ++at)
    for (int home = 0; home < m; ++home)
      if (instance.network.at(at, home) > 0.0)
        j["commute"].push_back({{"at", at},
                                {"home", home},
                                {"weight", instance.network.at(at, home)}});
  return j;
}

// Builds an Instance from its JSON form without validating the modelling
// assumptions. Missing commute weights (self weights included) default to
// zero; columns off by no more than 1e-6 are renormalized.
inline Instance parse_instance_json(const nlohmann::json& j) {
  Instance instance;
  instance.budget = j.at("budget").get<int>();
  instance.max_period = j.at("max_period").get<int>();

  const auto& locations = j.at("locations");
  if (!locations.is_array() || locations.empty())
    throw std::runtime_error("instance: locations must be a non-empty array");
  for (const auto& lj : locations) {
    Location loc;
    loc.id = lj.at("id").get<int>();
    loc.population = lj.at("population").get<long long>();
    loc.initial_good = lj.at("initial_good").get<long long>();
    loc.transitions.p_a_gb = lj.at("p_a_gb").get<double>();
    loc.transitions.p_a_bg = lj.at("p_a_bg").get<double>();
    loc.transitions.p_p_gb = lj.at("p_p_gb").get<double>();
    loc.transitions.p_p_bg = lj.at("p_p_bg").get<double>();
    instance.locations.push_back(loc);
  }

  const int m = instance.size();
  instance.network = TravelNetwork(m);
  if (j.contains("commute")) {
    for (const auto& ej : j.at("commute")) {
      const int at = ej.at("at").get<int>();
      const int home = ej.at("home").get<int>();
      if (at < 0 || at >= m || home < 0 || home >= m)
        throw std::runtime_error("instance: commute entry references unknown location");
      instance.network.set(at, home, ej.at("weight").get<double>());
    }
  }

  for (int v = 0; v < m; ++v) {
    const double sum = instance.network.column_sum(v);
    if (std::abs(sum - 1.0) > 1e-9 && std::abs(sum - 1.0) <= 1e-6)
      instance.network.scale_column(v, 1.0 / sum);
  }
  return instance;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  Instance instance = parse_instance_json(j);
  std::vector<Violation> violations = validate_instance(instance);
  if (!violations.empty()) {
    std::ostringstream os;
    os << path << ": instance failed validation:";
    for (const Violation& v : violations) os << "\n  " << v.text();
    throw ValidationError(os.str(), std::move(violations));
  }
  return instance;
}

inline void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << instance_to_json(instance).dump(2) << '\n';
}

struct TransitionRanges {
  double p_p_gb_lo = 0.05, p_p_gb_hi = 0.25;
  double p_p_bg_lo = 0.0, p_p_bg_hi = 0.05;
  double p_a_gb_lo = 0.0, p_a_gb_hi = 0.2;
  double p_a_bg_lo = 0.3, p_a_bg_hi = 0.7;
  bool zero_prevention = false;  // forces p_a_gb = p_p_gb after sampling
};

// Rejection-samples transition rates inside the ranges until all three
// modelling assumptions hold.
inline TransitionPair generate_transitions(std::uint64_t seed,
                                           const TransitionRanges& ranges) {
  Substream stream(fold(seed, 0x7472616e73ull));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    TransitionPair t;
    t.p_p_gb = stream.uniform(ranges.p_p_gb_lo, ranges.p_p_gb_hi);
    t.p_p_bg = stream.uniform(ranges.p_p_bg_lo, ranges.p_p_bg_hi);
    t.p_a_gb = ranges.zero_prevention ? t.p_p_gb
                                      : stream.uniform(ranges.p_a_gb_lo, ranges.p_a_gb_hi);
    t.p_a_bg = stream.uniform(ranges.p_a_bg_lo, ranges.p_a_bg_hi);

    const bool a1 = t.p_p_gb >= t.p_a_gb && t.p_a_bg >= t.p_p_bg;
    const bool a2 = 1.0 - t.p_p_gb > t.p_p_bg && 1.0 - t.p_a_gb > t.p_a_bg;
    const bool a3 = t.cure() > t.prevention();
    if (a1 && a2 && a3) return t;
  }
  throw std::runtime_error("generate_transitions: ranges admit no valid rates");
}

struct GeneratorConfig {
  int m = 50;
  double attach_degree = 1.5;   // expected edges added per new node
  double radius = 0.2;          // locality scale of the attachment kernel
  double self_stay = 0.5;       // commuting weight kept at home
  TransitionRanges transitions;
  long long pop_min = 50, pop_max = 500;
  double small_pop_fraction = 0.0;  // share of locations drawn from the small tier
  long long small_pop_min = 10, small_pop_max = 80;
  double initial_good_frac = 1.0;
  int budget = 5;
  int max_period = 10;
  std::uint64_t seed = 0;
};

// Spatial preferential attachment: nodes placed uniformly in the unit
// square, each new node attaching to existing ones with probability
// proportional to (degree + 1) * exp(-distance / radius). Commuting splits
// 1 - self_stay equally among graph neighbours.
inline Instance generate_synthetic(const GeneratorConfig& config) {
  if (config.m < 1) throw std::invalid_argument("generate_synthetic: m must be >= 1");
  if (config.m < static_cast<int>(config.attach_degree) + 1)
    throw std::invalid_argument("generate_synthetic: m must exceed the attachment degree");
  if (!(config.self_stay >= 0.0 && config.self_stay <= 1.0))
    throw std::invalid_argument("generate_synthetic: self_stay out of [0,1]");
  if (config.budget < 1 || config.budget > config.m)
    throw std::invalid_argument("generate_synthetic: budget out of range");

  const int m = config.m;
  Substream stream(fold(config.seed, 0x67656e65ull));

  std::vector<double> xs(static_cast<std::size_t>(m)), ys(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    xs[static_cast<std::size_t>(i)] = stream.uniform01();
    ys[static_cast<std::size_t>(i)] = stream.uniform01();
  }

  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(m));
  std::vector<int> degree(static_cast<std::size_t>(m), 0);
  const int base_edges = static_cast<int>(config.attach_degree);
  const double extra_edge_prob = config.attach_degree - base_edges;

  for (int i = 1; i < m; ++i) {
    int want = std::min(i, base_edges + (stream.uniform01() < extra_edge_prob ? 1 : 0));
    std::vector<int> targets;
    std::vector<char> taken(static_cast<std::size_t>(i), 0);
    while (static_cast<int>(targets.size()) < want) {
      double total = 0.0;
      std::vector<double> weight(static_cast<std::size_t>(i), 0.0);
      for (int j = 0; j < i; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        const double dx = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
        const double dy = ys[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(j)];
        const double dist = std::sqrt(dx * dx + dy * dy);
        weight[static_cast<std::size_t>(j)] =
            (degree[static_cast<std::size_t>(j)] + 1.0) * std::exp(-dist / config.radius);
        total += weight[static_cast<std::size_t>(j)];
      }
      if (total <= 0.0) break;
      double pick = stream.uniform01() * total;
      int chosen = -1;
      for (int j = 0; j < i; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        pick -= weight[static_cast<std::size_t>(j)];
        if (pick <= 0.0) {
          chosen = j;
          break;
        }
      }
      if (chosen < 0) {
        for (int j = i - 1; j >= 0; --j)
          if (!taken[static_cast<std::size_t>(j)]) {
            chosen = j;
            break;
          }
      }
      taken[static_cast<std::size_t>(chosen)] = 1;
      targets.push_back(chosen);
    }
    for (int j : targets) {
      adjacency[static_cast<std::size_t>(i)].push_back(j);
      adjacency[static_cast<std::size_t>(j)].push_back(i);
      ++degree[static_cast<std::size_t>(i)];
      ++degree[static_cast<std::size_t>(j)];
    }
  }

  Instance instance;
  instance.budget = config.budget;
  instance.max_period = config.max_period;
  instance.network = TravelNetwork(m);
  for (int v = 0; v < m; ++v) {
    const std::vector<int>& neighbours = adjacency[static_cast<std::size_t>(v)];
    if (neighbours.empty()) {
      instance.network.set(v, v, 1.0);
    } else {
      instance.network.set(v, v, config.self_stay);
      const double share = (1.0 - config.self_stay) / static_cast<double>(neighbours.size());
      for (int u : neighbours) instance.network.set(u, v, share);
    }
  }

  for (int v = 0; v < m; ++v) {
    Location loc;
    loc.id = v;
    const bool small_tier = stream.uniform01() < config.small_pop_fraction;
    const long long lo = small_tier ? config.small_pop_min : config.pop_min;
    const long long hi = small_tier ? config.small_pop_max : config.pop_max;
    loc.population = lo + static_cast<long long>(stream.below(static_cast<std::uint64_t>(hi - lo + 1)));
    loc.initial_good = std::min<long long>(
        loc.population,
        static_cast<long long>(std::llround(config.initial_good_frac *
                                            static_cast<double>(loc.population))));
    loc.transitions = generate_transitions(fold(config.seed, 0x1000u + static_cast<std::uint64_t>(v)),
                                           config.transitions);
    instance.locations.push_back(loc);
  }
  return instance;
}

// Named presets for the experiment harness. Sizes and degrees approximate
// street-graph scale; food-pantry instances have no prevention effect and
// rural ones skew toward small communities.
inline GeneratorConfig preset_config(const std::string& name) {
  GeneratorConfig config;
  if (name == "urban") {
    config.m = 431;
    config.attach_degree = 1.46;
    config.radius = 0.08;
    config.pop_min = 100;
    config.pop_max = 1000;
    config.budget = 10;
  } else if (name == "rural") {
    config.m = 631;
    config.attach_degree = 1.27;
    config.radius = 0.05;
    config.pop_min = 100;
    config.pop_max = 600;
    config.small_pop_fraction = 0.6;
    config.small_pop_min = 10;
    config.small_pop_max = 80;
    config.budget = 10;
  } else if (name == "food") {
    config.m = 561;
    config.attach_degree = 1.43;
    config.radius = 0.08;
    config.pop_min = 100;
    config.pop_max = 1000;
    config.budget = 10;
    config.transitions.zero_prevention = true;
  } else if (name == "synthetic") {
    config.m = 50;
    config.attach_degree = 2.0;
    config.radius = 0.3;
    config.pop_min = 50;
    config.pop_max = 500;
    config.budget = 5;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return config;
}

inline nlohmann::json config_to_json(const GeneratorConfig& c) {
  return {{"m", c.m},
          {"attach_degree", c.attach_degree},
          {"radius", c.radius},
          {"self_stay", c.self_stay},
          {"pop_min", c.pop_min},
          {"pop_max", c.pop_max},
          {"small_pop_fraction", c.small_pop_fraction},
          {"small_pop_min", c.small_pop_min},
          {"small_pop_max", c.small_pop_max},
          {"initial_good_frac", c.initial_good_frac},
          {"budget", c.budget},
          {"max_period", c.max_period},
          {"seed", c.seed},
          {"transitions",
           {{"p_p_gb", {c.transitions.p_p_gb_lo, c.transitions.p_p_gb_hi}},
            {"p_p_bg", {c.transitions.p_p_bg_lo, c.transitions.p_p_bg_hi}},
            {"p_a_gb", {c.transitions.p_a_gb_lo, c.transitions.p_a_gb_hi}},
            {"p_a_bg", {c.transitions.p_a_bg_lo, c.transitions.p_a_bg_hi}},
            {"zero_prevention", c.transitions.zero_prevention}}}};
}

// --- CSV output ---------------------------------------------------------

inline std::string csv_join_ids(const std::vector<int>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ',';
    os << ids[i];
  }
  return os.str();
}

inline void write_periods_csv(const std::vector<RewardTable>& tables,
                              const PeriodAssignment& assignment, std::ostream& os) {
  os << "location_id,period,table_value\n";
  for (const RewardTable& table : tables) {
    const int v = table.location_id;
    const int tau = v < static_cast<int>(assignment.periods.size())
                        ? assignment.periods[static_cast<std::size_t>(v)]
                        : PeriodAssignment::kNever;
    os << v << ',';
    if (tau == PeriodAssignment::kNever)
      os << "never,0";
    else
      os << tau << ',' << table.value_at(tau);
    os << '\n';
  }
}

inline void write_schedule_csv(const Schedule& schedule, std::ostream& os) {
  os << "round,pulled_ids\n";
  for (int t = 0; t < static_cast<int>(schedule.actions.size()); ++t) {
    const std::string ids = csv_join_ids(schedule.actions[static_cast<std::size_t>(t)].pulled_ids());
    os << t << ',';
    if (ids.find(',') != std::string::npos)
      os << '"' << ids << '"';
    else
      os << ids;
    os << '\n';
  }
}

inline void write_trace_csv(const SimTrace& trace, std::ostream& os) {
  os << "round,reward,pulled_ids\n";
  for (std::size_t t = 0; t < trace.rewards.size(); ++t) {
    const std::string ids = csv_join_ids(trace.actions[t].pulled_ids());
    os << t << ',' << trace.rewards[t] << ',';
    if (ids.find(',') != std::string::npos)
      os << '"' << ids << '"';
    else
      os << ids;
    os << '\n';
  }
}

struct StatsRow {
  std::string policy;
  RunStats stats;
  int horizon = 0;
  std::uint64_t seed = 0;
};

inline void write_stats_csv(const std::vector<StatsRow>& rows, std::ostream& os) {
  os << "policy,mean,ci_half_width,reps,horizon,seed\n";
  for (const StatsRow& row : rows)
    os << row.policy << ',' << row.stats.mean << ',' << row.stats.ci_half_width << ','
       << row.stats.replications << ',' << row.horizon << ',' << row.seed << '\n';
}

struct CompareRow {
  int budget = 0;
  std::string policy;
  RunStats stats;
  int horizon = 0;
  std::uint64_t seed = 0;
};

inline void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os) {
  os << "budget,policy,mean,ci_half_width,reps,horizon,seed\n";
  for (const CompareRow& row : rows)
    os << row.budget << ',' << row.policy << ',' << row.stats.mean << ','
       << row.stats.ci_half_width << ',' << row.stats.replications << ','
       << row.horizon << ',' << row.seed << '\n';
}

}  // namespace engage
