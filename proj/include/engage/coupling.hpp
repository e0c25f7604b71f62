#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "engage/linalg.hpp"
#include "engage/model.hpp"
#include "engage/period.hpp"

// Reward-coupling graph over the arms that received a visiting period. Edge
// weights measure the average reward lost when two period-compatible arms
// are pulled out of sync; the graph's Laplacian spectrum drives the pull-set
// selection in the scheduler.

namespace engage {

struct CouplingGraph {
  std::vector<int> node_ids;  // original location ids, ascending
  DenseMatrix weights;        // symmetric, zero diagonal

  int size() const { return static_cast<int>(node_ids.size()); }
};

// Overlap between the populations reached by pulling v and v', discounted by
// how often synchronized pulls can coincide. Coprime periods couple no
// reward: the pulls drift through every relative phase regardless of the
// schedule.
inline double coupling_weight(const TravelNetwork& network,
                              const PeriodAssignment& periods, int v, int v_prime) {
  if (!periods.assigned(v) || !periods.assigned(v_prime))
    throw std::invalid_argument("coupling_weight: arm without a period is outside the graph");
  if (v == v_prime) return 0.0;
  const long long tau_v = periods.period_of(v);
  const long long tau_w = periods.period_of(v_prime);
  if (std::gcd(tau_v, tau_w) == 1) return 0.0;
  const double lcm = static_cast<double>(std::lcm(tau_v, tau_w));
  double overlap = 0.0;
  for (int u = 0; u < network.size(); ++u)
    overlap += network.at(v, u) * network.at(v_prime, u);
  return overlap / lcm;
}

inline CouplingGraph build_coupling_graph(const Instance& instance,
                                          const PeriodAssignment& periods) {
  CouplingGraph graph;
  const int limit = std::min<int>(instance.size(),
                                  static_cast<int>(periods.periods.size()));
  for (int v = 0; v < limit; ++v)
    if (periods.assigned(v)) graph.node_ids.push_back(v);
  if (graph.node_ids.empty())
    throw std::invalid_argument("build_coupling_graph: no arm has an assigned period");

  const int n = graph.size();
  graph.weights = DenseMatrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = coupling_weight(instance.network, periods,
                                       graph.node_ids[static_cast<std::size_t>(i)],
                                       graph.node_ids[static_cast<std::size_t>(j)]);
      graph.weights.at(i, j) = w;
      graph.weights.at(j, i) = w;
    }
  }
  return graph;
}

inline DenseMatrix laplacian(const CouplingGraph& graph) {
  const int n = graph.size();
  DenseMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    double degree = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      degree += graph.weights.at(i, j);
      out.at(i, j) = -graph.weights.at(i, j);
    }
    out.at(i, i) = degree;
  }
  return out;
}

// Partition by positive-weight reachability; components come out sorted by
// their smallest member.
inline std::vector<std::vector<int>> connected_components(const CouplingGraph& graph) {
  const int n = graph.size();
  std::vector<std::vector<int>> components;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int start = 0; start < n; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> component;
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      component.push_back(i);
      for (int j = 0; j < n; ++j) {
        if (seen[static_cast<std::size_t>(j)] || graph.weights.at(i, j) <= 0.0) continue;
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  return components;
}

struct FiedlerSet {
  std::vector<std::vector<double>> vectors;  // unit norm, graph-local indexing
  double eigenvalue = 0.0;
};

// Spectral vectors used for pull-set proposals. Connected graph: every
// eigenvector whose eigenvalue sits within tol of the second-smallest
// distinct Laplacian eigenvalue. Disconnected graph: the zero eigenvalue has
// multiplicity equal to the component count and its eigenspace is spanned by
// the component indicators, so one normalized indicator per component is
// returned; these are the vectors supported entirely on one component.
inline std::vector<FiedlerSet> fiedler_set(const CouplingGraph& graph,
                                           double tol = 1e-8) {
  const int n = graph.size();
  if (n == 0) return {};
  if (n == 1) return {FiedlerSet{{{1.0}}, 0.0}};

  const std::vector<std::vector<int>> components = connected_components(graph);
  if (components.size() >= 2) {
    std::vector<FiedlerSet> out;
    for (const std::vector<int>& component : components) {
      std::vector<double> indicator(static_cast<std::size_t>(n), 0.0);
      const double scale = 1.0 / std::sqrt(static_cast<double>(component.size()));
      for (int i : component) indicator[static_cast<std::size_t>(i)] = scale;
      out.push_back(FiedlerSet{{std::move(indicator)}, 0.0});
    }
    return out;
  }

  const EigenDecomposition eig = symmetric_eigen(laplacian(graph));
  const double lambda2 = eig.values[1];
  FiedlerSet set;
  set.eigenvalue = lambda2;
  for (int j = 1; j < n; ++j) {
    if (std::abs(eig.values[static_cast<std::size_t>(j)] - lambda2) >
        tol * (1.0 + std::abs(lambda2)))
      break;
    std::vector<double> vec(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i)] = eig.vectors.at(i, j);
    set.vectors.push_back(std::move(vec));
  }
  return {set};
}

// Total coupling weight crossing between S and its complement. Infinite for
// the empty set so an empty incumbent never wins a cut comparison.
inline double cut_capacity(const CouplingGraph& graph, const std::vector<int>& node_set) {
  if (node_set.empty()) return std::numeric_limits<double>::infinity();
  const int n = graph.size();
  std::vector<char> inside(static_cast<std::size_t>(n), 0);
  for (int i : node_set) {
    if (i < 0 || i >= n) throw std::out_of_range("cut_capacity: node outside graph");
    inside[static_cast<std::size_t>(i)] = 1;
  }
  double cut = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (inside[static_cast<std::size_t>(i)] != inside[static_cast<std::size_t>(j)])
        cut += graph.weights.at(i, j);
  return cut;
}

// Edge list with original location ids, for inspection.
inline void write_coupling_csv(const CouplingGraph& graph, std::ostream& os) {
  os << "u,v,weight\n";
  for (int i = 0; i < graph.size(); ++i)
    for (int j = i + 1; j < graph.size(); ++j)
      if (graph.weights.at(i, j) > 0.0)
        os << graph.node_ids[static_cast<std::size_t>(i)] << ','
           << graph.node_ids[static_cast<std::size_t>(j)] << ','
           << graph.weights.at(i, j) << '\n';
}

}  // namespace engage
