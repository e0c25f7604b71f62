#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for networked periodic-intervention planning: the
// per-location individual transition pairs, the commuting network, problem
// instances and per-round action vectors, plus validation of the modelling
// assumptions the planner relies on.

namespace engage {

// 2x2 row-stochastic matrix over the (good, bad) individual states.
using Matrix2 = std::array<std::array<double, 2>, 2>;

inline Matrix2 transition_matrix(double p_gb, double p_bg) {
  return {{{1.0 - p_gb, p_gb}, {p_bg, 1.0 - p_bg}}};
}

inline Matrix2 identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

inline Matrix2 multiply(const Matrix2& a, const Matrix2& b) {
  Matrix2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return out;
}

// Per-individual transition rates at one location, with and without the
// intervention. Rows of both matrices are stochastic by construction; the
// modelling assumptions are checked by validate_instance, not enforced here,
// so degenerate textbook cases can still be evaluated.
struct TransitionPair {
  double p_a_gb = 0.0;  // good -> bad when reached by the intervention
  double p_a_bg = 0.0;  // bad -> good when reached
  double p_p_gb = 0.0;  // good -> bad otherwise
  double p_p_bg = 0.0;  // bad -> good otherwise

  double cure() const { return p_a_bg - p_p_bg; }
  double prevention() const { return p_p_gb - p_a_gb; }

  Matrix2 active() const { return transition_matrix(p_a_gb, p_a_bg); }
  Matrix2 passive() const { return transition_matrix(p_p_gb, p_p_bg); }
};

struct Location {
  int id = 0;
  long long population = 1;
  long long initial_good = 0;
  TransitionPair transitions;
};

// Column-stochastic presence probabilities: at(u, v) is the probability that
// a resident of v is present at u in any given round.
class TravelNetwork {
 public:
  TravelNetwork() = default;
  explicit TravelNetwork(int size)
      : size_(size), weights_(static_cast<std::size_t>(size) * size, 0.0) {
    if (size < 0) throw std::invalid_argument("TravelNetwork: negative size");
  }

  int size() const { return size_; }

  double at(int u, int v) const { return weights_[index(u, v)]; }
  void set(int u, int v, double w) { weights_[index(u, v)] = w; }

  double column_sum(int v) const {
    double s = 0.0;
    for (int u = 0; u < size_; ++u) s += at(u, v);
    return s;
  }

  void scale_column(int v, double factor) {
    for (int u = 0; u < size_; ++u) set(u, v, at(u, v) * factor);
  }

  // Support set of v: the locations where residents of v can be present
  // (includes v itself whenever the self-stay weight is positive).
  std::vector<int> support(int v) const {
    std::vector<int> out;
    for (int u = 0; u < size_; ++u)
      if (at(u, v) > 0.0) out.push_back(u);
    return out;
  }

 private:
  std::size_t index(int u, int v) const {
    if (u < 0 || u >= size_ || v < 0 || v >= size_)
      throw std::out_of_range("TravelNetwork: index out of range");
    return static_cast<std::size_t>(u) * size_ + v;
  }

  int size_ = 0;
  std::vector<double> weights_;
};

struct Instance {
  std::vector<Location> locations;
  TravelNetwork network;
  int budget = 1;
  int max_period = 1;

  int size() const { return static_cast<int>(locations.size()); }
};

struct ActionVector {
  std::vector<std::uint8_t> bits;

  static ActionVector none(int m) {
    ActionVector a;
    a.bits.assign(static_cast<std::size_t>(m), 0);
    return a;
  }

  static ActionVector of(int m, const std::vector<int>& pulled) {
    ActionVector a = none(m);
    for (int v : pulled) a.bits.at(static_cast<std::size_t>(v)) = 1;
    return a;
  }

  int pulls() const {
    int n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }

  std::vector<int> pulled_ids() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < bits.size(); ++v)
      if (bits[v]) out.push_back(static_cast<int>(v));
    return out;
  }

  bool operator==(const ActionVector& other) const = default;
};

struct Violation {
  std::string constraint;  // e.g. "assumption-1", "column-stochastic"
  std::string scope;       // "location", "column" or "instance"
  int index = -1;

  std::string text() const {
    std::ostringstream os;
    os << constraint;
    if (index >= 0) os << " @ " << scope << " " << index;
    return os.str();
  }
};

// Checks every type invariant and modelling assumption. Never aborts:
// malformed dimensions and violated assumptions are all reported together so
// a caller can decide what to do with a flawed instance.
inline std::vector<Violation> validate_instance(const Instance& instance) {
  std::vector<Violation> out;
  const int m = instance.size();

  if (instance.network.size() != m)
    out.push_back({"dimension-mismatch", "instance", -1});
  if (instance.budget < 1 || instance.budget > m)
    out.push_back({"budget-range", "instance", -1});
  if (instance.max_period < 1)
    out.push_back({"max-period-range", "instance", -1});

  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };

  for (int i = 0; i < m; ++i) {
    const Location& loc = instance.locations[static_cast<std::size_t>(i)];
    if (loc.id != i) out.push_back({"location-id", "location", i});
    if (loc.population < 1) out.push_back({"population-positive", "location", i});
    if (loc.initial_good < 0 || loc.initial_good > loc.population)
      out.push_back({"initial-good-range", "location", i});

    const TransitionPair& t = loc.transitions;
    if (!in01(t.p_a_gb) || !in01(t.p_a_bg) || !in01(t.p_p_gb) || !in01(t.p_p_bg))
      out.push_back({"probability-range", "location", i});
    if (!(t.p_p_gb >= t.p_a_gb && t.p_a_bg >= t.p_p_bg))
      out.push_back({"assumption-1", "location", i});
    if (!(1.0 - t.p_p_gb > t.p_p_bg && 1.0 - t.p_a_gb > t.p_a_bg))
      out.push_back({"assumption-2", "location", i});
    if (!(t.cure() > t.prevention()))
      out.push_back({"assumption-3", "location", i});
  }

  if (instance.network.size() == m) {
    for (int v = 0; v < m; ++v) {
      for (int u = 0; u < m; ++u) {
        const double w = instance.network.at(u, v);
        if (!(w >= 0.0 && w <= 1.0)) {
          out.push_back({"weight-range", "column", v});
          break;
        }
      }
      const double sum = instance.network.column_sum(v);
      if (std::abs(sum - 1.0) > 1e-9)
        out.push_back({"column-stochastic", "column", v});
    }
  }
  return out;
}

// Expected fraction of each location's residents reached by an action
// vector: entry v is the sum of presence weights at pulled locations.
// Summation drift on renormalized columns is clamped so the entries honor
// the [0, 1] contract exactly.
inline std::vector<double> reached_fractions(const TravelNetwork& network,
                                             const ActionVector& action) {
  const int m = network.size();
  if (static_cast<int>(action.bits.size()) != m)
    throw std::invalid_argument("reached_fractions: dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int u = 0; u < m; ++u) {
    if (!action.bits[static_cast<std::size_t>(u)]) continue;
    for (int v = 0; v < m; ++v)
      out[static_cast<std::size_t>(v)] += network.at(u, v);
  }
  for (double& w : out) w = std::min(1.0, std::max(0.0, w));
  return out;
}

// Convex combination of the active and passive matrices at exposure w_hat.
inline Matrix2 mixed_transition(const TransitionPair& transitions, double w_hat) {
  if (!(w_hat >= 0.0 && w_hat <= 1.0))
    throw std::invalid_argument("mixed_transition: w_hat out of [0,1]");
  const double p_gb = w_hat * transitions.p_a_gb + (1.0 - w_hat) * transitions.p_p_gb;
  const double p_bg = w_hat * transitions.p_a_bg + (1.0 - w_hat) * transitions.p_p_bg;
  return transition_matrix(p_gb, p_bg);
}

}  // namespace engage
