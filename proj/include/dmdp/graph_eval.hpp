#pragma once

#include "dmdp/dmdp.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace dmdp {

struct StateAction {
  State state;
  Action action;
  friend bool operator==(const StateAction&, const StateAction&) = default;
};

/// Trajectory of a state under a policy: a transient path followed by the
/// cycle it falls into. The cycle starts at the first cycle state reached.
struct PathCycle {
  std::vector<StateAction> path;
  std::vector<StateAction> cycle;

  std::size_t p() const { return path.size(); }
  std::size_t c() const { return cycle.size(); }
};

using ValueTable = std::vector<Rational>;

inline PathCycle decompose(const Dmdp& m, const Policy& pi, State s) {
  std::vector<std::size_t> position(m.n, m.n);
  std::vector<StateAction> walk;
  State cur = s;
  while (position[cur] == m.n) {
    position[cur] = walk.size();
    walk.push_back({cur, pi[cur]});
    cur = m.next(cur, pi[cur]);
  }
  const std::size_t split = position[cur];
  PathCycle pc;
  pc.path.assign(walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>(split));
  pc.cycle.assign(walk.begin() + static_cast<std::ptrdiff_t>(split), walk.end());
  return pc;
}

namespace detail {

inline void require_gamma(const Rational& gamma) {
  if (gamma < 0 || gamma >= 1) throw std::invalid_argument("discount factor must lie in [0, 1), got " + to_string(gamma));
}

// sum_{i=1..len} gamma^(i-1) R(seq[i]), Horner from the back.
inline Rational discounted_sum(const Dmdp& m, const std::vector<StateAction>& seq, const Rational& gamma) {
  Rational acc(0);
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) acc = acc * gamma + m.r(it->state, it->action);
  return acc;
}

// Marks each state with the id of the cycle it lies on (or npos), and lists
// cycles with their states in successor order, each starting at its
// smallest-index state.
struct FunctionalGraph {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cycle_of;
  std::vector<std::vector<State>> cycles;
  std::vector<State> order;  // every state, successors before predecessors
};

inline FunctionalGraph analyse(const Dmdp& m, const Policy& pi) {
  FunctionalGraph g;
  g.cycle_of.assign(m.n, FunctionalGraph::npos);
  // 0 = unseen, 1 = on current walk, 2 = finished
  std::vector<int> mark(m.n, 0);
  std::vector<State> finish;
  finish.reserve(m.n);
  for (State start = 0; start < m.n; ++start) {
    if (mark[start] != 0) continue;
    std::vector<State> walk;
    State cur = start;
    while (mark[cur] == 0) {
      mark[cur] = 1;
      walk.push_back(cur);
      cur = m.next(cur, pi[cur]);
    }
    if (mark[cur] == 1) {
      // Closed a new cycle at cur.
      std::vector<State> cyc;
      auto it = std::find(walk.begin(), walk.end(), cur);
      cyc.assign(it, walk.end());
      const auto min_it = std::min_element(cyc.begin(), cyc.end());
      std::rotate(cyc.begin(), min_it, cyc.end());
      for (State s : cyc) g.cycle_of[s] = g.cycles.size();
      g.cycles.push_back(std::move(cyc));
    }
    for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
      mark[*it] = 2;
      finish.push_back(*it);
    }
  }
  g.order = std::move(finish);
  return g;
}

}  // namespace detail

/// Closed-form discounted value of one state:
/// sum over the path plus gamma^p / (1 - gamma^c) times the cycle sum.
inline Rational value_discounted(const Dmdp& m, const Policy& pi, State s, const Rational& gamma) {
  detail::require_gamma(gamma);
  const PathCycle pc = decompose(m, pi, s);
  const Rational path_sum = detail::discounted_sum(m, pc.path, gamma);
  const Rational cycle_sum = detail::discounted_sum(m, pc.cycle, gamma);
  return path_sum + pow(gamma, pc.p()) / (1 - pow(gamma, pc.c())) * cycle_sum;
}

/// All discounted values at once. Each cycle is evaluated once in closed
/// form at its anchor; the remaining states follow V(s) = R + gamma V(next).
inline ValueTable values_discounted(const Dmdp& m, const Policy& pi, const Rational& gamma) {
  detail::require_gamma(gamma);
  require_policy(m, pi);
  const auto g = detail::analyse(m, pi);
  ValueTable v(m.n);
  std::vector<bool> done(m.n, false);
  for (const auto& cyc : g.cycles) {
    std::vector<StateAction> seq;
    for (State s : cyc) seq.push_back({s, pi[s]});
    v[cyc[0]] = detail::discounted_sum(m, seq, gamma) / (1 - pow(gamma, cyc.size()));
    done[cyc[0]] = true;
    for (std::size_t i = cyc.size(); i-- > 1;) {
      const State s = cyc[i];
      v[s] = m.r(s, pi[s]) + gamma * v[m.next(s, pi[s])];
      done[s] = true;
    }
  }
  for (State s : g.order) {
    if (done[s]) continue;
    v[s] = m.r(s, pi[s]) + gamma * v[m.next(s, pi[s])];
    done[s] = true;
  }
  return v;
}

inline Rational q_from_values(const Dmdp& m, const ValueTable& v, State s, Action a, const Rational& gamma) {
  return m.r(s, a) + gamma * v[m.next(s, a)];
}

inline Rational q_value(const Dmdp& m, const Policy& pi, State s, Action a, const Rational& gamma) {
  if (a >= m.k) throw std::out_of_range("action " + std::to_string(a) + " out of range (k = " + std::to_string(m.k) + ")");
  detail::require_gamma(gamma);
  return m.r(s, a) + gamma * value_discounted(m, pi, m.next(s, a), gamma);
}

/// Average reward on the cycle reached from s.
inline Rational gain(const Dmdp& m, const Policy& pi, State s) {
  const PathCycle pc = decompose(m, pi, s);
  BigInt total = 0;
  for (const auto& sa : pc.cycle) total += m.r(sa.state, sa.action);
  return make_rational(total, BigInt(static_cast<unsigned long>(pc.c())));
}

struct GainBias {
  ValueTable gain;
  ValueTable bias;
};

/// Gains and biases for every state. Bias is anchored at 0 on the
/// smallest-index state of each cycle.
inline GainBias gains_biases(const Dmdp& m, const Policy& pi) {
  require_policy(m, pi);
  const auto g = detail::analyse(m, pi);
  GainBias out{ValueTable(m.n), ValueTable(m.n)};
  std::vector<bool> done(m.n, false);
  for (const auto& cyc : g.cycles) {
    BigInt total = 0;
    for (State s : cyc) total += m.r(s, pi[s]);
    const Rational cycle_gain = make_rational(total, BigInt(static_cast<unsigned long>(cyc.size())));
    for (State s : cyc) out.gain[s] = cycle_gain;
    out.bias[cyc[0]] = 0;
    done[cyc[0]] = true;
    for (std::size_t i = cyc.size(); i-- > 1;) {
      const State s = cyc[i];
      out.bias[s] = m.r(s, pi[s]) - cycle_gain + out.bias[m.next(s, pi[s])];
      done[s] = true;
    }
  }
  for (State s : g.order) {
    if (done[s]) continue;
    const State t = m.next(s, pi[s]);
    out.gain[s] = out.gain[t];
    out.bias[s] = m.r(s, pi[s]) - out.gain[s] + out.bias[t];
    done[s] = true;
  }
  return out;
}

inline Rational bias(const Dmdp& m, const Policy& pi, State s) { return gains_biases(m, pi).bias[s]; }

namespace residual {
struct Discounted {
  Rational gamma;
};
struct Gain {};
struct Bias {
  ValueTable gains;
};
}  // namespace residual

using ResidualMode = std::variant<residual::Discounted, residual::Gain, residual::Bias>;

/// Per-state residual of the policy's Bellman equation:
///   discounted: R(s, pi(s)) + gamma V(next) - V(s)
///   gain:       V_g(s) - V_g(next)
///   bias:       R(s, pi(s)) - V_g(s) + V_b(next) - V_b(s)
inline ValueTable bellman_residual(const Dmdp& m, const Policy& pi, const ValueTable& values, const ResidualMode& mode) {
  require_policy(m, pi);
  if (values.size() != m.n) throw std::invalid_argument("value table length does not match n");
  ValueTable res(m.n);
  for (State s = 0; s < m.n; ++s) {
    const State t = m.next(s, pi[s]);
    if (const auto* d = std::get_if<residual::Discounted>(&mode)) {
      res[s] = m.r(s, pi[s]) + d->gamma * values[t] - values[s];
    } else if (std::holds_alternative<residual::Gain>(mode)) {
      res[s] = values[s] - values[t];
    } else {
      const auto& b = std::get<residual::Bias>(mode);
      if (b.gains.size() != m.n) throw std::invalid_argument("gain table length does not match n");
      res[s] = m.r(s, pi[s]) - b.gains[s] + values[t] - values[s];
    }
  }
  return res;
}

}  // namespace dmdp
