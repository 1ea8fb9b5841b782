#pragma once

#include "dmdp/dmdp.hpp"
#include "dmdp/graph_eval.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace dmdp {

enum class SwitchRule { howard, simplex_lowest_state };

inline std::string to_string(SwitchRule rule) {
  return rule == SwitchRule::howard ? "howard" : "simplex";
}

struct Switch {
  State state;
  Action from;
  Action to;
  friend bool operator==(const Switch&, const Switch&) = default;
};

/// Thrown when a run breaks a monotonicity guarantee; always an
/// implementation bug, never an input problem.
class MonotonicityViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Trace {
  std::vector<Policy> policies;
  std::vector<std::vector<Switch>> switches;  // switches[i] turns policies[i] into policies[i+1]
  /// Values of the terminal policy; its improving sets were checked empty.
  ValueTable certificate_values;
  bool certified = false;

  std::size_t iterations() const { return policies.size() - 1; }
  const Policy& terminal() const { return policies.back(); }
};

struct ImprovingAction {
  Action action;
  Rational q;
};

using ImprovingSets = std::vector<std::vector<ImprovingAction>>;

/// Actions whose Q-value strictly beats the current value, per state.
inline ImprovingSets improving_sets(const Dmdp& m, const Policy& pi, const Rational& gamma) {
  const ValueTable v = values_discounted(m, pi, gamma);
  ImprovingSets sets(m.n);
  for (State s = 0; s < m.n; ++s) {
    for (Action a = 0; a < m.k; ++a) {
      Rational qv = q_from_values(m, v, s, a, gamma);
      if (qv > v[s]) sets[s].push_back({a, std::move(qv)});
    }
  }
  return sets;
}

namespace detail {

// argmax_a Q(s, a); the incumbent wins ties, then the lowest index.
inline Action greedy_action(const Dmdp& m, const ValueTable& v, State s, Action incumbent, const Rational& gamma) {
  Action best = incumbent;
  Rational best_q = q_from_values(m, v, s, incumbent, gamma);
  for (Action a = 0; a < m.k; ++a) {
    Rational qv = q_from_values(m, v, s, a, gamma);
    if (qv > best_q) {
      best = a;
      best_q = std::move(qv);
    }
  }
  return best;
}

inline std::size_t iteration_cap(const Dmdp& m) {
  const std::size_t count = policy_count(m);
  return count == std::numeric_limits<std::size_t>::max() ? count : count + 1;
}

}  // namespace detail

/// One Howard step: every state moves to a Q-maximizing action.
inline Policy hpi_step(const Dmdp& m, const Policy& pi, const Rational& gamma) {
  const ValueTable v = values_discounted(m, pi, gamma);
  Policy next = pi;
  for (State s = 0; s < m.n; ++s) next[s] = detail::greedy_action(m, v, s, pi[s], gamma);
  return next;
}

/// Policy iteration under discounted reward. Every step is checked for the
/// policy-improvement guarantee: values never drop and at least one rises.
inline Trace run_pi(const Dmdp& m, const Policy& pi0, const Rational& gamma, SwitchRule rule = SwitchRule::howard) {
  require_policy(m, pi0);
  detail::require_gamma(gamma);
  Trace trace;
  trace.policies.push_back(pi0);
  ValueTable v = values_discounted(m, pi0, gamma);
  const std::size_t cap = detail::iteration_cap(m);
  while (true) {
    const Policy& pi = trace.policies.back();
    Policy next = pi;
    std::vector<Switch> sw;
    if (rule == SwitchRule::howard) {
      for (State s = 0; s < m.n; ++s) {
        next[s] = detail::greedy_action(m, v, s, pi[s], gamma);
        if (next[s] != pi[s]) sw.push_back({s, pi[s], next[s]});
      }
    } else {
      for (State s = 0; s < m.n && sw.empty(); ++s) {
        const Action a = detail::greedy_action(m, v, s, pi[s], gamma);
        if (a != pi[s]) {
          next[s] = a;
          sw.push_back({s, pi[s], a});
        }
      }
    }
    if (sw.empty()) {
      trace.certificate_values = std::move(v);
      trace.certified = true;
      return trace;
    }
    if (trace.iterations() + 1 >= cap) {
      throw std::runtime_error("policy iteration exceeded the k^n + 1 iteration cap");
    }
    ValueTable nv = values_discounted(m, next, gamma);
    bool strict = false;
    for (State s = 0; s < m.n; ++s) {
      if (nv[s] < v[s]) {
        throw MonotonicityViolation("value decreased at state " + std::to_string(s) + " in iteration " +
                                    std::to_string(trace.iterations() + 1));
      }
      strict = strict || nv[s] > v[s];
    }
    if (!strict) throw MonotonicityViolation("policy switch without strict improvement");
    trace.switches.push_back(std::move(sw));
    trace.policies.push_back(std::move(next));
    v = std::move(nv);
  }
}

struct AvgImprovingSets {
  std::vector<StateAction> gain;  // J_g
  std::vector<StateAction> bias;  // J_b, filled only when J_g is empty
};

/// Lexicographic improving pairs under average reward. J_b compares
/// R(s,a) - g(s) + V_b(T(s,a)) against V_b(s) and only admits actions whose
/// successor keeps the state's gain.
inline AvgImprovingSets avg_improving_sets(const Dmdp& m, const GainBias& gb) {
  AvgImprovingSets out;
  for (State s = 0; s < m.n; ++s) {
    for (Action a = 0; a < m.k; ++a) {
      if (gb.gain[m.next(s, a)] > gb.gain[s]) out.gain.push_back({s, a});
    }
  }
  if (!out.gain.empty()) return out;
  for (State s = 0; s < m.n; ++s) {
    for (Action a = 0; a < m.k; ++a) {
      const State t = m.next(s, a);
      if (gb.gain[t] != gb.gain[s]) continue;
      if (m.r(s, a) - gb.gain[s] + gb.bias[t] > gb.bias[s]) out.bias.push_back({s, a});
    }
  }
  return out;
}

inline AvgImprovingSets avg_improving_sets(const Dmdp& m, const Policy& pi) {
  return avg_improving_sets(m, gains_biases(m, pi));
}

struct AvgBounds {
  BigInt t1;     // n^2 2^b
  BigInt t2;     // n 2^b n
  BigInt bound;  // n T1 T2
};

inline AvgBounds avg_bounds(const Dmdp& m) {
  const BigInt n(static_cast<unsigned long>(m.n));
  const BigInt two_b = BigInt(1) << bit_size(m);
  AvgBounds out;
  out.t1 = n * n * two_b;
  out.t2 = n * two_b * n;
  out.bound = n * out.t1 * out.t2;
  return out;
}

struct AvgReport {
  std::vector<GainBias> snapshots;  // one per visited policy
  std::size_t distinct_gain_bias = 0;  // distinct (state, gain, bias) triples over the run
  unsigned b = 1;
  BigInt t1;     // n^2 2^b
  BigInt t2;     // n 2^b n
  BigInt bound;  // n T1 T2
  /// Diagnostic residuals of the multichain optimality equations at the
  /// terminal policy (max over actions, per state). Not a certificate.
  ValueTable gain_optimality_residual;
  ValueTable bias_optimality_residual;
};

struct AvgTrace {
  Trace trace;
  AvgReport report;
};

namespace detail {

inline void check_lexicographic(const GainBias& before, const GainBias& after, std::size_t iteration) {
  const std::size_t n = before.gain.size();
  bool gains_same = true;
  bool strict = false;
  for (State s = 0; s < n; ++s) {
    if (after.gain[s] < before.gain[s]) {
      throw MonotonicityViolation("gain decreased at state " + std::to_string(s) + " in iteration " +
                                  std::to_string(iteration));
    }
    if (after.gain[s] != before.gain[s]) {
      gains_same = false;
      strict = true;
    }
  }
  if (gains_same) {
    for (State s = 0; s < n; ++s) {
      if (after.bias[s] < before.bias[s]) {
        throw MonotonicityViolation("bias decreased with unchanged gains at state " + std::to_string(s) +
                                    " in iteration " + std::to_string(iteration));
      }
      strict = strict || after.bias[s] > before.bias[s];
    }
  }
  if (!strict) throw MonotonicityViolation("no gain or bias strictly increased in iteration " + std::to_string(iteration));
}

// Picks the switches for one average-reward step from J (sorted by state).
inline std::vector<Switch> choose_avg_switches(const Dmdp& m, const Policy& pi, const GainBias& gb,
                                               const std::vector<StateAction>& pairs, bool gain_phase,
                                               SwitchRule rule) {
  auto score = [&](State s, Action a) {
    const State t = m.next(s, a);
    return gain_phase ? gb.gain[t] : Rational(m.r(s, a) + gb.bias[t]);
  };
  std::vector<Switch> sw;
  std::size_t i = 0;
  while (i < pairs.size()) {
    const State s = pairs[i].state;
    Action best = pairs[i].action;
    Rational best_score = score(s, best);
    std::size_t j = i + 1;
    for (; j < pairs.size() && pairs[j].state == s; ++j) {
      Rational sc = score(s, pairs[j].action);
      if (sc > best_score) {
        best = pairs[j].action;
        best_score = std::move(sc);
      }
    }
    sw.push_back({s, pi[s], best});
    if (rule == SwitchRule::simplex_lowest_state) break;
    i = j;
  }
  return sw;
}

}  // namespace detail

/// Policy iteration under average reward (DMDP specialization): gain
/// improvements first, bias improvements only when no gain improves.
inline AvgTrace run_avg_pi(const Dmdp& m, const Policy& pi0, SwitchRule rule = SwitchRule::howard) {
  require_policy(m, pi0);
  AvgTrace out;
  Trace& trace = out.trace;
  AvgReport& rep = out.report;
  rep.b = bit_size(m);
  const AvgBounds bounds = avg_bounds(m);
  rep.t1 = bounds.t1;
  rep.t2 = bounds.t2;
  rep.bound = bounds.bound;

  std::set<std::tuple<State, Rational, Rational>> seen;
  auto record = [&](const GainBias& gb) {
    for (State s = 0; s < m.n; ++s) seen.emplace(s, gb.gain[s], gb.bias[s]);
    rep.snapshots.push_back(gb);
  };

  trace.policies.push_back(pi0);
  GainBias gb = gains_biases(m, pi0);
  record(gb);
  const std::size_t cap = detail::iteration_cap(m);
  while (true) {
    const Policy& pi = trace.policies.back();
    const AvgImprovingSets j = avg_improving_sets(m, gb);
    const bool gain_phase = !j.gain.empty();
    const auto& pairs = gain_phase ? j.gain : j.bias;
    if (pairs.empty()) break;
    if (trace.iterations() + 1 >= cap) {
      throw std::runtime_error("average-reward policy iteration exceeded the k^n + 1 iteration cap");
    }
    std::vector<Switch> sw = detail::choose_avg_switches(m, pi, gb, pairs, gain_phase, rule);
    Policy next = pi;
    for (const auto& x : sw) next[x.state] = x.to;
    GainBias ngb = gains_biases(m, next);
    detail::check_lexicographic(gb, ngb, trace.iterations() + 1);
    trace.switches.push_back(std::move(sw));
    trace.policies.push_back(std::move(next));
    gb = std::move(ngb);
    record(gb);
  }

  // Optimality-equation residuals, diagnostic only.
  rep.gain_optimality_residual.resize(m.n);
  rep.bias_optimality_residual.resize(m.n);
  for (State s = 0; s < m.n; ++s) {
    Rational gmax = gb.gain[m.next(s, 0)] - gb.gain[s];
    std::optional<Rational> bmax;
    for (Action a = 0; a < m.k; ++a) {
      const State t = m.next(s, a);
      Rational gr = gb.gain[t] - gb.gain[s];
      if (gr > gmax) gmax = gr;
      if (gb.gain[t] == gb.gain[s]) {
        Rational br = -gb.bias[s] + m.r(s, a) - gb.gain[s] + gb.bias[t];
        if (!bmax || br > *bmax) bmax = std::move(br);
      }
    }
    rep.gain_optimality_residual[s] = gmax;
    rep.bias_optimality_residual[s] = bmax.value_or(Rational(0));
  }

  rep.distinct_gain_bias = seen.size();
  trace.certificate_values = gb.gain;
  trace.certified = true;
  return out;
}

/// Discounted objective at gamma, or gain for the average criterion.
struct Objective {
  std::optional<Rational> gamma;  // nullopt -> gain
  static Objective discounted(Rational g) { return {std::move(g)}; }
  static Objective average() { return {}; }
};

struct OptimalSet {
  ValueTable values;
  std::vector<Policy> policies;  // lexicographic order
};

inline constexpr std::size_t kDefaultEnumerationBudget = 1'000'000;

inline ValueTable evaluate(const Dmdp& m, const Policy& pi, const Objective& obj) {
  return obj.gamma ? values_discounted(m, pi, *obj.gamma) : gains_biases(m, pi).gain;
}

/// Enumerates every policy and keeps those attaining the per-state maximum
/// everywhere.
inline OptimalSet brute_force_optimal(const Dmdp& m, const Objective& obj,
                                      std::size_t budget = kDefaultEnumerationBudget) {
  const std::size_t count = policy_count(m);
  if (count > budget) {
    throw std::length_error("policy enumeration of " + std::to_string(count) + " exceeds budget " +
                            std::to_string(budget));
  }
  OptimalSet best;
  for_each_policy(m, [&](const Policy& pi) {
    ValueTable v = evaluate(m, pi, obj);
    if (best.values.empty()) {
      best.values = std::move(v);
      return;
    }
    for (State s = 0; s < m.n; ++s) {
      if (v[s] > best.values[s]) best.values[s] = std::move(v[s]);
    }
  });
  for_each_policy(m, [&](const Policy& pi) {
    if (evaluate(m, pi, obj) == best.values) best.policies.push_back(pi);
  });
  return best;
}

}  // namespace dmdp
