#pragma once

#include "dmdp/dmdp.hpp"
#include "dmdp/graph_eval.hpp"
#include "dmdp/io.hpp"
#include "dmdp/policy_iteration.hpp"
#include "dmdp/rootbounds.hpp"
#include "dmdp/roots.hpp"
#include "dmdp/signpoly.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dmdp {

/// One asserted comparison "measured <relation> bound".
struct Check {
  std::string name;
  std::string relation;  // "<=", "==", "<"
  Rational measured;
  Rational bound;

  bool pass() const {
    if (relation == "<=") return measured <= bound;
    if (relation == "<") return measured < bound;
    return measured == bound;
  }
};

struct InstanceReport {
  std::string digest;
  std::size_t n = 0;
  std::size_t k = 0;
  unsigned b = 1;
  std::vector<Check> checks;
  ordered_json measurements = ordered_json::object();
  ordered_json traces = ordered_json::array();

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }
};

struct Report {
  std::string scenario;
  ordered_json parameters = ordered_json::object();
  std::vector<InstanceReport> instances;

  bool passed() const {
    return std::all_of(instances.begin(), instances.end(), [](const InstanceReport& r) { return r.passed(); });
  }

  ordered_json to_json() const {
    ordered_json doc;
    doc["format"] = kFormatVersion;
    doc["scenario"] = scenario;
    doc["parameters"] = parameters;
    doc["status"] = passed() ? "pass" : "fail";
    ordered_json list = ordered_json::array();
    for (const auto& inst : instances) {
      ordered_json j;
      j["digest"] = inst.digest;
      j["n"] = inst.n;
      j["k"] = inst.k;
      j["b"] = inst.b;
      ordered_json checks = ordered_json::array();
      for (const auto& c : inst.checks) {
        checks.push_back({{"name", c.name},
                          {"status", c.pass() ? "pass" : "fail"},
                          {"relation", c.relation},
                          {"measured", to_string(c.measured)},
                          {"bound", to_string(c.bound)}});
      }
      j["checks"] = std::move(checks);
      j["measurements"] = inst.measurements;
      j["traces"] = inst.traces;
      list.push_back(std::move(j));
    }
    doc["instances"] = std::move(list);
    return doc;
  }

  std::string to_json_text() const { return to_json().dump(2) + "\n"; }

  /// One row per check.
  std::string to_csv() const {
    std::string out = "scenario,instance,check,status,relation,measured,bound\n";
    for (const auto& inst : instances) {
      for (const auto& c : inst.checks) {
        out += scenario + "," + inst.digest + "," + c.name + "," + (c.pass() ? "pass" : "fail") + "," + c.relation +
               "," + to_string(c.measured) + "," + to_string(c.bound) + "\n";
      }
    }
    return out;
  }
};

struct ScenarioParams {
  std::uint64_t seed = 1;
  std::vector<Rational> gammas;          // cycle-values grid override
  std::size_t grid_points = 50;          // cycle-values grid size
  std::size_t blackwell_points = 10;     // blackwell-sample grid size
  std::size_t budget = kDefaultEnumerationBudget;
  std::size_t start_policies = 0;        // 0 = every policy
  std::size_t gamma_samples = 20;        // signpoly-props samples per tuple
  std::size_t random_polynomials = 0;    // root-bounds extra corpus
  SwitchRule rule = SwitchRule::howard;

  ordered_json to_json() const {
    ordered_json j;
    j["seed"] = seed;
    ordered_json g = ordered_json::array();
    for (const auto& x : gammas) g.push_back(to_string(x));
    j["gammas"] = std::move(g);
    j["grid_points"] = grid_points;
    j["blackwell_points"] = blackwell_points;
    j["budget"] = budget;
    j["start_policies"] = start_policies;
    j["gamma_samples"] = gamma_samples;
    j["random_polynomials"] = random_polynomials;
    j["rule"] = to_string(rule);
    return j;
  }
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"invariance",  "signpoly-props", "root-bounds",
                                                 "avg-count",   "cycle-values",   "blackwell-sample"};
  return names;
}

/// Uniform rational in (0, 1): denominator in [2, 1000], numerator in [1, den - 1].
inline Rational random_unit_rational(std::mt19937_64& eng) {
  const auto den = 2 + detail::uniform_below(eng, 999);
  const auto num = 1 + detail::uniform_below(eng, den - 1);
  return make_rational(BigInt(static_cast<unsigned long>(num)), BigInt(static_cast<unsigned long>(den)));
}

/// Integer polynomial with degree <= max_degree and height <= max_height,
/// nonconstant and with a nonzero leading coefficient.
inline IntPolynomial random_int_polynomial(std::mt19937_64& eng, unsigned max_degree, std::uint64_t max_height) {
  while (true) {
    const auto deg = 1 + detail::uniform_below(eng, max_degree);
    std::vector<BigInt> c(deg + 1);
    for (auto& x : c) {
      const auto mag = detail::uniform_below(eng, 2 * max_height + 1);
      x = BigInt(static_cast<long>(mag) - static_cast<long>(max_height));
    }
    IntPolynomial p(std::move(c));
    if (p.degree() >= 1) return p;
  }
}

/// Starting policies: all of them, or a seeded sample of distinct ones.
inline std::vector<Policy> starting_policies(const Dmdp& m, std::size_t count, std::uint64_t seed, std::size_t budget) {
  const std::size_t total = policy_count(m);
  std::vector<Policy> out;
  if (count == 0 || count >= total) {
    if (total > budget) throw std::length_error("starting-policy enumeration exceeds budget");
    for_each_policy(m, [&](const Policy& p) { out.push_back(p); });
    return out;
  }
  std::mt19937_64 eng(seed);
  std::set<std::size_t> picked;
  while (picked.size() < count) picked.insert(detail::uniform_below(eng, total));
  for (auto idx : picked) out.push_back(policy_from_index(m, idx));
  return out;
}

inline Rational as_rational(std::size_t x) { return Rational(BigInt(static_cast<unsigned long>(x))); }

namespace scenario {

inline void invariance(const Dmdp& m, const ScenarioParams& params, InstanceReport& rep) {
  ThresholdResult tq = gamma_q_brute(m);
  const Rational g1 = tq.rational_above();
  const Rational g2 = 1 - (1 - g1) / 16;
  rep.measurements["gamma_q_lower"] = to_string(tq.lower());
  rep.measurements["gamma_q_upper"] = to_string(tq.upper());
  rep.measurements["gamma_q_exact"] = tq.exact();
  rep.measurements["gamma_1"] = to_string(g1);
  rep.measurements["gamma_2"] = to_string(g2);
  if (tq.witness) {
    rep.measurements["witness"] = {{"policy", tq.witness->pi.to_string(m.k)},
                                   {"state", tq.witness->s},
                                   {"a", tq.witness->a},
                                   {"a2", tq.witness->a2}};
  }
  rep.checks.push_back({"gamma_q_below_one", "<", tq.upper(), Rational(1)});

  std::size_t mismatches = 0;
  std::size_t max_iter[2] = {0, 0};
  std::size_t total_iter[2] = {0, 0};
  const auto starts = starting_policies(m, params.start_policies, params.seed, params.budget);
  for (const auto& pi0 : starts) {
    const Trace t1 = run_pi(m, pi0, g1, params.rule);
    const Trace t2 = run_pi(m, pi0, g2, params.rule);
    if (t1.policies != t2.policies) ++mismatches;
    max_iter[0] = std::max(max_iter[0], t1.iterations());
    max_iter[1] = std::max(max_iter[1], t2.iterations());
    total_iter[0] += t1.iterations();
    total_iter[1] += t2.iterations();
  }
  for (int i = 0; i < 2; ++i) {
    rep.traces.push_back({{"gamma", to_string(i == 0 ? g1 : g2)},
                          {"rule", to_string(params.rule)},
                          {"starts", starts.size()},
                          {"max_iterations", max_iter[i]},
                          {"total_iterations", total_iter[i]}});
  }
  rep.checks.push_back({"trace_mismatches_above_gamma_q", "==", as_rational(mismatches), Rational(0)});
}

inline void signpoly_props(const Dmdp& raw, const ScenarioParams& params, InstanceReport& rep) {
  const Dmdp m = normalize_rewards(raw);
  const BigInt height_bound = BigInt(12) << rep.b;
  std::mt19937_64 eng(params.seed);
  int max_degree = -1;
  BigInt max_height = 0;
  std::size_t sign_mismatches = 0;
  std::size_t antisymmetry_failures = 0;
  std::size_t tuples = 0;
  const std::size_t total = policy_count(m);
  if (total > params.budget) throw std::length_error("signpoly-props enumeration exceeds budget");
  for_each_policy(m, [&](const Policy& pi) {
    std::vector<Rational> gammas;
    std::vector<ValueTable> values;
    for (std::size_t i = 0; i < params.gamma_samples; ++i) {
      gammas.push_back(random_unit_rational(eng));
      values.push_back(values_discounted(m, pi, gammas.back()));
    }
    for (State s = 0; s < m.n; ++s) {
      for (Action a = 0; a < m.k; ++a) {
        for (Action a2 = 0; a2 < m.k; ++a2) {
          if (a == a2) continue;
          ++tuples;
          const IntPolynomial f = build_sign_poly(m, pi, s, a, a2);
          max_degree = std::max(max_degree, f.degree());
          if (f.height() > max_height) max_height = f.height();
          if (!(build_sign_poly(m, pi, s, a2, a) == -f)) ++antisymmetry_failures;
          for (std::size_t i = 0; i < gammas.size(); ++i) {
            const Rational diff = q_from_values(m, values[i], s, a, gammas[i]) - q_from_values(m, values[i], s, a2, gammas[i]);
            if (sign_at(f, gammas[i]) != sgn(diff)) ++sign_mismatches;
          }
        }
      }
    }
  });
  rep.measurements["tuples"] = tuples;
  rep.measurements["normalized_bit_size"] = bit_size(m);
  rep.checks.push_back({"max_degree", "<=", Rational(max_degree), as_rational(2 * m.n + 1)});
  rep.checks.push_back({"max_height", "<=", Rational(max_height), Rational(height_bound)});
  rep.checks.push_back({"sign_mismatches", "==", as_rational(sign_mismatches), Rational(0)});
  rep.checks.push_back({"antisymmetry_failures", "==", as_rational(antisymmetry_failures), Rational(0)});
}

struct RootBoundTally {
  std::size_t polynomials = 0;
  std::size_t roots = 0;
  std::size_t distance_violations = 0;
  std::size_t magnitude_violations = 0;
  std::size_t coarse_violations = 0;
  std::size_t deflation_failures = 0;
  std::size_t coefficient_bound_failures = 0;
  unsigned max_z = 0;
  Rational max_u = 0;
  Rational max_root_below_one = 0;  // lower endpoint of the largest root < 1
};

/// Checks one polynomial against every root bound; exact comparisons only.
inline void check_root_bounds(const IntPolynomial& p, const Rational& slack, RootBoundTally& t) {
  ++t.polynomials;
  const RootDistanceBound ub = up_root_bound(p, slack);
  const Rational zu = zassenhaus_upper(p, slack);
  t.max_z = std::max(t.max_z, ub.z);
  if (ub.u > t.max_u) t.max_u = ub.u;

  // p = (x - 1)^z d, and |d_i| <= C(deg p, z) H(p).
  IntPolynomial rebuilt = ub.deflated;
  for (unsigned i = 0; i < ub.z; ++i) rebuilt = rebuilt * IntPolynomial{-1, 1};
  if (!(rebuilt == p)) ++t.deflation_failures;
  BigInt binom;
  mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(p.degree()), ub.z);
  if (ub.deflated.height() > binom * p.height()) ++t.coefficient_bound_failures;
  if (ub.deflated.degree() >= 1 && ub.u > ub.coarse * (1 + slack)) ++t.coarse_violations;

  const Rational limit = 1 - 1 / ub.u;
  for (const auto& root : isolate_all_real_roots(p).roots) {
    ++t.roots;
    if (root.compare_to(zu) > 0 || root.compare_to(-zu) < 0) ++t.magnitude_violations;
    if (root.compare_to(Rational(1)) >= 0) continue;
    if (root.compare_to(limit) > 0) ++t.distance_violations;
    if (root.lo() > t.max_root_below_one) t.max_root_below_one = root.lo();
  }
}

inline void tally_checks(const RootBoundTally& t, InstanceReport& rep) {
  rep.measurements["polynomials"] = t.polynomials;
  rep.measurements["real_roots"] = t.roots;
  rep.measurements["max_multiplicity_at_one"] = t.max_z;
  rep.measurements["max_up_bound"] = to_string(t.max_u);
  rep.checks.push_back({"root_distance_violations", "==", as_rational(t.distance_violations), Rational(0)});
  rep.checks.push_back({"zassenhaus_violations", "==", as_rational(t.magnitude_violations), Rational(0)});
  rep.checks.push_back({"case1_coarse_violations", "==", as_rational(t.coarse_violations), Rational(0)});
  rep.checks.push_back({"deflation_failures", "==", as_rational(t.deflation_failures), Rational(0)});
  rep.checks.push_back({"deflated_coefficient_bound_failures", "==", as_rational(t.coefficient_bound_failures), Rational(0)});
}

/// Distinct nonconstant sign polynomials of an instance (primitive form).
inline std::vector<IntPolynomial> distinct_sign_polynomials(const Dmdp& m, std::size_t budget) {
  if (policy_count(m) > budget) throw std::length_error("sign polynomial enumeration exceeds budget");
  std::unordered_set<IntPolynomial, IntPolynomialHash> seen;
  std::vector<IntPolynomial> out;
  for_each_policy(m, [&](const Policy& pi) {
    for (State s = 0; s < m.n; ++s) {
      for (Action a = 0; a < m.k; ++a) {
        for (Action a2 = a + 1; a2 < m.k; ++a2) {
          IntPolynomial f = build_sign_poly(m, pi, s, a, a2);
          if (f.degree() < 1) continue;
          if (seen.insert(f).second) out.push_back(std::move(f));
        }
      }
    }
  });
  return out;
}

inline void root_bounds(const Dmdp& m, const ScenarioParams& params, InstanceReport& rep) {
  RootBoundTally tally;
  const Rational slack = default_slack();
  for (const auto& f : distinct_sign_polynomials(m, params.budget)) check_root_bounds(f, slack, tally);
  std::mt19937_64 eng(params.seed);
  for (std::size_t i = 0; i < params.random_polynomials; ++i) {
    check_root_bounds(random_int_polynomial(eng, 12, 1024), slack, tally);
  }
  tally_checks(tally, rep);
  rep.measurements["asymptotic_u"] =
      m.n >= 2 ? ordered_json(to_string(asymptotic_u(static_cast<long>(m.n), rep.b))) : ordered_json(nullptr);
}

inline void avg_count(const Dmdp& m, const ScenarioParams& params, InstanceReport& rep) {
  const auto starts = starting_policies(m, params.start_policies, params.seed, params.budget);
  std::size_t max_iterations = 0;
  std::size_t max_distinct = 0;
  std::size_t violations = 0;
  std::size_t suboptimal = 0;
  std::size_t total_iterations = 0;
  const AvgBounds bounds = avg_bounds(m);
  const bool oracle = policy_count(m) <= params.budget;
  ValueTable best_gain;
  std::set<Rational> gains_seen;
  if (oracle) {
    best_gain = brute_force_optimal(m, Objective::average(), params.budget).values;
    for_each_policy(m, [&](const Policy& pi) {
      for (const auto& g : gains_biases(m, pi).gain) gains_seen.insert(g);
    });
  }
  for (const auto& pi0 : starts) {
    try {
      const AvgTrace run = run_avg_pi(m, pi0, params.rule);
      max_iterations = std::max(max_iterations, run.trace.iterations());
      max_distinct = std::max(max_distinct, run.report.distinct_gain_bias);
      total_iterations += run.trace.iterations();
      if (oracle && run.trace.certificate_values != best_gain) ++suboptimal;
    } catch (const MonotonicityViolation&) {
      ++violations;
    }
  }
  rep.traces.push_back({{"objective", "average"},
                        {"rule", to_string(params.rule)},
                        {"starts", starts.size()},
                        {"max_iterations", max_iterations},
                        {"total_iterations", total_iterations}});
  rep.checks.push_back({"max_iterations", "<=", as_rational(max_iterations), Rational(bounds.bound)});
  rep.checks.push_back({"max_distinct_gain_bias", "<=", as_rational(max_distinct), Rational(bounds.bound)});
  rep.checks.push_back({"monotonicity_violations", "==", as_rational(violations), Rational(0)});
  if (oracle) {
    rep.checks.push_back({"suboptimal_terminals", "==", as_rational(suboptimal), Rational(0)});
    rep.checks.push_back({"distinct_gains_all_policies", "<=", as_rational(gains_seen.size()), Rational(bounds.t1)});
  }
}

/// Balanced bit-strings of length 2m with m ones, in lexicographic order.
inline std::vector<std::vector<Action>> balanced_strings(std::size_t m) {
  std::vector<std::vector<Action>> out;
  std::vector<Action> bits(2 * m, 0);
  std::fill(bits.begin() + static_cast<std::ptrdiff_t>(m), bits.end(), 1);
  do {
    out.push_back(bits);
  } while (std::next_permutation(bits.begin(), bits.end()));
  return out;
}

/// Policy of M_m whose trajectory from 0 spells `bits` and returns to 0.
inline Policy cycle_policy(const Dmdp& m, const std::vector<Action>& bits) {
  Policy pi = Policy::constant(m.n, 0);
  State s = 0;
  for (Action b : bits) {
    pi[s] = b;
    s = m.next(s, b);
  }
  return pi;
}

inline void cycle_values(const Dmdp& m, const ScenarioParams& params, InstanceReport& rep) {
  const bool family = m.n % 3 == 0 && m.n > 0 && [&] {
    const Dmdp ref = gen_mm(static_cast<long>(m.n / 3));
    return m.k == ref.k && m.successor == ref.successor && m.reward == ref.reward;
  }();
  if (!family) {
    throw std::invalid_argument("cycle-values needs an M_m instance");
  }
  const std::size_t mm = m.n / 3;
  BigInt expected;
  mpz_bin_uiui(expected.get_mpz_t(), 2 * mm, mm);
  if (expected > BigInt(static_cast<unsigned long>(params.budget))) {
    throw std::length_error("cycle-values enumeration exceeds budget");
  }
  std::vector<Rational> grid = params.gammas;
  if (grid.empty()) {
    for (std::size_t i = 1; i <= params.grid_points; ++i) grid.push_back(as_rational(i) / as_rational(params.grid_points + 1));
  }
  const auto strings = balanced_strings(mm);
  std::vector<Policy> policies;
  std::size_t gain_mismatches = 0;
  std::size_t malformed = 0;
  const Rational half(1, 2);
  for (const auto& bits : strings) {
    Policy pi = cycle_policy(m, bits);
    const PathCycle pc = decompose(m, pi, 0);
    if (pc.p() != 0 || pc.c() != 2 * mm) ++malformed;
    if (gain(m, pi, 0) != half) ++gain_mismatches;
    policies.push_back(std::move(pi));
  }
  ordered_json counts = ordered_json::array();
  std::size_t max_count = 0;
  for (const auto& g : grid) {
    std::set<Rational> values;
    for (const auto& pi : policies) values.insert(value_discounted(m, pi, 0, g));
    max_count = std::max(max_count, values.size());
    counts.push_back({{"gamma", to_string(g)}, {"distinct_values", values.size()}});
  }
  rep.measurements["cycles"] = strings.size();
  rep.measurements["distinct_values_per_gamma"] = std::move(counts);
  rep.measurements["max_distinct_values"] = max_count;
  rep.measurements["target_distinct_values"] = expected.get_str();
  rep.checks.push_back({"balanced_cycle_count", "==", as_rational(strings.size()), Rational(expected)});
  rep.checks.push_back({"malformed_cycles", "==", as_rational(malformed), Rational(0)});
  rep.checks.push_back({"gain_not_one_half", "==", as_rational(gain_mismatches), Rational(0)});
}

/// Rational grid u + (1 - u) j / points, j = 0..points-1, with u just above gamma_Q.
inline std::vector<Rational> grid_above(ThresholdResult& tq, std::size_t points) {
  const Rational u = tq.rational_above();
  std::vector<Rational> grid;
  for (std::size_t j = 0; j < points; ++j) grid.push_back(u + (1 - u) * as_rational(j) / as_rational(points));
  return grid;
}

inline void blackwell_sample(const Dmdp& m, const ScenarioParams& params, InstanceReport& rep) {
  ThresholdResult tq = gamma_q_brute(m);
  const auto grid = grid_above(tq, params.blackwell_points);
  std::size_t differing = 0;
  std::vector<Policy> reference;
  ordered_json sizes = ordered_json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const OptimalSet opt = brute_force_optimal(m, Objective::discounted(grid[j]), params.budget);
    sizes.push_back(opt.policies.size());
    if (j == 0) reference = opt.policies;
    else if (opt.policies != reference) ++differing;
  }
  rep.measurements["gamma_q_upper"] = to_string(tq.upper());
  rep.measurements["grid_first"] = to_string(grid.front());
  rep.measurements["optimal_set_sizes"] = std::move(sizes);
  rep.checks.push_back({"optimal_set_changes_above_gamma_q", "==", as_rational(differing), Rational(0)});
}

}  // namespace scenario

/// Runs a named scenario over the instances. Instance reports are ordered by
/// digest so the output does not depend on input order.
inline Report run_scenario(const std::string& name, const ScenarioParams& params, const std::vector<Dmdp>& instances) {
  using Fn = void (*)(const Dmdp&, const ScenarioParams&, InstanceReport&);
  static const std::unordered_map<std::string, Fn> table = {
      {"invariance", scenario::invariance},   {"signpoly-props", scenario::signpoly_props},
      {"root-bounds", scenario::root_bounds}, {"avg-count", scenario::avg_count},
      {"cycle-values", scenario::cycle_values}, {"blackwell-sample", scenario::blackwell_sample},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown scenario '" + name + "'");
  Report report;
  report.scenario = name;
  report.parameters = params.to_json();
  for (const auto& m : instances) {
    InstanceReport rep;
    rep.digest = instance_digest(m);
    rep.n = m.n;
    rep.k = m.k;
    rep.b = bit_size(m);
    it->second(m, params, rep);
    report.instances.push_back(std::move(rep));
  }
  std::stable_sort(report.instances.begin(), report.instances.end(),
                   [](const InstanceReport& a, const InstanceReport& b) { return a.digest < b.digest; });
  return report;
}

}  // namespace dmdp
