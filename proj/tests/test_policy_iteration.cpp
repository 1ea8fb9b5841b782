#include "dmdp/policy_iteration.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dmdp;

namespace {

std::vector<Dmdp> small_corpus() {
  std::vector<Dmdp> out = {gen_mm(1), gen_mm(2)};
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    out.push_back(gen_random(2 + seed % 4, 2 + seed % 2, 1 + static_cast<unsigned>(seed % 3), seed));
  }
  return out;
}

// Two states, action 1 duplicates action 0 (same successor and reward).
Dmdp duplicated_actions() {
  Dmdp m;
  m.n = 2;
  m.k = 3;
  m.successor = {1, 1, 0, 0, 0, 1};
  m.reward = {BigInt(2), BigInt(2), BigInt(0), BigInt(1), BigInt(1), BigInt(0)};
  return m;
}

void expect_consistent_trace(const Dmdp& m, const Trace& t) {
  ASSERT_GE(t.policies.size(), 1u);
  ASSERT_EQ(t.switches.size(), t.iterations());
  ASSERT_LE(t.policies.size(), policy_count(m));
  std::set<Policy> seen(t.policies.begin(), t.policies.end());
  ASSERT_EQ(seen.size(), t.policies.size()) << "a policy repeats";
  for (std::size_t i = 0; i < t.switches.size(); ++i) {
    Policy rebuilt = t.policies[i];
    for (const auto& sw : t.switches[i]) {
      ASSERT_EQ(rebuilt[sw.state], sw.from);
      ASSERT_NE(sw.from, sw.to);
      rebuilt[sw.state] = sw.to;
    }
    ASSERT_EQ(rebuilt, t.policies[i + 1]);
  }
}

}  // namespace

TEST(ImprovingSets, AllZerosOnM2) {
  const Dmdp m = gen_mm(2);
  const auto sets = improving_sets(m, Policy::constant(6, 0), q(1, 2));
  for (const auto& s : sets) {
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].action, 1u);
    EXPECT_EQ(s[0].q, 1);
  }
}

TEST(ImprovingSets, AllOnesOnM2IsEmpty) {
  const Dmdp m = gen_mm(2);
  for (const auto& s : improving_sets(m, Policy::constant(6, 1), q(1, 2))) EXPECT_TRUE(s.empty());
  EXPECT_EQ(q_value(m, Policy::constant(6, 1), 0, 0, q(1, 2)), 1);
  EXPECT_EQ(value_discounted(m, Policy::constant(6, 1), 0, q(1, 2)), 2);
}

TEST(ImprovingSets, DuplicateActionNeverListed) {
  const Dmdp m = duplicated_actions();
  for_each_policy(m, [&](const Policy& pi) {
    const auto sets = improving_sets(m, pi, q(1, 2));
    if (pi[0] == 0 || pi[0] == 1) {
      for (const auto& ia : sets[0]) EXPECT_TRUE(ia.action != 0 && ia.action != 1);
    }
  });
}

TEST(ImprovingSets, MatchesOracleQValues) {
  for (const auto& m : small_corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      const Rational g = q(4, 5);
      const auto v = oracle::bellman_values(m, pi, g);
      const auto sets = improving_sets(m, pi, g);
      for (State s = 0; s < m.n; ++s) {
        std::vector<Action> expect;
        for (Action a = 0; a < m.k; ++a) {
          if (Rational(m.r(s, a)) + g * v[m.next(s, a)] > v[s]) expect.push_back(a);
        }
        std::vector<Action> got;
        for (const auto& ia : sets[s]) got.push_back(ia.action);
        ASSERT_EQ(got, expect);
      }
    });
  }
}

TEST(HpiStep, Examples) {
  const Dmdp m = gen_mm(2);
  EXPECT_EQ(hpi_step(m, Policy::constant(6, 0), q(1, 2)), Policy::constant(6, 1));
  EXPECT_EQ(hpi_step(m, Policy::constant(6, 1), q(1, 2)), Policy::constant(6, 1));
}

TEST(HpiStep, TieFavoursIncumbent) {
  const Dmdp m = duplicated_actions();
  // Action 1 duplicates action 0 at state 0; the incumbent 1 stays.
  const Policy pi({1, 0});
  const Policy next = hpi_step(m, pi, q(1, 2));
  EXPECT_EQ(next[0], 1u);
}

TEST(HpiStep, TieAmongChallengersGoesToLowestIndex) {
  const Dmdp m = duplicated_actions();
  // From action 2 at state 0, actions 0 and 1 tie; 0 wins.
  const Policy pi({2, 0});
  const auto v = oracle::bellman_values(m, pi, q(1, 2));
  ASSERT_GT(Rational(m.r(0, 0)) + q(1, 2) * v[1], v[0]);
  EXPECT_EQ(hpi_step(m, pi, q(1, 2))[0], 0u);
}

TEST(RunPi, HowardOnM2) {
  const Trace t = run_pi(gen_mm(2), Policy::constant(6, 0), q(1, 2));
  ASSERT_EQ(t.policies.size(), 2u);
  EXPECT_EQ(t.policies[0], Policy::constant(6, 0));
  EXPECT_EQ(t.policies[1], Policy::constant(6, 1));
  EXPECT_EQ(t.iterations(), 1u);
  EXPECT_TRUE(t.certified);
  EXPECT_EQ(t.switches[0].size(), 6u);
}

TEST(RunPi, SimplexOnM2TakesSixSingleSwitches) {
  const Dmdp m = gen_mm(2);
  const Rational g = q(1, 2);
  const Trace t = run_pi(m, Policy::constant(6, 0), g, SwitchRule::simplex_lowest_state);
  EXPECT_EQ(t.iterations(), 6u);
  EXPECT_EQ(t.terminal(), Policy::constant(6, 1));
  // Replay: lowest improvable state, best Q by linear-solve values.
  Policy pi = Policy::constant(6, 0);
  for (std::size_t step = 0; step < t.iterations(); ++step) {
    ASSERT_EQ(t.switches[step].size(), 1u);
    const auto v = oracle::bellman_values(m, pi, g);
    bool moved = false;
    for (State s = 0; s < m.n && !moved; ++s) {
      Action best = pi[s];
      Rational best_q = v[s];
      for (Action a = 0; a < m.k; ++a) {
        const Rational qa = Rational(m.r(s, a)) + g * v[m.next(s, a)];
        if (qa > best_q) {
          best = a;
          best_q = qa;
        }
      }
      if (best != pi[s]) {
        EXPECT_EQ(t.switches[step][0].state, s);
        EXPECT_EQ(t.switches[step][0].to, best);
        pi[s] = best;
        moved = true;
      }
    }
    ASSERT_TRUE(moved);
    EXPECT_EQ(pi, t.policies[step + 1]);
  }
}

TEST(RunPi, FromOptimalPolicyIsTrivial) {
  for (const auto& m : small_corpus()) {
    const auto opt = brute_force_optimal(m, Objective::discounted(q(3, 4)));
    for (const auto& pi : opt.policies) {
      const Trace t = run_pi(m, pi, q(3, 4));
      EXPECT_EQ(t.policies.size(), 1u);
      EXPECT_EQ(t.certificate_values, opt.values);
    }
  }
}

TEST(RunPi, TerminalMatchesBruteForceAndMonotone) {
  for (const auto& m : small_corpus()) {
    for (const Rational& g : {q(1, 2), q(9, 10)}) {
      const auto opt = brute_force_optimal(m, Objective::discounted(g));
      for (auto rule : {SwitchRule::howard, SwitchRule::simplex_lowest_state}) {
        for_each_policy(m, [&](const Policy& pi0) {
          const Trace t = run_pi(m, pi0, g, rule);
          expect_consistent_trace(m, t);
          ASSERT_EQ(t.certificate_values, opt.values);
          ASSERT_EQ(oracle::bellman_values(m, t.terminal(), g), opt.values);
          for (std::size_t i = 0; i + 1 < t.policies.size(); ++i) {
            const auto a = oracle::bellman_values(m, t.policies[i], g);
            const auto b = oracle::bellman_values(m, t.policies[i + 1], g);
            bool strict = false;
            for (State s = 0; s < m.n; ++s) {
              ASSERT_GE(b[s], a[s]);
              strict = strict || b[s] > a[s];
            }
            ASSERT_TRUE(strict);
          }
        });
      }
    }
  }
}

TEST(RunPi, AffineRewardInvariance) {
  for (const auto& m : small_corpus()) {
    Dmdp shifted = m;
    Dmdp scaled = m;
    for (auto& r : shifted.reward) r += 17;
    for (auto& r : scaled.reward) r *= 5;
    for (const Rational& g : {q(1, 3), q(5, 6)}) {
      for_each_policy(m, [&](const Policy& pi0) {
        const auto base = run_pi(m, pi0, g).policies;
        ASSERT_EQ(run_pi(shifted, pi0, g).policies, base);
        ASSERT_EQ(run_pi(scaled, pi0, g).policies, base);
      });
    }
  }
}

TEST(RunPi, RejectsBadInputs) {
  const Dmdp m = gen_mm(1);
  EXPECT_THROW(run_pi(m, Policy::constant(2, 0), q(1, 2)), std::invalid_argument);
  EXPECT_THROW(run_pi(m, Policy::constant(3, 0), q(1)), std::invalid_argument);
}

TEST(AvgImprovingSets, AllZerosOnM2) {
  const auto j = avg_improving_sets(gen_mm(2), Policy::constant(6, 0));
  EXPECT_TRUE(j.gain.empty());
  ASSERT_EQ(j.bias.size(), 6u);
  for (State s = 0; s < 6; ++s) EXPECT_EQ(j.bias[s], (StateAction{s, 1}));
}

TEST(AvgImprovingSets, AllOnesOnM2IsEmpty) {
  const auto j = avg_improving_sets(gen_mm(2), Policy::constant(6, 1));
  EXPECT_TRUE(j.gain.empty());
  EXPECT_TRUE(j.bias.empty());
}

TEST(AvgImprovingSets, ConstantRewardsAreEmpty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dmdp m = gen_random(4, 2, 1, seed);
    for (auto& r : m.reward) r = 3;
    for_each_policy(m, [&](const Policy& pi) {
      const auto j = avg_improving_sets(m, pi);
      ASSERT_TRUE(j.gain.empty());
      ASSERT_TRUE(j.bias.empty());
    });
  }
}

TEST(AvgImprovingSets, IncumbentNeverListed) {
  for (const auto& m : small_corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      const auto j = avg_improving_sets(m, pi);
      for (const auto& sa : j.gain) ASSERT_NE(sa.action, pi[sa.state]);
      for (const auto& sa : j.bias) ASSERT_NE(sa.action, pi[sa.state]);
    });
  }
}

TEST(RunAvgPi, HowardOnM2) {
  const AvgTrace run = run_avg_pi(gen_mm(2), Policy::constant(6, 0));
  ASSERT_EQ(run.trace.policies.size(), 2u);
  EXPECT_EQ(run.trace.terminal(), Policy::constant(6, 1));
  ASSERT_EQ(run.report.snapshots.size(), 2u);
  for (State s = 0; s < 6; ++s) {
    EXPECT_EQ(run.report.snapshots[0].gain[s], 0);
    EXPECT_EQ(run.report.snapshots[1].gain[s], 1);
  }
  EXPECT_EQ(run.report.t1, 6 * 6 * 2);
  EXPECT_EQ(run.report.t2, 6 * 2 * 6);
  EXPECT_EQ(run.report.bound, 6 * run.report.t1 * run.report.t2);
}

TEST(RunAvgPi, TerminalGainMatchesOracleWithinBound) {
  for (const auto& m : small_corpus()) {
    const auto opt = brute_force_optimal(m, Objective::average());
    for (auto rule : {SwitchRule::howard, SwitchRule::simplex_lowest_state}) {
      for_each_policy(m, [&](const Policy& pi0) {
        const AvgTrace run = run_avg_pi(m, pi0, rule);
        expect_consistent_trace(m, run.trace);
        ASSERT_EQ(run.trace.certificate_values, opt.values);
        for (State s = 0; s < m.n; ++s) ASSERT_EQ(oracle::window_gain(m, run.trace.terminal(), s), opt.values[s]);
        ASSERT_LE(BigInt(static_cast<unsigned long>(run.trace.iterations())), run.report.bound);
        ASSERT_LE(BigInt(static_cast<unsigned long>(run.report.distinct_gain_bias)), run.report.bound);
        const auto j = avg_improving_sets(m, run.trace.terminal());
        ASSERT_TRUE(j.gain.empty() && j.bias.empty());
        for (const auto& r : run.report.gain_optimality_residual) ASSERT_EQ(r, 0);
      });
    }
  }
}

TEST(RunAvgPi, LexicographicStepsOnOracleValues) {
  for (const auto& m : small_corpus()) {
    for_each_policy(m, [&](const Policy& pi0) {
      const AvgTrace run = run_avg_pi(m, pi0);
      for (std::size_t i = 0; i + 1 < run.trace.policies.size(); ++i) {
        const auto& a = run.trace.policies[i];
        const auto& b = run.trace.policies[i + 1];
        bool gains_same = true;
        bool strict = false;
        for (State s = 0; s < m.n; ++s) {
          const Rational ga = oracle::window_gain(m, a, s);
          const Rational gb = oracle::window_gain(m, b, s);
          ASSERT_GE(gb, ga);
          gains_same = gains_same && ga == gb;
          strict = strict || gb > ga;
        }
        if (gains_same) {
          const auto ba = oracle::anchored_bias(m, a);
          const auto bb = oracle::anchored_bias(m, b);
          for (State s = 0; s < m.n; ++s) {
            ASSERT_GE(bb[s], ba[s]);
            strict = strict || bb[s] > ba[s];
          }
        }
        ASSERT_TRUE(strict);
      }
    });
  }
}

TEST(RunAvgPi, DistinctGainsOfM1) {
  const Dmdp m = gen_mm(1);
  std::set<Rational> gains;
  for_each_policy(m, [&](const Policy& pi) {
    for (State s = 0; s < m.n; ++s) gains.insert(oracle::window_gain(m, pi, s));
  });
  EXPECT_LE(gains.size(), 18u);
  EXPECT_EQ(avg_bounds(m).t1, 18);
}

TEST(BruteForce, Examples) {
  const Dmdp m1 = gen_mm(1);
  const auto d = brute_force_optimal(m1, Objective::discounted(q(1, 2)));
  EXPECT_EQ(d.values, ValueTable(3, Rational(2)));
  ASSERT_EQ(d.policies.size(), 1u);
  EXPECT_EQ(d.policies[0], Policy::constant(3, 1));
  EXPECT_EQ(brute_force_optimal(m1, Objective::average()).values, ValueTable(3, Rational(1)));

  Dmdp single;
  single.n = 1;
  single.k = 1;
  single.successor = {0};
  single.reward = {BigInt(5)};
  const auto t = brute_force_optimal(single, Objective::discounted(q(1, 2)));
  ASSERT_EQ(t.policies.size(), 1u);
  EXPECT_EQ(t.values[0], 10);
}

TEST(BruteForce, BudgetExceeded) {
  EXPECT_THROW(brute_force_optimal(gen_mm(2), Objective::average(), 63), std::length_error);
  EXPECT_NO_THROW(brute_force_optimal(gen_mm(2), Objective::average(), 64));
}

TEST(BruteForce, AllMembersShareTheValueVector) {
  for (const auto& m : small_corpus()) {
    const auto opt = brute_force_optimal(m, Objective::discounted(q(2, 3)));
    ASSERT_FALSE(opt.policies.empty());
    EXPECT_TRUE(std::is_sorted(opt.policies.begin(), opt.policies.end()));
    for (const auto& pi : opt.policies) EXPECT_EQ(oracle::bellman_values(m, pi, q(2, 3)), opt.values);
  }
}
