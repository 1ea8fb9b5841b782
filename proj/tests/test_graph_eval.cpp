#include "dmdp/graph_eval.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dmdp;

namespace {

// M_2 policy whose trajectory from 0 spells the bit-string 0101.
Policy cycle_0101() { return Policy({0, 1, 0, 0, 1, 0}); }

Dmdp self_loop(long reward) {
  Dmdp m;
  m.n = 1;
  m.k = 1;
  m.successor = {0};
  m.reward = {BigInt(reward)};
  return m;
}

std::vector<Rational> sample_gammas() {
  return {q(0), q(1, 2), q(1, 3), q(2, 3), q(9, 10), q(99, 100), q(1, 7), q(5, 11), q(3, 4), q(999, 1000)};
}

std::vector<Dmdp> corpus() {
  std::vector<Dmdp> out = {gen_mm(1), gen_mm(2)};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    out.push_back(gen_random(1 + seed % 6, 1 + seed % 3, 1 + static_cast<unsigned>(seed % 3), seed));
  }
  return out;
}

}  // namespace

TEST(Decompose, AllZerosOnM2IsOneCycle) {
  const PathCycle pc = decompose(gen_mm(2), Policy::constant(6, 0), 0);
  EXPECT_EQ(pc.p(), 0u);
  EXPECT_EQ(pc.c(), 6u);
}

TEST(Decompose, Cycle0101FromZero) {
  const PathCycle pc = decompose(gen_mm(2), cycle_0101(), 0);
  EXPECT_EQ(pc.p(), 0u);
  const std::vector<StateAction> expect = {{0, 0}, {1, 1}, {3, 0}, {4, 1}};
  EXPECT_EQ(pc.cycle, expect);
}

TEST(Decompose, Cycle0101FromTwo) {
  const PathCycle pc = decompose(gen_mm(2), cycle_0101(), 2);
  EXPECT_EQ(pc.path, (std::vector<StateAction>{{2, 0}}));
  const std::vector<StateAction> expect = {{3, 0}, {4, 1}, {0, 0}, {1, 1}};
  EXPECT_EQ(pc.cycle, expect);
}

TEST(Decompose, StructuralInvariants) {
  for (const auto& m : corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      for (State s = 0; s < m.n; ++s) {
        const PathCycle pc = decompose(m, pi, s);
        ASSERT_LE(pc.p(), m.n - 1);
        ASSERT_GE(pc.c(), 1u);
        ASSERT_LE(pc.p() + pc.c(), m.n);
        std::vector<StateAction> walk = pc.path;
        walk.insert(walk.end(), pc.cycle.begin(), pc.cycle.end());
        ASSERT_EQ(walk.front().state, s);
        std::set<State> states;
        for (std::size_t i = 0; i < walk.size(); ++i) {
          ASSERT_EQ(walk[i].action, pi[walk[i].state]);
          states.insert(walk[i].state);
          if (i + 1 < walk.size()) {
            ASSERT_EQ(m.next(walk[i].state, walk[i].action), walk[i + 1].state);
          }
        }
        ASSERT_EQ(states.size(), walk.size());
        ASSERT_EQ(m.next(pc.cycle.back().state, pc.cycle.back().action), pc.cycle.front().state);
      }
    });
  }
}

TEST(ValueDiscounted, SelfLoopGeometricSeries) { EXPECT_EQ(value_discounted(self_loop(1), Policy({0}), 0, q(1, 2)), 2); }

TEST(ValueDiscounted, Cycle0101ClosedForm) {
  const Dmdp m = gen_mm(2);
  for (const auto& g : sample_gammas()) {
    const Rational expect = (g + g * g * g) / (1 - g * g * g * g);
    EXPECT_EQ(value_discounted(m, cycle_0101(), 0, g), expect) << to_string(g);
  }
  EXPECT_EQ(value_discounted(m, cycle_0101(), 0, q(1, 2)), q(2, 3));
}

TEST(ValueDiscounted, StreamSumWithinTail) {
  const Dmdp m = gen_mm(2);
  const Rational g = q(1, 2);
  const Rational partial = oracle::stream_sum(m, cycle_0101(), 0, g, 200);
  const Rational tail = oracle::pow(g, 200) / (1 - g);
  const Rational v = value_discounted(m, cycle_0101(), 0, g);
  EXPECT_LE(abs(v - partial), tail);
  EXPECT_EQ(v, (q(1, 2) + q(1, 8)) / q(15, 16));
}

TEST(ValueDiscounted, RejectsGammaOutsideUnitInterval) {
  const Dmdp m = gen_mm(1);
  EXPECT_THROW(value_discounted(m, Policy::constant(3, 0), 0, q(1)), std::invalid_argument);
  EXPECT_THROW(value_discounted(m, Policy::constant(3, 0), 0, q(3, 2)), std::invalid_argument);
  EXPECT_THROW(value_discounted(m, Policy::constant(3, 0), 0, q(-1, 2)), std::invalid_argument);
}

TEST(ValueDiscounted, MatchesLinearSolveOracle) {
  for (const auto& m : corpus()) {
    for (const Rational& g : {q(1, 2), q(7, 9), q(0)}) {
      for_each_policy(m, [&](const Policy& pi) {
        const auto expect = oracle::bellman_values(m, pi, g);
        const auto all = values_discounted(m, pi, g);
        ASSERT_EQ(all, expect);
        for (State s = 0; s < m.n; ++s) ASSERT_EQ(value_discounted(m, pi, s, g), expect[s]);
      });
    }
  }
}

TEST(QValue, Examples) {
  const Dmdp m = gen_mm(2);
  const Policy zeros = Policy::constant(6, 0);
  EXPECT_EQ(q_value(m, zeros, 0, 1, q(1, 2)), 1);
  EXPECT_THROW(q_value(m, zeros, 0, 2, q(1, 2)), std::out_of_range);
  for (const auto& mm : corpus()) {
    for_each_policy(mm, [&](const Policy& pi) {
      const auto v = values_discounted(mm, pi, q(3, 5));
      for (State s = 0; s < mm.n; ++s) ASSERT_EQ(q_value(mm, pi, s, pi[s], q(3, 5)), v[s]);
    });
  }
}

TEST(Gain, Examples) {
  const Dmdp m = gen_mm(2);
  for (State s = 0; s < 6; ++s) {
    EXPECT_EQ(gain(m, Policy::constant(6, 1), s), 1);
    EXPECT_EQ(gain(m, Policy::constant(6, 0), s), 0);
  }
  EXPECT_EQ(gain(m, cycle_0101(), 0), q(1, 2));
}

TEST(Gain, MatchesWindowAverageAndIsConstantOnCycles) {
  for (const auto& m : corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      const auto gb = gains_biases(m, pi);
      for (State s = 0; s < m.n; ++s) {
        ASSERT_EQ(gain(m, pi, s), oracle::window_gain(m, pi, s));
        ASSERT_EQ(gb.gain[s], gain(m, pi, s));
        for (const auto& sa : decompose(m, pi, s).cycle) ASSERT_EQ(gain(m, pi, sa.state), gb.gain[s]);
      }
    });
  }
}

TEST(Bias, Examples) {
  const Dmdp m = gen_mm(2);
  for (State s = 0; s < 6; ++s) EXPECT_EQ(bias(m, Policy::constant(6, 0), s), 0);
  const auto gb = gains_biases(m, cycle_0101());
  EXPECT_EQ(gb.bias[0], 0);
  EXPECT_EQ(gb.bias[4], q(1, 2));
  EXPECT_EQ(gb.bias[3], 0);
  EXPECT_EQ(gb.bias[1], q(1, 2));
  EXPECT_EQ(gb.bias[2], q(-1, 2));
  EXPECT_EQ(Rational(m.r(0, 0)) - q(1, 2) + gb.bias[1], 0);
}

TEST(Bias, MatchesAnchoredLinearSolve) {
  for (const auto& m : corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      const auto gb = gains_biases(m, pi);
      ASSERT_EQ(gb.bias, oracle::anchored_bias(m, pi));
      for (State s = 0; s < m.n; ++s) ASSERT_EQ(bias(m, pi, s), gb.bias[s]);
    });
  }
}

TEST(BellmanResidual, ZeroOnEvaluatorOutput) {
  for (const auto& m : corpus()) {
    for_each_policy(m, [&](const Policy& pi) {
      const auto v = values_discounted(m, pi, q(2, 3));
      const auto gb = gains_biases(m, pi);
      for (const auto& r : bellman_residual(m, pi, v, residual::Discounted{q(2, 3)})) ASSERT_EQ(r, 0);
      for (const auto& r : bellman_residual(m, pi, gb.gain, residual::Gain{})) ASSERT_EQ(r, 0);
      for (const auto& r : bellman_residual(m, pi, gb.bias, residual::Bias{gb.gain})) ASSERT_EQ(r, 0);
    });
  }
}

TEST(BellmanResidual, PerturbationDetected) {
  const Dmdp m = gen_mm(2);
  const Policy pi = cycle_0101();
  const Rational g = q(1, 2);
  // Only states with at most one predecessor: the perturbation then touches
  // the state's own equation and at most one other.
  for (State target = 0; target < m.n; ++target) {
    std::size_t preds = 0;
    for (State u = 0; u < m.n; ++u) preds += m.next(u, pi[u]) == target && u != target;
    if (preds > 1) continue;
    auto v = values_discounted(m, pi, g);
    v[target] += 1;
    std::size_t nonzero = 0;
    for (const auto& r : bellman_residual(m, pi, v, residual::Discounted{g})) nonzero += r != 0;
    EXPECT_GE(nonzero, 1u);
    EXPECT_LE(nonzero, 2u);
  }
}

TEST(BellmanResidual, LengthMismatch) {
  const Dmdp m = gen_mm(1);
  EXPECT_THROW(bellman_residual(m, Policy::constant(3, 0), ValueTable(2), residual::Gain{}), std::invalid_argument);
}
