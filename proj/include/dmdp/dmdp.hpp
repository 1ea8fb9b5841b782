#pragma once

#include "dmdp/rational.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmdp {

using State = std::size_t;
using Action = std::size_t;

/// Deterministic MDP: every (state, action) pair has one successor and an
/// integer reward. Tables are row-major, entry (s, a) at s * k + a.
struct Dmdp {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<State> successor;
  std::vector<BigInt> reward;
  std::optional<Rational> gamma;

  State next(State s, Action a) const { return successor[s * k + a]; }
  const BigInt& r(State s, Action a) const { return reward[s * k + a]; }

  friend bool operator==(const Dmdp&, const Dmdp&) = default;
};

/// One action index per state.
struct Policy {
  std::vector<Action> actions;

  Policy() = default;
  explicit Policy(std::vector<Action> a) : actions(std::move(a)) {}
  static Policy constant(std::size_t n, Action a) { return Policy(std::vector<Action>(n, a)); }

  std::size_t size() const { return actions.size(); }
  Action operator[](State s) const { return actions[s]; }
  Action& operator[](State s) { return actions[s]; }

  friend bool operator==(const Policy&, const Policy&) = default;
  friend auto operator<=>(const Policy&, const Policy&) = default;

  /// Compact "0101"-style text for k <= 10, comma separated otherwise.
  std::string to_string(std::size_t k = 10) const {
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (k > 10 && i > 0) out += ',';
      out += std::to_string(actions[i]);
    }
    return out;
  }
};

struct PolicyHash {
  std::size_t operator()(const Policy& p) const {
    std::size_t h = 1469598103934665603ULL;
    for (auto a : p.actions) {
      h ^= a + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const Dmdp& m) {
  ValidationReport rep;
  if (m.n == 0) rep.violations.push_back("n must be positive");
  if (m.k == 0) rep.violations.push_back("k must be positive");
  if (m.successor.size() != m.n * m.k) {
    rep.violations.push_back("successor table has " + std::to_string(m.successor.size()) + " entries, expected " +
                             std::to_string(m.n * m.k));
  }
  if (m.reward.size() != m.n * m.k) {
    rep.violations.push_back("reward table has " + std::to_string(m.reward.size()) + " entries, expected " +
                             std::to_string(m.n * m.k));
  }
  if (m.k > 0) {
    for (std::size_t i = 0; i < m.successor.size(); ++i) {
      if (m.successor[i] >= m.n) {
        rep.violations.push_back("successor out of range at [" + std::to_string(i / m.k) + "][" +
                                 std::to_string(i % m.k) + "]: " + std::to_string(m.successor[i]));
      }
    }
  }
  if (m.gamma) {
    if (*m.gamma < 0) rep.violations.push_back("gamma negative: " + to_string(*m.gamma));
    if (*m.gamma >= 1) rep.violations.push_back("gamma not < 1: " + to_string(*m.gamma));
  }
  return rep;
}

inline bool is_valid_policy(const Dmdp& m, const Policy& pi) {
  if (pi.size() != m.n) return false;
  for (auto a : pi.actions) {
    if (a >= m.k) return false;
  }
  return true;
}

inline void require_policy(const Dmdp& m, const Policy& pi) {
  if (!is_valid_policy(m, pi)) throw std::invalid_argument("policy does not match instance dimensions");
}

/// gcd of all pairwise differences and the minimum, i.e. the affine map
/// r -> (r - min) / g that realizes the smallest bit-size.
struct RewardNormalization {
  BigInt min;
  BigInt step;  // 1 when all rewards are equal
};

inline RewardNormalization reward_normalization(std::span<const BigInt> rewards) {
  if (rewards.empty()) throw std::invalid_argument("bit_size of empty reward table");
  RewardNormalization norm{rewards[0], 0};
  for (const auto& r : rewards) {
    if (r < norm.min) norm.min = r;
  }
  for (const auto& r : rewards) norm.step = gcd(norm.step, BigInt(r - norm.min));
  if (norm.step == 0) norm.step = 1;
  return norm;
}

/// Smallest positive b such that some positive-affine image of the rewards
/// fits in {0, ..., 2^b - 1}.
inline unsigned bit_size(std::span<const BigInt> rewards) {
  const auto norm = reward_normalization(rewards);
  BigInt max_norm = 0;
  for (const auto& r : rewards) {
    BigInt v = (r - norm.min) / norm.step;
    if (v > max_norm) max_norm = v;
  }
  // max_norm <= 2^b - 1  <=>  b >= bitlength(max_norm)
  const unsigned bits = max_norm == 0 ? 0u : static_cast<unsigned>(mpz_sizeinbase(max_norm.get_mpz_t(), 2));
  return bits == 0 ? 1u : bits;
}

inline unsigned bit_size(const Dmdp& m) { return bit_size(std::span<const BigInt>(m.reward)); }

/// Same instance with rewards mapped to (r - min) / g. HPI traces are
/// unchanged by this map.
inline Dmdp normalize_rewards(const Dmdp& m) {
  Dmdp out = m;
  const auto norm = reward_normalization(m.reward);
  for (auto& r : out.reward) r = (r - norm.min) / norm.step;
  return out;
}

/// The M_m family: n = 3m states, action 0 steps +1 with reward 0, action 1
/// steps +2 with reward 1 (mod n).
inline Dmdp gen_mm(long m) {
  if (m <= 0) throw std::invalid_argument("gen_mm requires m >= 1");
  Dmdp out;
  out.n = static_cast<std::size_t>(3 * m);
  out.k = 2;
  out.successor.resize(out.n * 2);
  out.reward.resize(out.n * 2);
  for (State s = 0; s < out.n; ++s) {
    out.successor[s * 2 + 0] = (s + 1) % out.n;
    out.successor[s * 2 + 1] = (s + 2) % out.n;
    out.reward[s * 2 + 0] = 0;
    out.reward[s * 2 + 1] = 1;
  }
  return out;
}

namespace detail {

// Uniform in [0, bound) by rejection on raw mt19937_64 output; the standard
// distributions are implementation-defined, this is not.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t bound) {
  if (bound == 0) return eng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % bound;
}

// Uniform over {0, ..., 2^bits - 1}, assembled from 64-bit words low to high.
inline BigInt uniform_bits(std::mt19937_64& eng, unsigned bits) {
  BigInt out = 0;
  unsigned shift = 0;
  while (bits > 0) {
    const unsigned take = bits >= 64 ? 64 : bits;
    std::uint64_t word = eng();
    if (take < 64) word &= (std::uint64_t{1} << take) - 1;
    BigInt w;
    mpz_import(w.get_mpz_t(), 1, 1, sizeof(word), 0, 0, &word);
    out += w << shift;
    shift += take;
    bits -= take;
  }
  return out;
}

}  // namespace detail

/// Seeded random DMDP. Engine is std::mt19937_64(seed); for each state s and
/// action a in row-major order we draw the successor (uniform in [0, n)) and
/// then the reward (uniform b-bit integer).
inline Dmdp gen_random(std::size_t n, std::size_t k, unsigned b, std::uint64_t seed) {
  if (n == 0 || k == 0 || b == 0) throw std::invalid_argument("gen_random requires n, k, b >= 1");
  std::mt19937_64 eng(seed);
  Dmdp out;
  out.n = n;
  out.k = k;
  out.successor.resize(n * k);
  out.reward.resize(n * k);
  for (std::size_t i = 0; i < n * k; ++i) {
    out.successor[i] = static_cast<State>(detail::uniform_below(eng, n));
    out.reward[i] = detail::uniform_bits(eng, b);
  }
  return out;
}

/// k^n, saturating at max size_t.
inline std::size_t policy_count(const Dmdp& m) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < m.n; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / m.k) return std::numeric_limits<std::size_t>::max();
    total *= m.k;
  }
  return total;
}

/// Policy with lexicographic rank `index` (state 0 most significant).
inline Policy policy_from_index(const Dmdp& m, std::size_t index) {
  Policy pi = Policy::constant(m.n, 0);
  for (std::size_t i = m.n; i-- > 0;) {
    pi[i] = index % m.k;
    index /= m.k;
  }
  return pi;
}

/// Visits every policy in lexicographic order.
inline void for_each_policy(const Dmdp& m, const std::function<void(const Policy&)>& fn) {
  Policy pi = Policy::constant(m.n, 0);
  while (true) {
    fn(pi);
    std::size_t i = m.n;
    while (i > 0) {
      --i;
      if (++pi[i] < m.k) break;
      pi[i] = 0;
      if (i == 0) return;
    }
    if (m.n == 0) return;
  }
}

}  // namespace dmdp
