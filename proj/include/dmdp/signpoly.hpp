#pragma once

#include "dmdp/dmdp.hpp"
#include "dmdp/graph_eval.hpp"
#include "dmdp/polynomial.hpp"

#include <stdexcept>
#include <string>

namespace dmdp {

namespace detail {

// R(s, a) + sum_{i=1..p} gamma^i R(P[i]) where P is the path from T(s, a).
inline IntPolynomial immediate_and_path(const Dmdp& m, State s, Action a, const PathCycle& from_next) {
  std::vector<BigInt> c;
  c.reserve(from_next.p() + 1);
  c.push_back(m.r(s, a));
  for (const auto& sa : from_next.path) c.push_back(m.r(sa.state, sa.action));
  return IntPolynomial(std::move(c));
}

// gamma^p sum_{i=1..c} gamma^i R(C[i]).
inline IntPolynomial shifted_cycle(const Dmdp& m, const PathCycle& from_next) {
  std::vector<BigInt> c(from_next.p() + from_next.c() + 1);
  for (std::size_t i = 0; i < from_next.c(); ++i) {
    const auto& sa = from_next.cycle[i];
    c[from_next.p() + i + 1] = m.r(sa.state, sa.action);
  }
  return IntPolynomial(std::move(c));
}

// 1 - gamma^c
inline IntPolynomial one_minus_power(std::size_t c) {
  return IntPolynomial::constant(1) - IntPolynomial::monomial(1, c);
}

}  // namespace detail

/// Q-difference sign polynomial in gamma:
///   (Q(s,a) - Q(s,a2)) (1 - gamma^{c_a}) (1 - gamma^{c_a2})
/// expanded as f1 + f2 + f3 + f4 over the integers. Its sign on [0, 1)
/// equals the sign of the Q-value difference.
inline IntPolynomial build_sign_poly(const Dmdp& m, const Policy& pi, State s, Action a, Action a2) {
  require_policy(m, pi);
  if (s >= m.n) throw std::out_of_range("state " + std::to_string(s) + " out of range");
  if (a >= m.k || a2 >= m.k) throw std::out_of_range("action out of range (k = " + std::to_string(m.k) + ")");
  if (a == a2) return {};

  const PathCycle first = decompose(m, pi, m.next(s, a));
  const PathCycle second = decompose(m, pi, m.next(s, a2));
  const IntPolynomial e_first = detail::one_minus_power(first.c());
  const IntPolynomial e_second = detail::one_minus_power(second.c());
  const IntPolynomial both = e_first * e_second;

  const IntPolynomial f1 = detail::immediate_and_path(m, s, a, first) * both;
  const IntPolynomial f2 = -(detail::immediate_and_path(m, s, a2, second) * both);
  const IntPolynomial f3 = detail::shifted_cycle(m, first) * e_second;
  const IntPolynomial f4 = -(detail::shifted_cycle(m, second) * e_first);
  return f1 + f2 + f3 + f4;
}

/// Exact sign of p(gamma) in {-1, 0, +1}.
inline int sign_at(const IntPolynomial& p, const Rational& gamma) { return p.sign_at(gamma); }

}  // namespace dmdp
