#pragma once

#include "dmdp/dmdp.hpp"
#include "dmdp/polynomial.hpp"
#include "dmdp/roots.hpp"
#include "dmdp/signpoly.hpp"

#include <mpfr.h>

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dmdp {

/// Relative slack for outward-rounded irrational bounds: 2^-30.
inline Rational default_slack() { return make_rational(BigInt(1), BigInt(1) << 30); }

struct Deflation {
  unsigned z = 0;
  IntPolynomial d;  // p = (x - 1)^z d, d(1) != 0
};

/// Strips every factor (x - 1) by synthetic division.
inline Deflation multiplicity_at_one(const IntPolynomial& p) {
  if (p.is_zero()) throw std::domain_error("multiplicity at 1 of the zero polynomial is undefined");
  Deflation out{0, p};
  while (out.d.value_at_one() == 0) {
    const auto& c = out.d.coeffs();
    // Divide by (x - 1): q_{i-1} = a_i + q_i, from the top.
    std::vector<BigInt> q(c.size() - 1);
    BigInt carry = 0;
    for (std::size_t i = c.size() - 1; i >= 1; --i) {
      carry += c[i];
      q[i - 1] = carry;
    }
    out.d = IntPolynomial(std::move(q));
    ++out.z;
  }
  return out;
}

/// p(1 - x), coefficient j = (-1)^j sum_{i >= j} C(i, j) a_i.
inline IntPolynomial transform_one_minus(const IntPolynomial& p) {
  const auto& a = p.coeffs();
  std::vector<BigInt> out(a.size());
  BigInt binom;
  for (std::size_t j = 0; j < a.size(); ++j) {
    BigInt sum = 0;
    for (std::size_t i = j; i < a.size(); ++i) {
      mpz_bin_uiui(binom.get_mpz_t(), i, j);
      sum += binom * a[i];
    }
    out[j] = (j % 2 == 0) ? sum : BigInt(-sum);
  }
  return IntPolynomial(std::move(out));
}

namespace detail {

// Rational u with u^s >= r and u <= r^(1/s) (1 + slack), by bisection over
// dyadic rationals. r > 0.
inline Rational root_upper(const Rational& r, unsigned long s, const Rational& slack) {
  if (s == 1) return r;
  Rational lo(0);
  Rational hi = r > 1 ? r : Rational(1);
  while (lo == 0 || hi > lo * (1 + slack)) {
    const Rational mid = (lo + hi) / 2;
    if (pow(mid, s) >= r) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace detail

/// Root-magnitude bound 2 max_{s=1..n} |a_{n-s} / a_n|^(1/s), where the
/// leading coefficient plays the normalizing role. Returned as a rational
/// no smaller than the exact bound and at most (1 + slack) times it.
inline Rational zassenhaus_upper(const IntPolynomial& p, const Rational& slack = default_slack()) {
  if (p.is_zero()) throw std::domain_error("zassenhaus bound of zero polynomial");
  if (slack <= 0) throw std::invalid_argument("slack must be positive");
  const int n = p.degree();
  const BigInt lead = ::abs(p.leading());
  Rational best(0);
  for (int s = 1; s <= n; ++s) {
    const BigInt& c = p.coeffs()[static_cast<std::size_t>(n - s)];
    if (c == 0) continue;
    const Rational ratio = make_rational(::abs(c), lead);
    Rational u = detail::root_upper(ratio, static_cast<unsigned long>(s), slack);
    if (u > best) best = std::move(u);
  }
  return 2 * best;
}

struct RootDistanceBound {
  Rational u;       // every real root tau < 1 satisfies tau <= 1 - 1/u
  unsigned z = 0;   // multiplicity of the root 1
  Rational coarse;  // deg(D) (deg(D) + 1) H(D) for the deflated D
  IntPolynomial deflated;
};

/// Deflate at 1, map x -> 1 - x, reverse, and bound the roots of the
/// reversed polynomial. The reciprocal bounds how close a root below 1 can
/// get to 1.
inline RootDistanceBound up_root_bound(const IntPolynomial& p, const Rational& slack = default_slack()) {
  if (p.degree() < 1) throw std::domain_error("up_root_bound needs a non-constant polynomial");
  const Deflation defl = multiplicity_at_one(p);
  RootDistanceBound out;
  out.z = defl.z;
  out.deflated = defl.d;
  const BigInt deg(static_cast<long>(defl.d.degree()));
  out.coarse = Rational(deg * (deg + 1) * defl.d.height());
  if (defl.d.degree() < 1) {
    out.u = 1;
    return out;
  }
  const IntPolynomial reversed = transform_one_minus(defl.d).reverse();
  Rational u = zassenhaus_upper(reversed, slack);
  out.u = u < 1 ? Rational(1) : std::move(u);
  return out;
}

namespace detail {

class Mpfr {
 public:
  Mpfr() { mpfr_init2(v_, 256); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

  Rational to_rational() {
    Rational out;
    mpfr_get_q(out.get_mpq_t(), v_);
    return out;
  }

 private:
  mpfr_t v_;
};

}  // namespace detail

/// c sqrt(n (1 + ln(H(p) / |a_0|))), rounded up. Informational: the
/// absolute constant c is unknown. nullopt when a_0 = 0.
inline std::optional<Rational> borwein_multiplicity_bound(const IntPolynomial& p, const Rational& c = Rational(1)) {
  if (c <= 0) throw std::invalid_argument("Borwein constant must be positive");
  if (p.is_zero() || p.coeffs()[0] == 0) return std::nullopt;
  const Rational ratio = make_rational(p.height(), ::abs(p.coeffs()[0]));
  detail::Mpfr x;
  mpfr_set_q(x.get(), ratio.get_mpq_t(), MPFR_RNDU);
  mpfr_log(x.get(), x.get(), MPFR_RNDU);
  mpfr_add_ui(x.get(), x.get(), 1, MPFR_RNDU);
  mpfr_mul_ui(x.get(), x.get(), static_cast<unsigned long>(p.degree()), MPFR_RNDU);
  mpfr_sqrt(x.get(), x.get(), MPFR_RNDU);
  mpfr_mul_q(x.get(), x.get(), c.get_mpq_t(), MPFR_RNDU);
  return x.to_rational();
}

/// c1 sqrt(n b) ln(max(n / b, 2)) + c2 b, rounded up. Informational only.
inline Rational asymptotic_u(long n, long b, const Rational& c1 = Rational(1), const Rational& c2 = Rational(1)) {
  if (n < 2 || b < 1) throw std::invalid_argument("asymptotic_u requires n >= 2 and b >= 1");
  if (c1 < 0 || c2 < 0) throw std::invalid_argument("asymptotic_u constants must be non-negative");
  Rational ratio = make_rational(BigInt(n), BigInt(b));
  if (ratio < 2) ratio = 2;
  detail::Mpfr root;
  detail::Mpfr logt;
  mpfr_set_ui(root.get(), static_cast<unsigned long>(n * b), MPFR_RNDU);
  mpfr_sqrt(root.get(), root.get(), MPFR_RNDU);
  mpfr_set_q(logt.get(), ratio.get_mpq_t(), MPFR_RNDU);
  mpfr_log(logt.get(), logt.get(), MPFR_RNDU);
  mpfr_mul(root.get(), root.get(), logt.get(), MPFR_RNDU);
  mpfr_mul_q(root.get(), root.get(), c1.get_mpq_t(), MPFR_RNDU);
  return root.to_rational() + c2 * b;
}

/// Largest root of p in (0, 1), nullopt if none (the threshold is then 0).
/// Roots at exactly 1 are deflated first.
inline std::optional<IsolatedRoot> largest_root_below_one(const IntPolynomial& p, const Rational& above = Rational(0)) {
  if (p.is_zero()) return std::nullopt;
  const IntPolynomial d = multiplicity_at_one(p).d;
  if (d.degree() < 1) return std::nullopt;
  RootIsolation iso = isolate_real_roots(d, above, Rational(1));
  if (iso.roots.empty()) return std::nullopt;
  return iso.roots.back();
}

struct SignTuple {
  Policy pi;
  State s = 0;
  Action a = 0;
  Action a2 = 0;
};

/// Threshold of one tuple: largest root of its sign polynomial below 1,
/// clipped at 0 (nullopt means exactly 0).
inline std::optional<IsolatedRoot> tuple_threshold(const Dmdp& m, const Policy& pi, State s, Action a, Action a2) {
  return largest_root_below_one(build_sign_poly(m, pi, s, a, a2));
}

struct ThresholdResult {
  std::optional<IsolatedRoot> root;  // nullopt: gamma_Q is exactly 0
  std::optional<SignTuple> witness;
  std::size_t tuples = 0;
  std::size_t distinct_polynomials = 0;

  bool exact() const { return !root || root->exact(); }
  Rational lower() const { return root ? root->lo() : Rational(0); }
  Rational upper() const { return root ? root->hi() : Rational(0); }
  void refine_to(const Rational& width) {
    if (root) root->refine_to(width);
  }

  /// A rational strictly above gamma_Q, within `gap` * (1 - gamma_Q) of it.
  Rational rational_above(const Rational& gap = make_rational(BigInt(1), BigInt(1024))) {
    if (!root) return gap;
    if (root->exact()) return root->lo() + (1 - root->lo()) * gap;
    while (root->hi() >= 1 || root->width() > (1 - root->hi()) * gap) root->bisect();
    // hi is strictly above the (irrational) root.
    return root->hi();
  }
};

inline constexpr std::size_t kDefaultTupleBudget = 10'000'000;

/// gamma_Q = max over (pi, s, a, a2) of the largest root of the sign
/// polynomial in (0, 1), clipped at 0. Identical polynomials are examined
/// once; polynomials with no root above the running maximum are skipped
/// after a single Sturm count.
inline ThresholdResult gamma_q_brute(const Dmdp& m, std::size_t budget = kDefaultTupleBudget) {
  const std::size_t policies = policy_count(m);
  const std::size_t per_policy = m.n * m.k * m.k;
  if (policies > budget / std::max<std::size_t>(per_policy, 1)) {
    throw std::length_error("gamma_q enumeration exceeds budget " + std::to_string(budget));
  }
  ThresholdResult result;
  std::unordered_map<IntPolynomial, bool, IntPolynomialHash> seen;
  for_each_policy(m, [&](const Policy& pi) {
    for (State s = 0; s < m.n; ++s) {
      for (Action a = 0; a < m.k; ++a) {
        for (Action a2 = a + 1; a2 < m.k; ++a2) {
          ++result.tuples;
          if (!result.witness) result.witness = SignTuple{pi, s, a, a2};
          const IntPolynomial f = build_sign_poly(m, pi, s, a, a2);
          if (f.is_zero()) continue;
          const IntPolynomial key = f.primitive();
          if (!seen.emplace(key, true).second) continue;
          const auto candidate = largest_root_below_one(key, result.lower());
          if (!candidate) continue;
          if (!result.root || compare(*candidate, *result.root) == std::strong_ordering::greater) {
            result.root = *candidate;
            result.witness = SignTuple{pi, s, a, a2};
          }
        }
      }
    }
  });
  // Keep upper() a strict bound below 1.
  if (result.root) {
    while (!result.root->exact() && result.root->hi() >= 1) result.root->bisect();
  }
  result.distinct_polynomials = seen.size();
  // Each unordered pair was examined once; f(a2, a) = -f(a, a2) has the same roots.
  result.tuples *= 2;
  return result;
}

}  // namespace dmdp
