#pragma once

#include "dmdp/polynomial.hpp"

#include <compare>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dmdp {

/// p / gcd(p, p'), primitive with positive leading coefficient.
inline IntPolynomial squarefree_part(const IntPolynomial& p) {
  if (p.is_zero()) throw std::domain_error("squarefree part of zero polynomial");
  if (p.degree() == 0) return IntPolynomial::constant(1);
  return exact_quotient_primitive(p, gcd(p, p.derivative()));
}

/// Divides by the positive content, keeping the sign of every coefficient.
inline IntPolynomial exact_quotient_by_content(const IntPolynomial& p) {
  if (p.is_zero()) return p;
  const BigInt c = p.content();
  std::vector<BigInt> v(p.coeffs().size());
  for (std::size_t i = 0; i < v.size(); ++i) mpz_divexact(v[i].get_mpz_t(), p.coeffs()[i].get_mpz_t(), c.get_mpz_t());
  return IntPolynomial(std::move(v));
}

/// Sturm sequence of a square-free polynomial. count(lo, hi) is the number
/// of distinct real roots in (lo, hi].
class SturmSequence {
 public:
  explicit SturmSequence(IntPolynomial squarefree) {
    if (squarefree.is_zero()) throw std::domain_error("Sturm sequence of zero polynomial");
    seq_.push_back(std::move(squarefree));
    if (seq_[0].degree() == 0) return;
    const IntPolynomial d = seq_[0].derivative();
    seq_.push_back(exact_quotient_by_content(d));
    while (seq_.back().degree() > 0) {
      IntPolynomial r = positive_pseudo_remainder(seq_[seq_.size() - 2], seq_.back());
      if (r.is_zero()) break;
      seq_.push_back(-exact_quotient_by_content(r));
    }
  }

  const IntPolynomial& poly() const { return seq_.front(); }

  int variations(const Rational& x) const {
    int changes = 0;
    int last = 0;
    for (const auto& p : seq_) {
      const int s = p.sign_at(x);
      if (s == 0) continue;
      if (last != 0 && s != last) ++changes;
      last = s;
    }
    return changes;
  }

  std::size_t count(const Rational& lo, const Rational& hi) const {
    if (hi <= lo) return 0;
    return static_cast<std::size_t>(variations(lo) - variations(hi));
  }

 private:
  std::vector<IntPolynomial> seq_;
};

/// Smallest-denominator rational in the closed interval [lo, hi].
inline Rational simplest_rational_between(Rational lo, Rational hi) {
  if (lo > hi) std::swap(lo, hi);
  if (lo <= 0 && hi >= 0) return Rational(0);
  if (hi < 0) return -simplest_rational_between(-hi, -lo);
  BigInt fl;
  mpz_fdiv_q(fl.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
  if (Rational(fl) == lo) return lo;
  if (Rational(fl + 1) <= hi) return Rational(fl + 1);
  const Rational frac_lo = lo - fl;
  const Rational frac_hi = hi - fl;
  return Rational(fl) + 1 / simplest_rational_between(1 / frac_hi, 1 / frac_lo);
}

/// A real root of a square-free integer polynomial. Either an exact rational
/// (lo == hi) or the unique root in (lo, hi], which is then irrational.
class IsolatedRoot {
 public:
  IsolatedRoot(std::shared_ptr<const SturmSequence> sturm, Rational lo, Rational hi)
      : sturm_(std::move(sturm)), lo_(std::move(lo)), hi_(std::move(hi)) {}

  static IsolatedRoot exact_point(std::shared_ptr<const SturmSequence> sturm, const Rational& x) {
    return IsolatedRoot(std::move(sturm), x, x);
  }

  bool exact() const { return lo_ == hi_; }
  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  Rational width() const { return hi_ - lo_; }
  const IntPolynomial& poly() const { return sturm_->poly(); }
  const SturmSequence& sturm() const { return *sturm_; }

  /// Halves the interval (no-op for exact roots).
  void bisect() {
    if (exact()) return;
    const Rational mid = (lo_ + hi_) / 2;
    const int s_mid = poly().sign_at(mid);
    const int s_hi = poly().sign_at(hi_);
    if (s_mid != s_hi) lo_ = mid;
    else hi_ = mid;
  }

  void refine_to(const Rational& width) {
    while (!exact() && hi_ - lo_ > width) bisect();
  }

  /// Sign of (root - x), exactly.
  int compare_to(const Rational& x) const {
    if (exact()) return sgn(lo_ - x);
    if (x <= lo_) return 1;
    if (x >= hi_) return -1;
    // x inside (lo, hi): the root is on the side where the sign changes.
    return poly().sign_at(x) != poly().sign_at(hi_) ? 1 : -1;
  }

 private:
  std::shared_ptr<const SturmSequence> sturm_;
  Rational lo_;
  Rational hi_;
};

inline std::strong_ordering compare(IsolatedRoot a, IsolatedRoot b) {
  auto from_sign = [](int s) {
    return s < 0 ? std::strong_ordering::less : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  };
  if (a.exact()) return from_sign(-b.compare_to(a.lo()));
  if (b.exact()) return from_sign(a.compare_to(b.lo()));
  if (a.hi() <= b.lo()) return std::strong_ordering::less;
  if (b.hi() <= a.lo()) return std::strong_ordering::greater;
  const IntPolynomial g = gcd(a.poly(), b.poly());
  if (g.degree() >= 1) {
    const Rational lo = a.lo() > b.lo() ? a.lo() : b.lo();
    const Rational hi = a.hi() < b.hi() ? a.hi() : b.hi();
    if (SturmSequence(g).count(lo, hi) > 0) return std::strong_ordering::equal;
  }
  while (!(a.hi() <= b.lo() || b.hi() <= a.lo())) {
    a.bisect();
    b.bisect();
  }
  return a.hi() <= b.lo() ? std::strong_ordering::less : std::strong_ordering::greater;
}

struct RootIsolation {
  IntPolynomial squarefree;
  std::vector<IsolatedRoot> roots;  // ascending
};

namespace detail {

inline void isolate_single(const std::shared_ptr<const SturmSequence>& sturm, Rational lo, Rational hi,
                           std::vector<IsolatedRoot>& out) {
  const IntPolynomial& p = sturm->poly();
  if (p.sign_at(hi) == 0) {
    out.push_back(IsolatedRoot::exact_point(sturm, hi));
    return;
  }
  // Any rational root u/v has v | lc(p). Below width 1/lc^2 the interval
  // holds at most one fraction with such a denominator, and it is the
  // simplest one.
  const BigInt lc = ::abs(p.leading());
  const Rational threshold = make_rational(BigInt(1), BigInt(lc * lc));
  while (hi - lo >= threshold) {
    const Rational mid = (lo + hi) / 2;
    const int s_mid = p.sign_at(mid);
    if (s_mid == 0) {
      out.push_back(IsolatedRoot::exact_point(sturm, mid));
      return;
    }
    if (s_mid != p.sign_at(hi)) lo = mid;
    else hi = mid;
  }
  const Rational candidate = simplest_rational_between(lo, hi);
  if (candidate != lo && p.sign_at(candidate) == 0) {
    out.push_back(IsolatedRoot::exact_point(sturm, candidate));
    return;
  }
  out.emplace_back(sturm, lo, hi);
}

inline void isolate_range(const std::shared_ptr<const SturmSequence>& sturm, const Rational& lo, const Rational& hi,
                          std::size_t count, std::vector<IsolatedRoot>& out) {
  if (count == 0) return;
  if (count == 1) {
    isolate_single(sturm, lo, hi, out);
    return;
  }
  const Rational mid = (lo + hi) / 2;
  const std::size_t left = sturm->count(lo, mid);
  isolate_range(sturm, lo, mid, left, out);
  isolate_range(sturm, mid, hi, count - left, out);
}

}  // namespace detail

/// Complete isolation of the distinct real roots of p in (lo, hi]. Rational
/// roots come back as exact points.
inline RootIsolation isolate_real_roots(const IntPolynomial& p, const Rational& lo, const Rational& hi) {
  if (p.is_zero()) throw std::domain_error("cannot isolate roots of the zero polynomial");
  if (!(lo < hi)) throw std::invalid_argument("isolate_real_roots requires lo < hi");
  RootIsolation iso;
  iso.squarefree = squarefree_part(p);
  auto sturm = std::make_shared<const SturmSequence>(iso.squarefree);
  detail::isolate_range(sturm, lo, hi, sturm->count(lo, hi), iso.roots);
  return iso;
}

/// All real roots lie in [-B, B] with B = 1 + max |a_i / a_n| (Cauchy).
inline Rational cauchy_bound(const IntPolynomial& p) {
  if (p.degree() < 1) return Rational(1);
  Rational best(0);
  for (int i = 0; i < p.degree(); ++i) {
    Rational r = make_rational(::abs(p.coeffs()[i]), ::abs(p.leading()));
    if (r > best) best = r;
  }
  return best + 1;
}

inline RootIsolation isolate_all_real_roots(const IntPolynomial& p) {
  const Rational b = cauchy_bound(p);
  return isolate_real_roots(p, -b - 1, b);
}

}  // namespace dmdp
