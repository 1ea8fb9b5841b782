#pragma once

#include "dmdp/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dmdp {

/// Univariate polynomial with arbitrary-precision integer coefficients,
/// stored in ascending degree order with trailing zeros trimmed. The zero
/// polynomial has no coefficients and degree -1.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  IntPolynomial(std::initializer_list<long> coeffs) {
    coeffs_.reserve(coeffs.size());
    for (long c : coeffs) coeffs_.emplace_back(c);
    trim();
  }

  static IntPolynomial constant(const BigInt& c) { return IntPolynomial(std::vector<BigInt>{c}); }

  /// c * x^power
  static IntPolynomial monomial(const BigInt& c, std::size_t power) {
    std::vector<BigInt> v(power + 1);
    v[power] = c;
    return IntPolynomial(std::move(v));
  }

  const std::vector<BigInt>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  /// Coefficient of x^i; zero beyond the degree.
  BigInt operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : BigInt(0); }

  const BigInt& leading() const {
    if (is_zero()) throw std::domain_error("leading coefficient of zero polynomial");
    return coeffs_.back();
  }

  /// Largest absolute coefficient; 0 for the zero polynomial.
  BigInt height() const {
    BigInt h = 0;
    for (const auto& c : coeffs_) {
      if (::abs(c) > h) h = ::abs(c);
    }
    return h;
  }

  /// gcd of the coefficients, positive (0 for the zero polynomial).
  BigInt content() const {
    BigInt g = 0;
    for (const auto& c : coeffs_) g = gcd(g, c);
    return g;
  }

  /// Divides out the content and makes the leading coefficient positive.
  IntPolynomial primitive() const {
    if (is_zero()) return {};
    BigInt g = content();
    if (leading() < 0) g = -g;
    std::vector<BigInt> v(coeffs_.size());
    for (std::size_t i = 0; i < v.size(); ++i) mpz_divexact(v[i].get_mpz_t(), coeffs_[i].get_mpz_t(), g.get_mpz_t());
    return IntPolynomial(std::move(v));
  }

  IntPolynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<BigInt> v(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) v[i - 1] = coeffs_[i] * static_cast<unsigned long>(i);
    return IntPolynomial(std::move(v));
  }

  /// x^deg * p(1/x), taken with respect to the polynomial's own degree.
  IntPolynomial reverse() const {
    std::vector<BigInt> v(coeffs_.rbegin(), coeffs_.rend());
    return IntPolynomial(std::move(v));
  }

  BigInt value_at_one() const {
    BigInt s = 0;
    for (const auto& c : coeffs_) s += c;
    return s;
  }

  Rational evaluate(const Rational& x) const {
    Rational acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// Exact sign of p(x) using homogeneous integer evaluation (no rationals).
  int sign_at(const Rational& x) const {
    if (is_zero()) return 0;
    const BigInt& num = x.get_num();
    const BigInt& den = x.get_den();
    // sum a_i num^i den^(d-i), Horner in num with den powers folded in.
    BigInt acc = 0;
    BigInt den_pow = 1;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * num + *it * den_pow;
      den_pow *= den;
    }
    return sgn(acc);
  }

  IntPolynomial operator-() const {
    std::vector<BigInt> v(coeffs_);
    for (auto& c : v) c = -c;
    return IntPolynomial(std::move(v));
  }

  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
    std::vector<BigInt> v(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return IntPolynomial(std::move(v));
  }
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) { return a + (-b); }

  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<BigInt> v(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (a.coeffs_[i] == 0) continue;
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return IntPolynomial(std::move(v));
  }

  friend IntPolynomial operator*(const BigInt& c, const IntPolynomial& p) {
    std::vector<BigInt> v(p.coeffs_);
    for (auto& x : v) x *= c;
    return IntPolynomial(std::move(v));
  }

  IntPolynomial& operator+=(const IntPolynomial& o) { return *this = *this + o; }
  IntPolynomial& operator-=(const IntPolynomial& o) { return *this = *this - o; }

  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.coeffs_ == b.coeffs_; }

  /// "c0 + c1 x + ..." style text, mostly for diagnostics.
  std::string to_string() const {
    if (is_zero()) return "0";
    std::string out;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == 0) continue;
      if (!out.empty()) out += coeffs_[i] < 0 ? " - " : " + ";
      else if (coeffs_[i] < 0) out += "-";
      const BigInt mag = ::abs(coeffs_[i]);
      if (i == 0 || mag != 1) out += mag.get_str();
      if (i >= 1) out += "x";
      if (i >= 2) out += "^" + std::to_string(i);
    }
    return out;
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<BigInt> coeffs_;
};

namespace detail {

/// Scales a rational coefficient vector by the (positive) lcm of its
/// denominators, giving an integer polynomial with the same sign pattern.
inline IntPolynomial clear_denominators(const std::vector<Rational>& v) {
  BigInt lcm_den = 1;
  for (const auto& c : v) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), c.get_den_mpz_t());
  std::vector<BigInt> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Rational scaled = v[i] * lcm_den;
    out[i] = scaled.get_num();
  }
  return IntPolynomial(std::move(out));
}

/// Division over Q: a = quot * b + rem with deg rem < deg b.
inline std::pair<std::vector<Rational>, std::vector<Rational>> divmod_rational(const IntPolynomial& a,
                                                                              const IntPolynomial& b) {
  if (b.is_zero()) throw std::domain_error("division by zero polynomial");
  std::vector<Rational> r(a.coeffs().begin(), a.coeffs().end());
  const int da = a.degree();
  const int db = b.degree();
  std::vector<Rational> quot(da >= db ? static_cast<std::size_t>(da - db + 1) : 0);
  const Rational lb(b.leading());
  for (int i = da; i >= db; --i) {
    const Rational t = r[i] / lb;
    quot[i - db] = t;
    if (t == 0) continue;
    for (int j = 0; j <= db; ++j) r[i - db + j] -= t * b.coeffs()[j];
  }
  r.resize(static_cast<std::size_t>(std::max(0, std::min(da + 1, db))));
  return {std::move(quot), std::move(r)};
}

}  // namespace detail

/// Remainder of a mod b up to a positive integer factor. Positive scaling
/// keeps Sturm sign conventions intact.
inline IntPolynomial positive_pseudo_remainder(const IntPolynomial& a, const IntPolynomial& b) {
  return detail::clear_denominators(detail::divmod_rational(a, b).second);
}

/// Exact quotient a / b over the rationals, scaled to a primitive integer
/// polynomial with positive leading coefficient. Requires b | a over Q.
inline IntPolynomial exact_quotient_primitive(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.is_zero()) return {};
  auto [quot, rem] = detail::divmod_rational(a, b);
  for (const auto& c : rem) {
    if (c != 0) throw std::domain_error("exact_quotient_primitive: divisor does not divide");
  }
  return detail::clear_denominators(quot).primitive();
}

/// Primitive gcd with positive leading coefficient (primitive PRS).
inline IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b) {
  IntPolynomial x = a.primitive();
  IntPolynomial y = b.primitive();
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  if (x.degree() < y.degree()) std::swap(x, y);
  while (!y.is_zero()) {
    IntPolynomial r = positive_pseudo_remainder(x, y).primitive();
    x = std::move(y);
    y = std::move(r);
  }
  return x;
}

struct IntPolynomialHash {
  std::size_t operator()(const IntPolynomial& p) const {
    std::size_t h = 1469598103934665603ULL;
    for (const auto& c : p.coeffs()) {
      h ^= std::hash<std::string>{}(c.get_str(16));
      h *= 1099511628211ULL;
    }
    return h;
  }
};

}  // namespace dmdp
