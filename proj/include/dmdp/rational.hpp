#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dmdp {

using BigInt = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline int sign(const BigInt& x) { return sgn(x); }
inline int sign(const Rational& x) { return sgn(x); }

inline std::strong_ordering compare(const Rational& a, const Rational& b) {
  const int c = cmp(a, b);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

inline Rational pow(const Rational& base, unsigned long exponent) {
  Rational result(1);
  mpz_pow_ui(result.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(result.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  return result;
}

/// Serializes as "num/den" with den > 0, always including the denominator.
inline std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

inline std::string to_string(const BigInt& x) { return x.get_str(); }

inline BigInt parse_bigint(std::string_view text) {
  BigInt value;
  const std::string s(text);
  if (s.empty() || value.set_str(s, 10) != 0) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return value;
}

/// Accepts "p/q" or a bare integer "p".
inline Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_bigint(text));
  return make_rational(parse_bigint(text.substr(0, slash)), parse_bigint(text.substr(slash + 1)));
}

/// Short-hand for tests and generators: num/den from machine integers.
inline Rational q(std::int64_t num, std::int64_t den = 1) {
  return make_rational(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
}

}  // namespace dmdp
