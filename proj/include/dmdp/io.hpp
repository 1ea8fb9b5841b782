#pragma once

#include "dmdp/dmdp.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dmdp {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

namespace detail {

// Integers inside int64 are emitted as JSON numbers, anything larger as a
// decimal string; both are accepted on input.
inline ordered_json bigint_to_json(const BigInt& x) {
  if (x.fits_slong_p()) return static_cast<std::int64_t>(x.get_si());
  return x.get_str();
}

inline BigInt bigint_from_json(const ordered_json& j, const std::string& where) {
  if (j.is_number_unsigned()) return BigInt(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return BigInt(std::to_string(j.get<std::int64_t>()));
  if (j.is_string()) {
    try {
      return parse_bigint(j.get<std::string>());
    } catch (const std::invalid_argument&) {
    }
  }
  throw ParseError(where + ": expected an integer", 0);
}

inline const ordered_json& require(const ordered_json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'", 0);
  return doc.at(key);
}

}  // namespace detail

inline ordered_json instance_to_json(const Dmdp& m) {
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["n"] = m.n;
  doc["k"] = m.k;
  ordered_json succ = ordered_json::array();
  ordered_json rew = ordered_json::array();
  for (State s = 0; s < m.n; ++s) {
    ordered_json srow = ordered_json::array();
    ordered_json rrow = ordered_json::array();
    for (Action a = 0; a < m.k; ++a) {
      srow.push_back(m.next(s, a));
      rrow.push_back(detail::bigint_to_json(m.r(s, a)));
    }
    succ.push_back(std::move(srow));
    rew.push_back(std::move(rrow));
  }
  doc["successor"] = std::move(succ);
  doc["reward"] = std::move(rew);
  if (m.gamma) {
    doc["gamma"] = {{"num", detail::bigint_to_json(m.gamma->get_num())},
                    {"den", detail::bigint_to_json(m.gamma->get_den())}};
  }
  return doc;
}

/// Canonical text form: compact JSON, fixed key order, trailing newline.
inline std::string emit_instance(const Dmdp& m) { return instance_to_json(m).dump() + "\n"; }

inline Dmdp instance_from_json(const ordered_json& doc) {
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object", 0);
  if (doc.contains("format") && doc.at("format") != kFormatVersion) {
    throw ParseError("unsupported instance format " + doc.at("format").dump(), 0);
  }
  const auto& jn = detail::require(doc, "n");
  const auto& jk = detail::require(doc, "k");
  if (!jn.is_number_unsigned() || !jk.is_number_unsigned()) throw ParseError("n and k must be non-negative integers", 0);
  Dmdp m;
  m.n = jn.get<std::size_t>();
  m.k = jk.get<std::size_t>();
  const auto& succ = detail::require(doc, "successor");
  const auto& rew = detail::require(doc, "reward");
  if (!succ.is_array() || succ.size() != m.n) throw ParseError("successor must be an n-row matrix", 0);
  if (!rew.is_array() || rew.size() != m.n) throw ParseError("reward must be an n-row matrix", 0);
  for (State s = 0; s < m.n; ++s) {
    const std::string row = "[" + std::to_string(s) + "]";
    if (!succ[s].is_array() || succ[s].size() != m.k) throw ParseError("successor" + row + " must have k entries", 0);
    if (!rew[s].is_array() || rew[s].size() != m.k) throw ParseError("reward" + row + " must have k entries", 0);
    for (Action a = 0; a < m.k; ++a) {
      const std::string cell = row + "[" + std::to_string(a) + "]";
      if (!succ[s][a].is_number_unsigned()) throw ParseError("successor" + cell + " must be a non-negative integer", 0);
      m.successor.push_back(succ[s][a].get<std::size_t>());
      m.reward.push_back(detail::bigint_from_json(rew[s][a], "reward" + cell));
    }
  }
  if (doc.contains("gamma") && !doc.at("gamma").is_null()) {
    const auto& g = doc.at("gamma");
    const BigInt num = detail::bigint_from_json(detail::require(g, "num"), "gamma.num");
    const BigInt den = detail::bigint_from_json(detail::require(g, "den"), "gamma.den");
    if (den == 0) throw ParseError("gamma.den must be nonzero", 0);
    m.gamma = make_rational(num, den);
  }
  const auto rep = validate(m);
  if (!rep.ok()) {
    std::string msg = "invalid instance:";
    for (const auto& v : rep.violations) msg += " " + v + ";";
    throw ParseError(msg, 0);
  }
  return m;
}

/// Parses and validates an instance document. Malformed JSON reports the
/// byte offset of the failure.
inline Dmdp parse_instance(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
  return instance_from_json(doc);
}

/// 64-bit FNV-1a over the canonical instance text, as 16 hex digits.
inline std::string instance_digest(const Dmdp& m) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : emit_instance(m)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace dmdp
