#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

#include "error.hpp"

namespace sarkisov {

using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
  check(den != 0, errc::instance_error, "rational with zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

/* Parse "p" or "p/q" with arbitrary-precision integers. */
inline Rat parse_rat(const std::string& s) {
  if (s.empty()) fail(errc::schema_error, "empty rational literal");
  auto ok_digits = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  std::string num = s, den = "1";
  if (auto pos = s.find('/'); pos != std::string::npos) {
    num = s.substr(0, pos);
    den = s.substr(pos + 1);
  }
  if (!ok_digits(num) || !ok_digits(den))
    fail(errc::schema_error, "bad rational literal '" + s + "'");
  Int n(num), d(den);
  if (d == 0) fail(errc::schema_error, "zero denominator in '" + s + "'");
  Rat q(n, d);
  q.canonicalize();
  return q;
}

/* Canonical text form: lowest terms, positive denominator, "/1" omitted. */
inline std::string rat_str(const Rat& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }

/* Exact square root when q is a perfect square of a rational; else nullopt. */
inline std::optional<Rat> exact_sqrt(const Rat& q) {
  if (q < 0) return std::nullopt;
  Int n = q.get_num(), d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) ||
      !mpz_perfect_square_p(d.get_mpz_t()))
    return std::nullopt;
  Int rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  Rat r(rn, rd);
  r.canonicalize();
  return r;
}

inline Int int_lcm(const Int& a, const Int& b) {
  Int r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Int int_gcd(const Int& a, const Int& b) {
  Int r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

}  // namespace sarkisov
