#pragma once

#include <vector>

#include "divisor.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "rational.hpp"

namespace sarkisov {

/* ---------- small lattice utilities shared by the engine and the verifier ---------- */

inline RatVec class_coords(const DivisorClass& d) {
  RatVec v;
  v.reserve(static_cast<std::size_t>(d.rank()) + 1);
  v.push_back(d.line);
  for (const auto& e : d.exc) v.push_back(e);
  return v;
}

inline DivisorClass class_from_coords(const RatVec& v) {
  return DivisorClass(v.at(0), RatVec(v.begin() + 1, v.end()));
}

inline bool proportional(const DivisorClass& a, const DivisorClass& b) {
  const RatVec x = class_coords(a), y = class_coords(b);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[i] * y[j] != x[j] * y[i]) return false;
  return true;
}

/* Scale a nonzero rational class to the primitive integral generator of its
   ray, oriented so the first nonzero coordinate is positive. */
inline DivisorClass primitive_direction(const DivisorClass& d) {
  check(!d.is_zero(), errc::internal_invariant_violation,
        "primitive direction of the zero class");
  RatVec v = class_coords(d);
  Int den = 1, num = 0;
  for (const auto& q : v) {
    den = int_lcm(den, q.get_den());
  }
  for (auto& q : v) q *= Rat(den);
  for (const auto& q : v) num = int_gcd(num, q.get_num());
  for (auto& q : v) q /= Rat(num);
  for (const auto& q : v) {
    if (q == 0) continue;
    if (q < 0)
      for (auto& w : v) w = -w;
    break;
  }
  return class_from_coords(v);
}

inline bool in_span(const DivisorClass& v, const std::vector<DivisorClass>& basis) {
  if (basis.empty()) return v.is_zero();
  const std::size_t n = static_cast<std::size_t>(v.rank()) + 1;
  RatMat rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].reserve(basis.size());
    for (const auto& b : basis) rows[i].push_back(class_coords(b)[i]);
  }
  return solve_affine(rows, class_coords(v)).has_value();
}

/* Two contractions of the same marked surface present the same model exactly
   when their realized classes span the same sublattice. */
inline bool same_span(const std::vector<DivisorClass>& a,
                      const std::vector<DivisorClass>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& v : a)
    if (!in_span(v, b)) return false;
  for (const auto& v : b)
    if (!in_span(v, a)) return false;
  return true;
}

}  // namespace sarkisov
