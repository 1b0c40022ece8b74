#pragma once

#include <string>
#include <vector>

#include "error.hpp"
#include "forest.hpp"
#include "rational.hpp"

namespace sarkisov {

/* A class in the Picard lattice of the plane blown up in r points, written in
   the basis l, e_1, ..., e_r with l^2 = 1, e_i^2 = -1, mixed products 0.
   `exc` stores the coefficients of the e_i (so e_1 is {0, {1,0,...}}). */
struct DivisorClass {
  Rat line = 0;
  std::vector<Rat> exc;

  DivisorClass() = default;
  DivisorClass(Rat l, std::vector<Rat> e) : line(std::move(l)), exc(std::move(e)) {}

  int rank() const { return static_cast<int>(exc.size()); }

  Rat exc_at(int i) const {  // 1-based
    return exc[static_cast<std::size_t>(i) - 1];
  }

  bool operator==(const DivisorClass& o) const {
    return line == o.line && exc == o.exc;
  }
  bool operator!=(const DivisorClass& o) const { return !(*this == o); }

  DivisorClass& operator+=(const DivisorClass& o) {
    check(rank() == o.rank(), errc::instance_error, "divisor rank mismatch");
    line += o.line;
    for (int i = 0; i < rank(); ++i) exc[static_cast<std::size_t>(i)] += o.exc[static_cast<std::size_t>(i)];
    return *this;
  }
  DivisorClass& operator-=(const DivisorClass& o) {
    check(rank() == o.rank(), errc::instance_error, "divisor rank mismatch");
    line -= o.line;
    for (int i = 0; i < rank(); ++i) exc[static_cast<std::size_t>(i)] -= o.exc[static_cast<std::size_t>(i)];
    return *this;
  }
  DivisorClass& operator*=(const Rat& s) {
    line *= s;
    for (auto& c : exc) c *= s;
    return *this;
  }

  friend DivisorClass operator+(DivisorClass a, const DivisorClass& b) { return a += b; }
  friend DivisorClass operator-(DivisorClass a, const DivisorClass& b) { return a -= b; }
  friend DivisorClass operator*(const Rat& s, DivisorClass a) { return a *= s; }
  friend DivisorClass operator-(DivisorClass a) { return a *= Rat(-1); }

  bool is_zero() const {
    if (line != 0) return false;
    for (const auto& c : exc)
      if (c != 0) return false;
    return true;
  }

  bool is_integral() const {
    if (!is_integer(line)) return false;
    for (const auto& c : exc)
      if (!is_integer(c)) return false;
    return true;
  }

  std::string str() const {
    std::string s = "(" + rat_str(line);
    for (const auto& c : exc) s += "," + rat_str(c);
    return s + ")";
  }
};

/* Intersection product for the form diag(1, -1, ..., -1). */
inline Rat intersect(const DivisorClass& a, const DivisorClass& b) {
  check(a.rank() == b.rank(), errc::instance_error,
        "intersection of classes of different rank");
  Rat s = a.line * b.line;
  for (int i = 0; i < a.rank(); ++i)
    s -= a.exc[static_cast<std::size_t>(i)] * b.exc[static_cast<std::size_t>(i)];
  return s;
}

inline Rat self_intersection(const DivisorClass& a) { return intersect(a, a); }

inline DivisorClass zero_class(int rank) {
  return DivisorClass(0, std::vector<Rat>(static_cast<std::size_t>(rank), Rat(0)));
}

inline DivisorClass line_class(int rank) {
  DivisorClass d = zero_class(rank);
  d.line = 1;
  return d;
}

/* Total transform e_i of the i-th exceptional curve. */
inline DivisorClass exceptional_total(int rank, int i) {
  check(i >= 1 && i <= rank, errc::instance_error, "exceptional index out of range");
  DivisorClass d = zero_class(rank);
  d.exc[static_cast<std::size_t>(i) - 1] = 1;
  return d;
}

/* K = -3l + sum e_i. */
inline DivisorClass canonical_class(int rank) {
  DivisorClass d = zero_class(rank);
  d.line = -3;
  for (auto& c : d.exc) c = 1;
  return d;
}

/* Strict transform of the i-th exceptional curve:
   e_i minus the e_j of the points proximate to point i. */
inline DivisorClass prime_exceptional_class(const ProximityForest& f, int i) {
  check(i >= 1 && i <= f.size(), errc::instance_error,
        "exceptional index out of range");
  DivisorClass d = exceptional_total(f.size(), i);
  for (int j : f.proximate_from(i)) d -= exceptional_total(f.size(), j);
  return d;
}

/* Class of a plane curve of degree d with multiplicity m_i at point i:
   d*l - sum m_i e_i. */
inline DivisorClass curve_class(Rat degree, const std::vector<Rat>& mults) {
  DivisorClass d(std::move(degree), mults);
  for (auto& c : d.exc) c = -c;
  return d;
}

/* Arithmetic genus of an integral class: p_a = (C^2 + C.K)/2 + 1. */
inline Rat arithmetic_genus(const DivisorClass& c) {
  return (self_intersection(c) + intersect(c, canonical_class(c.rank()))) / 2 + 1;
}

/* Extend a class by zero coefficients on newly added points. */
inline DivisorClass embed(const DivisorClass& c, int new_rank) {
  check(new_rank >= c.rank(), errc::instance_error, "embed cannot drop points");
  DivisorClass d = c;
  d.exc.resize(static_cast<std::size_t>(new_rank), Rat(0));
  return d;
}

/* Deterministic lexicographic order on (line, exc...). */
inline int compare(const DivisorClass& a, const DivisorClass& b) {
  check(a.rank() == b.rank(), errc::instance_error, "comparing different ranks");
  if (a.line != b.line) return a.line < b.line ? -1 : 1;
  for (int i = 0; i < a.rank(); ++i) {
    const Rat& x = a.exc[static_cast<std::size_t>(i)];
    const Rat& y = b.exc[static_cast<std::size_t>(i)];
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

}  // namespace sarkisov
