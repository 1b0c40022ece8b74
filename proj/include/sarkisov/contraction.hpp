#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divisor.hpp"
#include "error.hpp"
#include "forest.hpp"
#include "linalg.hpp"
#include "rational.hpp"

namespace sarkisov {

/* An irreducible curve to contract, named by what it is: either the strict
   transform of the i-th exceptional curve, or the strict transform of a plane
   curve of given degree and multiplicities. */
struct CurveTag {
  Int degree;
  std::vector<Int> mults;

  bool operator==(const CurveTag& o) const {
    return degree == o.degree && mults == o.mults;
  }
};

struct TaggedClass {
  enum class Kind { prime, curve };

  Kind kind = Kind::prime;
  int index = 0;   // prime: 1-based point index
  CurveTag curve;  // curve: plane data

  static TaggedClass make_prime(int i) {
    TaggedClass t;
    t.kind = Kind::prime;
    t.index = i;
    return t;
  }
  static TaggedClass make_curve(Int degree, std::vector<Int> mults) {
    TaggedClass t;
    t.kind = Kind::curve;
    t.curve = CurveTag{std::move(degree), std::move(mults)};
    return t;
  }

  bool operator==(const TaggedClass& o) const {
    if (kind != o.kind) return false;
    return kind == Kind::prime ? index == o.index : curve == o.curve;
  }

  std::string str() const {
    if (kind == Kind::prime) return "E" + std::to_string(index);
    std::string s = "C(" + curve.degree.get_str() + ";";
    for (std::size_t i = 0; i < curve.mults.size(); ++i)
      s += (i ? "," : "") + curve.mults[i].get_str();
    return s + ")";
  }
};

/* Deterministic order: primes by index, then curves by (degree, mults). */
inline int compare(const TaggedClass& a, const TaggedClass& b) {
  if (a.kind != b.kind) return a.kind == TaggedClass::Kind::prime ? -1 : 1;
  if (a.kind == TaggedClass::Kind::prime)
    return a.index < b.index ? -1 : (a.index > b.index ? 1 : 0);
  if (a.curve.degree != b.curve.degree)
    return a.curve.degree < b.curve.degree ? -1 : 1;
  if (a.curve.mults != b.curve.mults)
    return a.curve.mults < b.curve.mults ? -1 : 1;
  return 0;
}

inline void validate_tag(const ProximityForest& f, const TaggedClass& t) {
  if (t.kind == TaggedClass::Kind::prime) {
    check(t.index >= 1 && t.index <= f.size(), errc::instance_error,
          "exceptional index out of range");
  } else {
    check(t.curve.degree >= 1, errc::instance_error,
          "plane curve tag must have positive degree");
    check(static_cast<int>(t.curve.mults.size()) == f.size(), errc::instance_error,
          "curve multiplicity vector length mismatch");
    for (const auto& m : t.curve.mults)
      check(m >= 0, errc::instance_error, "curve multiplicities must be nonnegative");
  }
}

inline DivisorClass realize(const ProximityForest& f, const TaggedClass& t) {
  if (t.kind == TaggedClass::Kind::prime) return prime_exceptional_class(f, t.index);
  check(static_cast<int>(t.curve.mults.size()) == f.size(), errc::instance_error,
        "curve multiplicity vector length mismatch");
  std::vector<Rat> m;
  m.reserve(t.curve.mults.size());
  for (const auto& x : t.curve.mults) m.emplace_back(x);
  return curve_class(Rat(t.curve.degree), m);
}

/* Recover the contraction tag presenting an integral class: a prime
   exceptional class, or a plane curve of positive degree with nonnegative
   multiplicities.  Classes of neither shape have no contractible model. */
inline std::optional<TaggedClass> tag_for_class(const ProximityForest& f,
                                                const DivisorClass& c) {
  if (!c.is_integral() || c.is_zero()) return std::nullopt;
  for (int i = 1; i <= f.size(); ++i)
    if (prime_exceptional_class(f, i) == c) return TaggedClass::make_prime(i);
  if (c.line < 1) return std::nullopt;
  std::vector<Int> m;
  for (const auto& e : c.exc) {
    if (e > 0) return std::nullopt;
    m.push_back(Rat(-e).get_num());
  }
  return TaggedClass::make_curve(c.line.get_num(), std::move(m));
}

/* Contractibility criterion: the classes span a negative definite sublattice
   (all leading principal minors of the negated Gram matrix are positive). */
inline bool gram_negative_definite(const std::vector<DivisorClass>& classes) {
  const std::size_t n = classes.size();
  RatMat neg(n, RatVec(n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) neg[i][j] = -intersect(classes[i], classes[j]);
  return positive_definite(neg);
}

/* A set of pairwise distinct irreducible curves on the marked surface that
   contract together to a normal projective surface.  Validated on
   construction: each class has negative self-intersection, distinct members
   meet nonnegatively, and the negated Gram matrix is positive definite. */
class ContractionSet {
 public:
  ContractionSet() = default;

  ContractionSet(const ProximityForest& f, std::vector<TaggedClass> tags)
      : tags_(std::move(tags)) {
    std::sort(tags_.begin(), tags_.end(),
              [](const TaggedClass& a, const TaggedClass& b) { return compare(a, b) < 0; });
    classes_.reserve(tags_.size());
    for (const auto& t : tags_) {
      validate_tag(f, t);
      classes_.push_back(realize(f, t));
    }
    for (std::size_t i = 0; i + 1 < tags_.size(); ++i)
      check(compare(tags_[i], tags_[i + 1]) != 0, errc::instance_error,
            "duplicate contracted curve " + tags_[i].str());
    const std::size_t n = tags_.size();
    gram_.assign(n, RatVec(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) gram_[i][j] = intersect(classes_[i], classes_[j]);
      check(gram_[i][i] < 0, errc::non_contractible,
            "curve " + tags_[i].str() + " has nonnegative self-intersection");
      Rat pa = arithmetic_genus(classes_[i]);
      check(pa >= 0, errc::instance_error,
            "curve " + tags_[i].str() + " has negative arithmetic genus");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        check(gram_[i][j] >= 0, errc::instance_error,
              "curves " + tags_[i].str() + " and " + tags_[j].str() +
                  " meet negatively");
    check(gram_negative_definite(classes_), errc::non_contractible,
          "contracted classes do not span a negative definite sublattice");
  }

  int size() const { return static_cast<int>(tags_.size()); }
  bool empty() const { return tags_.empty(); }
  const std::vector<TaggedClass>& tags() const { return tags_; }
  const std::vector<DivisorClass>& classes() const { return classes_; }
  const RatMat& gram() const { return gram_; }

  bool contains(const TaggedClass& t) const {
    for (const auto& u : tags_)
      if (u == t) return true;
    return false;
  }

  int find_class(const DivisorClass& c) const {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i] == c) return static_cast<int>(i);
    return -1;
  }

  std::string str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < tags_.size(); ++i) s += (i ? "," : "") + tags_[i].str();
    return s + "}";
  }

 private:
  std::vector<TaggedClass> tags_;
  std::vector<DivisorClass> classes_;
  RatMat gram_;
};

/* Decomposition D = projected + sum coeff[j] * c_j with projected orthogonal
   to every contracted class.  `projected` represents the pullback of the
   image of D on the contracted surface; the coefficients give discrepancies
   (for D = K + B) and negated multiplicities (for D = H). */
struct RelativePullback {
  DivisorClass projected;
  RatVec coeff;
};

inline RelativePullback relative_pullback(const DivisorClass& D,
                                          const std::vector<DivisorClass>& classes) {
  RelativePullback out;
  out.projected = D;
  if (classes.empty()) return out;
  const std::size_t n = classes.size();
  RatMat gram(n, RatVec(n, Rat(0)));
  RatVec rhs(n, Rat(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) gram[i][j] = intersect(classes[i], classes[j]);
    rhs[i] = intersect(D, classes[i]);
  }
  auto x = solve_square(gram, rhs);
  check(x.has_value(), errc::internal_invariant_violation,
        "contracted Gram matrix is singular");
  out.coeff = *x;
  for (std::size_t j = 0; j < n; ++j) out.projected -= out.coeff[j] * classes[j];
  return out;
}

inline RelativePullback relative_pullback(const DivisorClass& D, const ContractionSet& C) {
  return relative_pullback(D, C.classes());
}

}  // namespace sarkisov
