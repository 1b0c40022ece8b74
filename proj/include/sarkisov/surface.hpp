#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contraction.hpp"
#include "divisor.hpp"
#include "error.hpp"
#include "forest.hpp"
#include "rational.hpp"

namespace sarkisov {

/* Which flavour of the program runs: no boundary at all, a Kawamata log
   terminal boundary, or a weakly log terminal one (coefficient 1 allowed). */
enum class Mode { genuine, klt, wklt };

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::genuine: return "genuine";
    case Mode::klt: return "klt";
    default: return "wklt";
  }
}

inline Mode parse_mode(const std::string& s) {
  if (s == "genuine") return Mode::genuine;
  if (s == "klt") return Mode::klt;
  if (s == "wklt") return Mode::wklt;
  fail(errc::schema_error, "unknown mode '" + s + "'");
}

struct BoundaryComponent {
  TaggedClass tag;
  Rat coeff;
};

/* The boundary divisor on the marked smooth surface, plus the auxiliary
   parameter epsilon used to weight exceptional divisors that appear on
   neither end model.  Zero-coefficient components are dropped. */
class Boundary {
 public:
  Boundary() = default;

  Boundary(Mode mode, Rat epsilon, std::vector<BoundaryComponent> comps)
      : mode_(mode), epsilon_(std::move(epsilon)) {
    check(epsilon_ >= 0 && epsilon_ <= 1, errc::instance_error,
          "epsilon must lie in [0,1]");
    for (auto& c : comps) {
      check(c.coeff >= 0 && c.coeff <= 1, errc::instance_error,
            "boundary coefficients must lie in [0,1]");
      if (c.coeff > 0) components_.push_back(std::move(c));
    }
    std::sort(components_.begin(), components_.end(),
              [](const BoundaryComponent& a, const BoundaryComponent& b) {
                return compare(a.tag, b.tag) < 0;
              });
    for (std::size_t i = 0; i + 1 < components_.size(); ++i)
      check(compare(components_[i].tag, components_[i + 1].tag) != 0,
            errc::instance_error,
            "duplicate boundary component " + components_[i].tag.str());
    switch (mode_) {
      case Mode::genuine:
        check(components_.empty() && epsilon_ == 0, errc::instance_error,
              "boundary-free runs take no components and epsilon 0");
        break;
      case Mode::klt:
        check(epsilon_ < 1, errc::instance_error,
              "the log terminal flavour needs epsilon < 1");
        for (const auto& c : components_)
          check(c.coeff <= epsilon_, errc::instance_error,
                "log terminal boundary coefficients must not exceed epsilon");
        break;
      case Mode::wklt:
        break;  // coefficients <= 1 already enforced
    }
  }

  Mode mode() const { return mode_; }
  const Rat& epsilon() const { return epsilon_; }
  const std::vector<BoundaryComponent>& components() const { return components_; }
  bool empty() const { return components_.empty(); }

  Rat max_coefficient() const {
    Rat m = 0;
    for (const auto& c : components_) m = std::max(m, c.coeff);
    return m;
  }

  DivisorClass divisor_class(const ProximityForest& f) const {
    DivisorClass b = zero_class(f.size());
    for (const auto& c : components_) {
      validate_tag(f, c.tag);
      b += c.coeff * realize(f, c.tag);
    }
    return b;
  }

  bool operator==(const Boundary& o) const {
    if (mode_ != o.mode_ || epsilon_ != o.epsilon_ ||
        components_.size() != o.components_.size())
      return false;
    for (std::size_t i = 0; i < components_.size(); ++i)
      if (!(components_[i].tag == o.components_[i].tag) ||
          components_[i].coeff != o.components_[i].coeff)
        return false;
    return true;
  }

 private:
  Mode mode_ = Mode::genuine;
  Rat epsilon_ = 0;
  std::vector<BoundaryComponent> components_;
};

enum class SingClass { terminal, canonical, klt, wklt, lc, bad };

inline std::string sing_class_name(SingClass c) {
  switch (c) {
    case SingClass::terminal: return "TERMINAL";
    case SingClass::canonical: return "CANONICAL";
    case SingClass::klt: return "KLT";
    case SingClass::wklt: return "WKLT";
    case SingClass::lc: return "LC";
    default: return "BAD";
  }
}

struct LogDiscrepancy {
  TaggedClass tag;
  Rat boundary_free;  // coefficient of the class in K_W - p^*K_X
  Rat with_boundary;  // coefficient in K_W + B_W - p^*(K_X + B_X)
};

/* A normal projective surface X presented as a contraction of the marked
   smooth surface W, carrying the boundary of W.  The pullbacks of K_X and
   K_X + B_X and the per-class discrepancies are cached at construction. */
class MarkedSurface {
 public:
  MarkedSurface(ProximityForest forest, ContractionSet contracted, Boundary boundary,
                std::vector<TaggedClass> extra_effective = {})
      : forest_(std::move(forest)),
        contracted_(std::move(contracted)),
        boundary_(std::move(boundary)),
        extra_effective_(std::move(extra_effective)) {
    const int r = forest_.size();
    for (const auto& t : extra_effective_) {
      validate_tag(forest_, t);
      check(arithmetic_genus(realize(forest_, t)) >= 0, errc::instance_error,
            "declared effective class " + t.str() + " has negative arithmetic genus");
    }
    for (const auto& c : boundary_.components()) {
      validate_tag(forest_, c.tag);
      check(arithmetic_genus(realize(forest_, c.tag)) >= 0, errc::instance_error,
            "boundary component " + c.tag.str() + " has negative arithmetic genus");
    }
    // The cluster must come from actual point blowups: distinct exceptional
    // branches never meet negatively on a real surface.
    std::vector<DivisorClass> primes;
    for (int i = 1; i <= r; ++i) primes.push_back(prime_exceptional_class(forest_, i));
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        check(intersect(primes[static_cast<std::size_t>(i)],
                        primes[static_cast<std::size_t>(j)]) >= 0,
              errc::instance_error, "proximity structure is not realizable");
    kb_total_ = canonical_class(r) + boundary_.divisor_class(forest_);
    kb_pull_ = relative_pullback(kb_total_, contracted_);
    k_pull_ = relative_pullback(canonical_class(r), contracted_);

    tracked_.push_back(line_class(r));
    for (int i = 1; i <= r; ++i) tracked_.push_back(prime_exceptional_class(forest_, i));
    for (const auto& t : extra_effective_) push_tracked(realize(forest_, t));
    for (const auto& c : boundary_.components()) push_tracked(realize(forest_, c.tag));
  }

  int rank() const { return forest_.size(); }
  int rho() const { return 1 + rank() - contracted_.size(); }
  const ProximityForest& forest() const { return forest_; }
  const ContractionSet& contracted() const { return contracted_; }
  const Boundary& boundary() const { return boundary_; }
  const std::vector<TaggedClass>& extra_effective() const { return extra_effective_; }

  const DivisorClass& kb_total() const { return kb_total_; }       // K_W + B_W
  const DivisorClass& kb_pullback() const { return kb_pull_.projected; }
  const DivisorClass& k_pullback() const { return k_pull_.projected; }
  const RatVec& kb_coeffs() const { return kb_pull_.coeff; }
  const RatVec& k_coeffs() const { return k_pull_.coeff; }

  /* Pullback of the pushforward: D with its contracted components removed. */
  DivisorClass image_pullback(const DivisorClass& d) const {
    return relative_pullback(d, contracted_).projected;
  }

  /* Classes on W whose images on X are effective: the line, every strict
     exceptional curve, and the declared curves (boundary included). */
  const std::vector<DivisorClass>& tracked_effective() const { return tracked_; }

  std::vector<LogDiscrepancy> discrepancies() const {
    std::vector<LogDiscrepancy> out;
    for (std::size_t i = 0; i < contracted_.tags().size(); ++i)
      out.push_back({contracted_.tags()[i], k_pull_.coeff[i], kb_pull_.coeff[i]});
    return out;
  }

  SingClass classify() const {
    const bool no_boundary = boundary_.empty();
    const Rat maxc = boundary_.max_coefficient();
    bool free_pos = true, free_nonneg = true, log_pos = true, log_nonneg = true;
    for (const auto& a : k_pull_.coeff) {
      free_pos = free_pos && a > 0;
      free_nonneg = free_nonneg && a >= 0;
    }
    for (const auto& a : kb_pull_.coeff) {
      log_pos = log_pos && a > -1;
      log_nonneg = log_nonneg && a >= -1;
    }
    if (no_boundary && free_pos) return SingClass::terminal;
    if (no_boundary && free_nonneg) return SingClass::canonical;
    if (maxc < 1 && log_pos) return SingClass::klt;
    if (log_pos) return SingClass::wklt;
    if (log_nonneg) return SingClass::lc;
    return SingClass::bad;
  }

  /* Same marked data over a different contraction. */
  MarkedSurface rebuilt(ContractionSet c) const {
    return MarkedSurface(forest_, std::move(c), boundary_, extra_effective_);
  }

 private:
  void push_tracked(const DivisorClass& c) {
    for (const auto& t : tracked_)
      if (t == c) return;
    tracked_.push_back(c);
  }

  ProximityForest forest_;
  ContractionSet contracted_;
  Boundary boundary_;
  std::vector<TaggedClass> extra_effective_;
  DivisorClass kb_total_;
  RelativePullback kb_pull_;
  RelativePullback k_pull_;
  std::vector<DivisorClass> tracked_;
};

inline MarkedSurface make_surface(const ProximityForest& forest,
                                  std::vector<TaggedClass> contracted_tags,
                                  Boundary boundary,
                                  std::vector<TaggedClass> extra_effective = {}) {
  return MarkedSurface(forest, ContractionSet(forest, std::move(contracted_tags)),
                       std::move(boundary), std::move(extra_effective));
}

/* Ladder check used by mode admission: each class implies the next. */
inline bool sing_at_most(SingClass c, SingClass bound) {
  return static_cast<int>(c) <= static_cast<int>(bound);
}

inline bool mode_admits(Mode m, SingClass c) {
  switch (m) {
    case Mode::genuine: return sing_at_most(c, SingClass::terminal);
    case Mode::klt: return sing_at_most(c, SingClass::klt);
    default: return sing_at_most(c, SingClass::wklt);
  }
}

enum class BaseType { point, curve };

inline std::string base_name(BaseType b) {
  return b == BaseType::point ? "POINT" : "CURVE";
}

inline bool is_primitive_integral(const DivisorClass& d) {
  if (!d.is_integral() || d.is_zero()) return false;
  Int g = d.line.get_num();
  for (const auto& c : d.exc) g = int_gcd(g, c.get_num());
  if (g < 0) g = -g;
  return g == 1;
}

/* A Mori fibre space state: the surface together with its fibration data.
   Over a point nothing extra is tracked; over a curve the fibre class is
   carried along, written on W. */
struct MfsState {
  MarkedSurface surface;
  BaseType base = BaseType::point;
  std::optional<DivisorClass> fiber;
};

inline MfsState make_mfs(MarkedSurface X, BaseType base,
                         std::optional<DivisorClass> fiber = std::nullopt) {
  check(mode_admits(X.boundary().mode(), X.classify()), errc::singularity_class,
        "surface is " + sing_class_name(X.classify()) +
            ", too singular for mode " + mode_name(X.boundary().mode()));
  if (base == BaseType::point) {
    check(X.rho() == 1, errc::rho_mismatch,
          "base a point needs Picard number 1, have " + std::to_string(X.rho()));
    check(!fiber, errc::instance_error, "no fibre data over a point base");
    for (const auto& g : X.tracked_effective()) {
      if (X.image_pullback(g).is_zero()) continue;
      check(intersect(X.kb_pullback(), g) < 0, errc::not_relatively_ample,
            "K+B is not anti-ample: nonnegative against " + g.str());
    }
    return MfsState{std::move(X), base, std::nullopt};
  }

  check(X.rho() == 2, errc::rho_mismatch,
        "base a curve needs Picard number 2, have " + std::to_string(X.rho()));
  check(fiber.has_value(), errc::instance_error, "fibration needs a fibre class");
  const DivisorClass& f = *fiber;
  check(f.rank() == X.rank(), errc::instance_error, "fibre class rank mismatch");
  check(is_primitive_integral(f), errc::instance_error,
        "fibre class must be integral, primitive and nonzero");
  for (const auto& c : X.contracted().classes())
    check(intersect(f, c) == 0, errc::instance_error,
          "fibre class must be orthogonal to the contracted curves");
  check(self_intersection(f) == 0, errc::instance_error,
        "fibre class must have self-intersection 0");
  check(arithmetic_genus(f) == 0, errc::instance_error,
        "fibre class must be a genus-zero pencil class");
  check(intersect(X.kb_pullback(), f) < 0, errc::not_relatively_ample,
        "K+B must be negative on the fibres");
  return MfsState{std::move(X), base, std::move(fiber)};
}

struct NefResult {
  bool nef = true;
  std::optional<DivisorClass> witness;  // a ray the class is negative against
};

/* Nef test for the image of D on the model.  Over a curve base the test is
   decisive exactly when the image pairs to zero with the fibre class: the
   fibre is isotropic and primitive in the rank-two model lattice, so its
   orthogonal complement is its own span, and the image is then an exact
   rational multiple of the fibre whose sign decides both boundary rays at
   once.  Over a point base (Picard rank one) any tracked curve class
   decides. */
inline NefResult nef_test(const DivisorClass& D, const MfsState& S) {
  const DivisorClass rep = S.surface.image_pullback(D);
  if (S.base == BaseType::curve) {
    check(S.fiber.has_value(), errc::internal_invariant_violation,
          "curve-based state without fibre class");
    const Rat vertical = intersect(rep, *S.fiber);
    if (vertical < 0) return {false, *S.fiber};
    check(vertical == 0, errc::internal_invariant_violation,
          "nef test over a curve base is decisive only at the fibre threshold");
    const DivisorClass u = Rat(-1) * S.surface.kb_pullback();  // u.f > 0
    const Rat t = intersect(rep, u) / intersect(*S.fiber, u);
    check(rep == t * *S.fiber, errc::internal_invariant_violation,
          "threshold class is not a fibre multiple");
    if (t < 0) return {false, std::nullopt};
    return {};
  }
  NefResult out;
  int sign_seen = 0;
  for (const auto& g : S.surface.tracked_effective()) {
    if (S.surface.image_pullback(g).is_zero()) continue;
    const Rat t = intersect(rep, g);
    const int sign = t > 0 ? 1 : (t < 0 ? -1 : 0);
    if (sign_seen == 0) sign_seen = sign;
    check(sign == sign_seen, errc::internal_invariant_violation,
          "inconsistent signs against a Picard-rank-1 model");
    if (sign < 0 && out.nef) out = {false, g};
  }
  return out;
}

struct RelatedReport {
  bool related = true;
  /* Per model, the contracted classes whose ramification coefficient in
     K_W + B_W = p^*(K_X + B_X) + R fails to be strictly positive. */
  std::vector<std::vector<TaggedClass>> not_ramified;
};

/* The two (or more) models are linked by the program run if and only if on
   every model the ramification divisor of W -> X has support exactly the
   contracted locus, i.e. every contracted class carries a strictly positive
   coefficient in K_W + B_W - p^*(K_X + B_X). */
inline RelatedReport sarkisov_related_check(const std::vector<MarkedSurface>& models) {
  RelatedReport rep;
  for (std::size_t i = 0; i < models.size(); ++i) {
    check(models[i].rank() == models[0].rank(), errc::instance_error,
          "models marked over different surfaces");
    check(models[i].kb_total() == models[0].kb_total(), errc::instance_error,
          "models carry different boundaries");
    std::vector<TaggedClass> bad;
    const auto& coeff = models[i].kb_coeffs();
    for (std::size_t j = 0; j < coeff.size(); ++j)
      if (coeff[j] <= 0) bad.push_back(models[i].contracted().tags()[j]);
    if (!bad.empty()) rep.related = false;
    rep.not_ramified.push_back(std::move(bad));
  }
  return rep;
}

}  // namespace sarkisov
