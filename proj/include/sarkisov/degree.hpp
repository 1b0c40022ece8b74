#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surface.hpp"

namespace sarkisov {

/* The mobile linear system driving the factorization: its class on W, and the
   reference data pinning it to the target fibration, where
   H = -mu' (K + B) + (pullback of a degree-a' ample class on the base). */
struct HSystem {
  DivisorClass class_on_w;
  Int mu_prime = 1;
  Rat ample_degree = 0;  // a': 0 over a point base, positive over a curve base
};

/* The degree triplet, compared lexicographically. */
struct SarkisovDegree {
  Rat mu = 0;
  Rat lambda = 0;
  int e = 0;

  bool operator==(const SarkisovDegree& o) const {
    return mu == o.mu && lambda == o.lambda && e == o.e;
  }

  std::string str() const {
    return "(" + rat_str(mu) + "," + rat_str(lambda) + "," + std::to_string(e) + ")";
  }
};

inline int degree_compare(const SarkisovDegree& x, const SarkisovDegree& y) {
  if (x.mu != y.mu) return x.mu < y.mu ? -1 : 1;
  if (x.lambda != y.lambda) return x.lambda < y.lambda ? -1 : 1;
  if (x.e != y.e) return x.e < y.e ? -1 : 1;
  return 0;
}

/* mu: the ratio with mu(K+B) + H relatively trivial over the base.  Over a
   curve this is a fibre computation; over a point the two pullbacks must be
   exactly proportional (Picard rank one). */
inline Rat quasi_effective_threshold(const MfsState& S, const HSystem& H) {
  const MarkedSurface& X = S.surface;
  check(H.class_on_w.rank() == X.rank(), errc::instance_error,
        "H-system rank mismatch");
  const DivisorClass hp = X.image_pullback(H.class_on_w);
  const DivisorClass& kb = X.kb_pullback();

  if (S.base == BaseType::curve) {
    const Rat den = -intersect(kb, *S.fiber);
    check(den > 0, errc::nonpositive_denominator,
          "K+B fails to be negative on the fibres");
    const Rat num = intersect(hp, *S.fiber);
    check(num > 0, errc::instance_error, "H is not horizontal over the base curve");
    return num / den;
  }

  check(!kb.is_zero(), errc::nonpositive_denominator,
        "K+B is numerically trivial on a rank-one model");
  std::vector<Rat> kc, hc;
  kc.push_back(kb.line);
  hc.push_back(hp.line);
  for (int i = 0; i < kb.rank(); ++i) {
    kc.push_back(kb.exc[static_cast<std::size_t>(i)]);
    hc.push_back(hp.exc[static_cast<std::size_t>(i)]);
  }
  std::optional<Rat> mu;
  for (std::size_t i = 0; i < kc.size(); ++i) {
    if (kc[i] == 0) {
      check(hc[i] == 0, errc::not_proportional,
            "H and -(K+B) are not proportional on a rank-one model");
      continue;
    }
    const Rat m = -hc[i] / kc[i];
    if (!mu) mu = m;
    check(*mu == m, errc::not_proportional,
          "H and -(K+B) are not proportional on a rank-one model");
  }
  check(mu.has_value() && *mu > 0, errc::instance_error,
        "H must be a positive multiple of -(K+B) over a point base");
  return *mu;
}

/* Per-exceptional threshold data of the model: a_k, b_k with
   K_W + B_W = p^*(K_X+B_X) + sum a_k c_k and H_W = p^*H_X - sum b_k c_k. */
struct ThresholdData {
  Rat lambda = 0;
  int e = 0;
  std::vector<TaggedClass> crepant;  // classes with R(1/lambda)-coefficient 0
  RatVec a, b;
};

inline ThresholdData lambda_and_e(const MfsState& S, const HSystem& H) {
  const MarkedSurface& X = S.surface;
  ThresholdData out;
  out.a = X.kb_coeffs();
  const RelativePullback rp = relative_pullback(H.class_on_w, X.contracted());
  for (const auto& x : rp.coeff) out.b.push_back(-x);

  std::optional<Rat> inv;  // 1/lambda = min over b_k > 0 of a_k / b_k
  for (std::size_t k = 0; k < out.b.size(); ++k) {
    if (out.b[k] <= 0) continue;
    check(out.a[k] > 0, errc::nonpositive_discrepancy_denominator,
          "H drops along " + X.contracted().tags()[k].str() +
              " where K+B has nonpositive coefficient");
    const Rat r = out.a[k] / out.b[k];
    if (!inv || r < *inv) inv = r;
  }
  if (!inv) return out;  // base locus empty on the model: lambda = 0, e = 0

  out.lambda = 1 / *inv;
  for (std::size_t k = 0; k < out.b.size(); ++k) {
    if (out.a[k] - *inv * out.b[k] == 0) {
      out.crepant.push_back(X.contracted().tags()[k]);
      ++out.e;
    }
  }
  return out;
}

inline SarkisovDegree sarkisov_degree(const MfsState& S, const HSystem& H) {
  SarkisovDegree d;
  d.mu = quasi_effective_threshold(S, H);
  const ThresholdData t = lambda_and_e(S, H);
  d.lambda = t.lambda;
  d.e = t.e;
  return d;
}

/* The stopping rule: lambda <= mu and K+B+(1/mu)H nef on the model means the
   remaining map is an isomorphism of fibre spaces.  Over a point base the
   class pulls back to exactly zero by the definition of mu — asserted. */
inline bool noether_fano(const MfsState& S, const HSystem& H, const SarkisovDegree& d) {
  if (d.lambda > d.mu) return false;
  check(d.mu > 0, errc::internal_invariant_violation, "degree has nonpositive mu");
  const DivisorClass D = S.surface.kb_total() + (1 / d.mu) * H.class_on_w;
  if (S.base == BaseType::point)
    check(S.surface.image_pullback(D).is_zero(), errc::internal_invariant_violation,
          "mu(K+B)+H must pull back to zero over a point base");
  return nef_test(D, S).nef;
}

namespace detail {

/* Denominator bound for the fibre-degree quantization: the boundary data's
   common denominator q makes q(K+B).f integral; Kawamata bounds it by 4q. */
inline Int boundary_denominator(const Boundary& b) {
  Int q = b.epsilon().get_den();
  for (const auto& c : b.components()) q = int_lcm(q, c.coeff.get_den());
  return q;
}

/* Per-model invariants of a factorization state: every contracted class keeps
   discrepancy above -epsilon, and over a curve base the fibre degree is
   quantized by the boundary denominator, bounded by 4q, and divisible by the
   denominator of mu. */
inline void check_state_invariants(const MfsState& S, const SarkisovDegree& d) {
  const Rat eps = S.surface.boundary().epsilon();
  for (const auto& a : S.surface.kb_coeffs())
    check(a > -eps, errc::internal_invariant_violation,
          "contracted class carries discrepancy at most -epsilon");
  if (S.base == BaseType::curve) {
    const Int q = boundary_denominator(S.surface.boundary());
    const Rat fd = Rat(q) * -intersect(S.surface.kb_total(), *S.fiber);
    check(fd.get_den() == 1, errc::internal_invariant_violation,
          "fibre degree is not quantized by the boundary denominator");
    const Int n = fd.get_num();
    check(n > 0 && n <= 4 * q, errc::internal_invariant_violation,
          "fibre degree violates the Kawamata bound");
    check(n % d.mu.get_den() == 0, errc::internal_invariant_violation,
          "mu denominator does not divide the fibre-degree bound");
  }
}

}  // namespace detail

/* Instance-level consistency of the reference system: H must be nonnegative
   against every declared curve on either end, and on the target model it must
   equal -mu'(K+B) plus the pullback of the base ample class, exactly. */
inline void validate_h_system(const HSystem& H, const MfsState& X, const MfsState& Xp) {
  check(H.class_on_w.rank() == X.surface.rank() &&
            H.class_on_w.rank() == Xp.surface.rank(),
        errc::instance_error, "H-system rank mismatch");
  check(H.class_on_w.is_integral() && !H.class_on_w.is_zero(), errc::instance_error,
        "H must be a nonzero integral class");
  check(H.mu_prime >= 1, errc::instance_error, "mu' must be a positive integer");

  auto freeness = [&](const DivisorClass& c) {
    check(intersect(H.class_on_w, c) >= 0, errc::instance_error,
          "H is not free: negative against the declared curve " + c.str());
  };
  for (const auto& c : X.surface.tracked_effective()) freeness(c);
  for (const auto& c : Xp.surface.tracked_effective()) freeness(c);
  for (const auto& c : X.surface.contracted().classes()) freeness(c);
  for (const auto& c : Xp.surface.contracted().classes()) freeness(c);

  DivisorClass rhs = -Rat(H.mu_prime) * Xp.surface.kb_pullback();
  if (Xp.base == BaseType::curve) {
    check(H.ample_degree > 0, errc::instance_error,
          "the base ample degree a' must be positive over a curve base");
    rhs += H.ample_degree * *Xp.fiber;
  } else {
    check(H.ample_degree == 0, errc::instance_error,
          "the base ample degree a' must be zero over a point base");
  }
  check(Xp.surface.image_pullback(H.class_on_w) == rhs, errc::instance_error,
        "H does not restrict to the declared reference system on the target model");
}

}  // namespace sarkisov
