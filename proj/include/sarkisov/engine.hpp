#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "records.hpp"
#include "span.hpp"

namespace sarkisov {

/* Basis of the rank-two lattice of relative curve classes: orthogonal to all
   contracted classes, and to the fibre when one is given. */
inline std::pair<DivisorClass, DivisorClass> relative_rank2_basis(
    const MarkedSurface& s, const std::optional<DivisorClass>& fiber) {
  const int n = s.rank() + 1;
  RatMat rows;
  auto add_row = [&](const DivisorClass& c) {
    RatVec row;
    row.reserve(static_cast<std::size_t>(n));
    row.push_back(c.line);
    for (const auto& e : c.exc) row.push_back(-e);
    rows.push_back(std::move(row));
  };
  for (const auto& c : s.contracted().classes()) add_row(c);
  if (fiber) add_row(*fiber);
  if (rows.empty()) {
    check(n == 2, errc::rho_mismatch, "relative rank is not two");
    return {class_from_coords({Rat(1), Rat(0)}), class_from_coords({Rat(0), Rat(1)})};
  }
  auto sol = solve_affine(rows, RatVec(rows.size(), Rat(0)));
  check(sol.has_value() && sol->kernel.size() == 2, errc::rho_mismatch,
        "relative rank is not two");
  return {class_from_coords(sol->kernel[0]), class_from_coords(sol->kernel[1])};
}

/* ---------- extremal ray candidates ---------- */

struct RayCandidate {
  DivisorClass image;  // class in the relative rank-two lattice
  std::optional<TaggedClass> tag;
  int pool = 0;  // 0 primes, 1 fibre companion, 2 negative curves, 3 fiberings
};

/* Integral solutions of (gamma^2, gamma.K) = (square, kdot) in the span of
   b1, b2 — a conic-line intersection, solved exactly. */
inline std::vector<DivisorClass> solve_lattice_conic(const DivisorClass& b1,
                                                     const DivisorClass& b2,
                                                     const Rat& square,
                                                     const Rat& kdot) {
  const DivisorClass K = canonical_class(b1.rank());
  Rat alpha = intersect(b1, K), beta = intersect(b2, K);
  const Rat q11 = intersect(b1, b1), q12 = intersect(b1, b2), q22 = intersect(b2, b2);
  std::vector<DivisorClass> out;
  auto emit = [&](const Rat& x, const Rat& y) {
    DivisorClass g = x * b1 + y * b2;
    if (!g.is_zero() && g.is_integral()) out.push_back(std::move(g));
  };
  if (alpha == 0 && beta == 0) return out;  // adjunction gives no line: skip
  const bool swapped = alpha == 0;
  const Rat a = swapped ? beta : alpha, b = swapped ? alpha : beta;
  const Rat p11 = swapped ? q22 : q11, p22 = swapped ? q11 : q22;
  // x = (kdot - b y) / a substituted into the quadratic form.
  const Rat A = (p11 * b * b - 2 * q12 * b * a + p22 * a * a) / (a * a);
  const Rat B = (-2 * p11 * kdot * b + 2 * q12 * kdot * a) / (a * a);
  const Rat C = p11 * kdot * kdot / (a * a) - square;
  std::vector<Rat> ys;
  if (A == 0) {
    if (B != 0) ys.push_back(-C / B);
  } else {
    const Rat disc = B * B - 4 * A * C;
    if (disc >= 0) {
      if (auto r = exact_sqrt(disc)) {
        ys.push_back((-B + *r) / (2 * A));
        if (*r != 0) ys.push_back((-B - *r) / (2 * A));
      }
    }
  }
  for (const Rat& y : ys) {
    const Rat x = (kdot - b * y) / a;
    if (swapped)
      emit(y, x);
    else
      emit(x, y);
  }
  return out;
}

/* Candidate classes that can span the second boundary ray of the relative
   cone: images of prime exceptionals (a), the declared fibre companion (b),
   rational negative curves orthogonal to the contraction found by the exact
   rank-two solve (c), and fibration classes (d). */
inline std::vector<RayCandidate> ray_candidates(const MarkedSurface& s,
                                                const std::optional<DivisorClass>& fiber,
                                                const std::optional<DivisorClass>& companion,
                                                const EngineConfig& cfg) {
  std::vector<RayCandidate> cands;
  auto add = [&](DivisorClass image, std::optional<TaggedClass> tag, int pool) {
    if (image.is_zero()) return;
    if (fiber && intersect(image, *fiber) != 0) return;  // must be vertical
    for (auto& c : cands) {
      if (!proportional(c.image, image)) continue;
      if (!c.tag && tag) c.tag = std::move(tag);
      return;
    }
    cands.push_back({std::move(image), std::move(tag), pool});
  };

  const auto& C = s.contracted();
  for (int i = 1; i <= s.rank(); ++i) {
    const TaggedClass t = TaggedClass::make_prime(i);
    if (C.contains(t)) continue;
    add(relative_pullback(realize(s.forest(), t), C).projected, t, 0);
  }
  if (companion)
    add(relative_pullback(*companion, C).projected,
        tag_for_class(s.forest(), *companion), 1);

  const auto [b1, b2] = relative_rank2_basis(s, fiber);
  // On a free marking (points in mutually general position) every
  // irreducible curve of negative self-intersection on every model has
  // square exactly -1: blowdowns only increase self-intersection, and a
  // general blowup of the plane carries no deeper negative curves.  Deeper
  // lattice solutions are then never honest curve classes, so the search
  // stops at -1.  Proximity relations make deeper sections possible
  // (Hirzebruch-type markings), and there the configured bound applies.
  bool has_proximities = false;
  for (int i = 1; i <= s.forest().size() && !has_proximities; ++i)
    has_proximities = !s.forest().proximate_to(i).empty();
  const int depth = has_proximities ? std::max(1, cfg.search_bound) : 1;
  for (int k = 1; k <= depth; ++k) {
    // gamma^2 = -k with gamma rational: gamma.K = k - 2 by adjunction.
    for (auto& g : solve_lattice_conic(b1, b2, Rat(-k), Rat(k - 2)))
      add(std::move(g), std::nullopt, 2);
  }
  for (auto& g : solve_lattice_conic(b1, b2, Rat(0), Rat(-2)))
    add(std::move(g), std::nullopt, 3);

  // Tags for candidates discovered by the lattice solves.  Negative classes
  // without a contractible presentation are not curve classes at all (the
  // conic solve also returns non-effective lattice points); drop them so the
  // extremality frame only ever compares honest curve classes.
  for (auto& c : cands)
    if (!c.tag) c.tag = tag_for_class(s.forest(), c.image);
  std::erase_if(cands, [](const RayCandidate& c) {
    return c.pool == 2 && !c.tag && self_intersection(c.image) < 0;
  });
  return cands;
}

/* Pick the extremal candidate: every other candidate must lie in the closed
   cone spanned by the known ray and the chosen one. */
inline RayCandidate extremal_candidate(const std::vector<RayCandidate>& cands,
                                       const DivisorClass& known) {
  std::optional<RayCandidate> best;
  auto in_frame = [&](const DivisorClass& d, const DivisorClass& g) {
    // Solve d = s*known + t*g coordinatewise.  The Gram form can degenerate
    // on the vertical lattice of a fibration, so intersection numbers are
    // not usable here.
    const RatVec cu = class_coords(known), cg = class_coords(g);
    RatMat rows(cu.size());
    for (std::size_t i = 0; i < cu.size(); ++i) rows[i] = {cu[i], cg[i]};
    auto st = solve_affine(rows, class_coords(d));
    check(st.has_value() && st->kernel.empty(),
          errc::internal_invariant_violation,
          "degenerate frame in the two-ray game");
    return std::pair<Rat, Rat>{st->particular[0], st->particular[1]};
  };
  // Seed the orientation with a tagged candidate when one exists: tags mark
  // honest curve classes, while an untagged null solution may be the
  // anti-effective orientation of a fibration direction.
  for (const auto& c : cands) {
    if (proportional(c.image, known)) continue;
    if (!best) best = c;
    if (c.tag) {
      best = c;
      break;
    }
  }
  check(best.has_value(), errc::ray_not_found,
        "no candidate spans a second ray of the relative cone");
  for (const auto& c : cands) {
    if (proportional(c.image, known)) continue;
    auto [sc, tc] = in_frame(c.image, best->image);
    if (tc < 0) {
      if (!c.tag) continue;  // not a curve: ignore the far side
      fail(errc::internal_invariant_violation,
           "curve class crossed the known boundary ray");
    }
    if (sc < 0) best = c;
  }
  for (const auto& c : cands) {
    if (proportional(c.image, known)) continue;
    auto [sc, tc] = in_frame(c.image, best->image);
    if (tc < 0 && !c.tag) continue;
    check(sc >= 0 && tc >= 0, errc::internal_invariant_violation,
          "chosen ray is not extremal among candidates");
  }
  return *best;
}

/* ---------- the two-ray game ---------- */

struct TwoRayState {
  MarkedSurface surface;  // relative Picard rank two over the base
  BaseType base = BaseType::point;
  std::optional<DivisorClass> fiber;     // set when base == curve
  DivisorClass known_ray;                // class on W spanning one boundary ray
  std::optional<DivisorClass> companion; // fibre-minus-extracted candidate
};

struct TwoRayOutcome {
  bool fibering = false;
  DivisorClass ray_class;  // contracted curve class, or primitive fibre class
  DivisorClass ray_image;  // its projection to the model
  std::optional<TaggedClass> contract_tag;
  Rat ray_degree = 0;  // -(K+B).C on the model
};

inline TwoRayOutcome two_ray_step(const TwoRayState& Z, const HSystem& H,
                                  const DivisorClass& D, const EngineConfig& cfg) {
  const MarkedSurface& s = Z.surface;
  check(s.rho() == (Z.base == BaseType::point ? 2 : 3), errc::rho_mismatch,
        "two-ray game requires relative Picard rank two");
  if (Z.base == BaseType::curve)
    check(Z.fiber.has_value(), errc::missing_ray,
          "curve-base two-ray game requires the fibre class");

  const DivisorClass u = relative_pullback(Z.known_ray, s.contracted()).projected;
  check(!u.is_zero(), errc::internal_invariant_violation,
        "known ray is contracted on the model");
  if (Z.fiber)
    check(intersect(u, *Z.fiber) == 0, errc::internal_invariant_violation,
          "known ray is not vertical");

  const auto cands = ray_candidates(s, Z.fiber, Z.companion, cfg);
  RayCandidate ray = extremal_candidate(cands, u);

  check(intersect(D, ray.image) < 0, errc::internal_invariant_violation,
        "minimal model reached: the degree class is relatively nef");
  check(intersect(H.class_on_w, ray.image) >= 0, errc::internal_invariant_violation,
        "extremal ray is negative against H");

  TwoRayOutcome out;
  const Rat sq = self_intersection(ray.image);
  if (sq < 0) {
    check(ray.tag.has_value(), errc::ray_not_found,
          "divisorial ray has no contractible class within the search bound");
    out.fibering = false;
    out.contract_tag = ray.tag;
    out.ray_class = realize(s.forest(), *ray.tag);
    out.ray_image = ray.image;
  } else if (sq == 0) {
    out.fibering = true;
    out.ray_class = primitive_direction(ray.image);
    out.ray_image = out.ray_class;
  } else {
    fail(errc::ray_not_found,
         "extremal candidate has positive square: cone boundary not within bound");
  }
  out.ray_degree = -intersect(s.kb_pullback(), out.ray_image);
  if (s.boundary().mode() == Mode::genuine)
    check(out.ray_degree > 0 && out.ray_degree <= 4,
          errc::internal_invariant_violation,
          "extremal ray violates the genuine fibre-degree bound");
  return out;
}

/* ---------- maximal divisorial blowup ---------- */

struct ExtractionResult {
  MarkedSurface z;      // one crepant class released from the contraction
  TaggedClass extracted;
  Rat ray_degree = 0;   // -(K+B).E on z
  Rat lambda = 0;
};

inline ExtractionResult maximal_divisorial_blowup(const MfsState& X, const HSystem& H,
                                                  const EngineConfig& cfg) {
  const ThresholdData t = lambda_and_e(X, H);
  const Rat mu = quasi_effective_threshold(X, H);
  check(t.lambda > mu, errc::internal_invariant_violation,
        "maximal extraction requires lambda > mu");

  const auto& C = X.surface.contracted();
  const auto& tags = C.tags();
  // A crepant achiever is extractable by one blowup of the model exactly
  // when its image on the partial contraction (everything else still
  // contracted) is a (-1)-curve: the blowup of a point on a smooth surface
  // has exactly that exceptional.  Deeper achievers project to classes of
  // different self-intersection and must wait their turn.
  std::optional<TaggedClass> picked;
  std::optional<MarkedSurface> mid;
  for (const auto& c : t.crepant) {
    const auto idx = static_cast<std::size_t>(
        std::find(tags.begin(), tags.end(), c) - tags.begin());
    if (t.b[idx] <= 0) continue;  // achiever without a genuine base point
    std::vector<TaggedClass> rest;
    for (const auto& r : tags)
      if (!(r == c)) rest.push_back(r);
    MarkedSurface z = X.surface.rebuilt(ContractionSet(X.surface.forest(), rest));
    const DivisorClass img =
        relative_pullback(realize(X.surface.forest(), c), z.contracted()).projected;
    if (self_intersection(img) != -1) continue;
    picked = c;  // ties resolve to the first achiever in contraction order
    mid = std::move(z);
    break;
  }
  (void)cfg;
  check(picked.has_value(), errc::no_crepant_at_depth_zero,
        "no crepant class is extractable at depth zero");

  ExtractionResult out{std::move(*mid), *picked, 0, t.lambda};
  check(mode_admits(X.surface.boundary().mode(), out.z.classify()),
        errc::singularity_class,
        "extraction leaves the mode's singularity class");

  // Crepancy: K+B+(1/lambda)H pulls back identically through z and X.
  const DivisorClass D =
      X.surface.kb_total() + (1 / t.lambda) * H.class_on_w;
  check(relative_pullback(D, out.z.contracted()).projected ==
            relative_pullback(D, C).projected,
        errc::internal_invariant_violation,
        "extraction is not crepant for K+B+(1/lambda)H");

  const DivisorClass e_class = realize(X.surface.forest(), *picked);
  const DivisorClass e_image =
      relative_pullback(e_class, out.z.contracted()).projected;
  out.ray_degree = -intersect(out.z.kb_pullback(), e_image);
  check(out.ray_degree > 0, errc::internal_invariant_violation,
        "extracted divisor is not (K+B)-negative");
  if (X.surface.boundary().mode() == Mode::genuine)
    check(out.ray_degree <= 4, errc::internal_invariant_violation,
          "extraction violates the genuine fibre-degree bound");
  return out;
}

/* ---------- nef-threshold chain (genuine cross-check route) ---------- */

struct NefChainResult {
  MarkedSurface z;
  TaggedClass extracted;
  std::vector<Rat> thresholds;  // nondecreasing, last equals lambda
};

inline NefChainResult nef_threshold_blowup(const MfsState& X, const HSystem& H) {
  check(X.surface.boundary().mode() == Mode::genuine, errc::instance_error,
        "nef-threshold descent is defined in genuine mode");
  const ThresholdData td = lambda_and_e(X, H);
  const Rat mu = quasi_effective_threshold(X, H);
  check(td.lambda > mu, errc::internal_invariant_violation,
        "nef-threshold descent requires lambda > mu");

  const ProximityForest& f = X.surface.forest();
  std::vector<TaggedClass> remaining = X.surface.contracted().tags();
  std::vector<TaggedClass> done;
  NefChainResult out{X.surface.rebuilt(ContractionSet(f, {})), remaining.front(), {}};

  while (true) {
    // Relative nef threshold of each remaining class on the current model.
    std::vector<std::optional<Rat>> ratio(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const DivisorClass img =
          relative_pullback(realize(f, remaining[i]), out.z.contracted()).projected;
      check(!img.is_zero(), errc::internal_invariant_violation,
            "remaining class died on an intermediate model");
      const Rat den = -intersect(X.surface.kb_total(), img);
      if (den <= 0) continue;  // never the nef-threshold achiever
      ratio[i] = intersect(H.class_on_w, img) / den;
    }
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!ratio[i]) continue;
      // Ties resolve to the latest tag so the canonical achiever survives.
      if (!pick || *ratio[i] <= *ratio[*pick]) pick = i;
    }
    check(pick.has_value(), errc::internal_invariant_violation,
          "no contractible class carries a nef threshold");
    if (!out.thresholds.empty())
      check(out.thresholds.back() <= *ratio[*pick],
            errc::internal_invariant_violation,
            "nef thresholds failed to be nondecreasing");
    out.thresholds.push_back(*ratio[*pick]);
    if (remaining.size() == 1) {
      out.extracted = remaining.front();
      break;
    }
    done.push_back(remaining[*pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*pick));
    out.z = out.z.rebuilt(ContractionSet(f, done));
  }
  check(out.thresholds.back() == td.lambda, errc::internal_invariant_violation,
        "final nef threshold differs from lambda");
  check(mode_admits(X.surface.boundary().mode(), out.z.classify()),
        errc::singularity_class,
        "nef-threshold descent leaves the mode's singularity class");
  return out;
}

/* ---------- links ---------- */

struct LinkResult {
  LinkRecord record;
  MfsState state;
};

inline LinkResult run_link(const MfsState& X, const HSystem& H,
                           const EngineConfig& cfg) {
  const SarkisovDegree d0 = sarkisov_degree(X, H);
  LinkRecord rec;
  rec.degree_before = d0;
  rec.base_before = X.base;
  std::optional<MfsState> next;

  if (d0.lambda > d0.mu) {
    rec.branch = Branch::lambda_gt_mu;
    const ExtractionResult ext = maximal_divisorial_blowup(X, H, cfg);
    const DivisorClass e_class = realize(X.surface.forest(), ext.extracted);
    const DivisorClass D = X.surface.kb_total() + (1 / d0.lambda) * H.class_on_w;
    TwoRayState Z{ext.z, X.base, X.fiber, e_class, std::nullopt};
    if (X.base == BaseType::curve) Z.companion = *X.fiber - e_class;
    const TwoRayOutcome out = two_ray_step(Z, H, D, cfg);
    rec.extracted_class = ext.extracted;
    rec.ray_degrees = {ext.ray_degree, out.ray_degree};
    if (out.fibering) {
      check(X.base == BaseType::point, errc::internal_invariant_violation,
            "fibering outcome over a curve base");
      rec.link_type = LinkType::I;
      rec.base_after = BaseType::curve;
      next = make_mfs(ext.z, BaseType::curve, out.ray_class);
    } else {
      rec.link_type = LinkType::II;
      rec.base_after = X.base;
      rec.contracted_class = out.contract_tag;
      std::vector<TaggedClass> tags = ext.z.contracted().tags();
      tags.push_back(*out.contract_tag);
      MarkedSurface surf =
          ext.z.rebuilt(ContractionSet(X.surface.forest(), tags));
      next = make_mfs(std::move(surf), X.base, X.fiber);
    }
  } else {
    rec.branch = Branch::lambda_le_mu;
    check(X.base == BaseType::curve, errc::internal_invariant_violation,
          "descent branch over a point base (stopping test must hold)");
    const DivisorClass D = X.surface.kb_total() + (1 / d0.mu) * H.class_on_w;
    const TwoRayState T{X.surface, BaseType::point, std::nullopt, *X.fiber,
                        std::nullopt};
    const TwoRayOutcome out = two_ray_step(T, H, D, cfg);
    rec.ray_degrees = {out.ray_degree};
    if (out.fibering) {
      check(!proportional(out.ray_class, *X.fiber),
            errc::internal_invariant_violation,
            "new fibration coincides with the old one");
      rec.link_type = LinkType::IV;
      rec.base_after = BaseType::curve;
      next = make_mfs(X.surface, BaseType::curve, out.ray_class);
    } else {
      rec.link_type = LinkType::III;
      rec.base_after = BaseType::point;
      rec.contracted_class = out.contract_tag;
      std::vector<TaggedClass> tags = X.surface.contracted().tags();
      tags.push_back(*out.contract_tag);
      next = make_mfs(
          X.surface.rebuilt(ContractionSet(X.surface.forest(), tags)),
          BaseType::point);
    }
  }

  rec.fiber_after = next->fiber;
  const SarkisovDegree d1 = sarkisov_degree(*next, H);
  rec.degree_after = d1;
  check(degree_compare(d1, d0) < 0, errc::internal_invariant_violation,
        "link failed to decrease the degree");
  check(d1.mu <= d0.mu, errc::internal_invariant_violation,
        "link increased the quasi-effective threshold");
  if (rec.branch == Branch::lambda_le_mu)
    check(d1.mu < d0.mu, errc::internal_invariant_violation,
          "descent link must strictly drop mu");
  detail::check_state_invariants(*next, d1);
  return LinkResult{std::move(rec), std::move(*next)};
}

/* ---------- the full factorization loop ---------- */

struct UntwistResult {
  std::vector<LinkRecord> links;
  SarkisovDegree final_degree;
  MfsState final_state;
};

inline UntwistResult untwist(const MfsState& start, const MfsState& target,
                             const HSystem& H, const EngineConfig& cfg = {}) {
  validate_h_system(H, start, target);
  const Mode mode = start.surface.boundary().mode();
  if (mode != Mode::genuine) {
    const auto rep = sarkisov_related_check({start.surface, target.surface});
    check(rep.related, errc::instance_error,
          "the end models are not related: a contracted class is unramified");
  }
  detail::check_state_invariants(start, sarkisov_degree(start, H));

  UntwistResult res{{}, {}, start};
  MfsState cur = start;
  for (long iter = 0;; ++iter) {
    const SarkisovDegree d = sarkisov_degree(cur, H);
    if (noether_fano(cur, H, d)) {
      check(d == SarkisovDegree{Rat(H.mu_prime), 0, 0},
            errc::internal_invariant_violation,
            "stopping degree is not (mu', 0, 0)");
      check(same_span(cur.surface.contracted().classes(),
                      target.surface.contracted().classes()),
            errc::internal_invariant_violation,
            "final contracted set differs from the target model");
      check(cur.base == target.base, errc::internal_invariant_violation,
            "final base type differs from the target model");
      if (cur.base == BaseType::curve)
        check(*cur.fiber == *target.fiber, errc::internal_invariant_violation,
              "final fibration differs from the target model");
      res.final_degree = d;
      res.final_state = cur;
      return res;
    }
    check(iter < cfg.iteration_cap, errc::iteration_cap_exceeded,
          "factorization exceeded the iteration cap");
    LinkResult step = run_link(cur, H, cfg);
    if (!res.links.empty())
      check(res.links.back().degree_after == step.record.degree_before,
            errc::internal_invariant_violation, "degree chain is discontinuous");
    const auto rep = sarkisov_related_check({step.state.surface, target.surface});
    check(rep.related, errc::internal_invariant_violation,
          "intermediate model lost the ramification property");
    res.links.push_back(step.record);
    cur = std::move(step.state);
  }
}

}  // namespace sarkisov
