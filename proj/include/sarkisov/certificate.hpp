#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "instance.hpp"
#include "span.hpp"

namespace sarkisov {

inline constexpr const char* kCertSchema = "sarkisov-cert/1";

/* State of the factorization after the last link, with the numbers that
   witness the stopping test: over a curve base the image of K+B+(1/mu)H is
   an exact nonnegative rational multiple of the fibre class; over a point
   base it vanishes identically. */
struct FinalWitness {
  SarkisovDegree degree;
  BaseType base = BaseType::point;
  std::vector<TaggedClass> contracted;
  std::optional<DivisorClass> fiber;
  std::optional<Rat> fiber_multiple;  // curve base: image of K+B+(1/mu)H over the fibre
  std::optional<bool> pullback_zero;  // point base: exact vanishing of that image
  bool contracted_matches_target = false;
};

/* Aggregate outcomes over the whole chain.  A verifier recomputes each. */
struct CheckOutcomes {
  bool degree_chain_strict = false;
  bool mu_non_increasing = false;
  bool mu_quantized = false;
  bool epsilon_bound = false;
  bool ray_degrees_positive = false;
  bool related_chain = false;
};

struct SarkisovCertificate {
  InstanceData instance;  // reduced-form digest; engine knobs are not part of it
  std::vector<LinkRecord> links;
  FinalWitness final;
  CheckOutcomes checks;
};

/* ---------- JSON forms ---------- */

inline Json json_degree(const SarkisovDegree& d) {
  return Json{{"mu", json_rat(d.mu)}, {"lambda", json_rat(d.lambda)}, {"e", d.e}};
}

inline SarkisovDegree degree_from_json(const Json& j) {
  expect_keys(j, {"mu", "lambda", "e"});
  SarkisovDegree d;
  d.mu = rat_from_json(field(j, "mu"), "mu");
  d.lambda = rat_from_json(field(j, "lambda"), "lambda");
  const Json& e = field(j, "e");
  check(e.is_number_integer(), errc::schema_error, "degree entry 'e' must be an integer");
  d.e = e.get<int>();
  return d;
}

inline Json json_link(const LinkRecord& r) {
  auto opt_tag = [](const std::optional<TaggedClass>& t) {
    return t ? json_tag(*t) : Json();
  };
  auto opt_class = [](const std::optional<DivisorClass>& c) {
    return c ? json_class(*c) : Json();
  };
  Json rays = Json::array();
  for (const auto& x : r.ray_degrees) rays.push_back(json_rat(x));
  return Json{{"type", link_type_name(r.link_type)},
              {"branch", branch_name(r.branch)},
              {"extracted", opt_tag(r.extracted_class)},
              {"contracted", opt_tag(r.contracted_class)},
              {"base_before", json_base(r.base_before)},
              {"base_after", json_base(r.base_after)},
              {"degree_before", json_degree(r.degree_before)},
              {"degree_after", json_degree(r.degree_after)},
              {"ray_degrees", std::move(rays)},
              {"fiber_after", opt_class(r.fiber_after)}};
}

inline LinkRecord link_from_json(const Json& j, int rank) {
  expect_keys(j, {"type", "branch", "extracted", "contracted", "base_before",
                  "base_after", "degree_before", "degree_after", "ray_degrees",
                  "fiber_after"});
  LinkRecord r;
  const Json& tj = field(j, "type");
  check(tj.is_string(), errc::schema_error, "link 'type' must be a string");
  const auto lt = parse_link_type(tj.get<std::string>());
  check(lt.has_value(), errc::schema_error, "unknown link type");
  r.link_type = *lt;
  const Json& bj = field(j, "branch");
  check(bj.is_string(), errc::schema_error, "link 'branch' must be a string");
  const auto br = parse_branch(bj.get<std::string>());
  check(br.has_value(), errc::schema_error, "unknown link branch");
  r.branch = *br;
  if (!field(j, "extracted").is_null())
    r.extracted_class = tag_from_json(field(j, "extracted"));
  if (!field(j, "contracted").is_null())
    r.contracted_class = tag_from_json(field(j, "contracted"));
  r.base_before = base_from_json(field(j, "base_before"));
  r.base_after = base_from_json(field(j, "base_after"));
  r.degree_before = degree_from_json(field(j, "degree_before"));
  r.degree_after = degree_from_json(field(j, "degree_after"));
  const Json& rj = field(j, "ray_degrees");
  check(rj.is_array(), errc::schema_error, "'ray_degrees' must be an array");
  for (const auto& x : rj) r.ray_degrees.push_back(rat_from_json(x, "ray_degrees"));
  if (!field(j, "fiber_after").is_null())
    r.fiber_after = class_from_json(field(j, "fiber_after"), rank);
  return r;
}

inline Json json_final(const FinalWitness& w) {
  std::vector<TaggedClass> tags = w.contracted;
  std::sort(tags.begin(), tags.end(),
            [](const TaggedClass& a, const TaggedClass& b) {
              return compare(a, b) < 0;
            });
  return Json{{"degree", json_degree(w.degree)},
              {"base", json_base(w.base)},
              {"contracted", json_tags(tags)},
              {"fiber", w.fiber ? json_class(*w.fiber) : Json()},
              {"fiber_multiple", w.fiber_multiple ? json_rat(*w.fiber_multiple) : Json()},
              {"pullback_zero", w.pullback_zero ? Json(*w.pullback_zero) : Json()},
              {"contracted_matches_target", w.contracted_matches_target}};
}

inline FinalWitness final_from_json(const Json& j, int rank) {
  expect_keys(j, {"degree", "base", "contracted", "fiber", "fiber_multiple",
                  "pullback_zero", "contracted_matches_target"});
  FinalWitness w;
  w.degree = degree_from_json(field(j, "degree"));
  w.base = base_from_json(field(j, "base"));
  w.contracted = tags_from_json(field(j, "contracted"), "'contracted'");
  std::sort(w.contracted.begin(), w.contracted.end(),
            [](const TaggedClass& a, const TaggedClass& b) {
              return compare(a, b) < 0;
            });
  if (!field(j, "fiber").is_null())
    w.fiber = class_from_json(field(j, "fiber"), rank);
  if (!field(j, "fiber_multiple").is_null())
    w.fiber_multiple = rat_from_json(field(j, "fiber_multiple"), "fiber_multiple");
  if (!field(j, "pullback_zero").is_null())
    w.pullback_zero = bool_from_json(field(j, "pullback_zero"), "pullback_zero");
  w.contracted_matches_target =
      bool_from_json(field(j, "contracted_matches_target"),
                     "contracted_matches_target");
  return w;
}

inline Json json_checks(const CheckOutcomes& c) {
  return Json{{"degree_chain_strict", c.degree_chain_strict},
              {"mu_non_increasing", c.mu_non_increasing},
              {"mu_quantized", c.mu_quantized},
              {"epsilon_bound", c.epsilon_bound},
              {"ray_degrees_positive", c.ray_degrees_positive},
              {"related_chain", c.related_chain}};
}

inline CheckOutcomes checks_from_json(const Json& j) {
  expect_keys(j, {"degree_chain_strict", "mu_non_increasing", "mu_quantized",
                  "epsilon_bound", "ray_degrees_positive", "related_chain"});
  CheckOutcomes c;
  c.degree_chain_strict =
      bool_from_json(field(j, "degree_chain_strict"), "degree_chain_strict");
  c.mu_non_increasing =
      bool_from_json(field(j, "mu_non_increasing"), "mu_non_increasing");
  c.mu_quantized = bool_from_json(field(j, "mu_quantized"), "mu_quantized");
  c.epsilon_bound = bool_from_json(field(j, "epsilon_bound"), "epsilon_bound");
  c.ray_degrees_positive =
      bool_from_json(field(j, "ray_degrees_positive"), "ray_degrees_positive");
  c.related_chain = bool_from_json(field(j, "related_chain"), "related_chain");
  return c;
}

inline std::string emit_certificate(const SarkisovCertificate& cert) {
  Json links = Json::array();
  for (const auto& l : cert.links) links.push_back(json_link(l));
  const Json j{{"schema", kCertSchema},
               {"instance", json_instance_body(cert.instance)},
               {"links", std::move(links)},
               {"final", json_final(cert.final)},
               {"checks", json_checks(cert.checks)}};
  return j.dump(2) + "\n";
}

inline SarkisovCertificate load_certificate(const std::string& text) {
  const Json j = parse_json(text);
  expect_keys(j, {"schema", "instance", "links", "final", "checks"});
  check(schema_string(j) == kCertSchema, errc::schema_error,
        "not a '" + std::string(kCertSchema) + "' file");
  SarkisovCertificate cert;
  const Json& ij = field(j, "instance");
  expect_keys(ij, {"mode", "epsilon", "forest", "boundary", "source", "target", "h"});
  cert.instance = instance_body_from_json(ij);
  const int rank = cert.instance.forest.size();
  const Json& lj = field(j, "links");
  check(lj.is_array(), errc::schema_error, "'links' must be an array");
  for (const auto& l : lj) cert.links.push_back(link_from_json(l, rank));
  cert.final = final_from_json(field(j, "final"), rank);
  cert.checks = checks_from_json(field(j, "checks"));
  return cert;
}

/* ---------- final witness (shared by the builder and the verifier) ---------- */

inline FinalWitness make_final_witness(const MfsState& fin, const MfsState& tgt,
                                       const HSystem& h, const SarkisovDegree& d) {
  check(d.mu > 0, errc::internal_invariant_violation,
        "final degree has nonpositive mu");
  FinalWitness w;
  w.degree = d;
  w.base = fin.base;
  w.contracted = fin.surface.contracted().tags();
  w.fiber = fin.fiber;
  const DivisorClass D = fin.surface.kb_total() + (1 / d.mu) * h.class_on_w;
  const DivisorClass rep = fin.surface.image_pullback(D);
  if (fin.base == BaseType::curve) {
    // At the mu-threshold the image is orthogonal to the isotropic fibre
    // class, hence an exact rational multiple of it.
    const DivisorClass u = Rat(-1) * fin.surface.kb_pullback();  // u.f > 0
    const Rat t = intersect(rep, u) / intersect(*fin.fiber, u);
    check(rep == t * *fin.fiber, errc::internal_invariant_violation,
          "final threshold class is not a fibre multiple");
    w.fiber_multiple = t;
  } else {
    w.pullback_zero = rep.is_zero();
  }
  w.contracted_matches_target = same_span(fin.surface.contracted().classes(),
                                          tgt.surface.contracted().classes());
  return w;
}

/* ---------- replay verification ---------- */

struct VerifyResult {
  bool ok = true;
  std::string message;
};

namespace verify_detail {

[[noreturn]] inline void vfail(const std::string& m) {
  fail(errc::instance_error, m);
}

inline void vcheck(bool cond, const std::string& m) {
  if (!cond) vfail(m);
}

/* Replay one stored link from the current model.  Everything numeric is
   recomputed; the record only selects which extraction/contraction to take,
   and even those must pass the crepancy, negativity and extremality tests. */
inline MfsState replay_link(const MfsState& cur, const MfsState& tgt,
                            const HSystem& h, const LinkRecord& rec,
                            std::size_t index) {
  const std::string at = "link " + std::to_string(index + 1) + ": ";
  const MarkedSurface& S = cur.surface;
  const ProximityForest& f = S.forest();
  const Mode mode = S.boundary().mode();

  const SarkisovDegree d0 = sarkisov_degree(cur, h);
  vcheck(rec.degree_before == d0,
         at + "stored degree_before differs from the recomputed degree");
  vcheck(!noether_fano(cur, h, d0),
         at + "the stopping test already holds before this link");
  vcheck(rec.base_before == cur.base,
         at + "stored base_before differs from the model");

  std::optional<MfsState> next;
  if (d0.lambda > d0.mu) {
    vcheck(rec.branch == Branch::lambda_gt_mu,
           at + "branch tag contradicts the degree comparison");
    vcheck(rec.link_type == LinkType::I || rec.link_type == LinkType::II,
           at + "untwisting branch admits only links I and II");
    vcheck(rec.extracted_class.has_value(),
           at + "extraction link without an extracted class");
    vcheck(rec.ray_degrees.size() == 2,
           at + "extraction link must record two ray degrees");

    const TaggedClass ext = *rec.extracted_class;
    const ThresholdData t = lambda_and_e(cur, h);
    const auto& tags = S.contracted().tags();
    const auto pos = std::find(tags.begin(), tags.end(), ext);
    vcheck(pos != tags.end(), at + "extracted class is not contracted here");
    bool crepant = false;
    for (const auto& c : t.crepant) crepant = crepant || compare(c, ext) == 0;
    vcheck(crepant, at + "extracted class does not achieve the canonical threshold");
    vcheck(t.b[static_cast<std::size_t>(pos - tags.begin())] > 0,
           at + "extracted class has no base-point multiplicity");

    std::vector<TaggedClass> rest;
    for (const auto& c : tags)
      if (!(c == ext)) rest.push_back(c);
    const MarkedSurface Z = S.rebuilt(ContractionSet(f, rest));
    vcheck(mode_admits(mode, Z.classify()),
           at + "extraction leaves the mode's singularity class");
    const DivisorClass Dl = S.kb_total() + (1 / d0.lambda) * h.class_on_w;
    const DivisorClass D_img = relative_pullback(Dl, Z.contracted()).projected;
    vcheck(D_img == relative_pullback(Dl, S.contracted()).projected,
           at + "extraction is not crepant for the threshold divisor");
    const DivisorClass e_class = realize(f, ext);
    const DivisorClass e_img = relative_pullback(e_class, Z.contracted()).projected;
    vcheck(self_intersection(e_img) == -1,
           at + "extracted class is not exceptional for a single blowup of the model");
    vcheck(intersect(Dl, e_img) == 0,
           at + "extracted ray is not trivial for the threshold divisor");
    const Rat deg1 = -intersect(Z.kb_pullback(), e_img);
    vcheck(deg1 > 0, at + "extracted divisor is not (K+B)-negative");
    vcheck(rec.ray_degrees[0] == deg1,
           at + "stored extraction ray degree differs from the recomputed value");
    if (mode == Mode::genuine)
      vcheck(deg1 <= 4, at + "extraction ray degree exceeds the fibre-degree bound");

    if (rec.link_type == LinkType::I) {
      vcheck(cur.base == BaseType::point, at + "link I must start over a point base");
      vcheck(rec.base_after == BaseType::curve, at + "link I must end over a curve base");
      vcheck(!rec.contracted_class.has_value(), at + "link I contracts no divisor");
      vcheck(rec.fiber_after.has_value(),
             at + "link I must record the new fibration");
      const DivisorClass& fib = *rec.fiber_after;
      vcheck(intersect(Dl, fib) < 0,
             at + "recorded fibre ray is not negative for the threshold divisor");
      vcheck(intersect(h.class_on_w, fib) >= 0,
             at + "recorded fibre ray is negative against the reference system");
      const Rat deg2 = -intersect(Z.kb_pullback(), fib);
      vcheck(rec.ray_degrees[1] == deg2,
             at + "stored fibre ray degree differs from the recomputed value");
      if (mode == Mode::genuine)
        vcheck(deg2 > 0 && deg2 <= 4,
               at + "fibre ray degree violates the fibre-degree bound");
      next = make_mfs(Z, BaseType::curve, fib);
    } else {
      vcheck(rec.base_after == cur.base, at + "link II must preserve the base");
      vcheck(rec.contracted_class.has_value(), at + "link II contracts a divisor");
      const TaggedClass con = *rec.contracted_class;
      vcheck(compare(con, ext) != 0, at + "link II undoes its own extraction");
      validate_tag(f, con);
      const DivisorClass c_img =
          relative_pullback(realize(f, con), Z.contracted()).projected;
      vcheck(!c_img.is_zero(), at + "contracted class vanishes on the midpoint model");
      vcheck(!proportional(c_img, e_img),
             at + "contracted ray coincides with the extracted ray");
      vcheck(intersect(Dl, c_img) < 0,
             at + "contracted ray is not negative for the threshold divisor");
      vcheck(intersect(h.class_on_w, c_img) >= 0,
             at + "contracted ray is negative against the reference system");
      vcheck(self_intersection(c_img) < 0,
             at + "contracted ray is not divisorial on the midpoint model");
      if (cur.base == BaseType::curve)
        vcheck(intersect(c_img, *cur.fiber) == 0,
               at + "contracted ray is not vertical over the base curve");
      const Rat deg2 = -intersect(Z.kb_pullback(), c_img);
      vcheck(rec.ray_degrees[1] == deg2,
             at + "stored contraction ray degree differs from the recomputed value");
      if (mode == Mode::genuine)
        vcheck(deg2 > 0 && deg2 <= 4,
               at + "contraction ray degree violates the fibre-degree bound");
      std::vector<TaggedClass> tags2 = Z.contracted().tags();
      tags2.push_back(con);
      MarkedSurface surf = Z.rebuilt(ContractionSet(f, tags2));
      if (cur.base == BaseType::point) {
        vcheck(!rec.fiber_after, at + "point-base link II carries fibre data");
        next = make_mfs(std::move(surf), BaseType::point);
      } else {
        vcheck(rec.fiber_after.has_value() && *rec.fiber_after == *cur.fiber,
               at + "link II must keep the fibration");
        next = make_mfs(std::move(surf), BaseType::curve, rec.fiber_after);
      }
    }
  } else {
    vcheck(rec.branch == Branch::lambda_le_mu,
           at + "branch tag contradicts the degree comparison");
    vcheck(cur.base == BaseType::curve,
           at + "descent branch over a point base: the stopping test must hold");
    vcheck(!rec.extracted_class.has_value(), at + "descent link extracts nothing");
    vcheck(rec.ray_degrees.size() == 1,
           at + "descent link must record one ray degree");
    const DivisorClass Dm = S.kb_total() + (1 / d0.mu) * h.class_on_w;
    vcheck(intersect(Dm, *cur.fiber) == 0,
           at + "threshold divisor is not trivial on the old fibre");

    if (rec.link_type == LinkType::IV) {
      vcheck(rec.base_after == BaseType::curve,
             at + "link IV must end over a curve base");
      vcheck(!rec.contracted_class.has_value(), at + "link IV contracts no divisor");
      vcheck(rec.fiber_after.has_value(),
             at + "link IV must record the new fibration");
      const DivisorClass& nf = *rec.fiber_after;
      vcheck(!proportional(nf, *cur.fiber),
             at + "new fibration coincides with the old one");
      vcheck(intersect(Dm, nf) < 0,
             at + "new fibre ray is not negative for the threshold divisor");
      vcheck(intersect(h.class_on_w, nf) >= 0,
             at + "new fibre ray is negative against the reference system");
      const Rat rd = -intersect(S.kb_pullback(), nf);
      vcheck(rec.ray_degrees[0] == rd,
             at + "stored ray degree differs from the recomputed value");
      if (mode == Mode::genuine)
        vcheck(rd > 0 && rd <= 4, at + "ray degree violates the fibre-degree bound");
      next = make_mfs(S, BaseType::curve, nf);
    } else if (rec.link_type == LinkType::III) {
      vcheck(rec.base_after == BaseType::point,
             at + "link III must end over a point base");
      vcheck(rec.contracted_class.has_value(), at + "link III contracts a divisor");
      vcheck(!rec.fiber_after, at + "point-base link III carries fibre data");
      const TaggedClass con = *rec.contracted_class;
      validate_tag(f, con);
      const DivisorClass c_img =
          relative_pullback(realize(f, con), S.contracted()).projected;
      vcheck(!c_img.is_zero(), at + "contracted class vanishes on the model");
      vcheck(!proportional(c_img, *cur.fiber),
             at + "contracted ray coincides with the fibre ray");
      vcheck(intersect(Dm, c_img) < 0,
             at + "contracted ray is not negative for the threshold divisor");
      vcheck(intersect(h.class_on_w, c_img) >= 0,
             at + "contracted ray is negative against the reference system");
      vcheck(self_intersection(c_img) < 0,
             at + "contracted ray is not divisorial on the model");
      const Rat rd = -intersect(S.kb_pullback(), c_img);
      vcheck(rec.ray_degrees[0] == rd,
             at + "stored ray degree differs from the recomputed value");
      if (mode == Mode::genuine)
        vcheck(rd > 0 && rd <= 4, at + "ray degree violates the fibre-degree bound");
      std::vector<TaggedClass> tags2 = S.contracted().tags();
      tags2.push_back(con);
      next = make_mfs(S.rebuilt(ContractionSet(f, tags2)), BaseType::point);
    } else {
      vfail(at + "descent branch admits only links III and IV");
    }
  }

  const SarkisovDegree d1 = sarkisov_degree(*next, h);
  vcheck(rec.degree_after == d1,
         at + "stored degree_after differs from the recomputed degree");
  vcheck(degree_compare(d1, d0) < 0, at + "link does not decrease the degree");
  vcheck(d1.mu <= d0.mu, at + "link increases the quasi-effective threshold");
  if (rec.branch == Branch::lambda_le_mu)
    vcheck(d1.mu < d0.mu, at + "descent link must strictly drop mu");
  detail::check_state_invariants(*next, d1);
  vcheck(sarkisov_related_check({next->surface, tgt.surface}).related,
         at + "midpoint model is not related to the target");
  return std::move(*next);
}

inline void run(const SarkisovCertificate& cert) {
  const InstanceData& inst = cert.instance;
  vcheck(!(inst.epsilon == 0 && inst.declared_boundary.empty() &&
           inst.mode != Mode::genuine),
         "certificate instance is not in reduced form");
  const BuiltInstance built = build_instance(inst);
  const HSystem& h = inst.h;
  const MfsState& tgt = built.target;
  if (inst.mode != Mode::genuine)
    vcheck(sarkisov_related_check({built.source.surface, tgt.surface}).related,
           "the end models are not related");

  MfsState cur = built.source;
  detail::check_state_invariants(cur, sarkisov_degree(cur, h));
  for (std::size_t i = 0; i < cert.links.size(); ++i)
    cur = replay_link(cur, tgt, h, cert.links[i], i);

  const SarkisovDegree d = sarkisov_degree(cur, h);
  vcheck(noether_fano(cur, h, d),
         "the chain ends before the stopping test holds");
  vcheck(d == SarkisovDegree{Rat(h.mu_prime), 0, 0},
         "stopping degree is not (mu', 0, 0)");
  vcheck(cur.base == tgt.base, "final base type differs from the target model");
  if (cur.base == BaseType::curve)
    vcheck(*cur.fiber == *tgt.fiber, "final fibration differs from the target model");

  const FinalWitness expect = make_final_witness(cur, tgt, h, d);
  vcheck(expect.contracted_matches_target,
         "final contracted span differs from the target model");
  const FinalWitness& got = cert.final;
  vcheck(got.degree == expect.degree,
         "stored final degree differs from the recomputed degree");
  vcheck(got.base == expect.base, "stored final base differs from the replay");
  bool same_tags = got.contracted.size() == expect.contracted.size();
  for (std::size_t i = 0; same_tags && i < got.contracted.size(); ++i)
    same_tags = compare(got.contracted[i], expect.contracted[i]) == 0;
  vcheck(same_tags, "stored final contracted set differs from the replay");
  vcheck(got.fiber == expect.fiber, "stored final fibre differs from the replay");
  vcheck(got.fiber_multiple == expect.fiber_multiple,
         "stored fibre multiple differs from the recomputation");
  vcheck(got.pullback_zero == expect.pullback_zero,
         "stored pullback witness differs from the recomputation");
  if (cur.base == BaseType::curve) {
    vcheck(expect.fiber_multiple.has_value() && *expect.fiber_multiple >= 0,
           "threshold divisor is negative on the horizontal rays");
  } else {
    vcheck(expect.pullback_zero.has_value() && *expect.pullback_zero,
           "threshold divisor does not pull back to zero on the final model");
  }
  vcheck(got.contracted_matches_target == expect.contracted_matches_target,
         "stored target agreement flag differs from the recomputation");

  vcheck(cert.checks.degree_chain_strict && cert.checks.mu_non_increasing &&
             cert.checks.mu_quantized && cert.checks.epsilon_bound &&
             cert.checks.related_chain,
         "stored check outcomes contradict the replayed run");
  bool rays_positive = true;
  for (const auto& l : cert.links)
    for (const auto& x : l.ray_degrees) rays_positive = rays_positive && x > 0;
  vcheck(cert.checks.ray_degrees_positive == rays_positive,
         "stored ray-positivity outcome differs from the recomputation");
}

}  // namespace verify_detail

/* Recompute everything a certificate asserts, from its instance data alone,
   without consulting the search engine.  First failure wins. */
inline VerifyResult verify_certificate(const SarkisovCertificate& cert) {
  try {
    verify_detail::run(cert);
  } catch (const error& e) {
    return {false, e.what()};
  }
  return {true, ""};
}

}  // namespace sarkisov
