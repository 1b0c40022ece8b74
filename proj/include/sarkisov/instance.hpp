#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "degree.hpp"
#include "records.hpp"
#include "serial.hpp"

namespace sarkisov {

inline constexpr const char* kInstanceSchema = "sarkisov-instance/1";

/* One end of the birational map: which curves the marked surface contracts to
   reach the model, and the fibration data over a curve base. */
struct EndSpec {
  std::vector<TaggedClass> contracted;
  BaseType base = BaseType::point;
  std::optional<DivisorClass> fiber;
};

/* Everything a factorization run consumes, exactly as written in an instance
   file.  The declared boundary lists only divisors visible on at least one
   end; exceptional classes contracted on both ends pick up the weight epsilon
   when the full boundary is assembled. */
struct InstanceData {
  Mode mode = Mode::genuine;
  Rat epsilon = 0;
  ProximityForest forest;
  std::vector<BoundaryComponent> declared_boundary;
  EndSpec source, target;
  HSystem h;
  EngineConfig config;
};

/* A run with weight zero and nothing declared is the boundary-free program:
   the reduced form names it that way so equivalent runs serialize equally. */
inline InstanceData normalize_instance(InstanceData inst) {
  if (inst.epsilon == 0 && inst.declared_boundary.empty())
    inst.mode = Mode::genuine;
  return inst;
}

/* Full boundary on the marked surface: declared components plus weight
   epsilon on every class contracted on both ends (such a class is a divisor
   on neither model).  Declared components must stay visible on one end. */
inline Boundary assemble_boundary(const InstanceData& inst) {
  auto realized = [&](const std::vector<TaggedClass>& tags) {
    std::vector<DivisorClass> out;
    out.reserve(tags.size());
    for (const auto& t : tags) {
      validate_tag(inst.forest, t);
      out.push_back(realize(inst.forest, t));
    }
    return out;
  };
  const auto src = realized(inst.source.contracted);
  const auto tgt = realized(inst.target.contracted);
  auto contracted_on_both = [&](const DivisorClass& c) {
    const bool in_src = std::find(src.begin(), src.end(), c) != src.end();
    const bool in_tgt = std::find(tgt.begin(), tgt.end(), c) != tgt.end();
    return in_src && in_tgt;
  };

  std::vector<BoundaryComponent> comps;
  for (const auto& b : inst.declared_boundary) {
    validate_tag(inst.forest, b.tag);
    check(!contracted_on_both(realize(inst.forest, b.tag)), errc::instance_error,
          "boundary component " + b.tag.str() +
              " is a divisor on neither end: it carries the weight epsilon, "
              "not a declared coefficient");
    comps.push_back(b);
  }
  if (inst.epsilon > 0)
    for (std::size_t i = 0; i < inst.source.contracted.size(); ++i)
      if (contracted_on_both(src[i]))
        comps.push_back({inst.source.contracted[i], inst.epsilon});
  return Boundary(inst.mode, inst.epsilon, std::move(comps));
}

/* The classical self-consistency identities of a plane-to-plane system
   H = d*l - sum m_i e_i, in the reference normalization. */
inline void check_homaloidal(const HSystem& h) {
  const Rat mp(h.mu_prime);
  Rat sq = h.class_on_w.line * h.class_on_w.line;
  Rat lin = 3 * h.class_on_w.line;
  for (const auto& m : h.class_on_w.exc) {
    sq -= m * m;
    lin += m;
  }
  check(sq == 9 * mp * mp, errc::instance_error,
        "plane-to-plane system fails the homaloidal degree identity");
  check(lin == 9 * mp, errc::instance_error,
        "plane-to-plane system fails the homaloidal genus identity");
}

struct BuiltInstance {
  MfsState source;
  MfsState target;
  Boundary boundary;
};

/* Validate the instance and construct both end states.  Every structural rule
   is enforced by the surface/degree validators invoked here. */
inline BuiltInstance build_instance(const InstanceData& inst) {
  const Boundary B = assemble_boundary(inst);
  auto mk = [&](const EndSpec& e) {
    return make_mfs(make_surface(inst.forest, e.contracted, B), e.base, e.fiber);
  };
  MfsState X = mk(inst.source);
  MfsState Xp = mk(inst.target);
  validate_h_system(inst.h, X, Xp);

  auto is_plane = [&](const MfsState& S) {
    return S.base == BaseType::point &&
           static_cast<int>(S.surface.contracted().tags().size()) ==
               inst.forest.size();
  };
  if (inst.mode == Mode::genuine && is_plane(X) && is_plane(Xp))
    check_homaloidal(inst.h);
  return BuiltInstance{std::move(X), std::move(Xp), B};
}

/* ---------- serialization ---------- */

inline Json json_end_spec(const EndSpec& e) {
  std::vector<TaggedClass> tags = e.contracted;
  std::sort(tags.begin(), tags.end(),
            [](const TaggedClass& a, const TaggedClass& b) {
              return compare(a, b) < 0;
            });
  Json j{{"contracted", json_tags(tags)}, {"base", json_base(e.base)}};
  if (e.base == BaseType::curve)
    j["fiber"] = e.fiber ? json_class(*e.fiber) : Json();
  return j;
}

inline EndSpec end_spec_from_json(const Json& j, int rank) {
  EndSpec e;
  e.base = base_from_json(field(j, "base"));
  e.contracted = tags_from_json(field(j, "contracted"), "'contracted'");
  if (e.base == BaseType::curve) {
    expect_keys(j, {"contracted", "base", "fiber"});
    const Json& f = field(j, "fiber");
    if (!f.is_null()) e.fiber = class_from_json(f, rank);
  } else {
    expect_keys(j, {"contracted", "base"});
  }
  return e;
}

inline Json json_instance_body(const InstanceData& inst) {
  std::vector<BoundaryComponent> decl = inst.declared_boundary;
  std::sort(decl.begin(), decl.end(),
            [](const BoundaryComponent& a, const BoundaryComponent& b) {
              return compare(a.tag, b.tag) < 0;
            });
  Json boundary = Json::array();
  for (const auto& b : decl)
    boundary.push_back(Json{{"tag", json_tag(b.tag)}, {"coeff", json_rat(b.coeff)}});
  return Json{{"mode", json_mode(inst.mode)},
              {"epsilon", json_rat(inst.epsilon)},
              {"forest", json_forest(inst.forest)},
              {"boundary", std::move(boundary)},
              {"source", json_end_spec(inst.source)},
              {"target", json_end_spec(inst.target)},
              {"h",
               Json{{"class", json_class(inst.h.class_on_w)},
                    {"mu_prime", json_int(inst.h.mu_prime)},
                    {"ample_degree", json_rat(inst.h.ample_degree)}}}};
}

inline InstanceData instance_body_from_json(const Json& j) {
  InstanceData inst;
  inst.mode = mode_from_json(field(j, "mode"));
  inst.epsilon = rat_from_json(field(j, "epsilon"), "epsilon");
  inst.forest = forest_from_json(field(j, "forest"));
  const int rank = inst.forest.size();

  const Json& bj = field(j, "boundary");
  check(bj.is_array(), errc::schema_error, "'boundary' must be an array");
  for (const auto& b : bj) {
    expect_keys(b, {"tag", "coeff"});
    inst.declared_boundary.push_back(
        {tag_from_json(field(b, "tag")), rat_from_json(field(b, "coeff"), "coeff")});
  }

  inst.source = end_spec_from_json(field(j, "source"), rank);
  inst.target = end_spec_from_json(field(j, "target"), rank);

  const Json& hj = field(j, "h");
  expect_keys(hj, {"class", "mu_prime", "ample_degree"});
  inst.h.class_on_w = class_from_json(field(hj, "class"), rank);
  inst.h.mu_prime = int_from_json(field(hj, "mu_prime"), "mu_prime");
  inst.h.ample_degree = rat_from_json(field(hj, "ample_degree"), "ample_degree");
  return inst;
}

inline std::string save_instance(const InstanceData& inst) {
  Json j{{"schema", kInstanceSchema}};
  const Json body = json_instance_body(inst);
  for (const auto& item : body.items()) j[item.key()] = item.value();
  j["engine"] = Json{{"search_bound", inst.config.search_bound},
                     {"iteration_cap", inst.config.iteration_cap},
                     {"deterministic_ties", inst.config.deterministic_ties}};
  return j.dump(2) + "\n";
}

inline InstanceData load_instance(const std::string& text) {
  const Json j = parse_json(text);
  expect_keys(j, {"schema", "mode", "epsilon", "forest", "boundary", "source",
                  "target", "h", "engine"});
  check(schema_string(j) == kInstanceSchema, errc::schema_error,
        "not a '" + std::string(kInstanceSchema) + "' file");
  InstanceData inst = instance_body_from_json(j);

  const Json& ej = field(j, "engine");
  expect_keys(ej, {"search_bound", "iteration_cap", "deterministic_ties"});
  inst.config.search_bound = int32_from_json(field(ej, "search_bound"), "search_bound");
  const Json& cap = field(ej, "iteration_cap");
  check(cap.is_number_integer(), errc::schema_error,
        "iteration_cap must be an integer");
  inst.config.iteration_cap = cap.get<long>();
  inst.config.deterministic_ties =
      bool_from_json(field(ej, "deterministic_ties"), "deterministic_ties");
  return inst;
}

/* ---------- fixture generators ---------- */

namespace gen_detail {

inline ProximityForest free_cluster(int n) {
  return ProximityForest(std::vector<ProximityForest::Point>(
      static_cast<std::size_t>(n)));
}

inline std::vector<TaggedClass> all_primes(int n) {
  std::vector<TaggedClass> tags;
  tags.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) tags.push_back(TaggedClass::make_prime(i));
  return tags;
}

inline DivisorClass basis_line(int rank) {
  return DivisorClass(Rat(1), RatVec(static_cast<std::size_t>(rank), Rat(0)));
}

inline DivisorClass basis_exceptional(int rank, int i) {
  RatVec e(static_cast<std::size_t>(rank), Rat(0));
  e[static_cast<std::size_t>(i) - 1] = 1;
  return DivisorClass(Rat(0), std::move(e));
}

}  // namespace gen_detail

/* The standard quadratic transformation of the plane, based at three proper
   points: the system of sextics with three triple points in the reference
   normalization, with the three joining lines contracted on the far end. */
inline InstanceData gen_cremona() {
  InstanceData inst;
  inst.forest = gen_detail::free_cluster(3);
  inst.source.contracted = gen_detail::all_primes(3);
  inst.target.contracted = {TaggedClass::make_curve(1, {Int(0), Int(1), Int(1)}),
                            TaggedClass::make_curve(1, {Int(1), Int(0), Int(1)}),
                            TaggedClass::make_curve(1, {Int(1), Int(1), Int(0)})};
  inst.h.class_on_w = DivisorClass(Rat(6), {Rat(-3), Rat(-3), Rat(-3)});
  return inst;
}

/* Degree-d plane transformation preserving a pencil of lines: one point of
   multiplicity d-1 and 2d-2 simple points; the map is an involution, so the
   far end contracts the mirror classes of the same cluster. */
inline InstanceData gen_dejonquieres(int d) {
  check(d >= 2 && d <= 40, errc::instance_error,
        "pencil-preserving instances take a degree between 2 and 40");
  const int n = 2 * d - 1;
  InstanceData inst;
  inst.forest = gen_detail::free_cluster(n);
  inst.source.contracted = gen_detail::all_primes(n);

  std::vector<Int> big(static_cast<std::size_t>(n), Int(1));
  big[0] = Int(d - 2);
  inst.target.contracted.push_back(
      TaggedClass::make_curve(Int(d - 1), std::move(big)));
  for (int j = 2; j <= n; ++j) {
    std::vector<Int> m(static_cast<std::size_t>(n), Int(0));
    m[0] = 1;
    m[static_cast<std::size_t>(j) - 1] = 1;
    inst.target.contracted.push_back(TaggedClass::make_curve(Int(1), std::move(m)));
  }

  RatVec mult(static_cast<std::size_t>(n), Rat(-3));
  mult[0] = Rat(-3 * (d - 1));
  inst.h.class_on_w = DivisorClass(Rat(3 * d), std::move(mult));
  return inst;
}

/* Random plane-to-plane instance: a reproducible word of standard quadratic
   reflections applied to the reference basis of a free cluster.  Every image
   class is validated as an honest curve of the cluster, so the two ends are
   related by the recorded word by construction. */
inline InstanceData gen_random(int points, std::uint64_t seed) {
  check(points >= 3 && points <= 12, errc::instance_error,
        "random instances take between 3 and 12 free points");
  const int r = points;
  const ProximityForest forest = gen_detail::free_cluster(r);

  std::vector<DivisorClass> img;  // img[0] = image of l, img[i] = image of e_i
  img.push_back(gen_detail::basis_line(r));
  for (int i = 1; i <= r; ++i) img.push_back(gen_detail::basis_exceptional(r, i));

  auto taggable = [&](const std::vector<DivisorClass>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!tag_for_class(forest, v[i])) return false;
    return v[0].is_integral() && v[0].line >= 1;
  };
  std::mt19937_64 rng(seed);
  auto reflect = [&](std::vector<DivisorClass>& v, int a, int b, int c) {
    DivisorClass root = gen_detail::basis_line(r);
    root -= gen_detail::basis_exceptional(r, a);
    root -= gen_detail::basis_exceptional(r, b);
    root -= gen_detail::basis_exceptional(r, c);
    for (auto& x : v) x += intersect(x, root) * root;
  };

  const int quads = 1 + static_cast<int>(rng() % 3);
  int applied = 0;
  for (int guard = 0; applied < quads && guard < 200; ++guard) {
    int a = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(r));
    int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(r));
    int c = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(r));
    if (a == b || a == c || b == c) continue;
    std::vector<DivisorClass> trial = img;
    reflect(trial, a, b, c);
    if (!taggable(trial)) continue;
    img = std::move(trial);
    ++applied;
  }
  if (img[0] == gen_detail::basis_line(r)) {
    reflect(img, 1, 2, 3);  // never leaves the taggable range from the identity
    check(taggable(img), errc::internal_invariant_violation,
          "fallback quadratic produced an untaggable image");
  }

  InstanceData inst;
  inst.forest = forest;
  inst.source.contracted = gen_detail::all_primes(r);
  for (int i = 1; i <= r; ++i)
    inst.target.contracted.push_back(*tag_for_class(forest, img[static_cast<std::size_t>(i)]));
  inst.h.class_on_w = 3 * img[0];
  return inst;
}

}  // namespace sarkisov
