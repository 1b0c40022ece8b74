#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "contraction.hpp"
#include "forest.hpp"
#include "rational.hpp"
#include "surface.hpp"

namespace sarkisov {

/* Order-preserving JSON: fields are emitted exactly in insertion order, so a
   fixed emission order makes byte equality coincide with semantic equality. */
using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  check(!j.is_discarded(), errc::schema_error, "input is not well-formed JSON");
  return j;
}

inline const Json& field(const Json& j, const char* key) {
  check(j.is_object(), errc::schema_error, "expected an object");
  auto it = j.find(key);
  check(it != j.end(), errc::schema_error,
        std::string("missing field '") + key + "'");
  return *it;
}

/* Reject unknown keys so the canonical shape is the only accepted shape. */
inline void expect_keys(const Json& j, std::initializer_list<const char*> keys) {
  check(j.is_object(), errc::schema_error, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) known = true;
    check(known, errc::schema_error, "unexpected field '" + item.key() + "'");
  }
}

inline std::string schema_string(const Json& j) {
  const Json& s = field(j, "schema");
  check(s.is_string(), errc::schema_error, "schema tag must be a string");
  return s.get<std::string>();
}

/* ---------- scalars ---------- */

inline Json json_int(const Int& n) { return Json(n.get_str()); }

inline Int int_from_json(const Json& j, const char* what) {
  check(j.is_string(), errc::schema_error,
        std::string(what) + " must be a decimal string");
  const std::string s = j.get<std::string>();
  check(!s.empty(), errc::schema_error, std::string(what) + " is empty");
  std::size_t i = s[0] == '-' ? 1 : 0;
  check(i < s.size(), errc::schema_error, std::string(what) + " is not a number");
  for (; i < s.size(); ++i)
    check(s[i] >= '0' && s[i] <= '9', errc::schema_error,
          std::string(what) + " is not a decimal string");
  return Int(s);
}

/* Rationals travel as a [numerator, denominator] pair of integer strings. */
inline Json json_rat(const Rat& q) {
  Rat c = q;
  c.canonicalize();
  return Json::array({c.get_num().get_str(), c.get_den().get_str()});
}

inline Rat rat_from_json(const Json& j, const char* what) {
  check(j.is_array() && j.size() == 2, errc::schema_error,
        std::string(what) + " must be a [num, den] string pair");
  const Int num = int_from_json(j[0], what);
  const Int den = int_from_json(j[1], what);
  check(den != 0, errc::schema_error, std::string(what) + " has denominator zero");
  Rat q(num);
  q /= Rat(den);
  return q;
}

inline int int32_from_json(const Json& j, const char* what) {
  check(j.is_number_integer(), errc::schema_error,
        std::string(what) + " must be an integer");
  return j.get<int>();
}

inline bool bool_from_json(const Json& j, const char* what) {
  check(j.is_boolean(), errc::schema_error,
        std::string(what) + " must be a boolean");
  return j.get<bool>();
}

/* ---------- lattice data ---------- */

inline Json json_class(const DivisorClass& d) {
  Json exc = Json::array();
  for (const auto& e : d.exc) exc.push_back(json_rat(e));
  return Json{{"line", json_rat(d.line)}, {"exc", std::move(exc)}};
}

inline DivisorClass class_from_json(const Json& j, int rank) {
  expect_keys(j, {"line", "exc"});
  const Json& exc = field(j, "exc");
  check(exc.is_array(), errc::schema_error, "class 'exc' must be an array");
  check(static_cast<int>(exc.size()) == rank, errc::schema_error,
        "class rank mismatch");
  RatVec v;
  v.reserve(exc.size());
  for (const auto& e : exc) v.push_back(rat_from_json(e, "class coefficient"));
  return DivisorClass(rat_from_json(field(j, "line"), "class line coefficient"),
                      std::move(v));
}

inline Json json_tag(const TaggedClass& t) {
  if (t.kind == TaggedClass::Kind::prime) return Json{{"prime", t.index}};
  Json mults = Json::array();
  for (const auto& m : t.curve.mults) mults.push_back(json_int(m));
  return Json{{"curve", Json{{"degree", json_int(t.curve.degree)},
                             {"mults", std::move(mults)}}}};
}

inline TaggedClass tag_from_json(const Json& j) {
  check(j.is_object() && j.size() == 1, errc::schema_error,
        "a curve tag is a one-field object");
  if (j.contains("prime"))
    return TaggedClass::make_prime(int32_from_json(j.at("prime"), "prime index"));
  check(j.contains("curve"), errc::schema_error, "unknown curve tag kind");
  const Json& c = j.at("curve");
  expect_keys(c, {"degree", "mults"});
  const Json& mj = field(c, "mults");
  check(mj.is_array(), errc::schema_error, "curve tag 'mults' must be an array");
  std::vector<Int> mults;
  mults.reserve(mj.size());
  for (const auto& m : mj) mults.push_back(int_from_json(m, "curve multiplicity"));
  return TaggedClass::make_curve(int_from_json(field(c, "degree"), "curve degree"),
                                 std::move(mults));
}

inline Json json_tags(const std::vector<TaggedClass>& tags) {
  Json a = Json::array();
  for (const auto& t : tags) a.push_back(json_tag(t));
  return a;
}

inline std::vector<TaggedClass> tags_from_json(const Json& j, const char* what) {
  check(j.is_array(), errc::schema_error, std::string(what) + " must be an array");
  std::vector<TaggedClass> out;
  out.reserve(j.size());
  for (const auto& t : j) out.push_back(tag_from_json(t));
  return out;
}

/* ---------- enums ---------- */

inline Json json_base(BaseType b) { return Json(base_name(b)); }

inline BaseType base_from_json(const Json& j) {
  check(j.is_string(), errc::schema_error, "base type must be a string");
  const std::string s = j.get<std::string>();
  if (s == "POINT") return BaseType::point;
  if (s == "CURVE") return BaseType::curve;
  fail(errc::schema_error, "unknown base type '" + s + "'");
}

inline Json json_mode(Mode m) { return Json(mode_name(m)); }

inline Mode mode_from_json(const Json& j) {
  check(j.is_string(), errc::schema_error, "mode must be a string");
  return parse_mode(j.get<std::string>());
}

/* ---------- the point cluster ---------- */

inline Json json_forest(const ProximityForest& f) {
  Json a = Json::array();
  for (const auto& p : f.points()) {
    Json sats = Json::array();
    for (int s : p.satellites) sats.push_back(s);
    a.push_back(Json{{"parent", p.parent}, {"satellites", std::move(sats)}});
  }
  return a;
}

inline ProximityForest forest_from_json(const Json& j) {
  check(j.is_array(), errc::schema_error, "forest must be an array of points");
  std::vector<ProximityForest::Point> pts;
  pts.reserve(j.size());
  for (const auto& p : j) {
    expect_keys(p, {"parent", "satellites"});
    ProximityForest::Point pt;
    pt.parent = int32_from_json(field(p, "parent"), "point parent");
    const Json& sj = field(p, "satellites");
    check(sj.is_array(), errc::schema_error, "'satellites' must be an array");
    for (const auto& s : sj) pt.satellites.push_back(int32_from_json(s, "satellite"));
    pts.push_back(std::move(pt));
  }
  return ProximityForest(std::move(pts));
}

}  // namespace sarkisov
