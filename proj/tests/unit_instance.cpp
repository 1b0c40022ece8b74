#include <catch2/catch_amalgamated.hpp>

#include <initializer_list>
#include <string>
#include <vector>

#include <sarkisov/engine.hpp>
#include <sarkisov/instance.hpp>

using namespace sarkisov;

namespace {

DivisorClass dc(long l, std::initializer_list<long> e) {
  std::vector<Rat> v;
  for (long x : e) v.emplace_back(x);
  return DivisorClass(Rat(l), std::move(v));
}

ProximityForest free_points(int n) {
  std::vector<ProximityForest::Point> pts(static_cast<std::size_t>(n));
  return ProximityForest(pts);
}

TaggedClass curve(long d, std::initializer_list<long> m) {
  std::vector<Int> v;
  for (long x : m) v.emplace_back(x);
  return TaggedClass::make_curve(Int(d), std::move(v));
}

template <class F>
bool throws_kind(errc k, F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.kind() == k;
  }
  return false;
}

SarkisovDegree deg(Rat mu, Rat lambda, int e) { return SarkisovDegree{mu, lambda, e}; }

/* The two-ruling swap: both ends live on the same two-point surface and
   contract the line through both points; the rulings trade places. */
InstanceData ruling_swap_instance() {
  InstanceData inst;
  inst.forest = free_points(2);
  inst.source.contracted = {curve(1, {1, 1})};
  inst.source.base = BaseType::curve;
  inst.source.fiber = dc(1, {-1, 0});
  inst.target.contracted = {curve(1, {1, 1})};
  inst.target.base = BaseType::curve;
  inst.target.fiber = dc(1, {0, -1});
  inst.h.class_on_w = dc(5, {-2, -3});
  inst.h.ample_degree = 1;
  return inst;
}

}  // namespace

TEST_CASE("standard quadratic instance builds in reference normalization") {
  const InstanceData inst = gen_cremona();
  const BuiltInstance built = build_instance(inst);
  CHECK(built.source.base == BaseType::point);
  CHECK(built.target.base == BaseType::point);
  CHECK(sarkisov_degree(built.source, inst.h) == deg(2, 3, 3));

  const auto res = untwist(built.source, built.target, inst.h);
  CHECK(res.links.size() == 4);
  CHECK(res.final_degree == deg(1, 0, 0));
}

TEST_CASE("degree-2 pencil instance coincides with the quadratic one") {
  CHECK(save_instance(gen_dejonquieres(2)) == save_instance(gen_cremona()));
}

TEST_CASE("pencil instances validate and factor to degree one") {
  for (int d = 3; d <= 5; ++d) {
    const InstanceData inst = gen_dejonquieres(d);
    const BuiltInstance built = build_instance(inst);
    CHECK(sarkisov_degree(built.source, inst.h) == deg(d, 3 * (d - 1), 1));
    if (d <= 4) {
      const auto res = untwist(built.source, built.target, inst.h);
      CHECK(res.final_degree == deg(1, 0, 0));
    }
  }
  CHECK(throws_kind(errc::instance_error, [] { gen_dejonquieres(1); }));
}

TEST_CASE("random instances are reproducible and factor") {
  CHECK(save_instance(gen_random(4, 7)) == save_instance(gen_random(4, 7)));
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const InstanceData inst = gen_random(3 + static_cast<int>(seed % 5), seed);
    const BuiltInstance built = build_instance(inst);
    const auto res = untwist(built.source, built.target, inst.h);
    CHECK(res.final_degree.mu == 1);
    CHECK(res.final_degree.lambda == 0);
  }
  CHECK(throws_kind(errc::instance_error, [] { gen_random(2, 1); }));
  CHECK(throws_kind(errc::instance_error, [] { gen_random(13, 1); }));
}

TEST_CASE("normalization folds empty log data to the boundary-free mode") {
  InstanceData inst = gen_cremona();
  inst.mode = Mode::klt;
  CHECK(normalize_instance(inst).mode == Mode::genuine);
  inst.mode = Mode::wklt;
  CHECK(normalize_instance(inst).mode == Mode::genuine);
  inst.mode = Mode::klt;
  inst.epsilon = Rat(1, 2);
  CHECK(normalize_instance(inst).mode == Mode::klt);
}

TEST_CASE("epsilon weights exactly the classes contracted on both ends") {
  InstanceData inst = ruling_swap_instance();

  SECTION("boundary-free run ignores the shared class") {
    const Boundary B = assemble_boundary(inst);
    CHECK(B.components().empty());
    CHECK(build_instance(inst).source.base == BaseType::curve);
  }

  SECTION("positive epsilon puts its weight on the shared class") {
    inst.mode = Mode::wklt;
    inst.epsilon = 1;
    const Boundary B = assemble_boundary(inst);
    REQUIRE(B.components().size() == 1);
    CHECK(compare(B.components()[0].tag, curve(1, {1, 1})) == 0);
    CHECK(B.components()[0].coeff == 1);

    const BuiltInstance built = build_instance(inst);
    CHECK(built.source.surface.kb_total() == dc(-2, {0, 0}));
    CHECK(sarkisov_degree(built.source, inst.h) == deg(Rat(3, 2), 0, 0));
    const auto res = untwist(built.source, built.target, inst.h);
    REQUIRE(res.links.size() == 1);
    CHECK(res.links[0].link_type == LinkType::IV);
    CHECK(res.links[0].ray_degrees == std::vector<Rat>{2});
    CHECK(res.final_degree == deg(1, 0, 0));
  }

  SECTION("declaring the shared class is rejected") {
    inst.mode = Mode::klt;
    inst.epsilon = Rat(1, 2);
    inst.declared_boundary = {{curve(1, {1, 1}), Rat(1, 2)}};
    CHECK(throws_kind(errc::instance_error, [&] { assemble_boundary(inst); }));
  }
}

TEST_CASE("instance files round-trip byte-identically") {
  for (const InstanceData& inst :
       {gen_cremona(), gen_dejonquieres(3), gen_random(5, 11),
        ruling_swap_instance()}) {
    const std::string s = save_instance(inst);
    const InstanceData back = load_instance(s);
    CHECK(save_instance(back) == s);
  }
}

TEST_CASE("instance loader enforces the schema strictly") {
  const std::string good = save_instance(gen_cremona());
  CHECK_NOTHROW(load_instance(good));

  auto rejects = [&](const std::string& from, const std::string& to) {
    std::string bad = good;
    const auto pos = bad.find(from);
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, from.size(), to);
    return throws_kind(errc::schema_error, [&] { load_instance(bad); });
  };
  CHECK(rejects("sarkisov-instance/1", "sarkisov-instance/2"));
  CHECK(rejects("\"mode\"", "\"mood\""));
  CHECK(rejects("\"epsilon\": [\n    \"0\",\n    \"1\"\n  ]", "\"epsilon\": 0"));
  CHECK(rejects("\"deterministic_ties\": true", "\"deterministic_ties\": 1"));
  CHECK(throws_kind(errc::schema_error, [] { load_instance("not json"); }));

  // fibre keys are reserved for ends over a curve base
  std::string bad = good;
  const auto pos = bad.find("\"base\": \"POINT\"");
  REQUIRE(pos != std::string::npos);
  bad.insert(pos, "\"fiber\": null, ");
  CHECK(throws_kind(errc::schema_error, [&] { load_instance(bad); }));
}

TEST_CASE("reference normalization is enforced for plane-to-plane systems") {
  InstanceData inst = gen_cremona();
  inst.h.class_on_w = dc(5, {-3, -2, -2});
  CHECK(throws_kind(errc::instance_error, [&] { build_instance(inst); }));

  // over a curve base the plane identities do not apply
  CHECK_NOTHROW(build_instance(ruling_swap_instance()));
}
