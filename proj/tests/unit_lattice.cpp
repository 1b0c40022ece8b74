#include <catch2/catch_amalgamated.hpp>

#include <initializer_list>
#include <random>
#include <vector>

#include <sarkisov/contraction.hpp>
#include <sarkisov/divisor.hpp>
#include <sarkisov/forest.hpp>

#include "oracle.hpp"

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

template <class F>
bool throws_kind(errc k, F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.kind() == k;
  }
  return false;
}

}  // namespace

TEST_CASE("intersection form on the blown-up plane") {
  CHECK(intersect(line_class(0), line_class(0)) == 1);
  CHECK(intersect(dc(1, {-1, -1, 0}), dc(1, {-1, 0, -1})) == 0);
  CHECK(intersect(exceptional_total(3, 1), exceptional_total(3, 2)) == 0);
  CHECK(intersect(exceptional_total(3, 2), exceptional_total(3, 2)) == -1);
  CHECK(self_intersection(canonical_class(0)) == 9);
  CHECK(self_intersection(canonical_class(5)) == 4);

  // K . (strict exceptional of a free point) = -1.
  auto f = free_points(3);
  for (int i = 1; i <= 3; ++i)
    CHECK(intersect(canonical_class(3), prime_exceptional_class(f, i)) == -1);

  CHECK(throws_kind(errc::instance_error,
                    [] { intersect(line_class(2), line_class(3)); }));
}

TEST_CASE("prime exceptional classes follow proximity") {
  // Free point: no correction.
  CHECK(prime_exceptional_class(free_points(2), 1) == exceptional_total(2, 1));

  // p2 infinitely near p1.
  ProximityForest chain({{0, {}}, {1, {}}});
  CHECK(prime_exceptional_class(chain, 1) == dc(0, {1, -1}));
  CHECK(prime_exceptional_class(chain, 2) == dc(0, {0, 1}));

  // p3 satellite over p1 (proximate to p2 = parent and p1).
  ProximityForest sat({{0, {}}, {1, {}}, {2, {1}}});
  CHECK(prime_exceptional_class(sat, 1) == dc(0, {1, -1, -1}));
  CHECK(prime_exceptional_class(sat, 2) == dc(0, {0, 1, -1}));
  CHECK(prime_exceptional_class(sat, 3) == dc(0, {0, 0, 1}));

  // Strict exceptional curves of an honest cluster are rational: p_a = 0.
  for (int i = 1; i <= 3; ++i) {
    CHECK(arithmetic_genus(prime_exceptional_class(sat, i)) == 0);
    CHECK(self_intersection(prime_exceptional_class(sat, i)) < 0);
  }
}

TEST_CASE("proximity forest validation") {
  using P = ProximityForest::Point;
  CHECK(throws_kind(errc::instance_error, [] { ProximityForest({P{2, {}}, P{0, {}}}); }));
  CHECK(throws_kind(errc::instance_error, [] { ProximityForest({P{0, {1}}}); }));
  CHECK(throws_kind(errc::instance_error,
                    [] { ProximityForest({P{0, {}}, P{1, {1}}}); }));  // satellite = parent
  CHECK(throws_kind(errc::instance_error,
                    [] { ProximityForest({P{0, {}}, P{0, {}}, P{2, {1}}}); }));  // not an ancestor
  CHECK(throws_kind(errc::instance_error, [] {
    ProximityForest({P{0, {}}, P{1, {}}, P{2, {}}, P{3, {1, 2}}});  // proximate to 3 points
  }));

  // Proximity inequality m_i >= sum of m_j over j proximate to i.
  ProximityForest sat({{0, {}}, {1, {}}, {2, {1}}});
  CHECK(sat.proximity_ok(std::vector<Rat>{Rat(2), Rat(1), Rat(1)}));
  CHECK(!sat.proximity_ok(std::vector<Rat>{Rat(2), Rat(1), Rat(2)}));  // m2 < m3
  CHECK(!sat.proximity_ok(std::vector<Rat>{Rat(1), Rat(1), Rat(1)}));  // m1 < m2 + m3
}

TEST_CASE("extend forest") {
  ProximityForest f;
  CHECK(f.size() == 0);
  f = f.extended({0, {}});
  CHECK(f.size() == 1);
  f = f.extended({1, {}});
  CHECK(prime_exceptional_class(f, 1) == dc(0, {1, -1}));
  auto g = f.extended({2, {1}});  // satellite over the chain is fine
  CHECK(prime_exceptional_class(g, 1) == dc(0, {1, -1, -1}));
}

TEST_CASE("extend forest rejects satellite over non-ancestor") {
  ProximityForest f({{0, {}}, {0, {}}, {2, {}}});
  // New point with parent 3: strict ancestors are {3, 2}; 1 is not among them.
  CHECK(throws_kind(errc::instance_error, [&] { f.extended({3, {1}}); }));
  auto g = f.extended({3, {2}});
  CHECK(g.size() == 4);
  CHECK(prime_exceptional_class(g, 2) == dc(0, {0, 1, -1, -1}));
}

TEST_CASE("relative pullback frozen examples") {
  auto f3 = free_points(3);

  // D orthogonal to all of C stays unchanged.
  ContractionSet c23(f3, {TaggedClass::make_prime(2), TaggedClass::make_prime(3)});
  auto rp0 = relative_pullback(dc(2, {-1, 0, 0}), c23);
  CHECK(rp0.projected == dc(2, {-1, 0, 0}));
  CHECK(rp0.coeff == RatVec{Rat(0), Rat(0)});

  // K over three blown-down free points: all discrepancies 1.
  ContractionSet call(f3, {TaggedClass::make_prime(1), TaggedClass::make_prime(2),
                           TaggedClass::make_prime(3)});
  auto rpk = relative_pullback(canonical_class(3), call);
  CHECK(rpk.projected == dc(-3, {0, 0, 0}));
  CHECK(rpk.coeff == RatVec{Rat(1), Rat(1), Rat(1)});

  // Sextic with three triple points against two of them; the coefficients are
  // the negated multiplicities (b_2 = b_3 = 3).
  auto rph = relative_pullback(dc(6, {-3, -3, -3}), c23);
  CHECK(rph.projected == dc(6, {-3, 0, 0}));
  CHECK(rph.coeff == RatVec{Rat(-3), Rat(-3)});

  // Orthogonality and idempotence.
  for (const auto& c : call.classes()) CHECK(intersect(rpk.projected, c) == 0);
  auto again = relative_pullback(rpk.projected, call);
  CHECK(again.projected == rpk.projected);
  CHECK(again.coeff == RatVec{Rat(0), Rat(0), Rat(0)});
}

TEST_CASE("contractibility criterion") {
  CHECK(gram_negative_definite({exceptional_total(1, 1)}));
  CHECK(gram_negative_definite({dc(0, {1, -1}), dc(0, {0, 1})}));
  CHECK(!gram_negative_definite({line_class(0)}));
  CHECK(gram_negative_definite({dc(1, {-1, -1, -1})}));  // (-2)-class alone

  ProximityForest chain({{0, {}}, {1, {}}});
  CHECK_NOTHROW(ContractionSet(chain, {TaggedClass::make_prime(1), TaggedClass::make_prime(2)}));

  // Duplicates are rejected before numeric checks.
  CHECK(throws_kind(errc::instance_error, [&] {
    ContractionSet(chain, {TaggedClass::make_prime(1), TaggedClass::make_prime(1)});
  }));
  CHECK(throws_kind(errc::instance_error, [&] {
    ContractionSet(chain, {TaggedClass::make_prime(3)});
  }));

  // A curve with nonnegative self-intersection cannot be contracted.
  auto f2 = free_points(2);
  CHECK(throws_kind(errc::non_contractible, [&] {
    ContractionSet(f2, {TaggedClass::make_curve(1, {Int(0), Int(0)})});
  }));
  // Line through both points is fine: self-intersection -1.
  CHECK_NOTHROW(ContractionSet(f2, {TaggedClass::make_curve(1, {Int(1), Int(1)})}));

  // Two classes meeting negatively are rejected even though each is negative.
  ProximityForest fake({{0, {}}, {1, {}}, {2, {}}, {3, {1}}});
  CHECK(throws_kind(errc::instance_error, [&] {
    ContractionSet(fake, {TaggedClass::make_prime(1), TaggedClass::make_prime(3)});
  }));
}

TEST_CASE("curve tags realize plane curve classes") {
  auto f3 = free_points(3);
  auto t = TaggedClass::make_curve(6, {Int(3), Int(3), Int(3)});
  CHECK(realize(f3, t) == dc(6, {-3, -3, -3}));
  CHECK(arithmetic_genus(realize(f3, t)) == 1);
  CHECK(arithmetic_genus(dc(1, {-1, -1, 0})) == 0);
  CHECK(arithmetic_genus(dc(3, {0, 0, 0})) == 1);

  CHECK(throws_kind(errc::instance_error, [&] {
    ContractionSet(f3, {TaggedClass::make_curve(0, {Int(0), Int(0), Int(0)})});
  }));
  CHECK(throws_kind(errc::instance_error, [&] {
    ContractionSet(f3, {TaggedClass::make_curve(2, {Int(1), Int(1)})});
  }));
}

TEST_CASE("solver matches per-blowup recursion oracle on small forests") {
  int forests = 0;
  std::mt19937 rng(20260819u);
  oracle::enumerate_forests(6, [&](const ProximityForest& f) {
    ++forests;
    const int r = f.size();
    std::vector<DivisorClass> primes;
    for (int i = 1; i <= r; ++i) primes.push_back(prime_exceptional_class(f, i));

    // Discrepancies.
    auto rp = relative_pullback(canonical_class(r), primes);
    REQUIRE(rp.projected == Rat(-3) * line_class(r));
    auto a = oracle::discrepancies(f);
    REQUIRE(rp.coeff == a);

    // Multiplicities of a random plane curve class.
    std::uniform_int_distribution<int> d(0, 6);
    std::vector<Rat> m;
    for (int i = 0; i < r; ++i) m.emplace_back(d(rng));
    auto rc = relative_pullback(curve_class(Rat(d(rng) + 1), m), primes);
    auto v = oracle::total_multiplicities(f, m);
    for (int i = 0; i < r; ++i) REQUIRE(rc.coeff[static_cast<std::size_t>(i)] == -v[static_cast<std::size_t>(i)]);
    REQUIRE(rc.projected.exc == std::vector<Rat>(static_cast<std::size_t>(r), Rat(0)));

    // Orthogonality of the projection for every basis vector.
    for (const auto& e : primes) CHECK(intersect(rp.projected, e) == 0);
  });
  CHECK(forests > 500);
}

TEST_CASE("embedding classes into a larger forest") {
  auto d = dc(2, {-1, -1});
  auto e = embed(d, 4);
  CHECK(e == dc(2, {-1, -1, 0, 0}));
  CHECK(self_intersection(e) == self_intersection(d));
  CHECK(throws_kind(errc::instance_error, [&] { embed(e, 2); }));
}

TEST_CASE("deterministic class ordering") {
  CHECK(compare(dc(1, {0}), dc(2, {0})) < 0);
  CHECK(compare(dc(1, {-1}), dc(1, {0})) < 0);
  CHECK(compare(dc(1, {0}), dc(1, {0})) == 0);
  CHECK(compare(TaggedClass::make_prime(1), TaggedClass::make_prime(2)) < 0);
  CHECK(compare(TaggedClass::make_prime(9),
                TaggedClass::make_curve(1, {Int(1), Int(1)})) < 0);
  CHECK(compare(TaggedClass::make_curve(1, {Int(1), Int(0)}),
                TaggedClass::make_curve(2, {Int(0), Int(0)})) < 0);
  CHECK(compare(TaggedClass::make_curve(2, {Int(0), Int(1)}),
                TaggedClass::make_curve(2, {Int(1), Int(0)})) < 0);
}
