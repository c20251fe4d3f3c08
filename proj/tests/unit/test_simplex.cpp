#include <catch2/catch_amalgamated.hpp>

#include "evoldp/simplex.hpp"

using namespace evoldp;

TEST_CASE("SimplexPoint validates its invariants") {
  REQUIRE_NOTHROW(SimplexPoint({0.375, 0.5, 0.125}));
  REQUIRE_THROWS_AS(SimplexPoint({0.5, 0.6}), std::invalid_argument);
  REQUIRE_THROWS_AS(SimplexPoint({-0.1, 1.1}), std::invalid_argument);
  REQUIRE_THROWS_AS(SimplexPoint({1.0}), std::invalid_argument);
  SimplexPoint v = SimplexPoint::vertex(3, 1);
  REQUIRE(v[1] == 1.0);
  REQUIRE(v.support() == std::vector<int>{1});
}

TEST_CASE("GridState round-trips through shares") {
  GridState s({3, 4, 1}, 8);
  REQUIRE(s.to_point()[0] == Catch::Approx(0.375));
  REQUIRE_THROWS_AS(GridState({3, 4, 2}, 8), std::invalid_argument);
  REQUIRE_THROWS_AS(s.moved(2, 0).moved(2, 1), std::invalid_argument);

  GridState r = GridState::nearest(SimplexPoint({0.374, 0.501, 0.125}), 1000);
  long total = 0;
  for (long c : r.counts()) total += c;
  REQUIRE(total == 1000);
  REQUIRE(l1_distance(r.to_point(), SimplexPoint({0.374, 0.501, 0.125})) < 2e-3);
}

TEST_CASE("grid enumeration is a lexicographic bijection") {
  GridEnumeration e(3, 7);
  REQUIRE(e.size() == 36);  // C(9,2)
  std::vector<long> prev;
  for (std::size_t k = 0; k < e.size(); ++k) {
    std::vector<long> c = e.counts(k);
    REQUIRE(e.index(c) == k);
    if (!prev.empty()) REQUIRE(std::lexicographical_compare(prev.begin(), prev.end(),
                                                            c.begin(), c.end()));
    prev = c;
  }
  GridEnumeration big(2, 400);
  REQUIRE(big.size() == 401);
  REQUIRE(big.index({250, 150}) == 250);
}

TEST_CASE("tangent projection kills the mean") {
  std::vector<double> v = {3.0, -1.0, 2.5};
  std::vector<double> p = project_tangent(v);
  double s = p[0] + p[1] + p[2];
  REQUIRE(std::abs(s) < 1e-14);
  TangentVector t{p};
  REQUIRE(t.dim() == 3);
  REQUIRE_THROWS_AS(TangentVector({0.5, 0.1}), std::invalid_argument);
}

TEST_CASE("simplex mesh matches the enumeration size") {
  REQUIRE(simplex_mesh(3, 10).size() == 66);
  REQUIRE(simplex_mesh(2, 200).size() == 201);
}
