#include <catch2/catch_amalgamated.hpp>

#include "evoldp/dynamics.hpp"
#include "helpers.hpp"

using namespace evoldp;
using evoldp::testing::three_link_game;

TEST_CASE("flat protocol mean field is (1/n)1 - x") {
  GameSpec game{DirectGame{3, [](const SimplexPoint&) {
                             return std::vector<double>{0.0, 0.0, 0.0};
                           },
                           "flat"}};
  ProtocolSpec p{LogitProtocol{1.0}};  // equal payoffs -> uniform choice
  SimplexPoint x({0.6, 0.3, 0.1});
  std::vector<double> v = mean_field_at(game, p, x);
  for (int i = 0; i < 3; ++i) REQUIRE(v[i] == Catch::Approx(1.0 / 3.0 - x[i]).margin(1e-14));
}

TEST_CASE("mean field vanishes at the logit rest point") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  std::vector<double> v = mean_field_at(game, p, SimplexPoint({0.3563, 0.4482, 0.1956}));
  REQUIRE(l1_norm(v) <= 5e-4);
}

TEST_CASE("coordinate formula equals the logit form M(F(x)) - x") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  std::mt19937_64 rng = make_stream(21, 0);
  for (int k = 0; k < 200; ++k) {
    SimplexPoint x = random_interior_point(3, rng);
    std::vector<double> coor = mean_field_at(game, p, x);
    std::vector<double> M = logit_map(0.25, payoff_limit(game, x));
    for (int i = 0; i < 3; ++i) REQUIRE(coor[i] == Catch::Approx(M[i] - x[i]).margin(1e-12));
  }
}

TEST_CASE("integration from the rest point stays put") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  SimplexPoint rest = find_rest_point(game, LogitProtocol{0.25}, SimplexPoint::uniform(3), 1e-13);
  SampledPath path = integrate(mean_field(game, p), rest, 10.0, 1e-3);
  REQUIRE(l1_distance(path.terminal(), rest) <= 1e-8);
}

TEST_CASE("global convergence to the eta = .25 rest point") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  SimplexPoint target({0.3563, 0.4482, 0.1956});
  for (const SimplexPoint& x0 :
       {SimplexPoint({0.9, 0.05, 0.05}), SimplexPoint({0.05, 0.05, 0.9}), SimplexPoint::uniform(3)}) {
    SampledPath path = integrate(mean_field(game, p), x0, 50.0, 1e-3);
    REQUIRE(l1_distance(path.terminal(), target) <= 3.0 * 5e-4 + 1e-4);
  }
}

TEST_CASE("RK4 order check by step halving") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  VectorField f = mean_field(game, p);
  SimplexPoint x0({0.7, 0.2, 0.1});
  // Richardson: err(dt) ~ C dt^4; fit the order from successive halvings.
  SimplexPoint ref = integrate(f, x0, 2.0, 1.0 / 4096.0).terminal();
  std::vector<double> errs;
  for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
    errs.push_back(l1_distance(integrate(f, x0, 2.0, dt).terminal(), ref));
  }
  double order1 = std::log2(errs[0] / errs[1]);
  double order2 = std::log2(errs[1] / errs[2]);
  REQUIRE(order1 >= 3.5);
  REQUIRE(order2 >= 3.5);
}

TEST_CASE("reverse mode returns the anti-flow path ending at the start point") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  VectorField f = mean_field(game, p);
  SimplexPoint rest = find_rest_point(game, LogitProtocol{0.25}, SimplexPoint::uniform(3), 1e-13);
  SimplexPoint y({0.6, 0.25, 0.15});
  SampledPath rev = integrate(f, y, 80.0, 1e-3, Direction::reverse, rest);
  REQUIRE(l1_distance(rev.states.front(), rest) <= 1e-8);
  REQUIRE(l1_distance(rev.states.back(), y) == 0.0);
  // The path's tangent is the negated field along it.
  std::size_t k = rev.size() / 2;
  double dt = rev.times[k + 1] - rev.times[k];
  std::vector<double> field_mid = f.eval(rev.at(0.5 * (rev.times[k] + rev.times[k + 1])));
  for (int i = 0; i < 3; ++i) {
    double zd = (rev.states[k + 1][i] - rev.states[k][i]) / dt;
    REQUIRE(zd == Catch::Approx(-field_mid[i]).margin(1e-5));
  }
}

TEST_CASE("rest points match the published values") {
  GameSpec game = three_link_game();
  SimplexPoint r25 = find_rest_point(game, LogitProtocol{0.25}, SimplexPoint::uniform(3), 1e-12);
  SimplexPoint r10 = find_rest_point(game, LogitProtocol{0.1}, SimplexPoint::uniform(3), 1e-12);
  REQUIRE(std::abs(r25[0] - 0.3563) <= 5e-4);
  REQUIRE(std::abs(r25[1] - 0.4482) <= 5e-4);
  REQUIRE(std::abs(r25[2] - 0.1956) <= 5e-4);
  REQUIRE(std::abs(r10[0] - 0.3648) <= 5e-4);
  REQUIRE(std::abs(r10[1] - 0.4732) <= 5e-4);
  REQUIRE(std::abs(r10[2] - 0.1620) <= 5e-4);
}

TEST_CASE("flat game rest point is uniform") {
  GameSpec game{DirectGame{4, [](const SimplexPoint&) {
                             return std::vector<double>{0.0, 0.0, 0.0, 0.0};
                           },
                           "flat"}};
  SimplexPoint r = find_rest_point(game, LogitProtocol{0.3}, SimplexPoint({0.7, 0.1, 0.1, 0.1}), 1e-12);
  for (int i = 0; i < 4; ++i) REQUIRE(r[i] == Catch::Approx(0.25).margin(1e-10));
}

TEST_CASE("deterministic approximation trends over N and eps") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  DetApproxTable t = det_approx_experiment(game, p, SimplexPoint::uniform(3), 2.0,
                                           {100, 400, 1600}, 60, {0.05, 0.1}, 31415);
  auto row = [&](long N, double eps) {
    for (const auto& r : t.rows)
      if (r.N == N && r.eps == eps) return r;
    return DetApproxRow{};
  };
  // Nonincreasing in N for fixed eps, and in eps for fixed N (nested events).
  REQUIRE(row(100, 0.05).frequency >= row(400, 0.05).frequency);
  REQUIRE(row(400, 0.05).frequency >= row(1600, 0.05).frequency);
  REQUIRE(row(100, 0.1).frequency <= row(100, 0.05).frequency);
  REQUIRE(row(400, 0.1).frequency <= row(400, 0.05).frequency);
  // Median sup-distance shrinks as N grows.
  REQUIRE(row(400, 0.05).median_sup < row(100, 0.05).median_sup);
  REQUIRE(row(1600, 0.05).median_sup < row(400, 0.05).median_sup);
}

TEST_CASE("large-population terminal states track the flow") {
  // N = 1e4, T = 5: at least 95 of 100 replicas end within .02 (l1) of the
  // ODE terminal state.
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  const long N = 10000;
  GridState x0 = GridState::nearest(SimplexPoint::uniform(3), N);
  SimplexPoint ode = integrate(mean_field(game, p), x0.to_point(), 5.0, 1e-3).terminal();
  const long steps = 5 * N;
  std::vector<int> ok(100, 0);
  parallel_for(100, [&](std::size_t r) {
    std::mt19937_64 rng = make_stream(8888, r);
    GridState state = x0;
    simulate_steps(game, p, x0, steps, rng, EvalMode::simple,
                   [&](long k, const GridState& s) {
                     if (k + 1 == steps) ok[r] = l1_distance(s.to_point(), ode) <= 0.02 ? 1 : 0;
                   });
    (void)state;
  });
  int close = 0;
  for (int v : ok) close += v;
  REQUIRE(close >= 95);
}

TEST_CASE("mean field never points out of the simplex on a face") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  std::mt19937_64 rng = make_stream(22, 0);
  for (int k = 0; k < 100; ++k) {
    std::uniform_real_distribution<double> ur(0.05, 0.95);
    double a = ur(rng);
    int face = k % 3;
    std::vector<double> c(3, 0.0);
    c[face] = 0.0;
    c[(face + 1) % 3] = a;
    c[(face + 2) % 3] = 1.0 - a;
    std::vector<double> v = mean_field_at(game, p, SimplexPoint(c));
    REQUIRE(v[face] >= 0.0);
  }
}
