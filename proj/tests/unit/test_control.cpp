#include <catch2/catch_amalgamated.hpp>

#include "evoldp/control.hpp"
#include "evoldp/logit_potential.hpp"
#include "helpers.hpp"

using namespace evoldp;
using evoldp::testing::two_link_game;

namespace {
IncrementLaw uniform_law(int n) {
  IncrementLaw law(n);
  for (int a = 0; a < law.atom_count(); ++a)
    law.set_atom_prob(a, 1.0 / law.atom_count());
  return law;
}
}  // namespace

TEST_CASE("tilted minimizer with a constant shift returns the base law") {
  IncrementLaw pi = uniform_law(3);
  std::vector<double> gamma(pi.atom_count(), 0.8);
  TiltedMinimizer tm = tilted_minimizer(pi, gamma);
  REQUIRE(tm.value == Catch::Approx(0.8).margin(1e-14));
  for (int a = 0; a < pi.atom_count(); ++a)
    REQUIRE(tm.lambda[a] == Catch::Approx(pi.atom_prob(a)).margin(1e-14));
}

TEST_CASE("tilted minimizer with restricted support is the forced point mass") {
  IncrementLaw pi = uniform_law(2);
  std::vector<double> gamma = {kInf, 0.4, kInf};
  TiltedMinimizer tm = tilted_minimizer(pi, gamma);
  REQUIRE(tm.lambda[1] == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(tm.value == Catch::Approx(0.4 - std::log(pi.atom_prob(1))).margin(1e-12));
}

TEST_CASE("tilted minimizer beats a fine mesh") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  SimplexPoint x({0.4, 0.6});
  IncrementLaw nu = increment_law(x, switch_matrix(game, p, x));
  std::mt19937_64 rng = make_stream(55, 0);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> gamma(3);
    for (double& g : gamma) g = nd(rng);
    TiltedMinimizer tm = tilted_minimizer(nu, gamma);
    double best = kInf;
    const int M = 2000;
    for (int a = 0; a <= M; ++a) {
      for (int b = 0; a + b <= M; ++b) {
        IncrementLaw lam(2);
        lam.set_atom_prob(0, static_cast<double>(a) / M);
        lam.set_atom_prob(1, static_cast<double>(b) / M);
        lam.set_atom_prob(2, static_cast<double>(M - a - b) / M);
        double v = relative_entropy(lam, nu);
        if (v == kInf) continue;
        for (int g = 0; g < 3; ++g) v += gamma[g] * lam.atom_prob(g);
        best = std::min(best, v);
      }
    }
    REQUIRE(tm.value <= best + 1e-12);
    REQUIRE(best <= tm.value + 1e-4);
  }
}

TEST_CASE("Laplace value of the zero objective is exactly zero") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  TerminalObjective zero{[](const SimplexPoint&) { return 0.0; }, "zero"};
  GridState x0 = GridState::nearest(SimplexPoint({0.5, 0.5}), 30);
  LaplaceDpResult dp = laplace_dp_value(game, p, 30, zero, x0);
  REQUIRE(dp.value == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(laplace_direct_value(game, p, 30, zero, x0) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("backward DP equals the direct forward expectation") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  TerminalObjective h = TerminalObjective::squared_distance(SimplexPoint({0.8, 0.2}));
  GridState x0 = GridState::nearest(SimplexPoint({0.5, 0.5}), 50);
  double dp = laplace_dp_value(game, p, 50, h, x0).value;
  double direct = laplace_direct_value(game, p, 50, h, x0);
  REQUIRE(dp == Catch::Approx(direct).margin(1e-10));
}

TEST_CASE("emitted tilted controls reproduce the Laplace value") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  TerminalObjective h = TerminalObjective::squared_distance(SimplexPoint({0.8, 0.2}));
  GridState x0 = GridState::nearest(SimplexPoint({0.5, 0.5}), 25);
  LaplaceDpResult dp = laplace_dp_value(game, p, 25, h, x0, true);
  double replay = controlled_objective_value(game, p, 25, h, x0, dp);
  REQUIRE(replay == Catch::Approx(dp.value).margin(1e-8));
}

TEST_CASE("DP value is monotone in the terminal objective") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  GridState x0 = GridState::nearest(SimplexPoint({0.5, 0.5}), 30);
  std::mt19937_64 rng = make_stream(56, 0);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    double a = ur(rng), b = ur(rng), c = ur(rng);
    TerminalObjective h1{[=](const SimplexPoint& x) { return a * x[0] + b * x[1] * x[1]; }, "h1"};
    TerminalObjective h2{[=](const SimplexPoint& x) { return a * x[0] + b * x[1] * x[1] + c; },
                         "h1 + c"};
    double v1 = laplace_dp_value(game, p, 30, h1, x0).value;
    double v2 = laplace_dp_value(game, p, 30, h2, x0).value;
    REQUIRE(v1 <= v2 + 1e-12);
  }
}

TEST_CASE("variational value of the zero objective is the mean-dynamic path") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  TerminalObjective zero{[](const SimplexPoint&) { return 0.0; }, "zero"};
  VariationalOptions opt;
  opt.knots = 8;
  opt.restarts = 1;
  VariationalResult r = laplace_variational(game, p, zero, SimplexPoint({0.5, 0.5}), opt);
  REQUIRE(r.value <= 1e-6);
  // The optimal zero-cost path is the mean flow.
  SampledPath flow = integrate(mean_field(game, p), SimplexPoint({0.5, 0.5}), 1.0, 1e-3);
  REQUIRE(l1_distance(r.path.terminal(), flow.terminal()) <= 0.05);
}

TEST_CASE("more knots never increase the variational value") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  TerminalObjective h = TerminalObjective::squared_distance(SimplexPoint({0.85, 0.15}));
  VariationalOptions opt8;
  opt8.knots = 8;
  VariationalOptions opt16;
  opt16.knots = 16;
  double v8 = laplace_variational(game, p, h, SimplexPoint({0.5, 0.5}), opt8).value;
  double v16 = laplace_variational(game, p, h, SimplexPoint({0.5, 0.5}), opt16).value;
  REQUIRE(v16 <= v8 + 1e-6);
}

TEST_CASE("variational value is bounded by the closed-form candidate") {
  // Candidate: ride the mean dynamic into x*, then the reverse flow to y;
  // its cost is f^eta(x*) - f^eta(y), so the solver must not exceed
  // that plus h(y) by more than a small slack.
  PotentialGame pg = PotentialGame::congestion_game(example_two_link_network());
  GameSpec game = pg.game();
  const double eta = 0.5;
  ProtocolSpec p{LogitProtocol{eta}};
  SimplexPoint y({0.78, 0.22});
  TerminalObjective h{[y](const SimplexPoint& x) { return 4.0 * l1_distance(x, y); },
                      "l1 pull toward y"};
  SimplexPoint rest = find_rest_point(game, LogitProtocol{eta}, SimplexPoint::uniform(2), 1e-13);
  VariationalOptions opt;
  opt.knots = 16;
  opt.restarts = 4;
  VariationalResult r = laplace_variational(game, p, h, rest, opt);
  double upper = exit_cost(pg, eta, y, rest) + h.h(y);
  REQUIRE(r.value <= upper + 1e-2);
}
