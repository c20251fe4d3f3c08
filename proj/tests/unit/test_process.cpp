#include <catch2/catch_amalgamated.hpp>

#include "evoldp/process.hpp"
#include "helpers.hpp"

using namespace evoldp;
using evoldp::testing::three_link_game;
using evoldp::testing::two_link_game;

namespace {
SwitchMatrix flat_matrix(int n) {
  SwitchMatrix sm;
  sm.entries.assign(n, std::vector<double>(n, 1.0 / n));
  sm.lower_bound = 1.0 / n;
  return sm;
}
}  // namespace

TEST_CASE("increment law of the symmetric two-action case") {
  SwitchMatrix sm;
  sm.entries = {{0.5, 0.5}, {0.5, 0.5}};
  sm.lower_bound = 0.5;
  IncrementLaw law = increment_law(SimplexPoint({0.5, 0.5}), sm);
  REQUIRE(law.move_mass(0, 1) == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(law.move_mass(1, 0) == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(law.null_mass() == Catch::Approx(0.5).margin(1e-15));
  law.validate();
}

TEST_CASE("unused actions cannot become less common") {
  IncrementLaw law = increment_law(SimplexPoint::vertex(3, 0), flat_matrix(3));
  for (int j = 1; j < 3; ++j) REQUIRE(law.move_mass(j, 0) == 0.0);
  SimplexPoint e1 = SimplexPoint::vertex(3, 0);
  law.validate(&e1);
  REQUIRE(law.total_mass() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("equal delays put mass x_i / 3 on every move") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  SimplexPoint x({0.375, 0.5, 0.125});
  IncrementLaw law = increment_law(x, switch_matrix(game, p, x));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) REQUIRE(law.move_mass(i, j) == Catch::Approx(x[i] / 3.0).margin(1e-14));
}

TEST_CASE("atom indexing is a bijection") {
  IncrementLaw law(4);
  std::vector<int> seen(law.atom_count(), 0);
  seen[0] = 1;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      int a = law.atom_index(i, j);
      REQUIRE(law.atom_move(a) == std::pair<int, int>{i, j});
      seen[a]++;
    }
  }
  for (int c : seen) REQUIRE(c == 1);
}

TEST_CASE("simulation replays bit-identically under a fixed seed") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  GridState x0 = GridState::nearest(SimplexPoint::uniform(3), 60);
  SampledPath a = simulate_path(game, p, x0, 3.0, 12345);
  SampledPath b = simulate_path(game, p, x0, 3.0, 12345);
  REQUIRE(a.times == b.times);
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a.states[k].coords() == b.states[k].coords());
  }
  SampledPath c = simulate_path(game, p, x0, 3.0, 12346);
  bool identical = true;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.states[k].coords() != c.states[k].coords()) identical = false;
  }
  REQUIRE_FALSE(identical);
  a.validate();
}

TEST_CASE("first step leaves a vertex with probability 1 - sigma_11") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  const long N = 30;
  GridState x0({N, 0, 0}, N);
  SwitchMatrix sm = switch_matrix(game, p, x0, EvalMode::simple);
  double stay = sm(0, 0);
  const int replicas = 100000;
  int left = 0;
  for (int r = 0; r < replicas; ++r) {
    SampledPath path = simulate_path(game, p, x0, 1.0 / static_cast<double>(N), 777 + r);
    if (path.states[1].coords() != path.states[0].coords()) ++left;
  }
  double freq = static_cast<double>(left) / replicas;
  double expected = 1.0 - stay;
  double se = std::sqrt(expected * (1.0 - expected) / replicas);
  REQUIRE(std::abs(freq - expected) <= 3.0 * se);
}

TEST_CASE("stationary distribution is symmetric for a symmetric game") {
  GameSpec game{MatchingGame{{{1, 0}, {0, 1}}, true}};
  ProtocolSpec p{LogitProtocol{0.5}};
  StationaryResult r =
      stationary_distribution(game, p, 40, StationaryMethod::exact);
  REQUIRE(r.residual_l1 <= 1e-10);
  for (long k = 0; k <= 40; ++k) {
    REQUIRE(r.mass[k] == Catch::Approx(r.mass[40 - k]).margin(1e-10));
  }
}

TEST_CASE("birth-death product solve agrees with the dense solve") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  StationaryResult dense = stationary_distribution(game, p, 100, StationaryMethod::exact);
  StationaryResult bd = stationary_distribution(game, p, 100, StationaryMethod::birth_death);
  for (std::size_t k = 0; k < dense.mass.size(); ++k) {
    REQUIRE(bd.mass[k] == Catch::Approx(dense.mass[k]).margin(1e-10));
  }
}

TEST_CASE("empirical stationary frequencies approach the exact solve") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  StationaryResult exact = stationary_distribution(game, p, 50, StationaryMethod::exact);
  StationaryResult emp = stationary_distribution(game, p, 50, StationaryMethod::empirical,
                                                 EvalMode::simple, 200000, 10000000, 4242);
  double tv = 0.0;
  for (std::size_t k = 0; k < exact.mass.size(); ++k)
    tv += std::abs(exact.mass[k] - emp.mass[k]);
  REQUIRE(tv / 2.0 <= 0.01);
}

TEST_CASE("birth-death needs two actions") {
  GameSpec game = three_link_game();
  ProtocolSpec p{LogitProtocol{0.25}};
  REQUIRE_THROWS_AS(stationary_distribution(game, p, 10, StationaryMethod::birth_death),
                    std::invalid_argument);
}

TEST_CASE("exit problems handle the trivial cases") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  SimplexPoint center({0.5, 0.5});

  SECTION("unreachable boundary censors every replica") {
    ExitProblem never{[](const SimplexPoint&) { return -1.0; }, center, 2.0};
    ExitSummary s = exit_time_mc(game, p, 50, never, 20, 5);
    REQUIRE(s.all_censored);
    REQUIRE(s.censored == 20);
  }

  SECTION("starting on the boundary exits immediately") {
    ExitProblem instant = ExitProblem::l1_ball(center, 0.0, center, 2.0);
    ExitSummary s = exit_time_mc(game, p, 50, instant, 10, 5);
    REQUIRE_FALSE(s.all_censored);
    REQUIRE(s.exit_times.front() == 0.0);
    REQUIRE(s.exit_times.back() == 0.0);
  }

  SECTION("interpolated crossing lies strictly inside the step") {
    ExitProblem ball = ExitProblem::l1_ball(center, 0.12, center, 500.0);
    ExitSummary s = exit_time_mc(game, p, 25, ball, 50, 5);
    REQUIRE_FALSE(s.all_censored);
    REQUIRE(s.mean > 0.0);
    REQUIRE(s.q05 <= s.median);
    REQUIRE(s.median <= s.q95);
  }
}

TEST_CASE("exit-time replicas are scheduling independent") {
  GameSpec game = two_link_game();
  ProtocolSpec p{LogitProtocol{0.5}};
  SimplexPoint center({0.5, 0.5});
  ExitProblem ball = ExitProblem::l1_ball(center, 0.12, center, 500.0);
  ExitSummary one = exit_time_mc(game, p, 25, ball, 40, 9, EvalMode::simple, 1);
  ExitSummary four = exit_time_mc(game, p, 25, ball, 40, 9, EvalMode::simple, 4);
  REQUIRE(one.exit_times == four.exit_times);
  REQUIRE(one.mean == four.mean);
}
