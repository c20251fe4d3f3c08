#ifndef EVOLDP_GAMES_HPP
#define EVOLDP_GAMES_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evoldp/rng.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Matching in a symmetric normal-form game A, where A_ij is the payoff of an
/// i player matched with a j player. With self-matching excluded the finite
/// population payoff is F^N_i(x) = (1/(N-1)) (A(Nx - e_i))_i.
struct MatchingGame {
  std::vector<std::vector<double>> payoff;  // n x n
  bool self_match_excluded = true;
};

/// Congestion game: facility cost polynomials (coefficients, ascending degree)
/// and a 0/1 usage incidence of actions on facilities. Payoff of action i is
/// the negated sum of the costs of the facilities it uses, each evaluated at
/// that facility's total utilization.
struct CongestionGame {
  std::vector<std::vector<double>> facility_cost_coeffs;  // per facility
  std::vector<std::vector<int>> usage;                    // n x L, entries in {0,1}
};

/// Tabular/closure payoff: a Lipschitz F: X -> R^n supplied directly.
struct DirectGame {
  int num_actions = 0;
  std::function<std::vector<double>(const SimplexPoint&)> payoff;
  std::string name;
};

enum class PayoffMode { simple, clever };

namespace detail {

inline double poly_eval(const std::vector<double>& coeffs, double u) {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * u + coeffs[k];
  return v;
}

/// Antiderivative of the cost polynomial, vanishing at 0.
inline double poly_integral(const std::vector<double>& coeffs, double u) {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;)
    v = v * u + coeffs[k] / static_cast<double>(k + 1);
  return v * u;
}

}  // namespace detail

/// Declarative description of a population game together with its limit.
class GameSpec {
 public:
  explicit GameSpec(MatchingGame g) : v_(std::move(g)) { validate(); }
  explicit GameSpec(CongestionGame g) : v_(std::move(g)) { validate(); }
  explicit GameSpec(DirectGame g) : v_(std::move(g)) { validate(); }

  int num_actions() const {
    if (auto* m = std::get_if<MatchingGame>(&v_)) return static_cast<int>(m->payoff.size());
    if (auto* c = std::get_if<CongestionGame>(&v_)) return static_cast<int>(c->usage.size());
    return std::get<DirectGame>(v_).num_actions;
  }

  const MatchingGame* matching() const { return std::get_if<MatchingGame>(&v_); }
  const CongestionGame* congestion() const { return std::get_if<CongestionGame>(&v_); }
  const DirectGame* direct() const { return std::get_if<DirectGame>(&v_); }

  std::string variant_name() const {
    if (matching()) return "matching";
    if (congestion()) return "congestion";
    return "direct";
  }

  /// Facility utilization u_lambda(x) = sum_{i : lambda in Lambda_i} x_i.
  static double utilization(const CongestionGame& g, const SimplexPoint& x, int facility) {
    double u = 0.0;
    for (int i = 0; i < static_cast<int>(g.usage.size()); ++i) {
      if (g.usage[i][facility]) u += x[i];
    }
    return u;
  }

  /// Sampled difference-quotient bound for the limiting payoff. The Lipschitz
  /// assumption itself is not provable from samples; this flags unbounded
  /// closures cheaply.
  double sampled_lipschitz_constant(int pairs = 1000, std::uint64_t seed = 7) const;

 private:
  void validate() const {
    if (auto* m = std::get_if<MatchingGame>(&v_)) {
      const std::size_t n = m->payoff.size();
      if (n < 2) throw std::invalid_argument("matching: need n >= 2");
      for (const auto& row : m->payoff) {
        if (row.size() != n) throw std::invalid_argument("matching: payoff matrix not square");
        for (double a : row)
          if (!std::isfinite(a)) throw std::invalid_argument("matching: non-finite payoff");
      }
    } else if (auto* c = std::get_if<CongestionGame>(&v_)) {
      if (c->usage.size() < 2) throw std::invalid_argument("congestion: need n >= 2");
      const std::size_t nfac = c->facility_cost_coeffs.size();
      for (const auto& row : c->usage) {
        if (row.size() != nfac) throw std::invalid_argument("congestion: usage shape mismatch");
        for (int e : row)
          if (e != 0 && e != 1) throw std::invalid_argument("congestion: usage entries must be 0/1");
      }
    } else {
      const auto& d = std::get<DirectGame>(v_);
      if (d.num_actions < 2 || !d.payoff)
        throw std::invalid_argument("direct: need n >= 2 and a payoff closure");
    }
  }

  std::variant<MatchingGame, CongestionGame, DirectGame> v_;
};

/// Limiting payoff F(x).
inline std::vector<double> payoff_limit(const GameSpec& game, const SimplexPoint& x) {
  const int n = game.num_actions();
  if (x.dim() != n) throw std::invalid_argument("payoff_limit: dimension mismatch");
  std::vector<double> F(n, 0.0);
  if (const MatchingGame* m = game.matching()) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += m->payoff[i][j] * x[j];
      F[i] = s;
    }
  } else if (const CongestionGame* c = game.congestion()) {
    const int nfac = static_cast<int>(c->facility_cost_coeffs.size());
    std::vector<double> cost(nfac);
    for (int f = 0; f < nfac; ++f) {
      cost[f] = detail::poly_eval(c->facility_cost_coeffs[f], GameSpec::utilization(*c, x, f));
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int f = 0; f < nfac; ++f)
        if (c->usage[i][f]) s += cost[f];
      F[i] = -s;
    }
  } else {
    F = game.direct()->payoff(x);
    if (static_cast<int>(F.size()) != n)
      throw std::invalid_argument("payoff_limit: direct payoff closure returned wrong size");
  }
  return F;
}

/// Finite-population payoff vector seen by a revising action-i player,
/// F^N_{i -> .}(x). Simple evaluation returns the current payoff vector;
/// clever evaluation prices action j at the post-switch state
/// x + (e_j - e_i)/N. Finite-N congestion and direct games use the limiting
/// cost functions (no N-dependence).
inline std::vector<double> payoff_finite(const GameSpec& game, const GridState& state, int actor,
                                         PayoffMode mode) {
  const int n = game.num_actions();
  if (state.dim() != n) throw std::invalid_argument("payoff_finite: dimension mismatch");
  if (actor < 0 || actor >= n) throw std::invalid_argument("payoff_finite: bad actor index");
  const long N = state.pop_size();
  if (mode == PayoffMode::clever && state.count(actor) < 1) {
    throw std::invalid_argument("payoff_finite: clever evaluation from an unused action");
  }

  std::vector<double> F(n, 0.0);
  if (const MatchingGame* m = game.matching()) {
    if (!m->self_match_excluded) {
      return payoff_limit(game, state.to_point());
    }
    if (N < 2) throw std::invalid_argument("payoff_finite: matching needs N >= 2");
    // Simple: F^N_j(x) = (1/(N-1)) (A(Nx - e_j))_j.
    // Clever: F^N_j(x + (e_j - e_i)/N) = (1/(N-1)) (A(Nx - e_i))_j.
    for (int j = 0; j < n; ++j) {
      const int drop = (mode == PayoffMode::simple) ? j : actor;
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        double opponents = static_cast<double>(state.count(k)) - (k == drop ? 1.0 : 0.0);
        s += m->payoff[j][k] * opponents;
      }
      F[j] = s / static_cast<double>(N - 1);
    }
    return F;
  }

  if (mode == PayoffMode::simple) return payoff_limit(game, state.to_point());
  for (int j = 0; j < n; ++j) {
    if (j == actor) {
      F[j] = payoff_limit(game, state.to_point())[j];
    } else {
      F[j] = payoff_limit(game, state.moved(actor, j).to_point())[j];
    }
  }
  return F;
}

inline double GameSpec::sampled_lipschitz_constant(int pairs, std::uint64_t seed) const {
  std::mt19937_64 rng = make_stream(seed, 0);
  const int n = num_actions();
  double best = 0.0;
  for (int k = 0; k < pairs; ++k) {
    SimplexPoint a = random_interior_point(n, rng);
    SimplexPoint b = random_interior_point(n, rng);
    double d = l1_distance(a, b);
    if (d < 1e-9) continue;
    std::vector<double> Fa = payoff_limit(*this, a);
    std::vector<double> Fb = payoff_limit(*this, b);
    double num = 0.0;
    for (int i = 0; i < n; ++i) num = std::max(num, std::abs(Fa[i] - Fb[i]));
    best = std::max(best, num / d);
  }
  return best;
}

}  // namespace evoldp

#endif  // EVOLDP_GAMES_HPP
