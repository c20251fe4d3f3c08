#ifndef EVOLDP_LOGIT_POTENTIAL_HPP
#define EVOLDP_LOGIT_POTENTIAL_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evoldp/dynamics.hpp"
#include "evoldp/games.hpp"
#include "evoldp/largedev.hpp"
#include "evoldp/process.hpp"
#include "evoldp/protocols.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// A population game together with a potential f satisfying grad f = F on X.
/// Congestion games get the closed form f(x) = -sum_fac int_0^{u_fac(x)} l(u) du;
/// matching games with symmetric A get f(x) = x'Ax/2; anything else supplies
/// its own closure.
class PotentialGame {
 public:
  static PotentialGame congestion_game(CongestionGame g) {
    GameSpec spec{g};
    auto f = [g](const SimplexPoint& x) {
      double v = 0.0;
      for (std::size_t fac = 0; fac < g.facility_cost_coeffs.size(); ++fac) {
        v -= detail::poly_integral(g.facility_cost_coeffs[fac],
                                   GameSpec::utilization(g, x, static_cast<int>(fac)));
      }
      return v;
    };
    return PotentialGame(std::move(spec), std::move(f), "congestion potential");
  }

  static PotentialGame symmetric_matching(MatchingGame g) {
    const std::size_t n = g.payoff.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(g.payoff[i][j] - g.payoff[j][i]) > 1e-12) {
          throw std::invalid_argument("symmetric_matching: payoff matrix is not symmetric");
        }
      }
    }
    auto payoff = g.payoff;
    GameSpec spec{std::move(g)};
    auto f = [payoff, n](const SimplexPoint& x) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v += x[i] * payoff[i][j] * x[j];
      return 0.5 * v;
    };
    return PotentialGame(std::move(spec), std::move(f), "quadratic matching potential");
  }

  PotentialGame(GameSpec game, std::function<double(const SimplexPoint&)> potential,
                std::string description)
      : game_(std::move(game)), f_(std::move(potential)), description_(std::move(description)) {}

  const GameSpec& game() const { return game_; }
  double potential(const SimplexPoint& x) const { return f_(x); }
  std::vector<double> payoff(const SimplexPoint& x) const { return payoff_limit(game_, x); }
  const std::string& description() const { return description_; }

  /// max_i |F_i(x) - directional difference quotient of f| over sampled
  /// interior states; the grad f = F consistency check.
  double gradient_check(int samples = 1000, double step = 1e-6, std::uint64_t seed = 11) const {
    std::mt19937_64 rng = make_stream(seed, 0);
    const int n = game_.num_actions();
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      SimplexPoint x = random_interior_point(n, rng, 1e-3);
      std::vector<double> F = payoff(x);
      for (int a = 1; a < n; ++a) {
        // Central difference along e_a - e_0, stays on the simplex.
        std::vector<double> hi = x.coords(), lo = x.coords();
        hi[a] += step;
        hi[0] -= step;
        lo[a] -= step;
        lo[0] += step;
        double fd = (f_(SimplexPoint(hi)) - f_(SimplexPoint(lo))) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - (F[a] - F[0])));
      }
    }
    return worst;
  }

 private:
  GameSpec game_;
  std::function<double(const SimplexPoint&)> f_;
  std::string description_;
};

namespace detail {

inline std::vector<int> full_support(int n) {
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace detail

/// f^eta_R(x) = eta^-1 f(x) - ( sum_{i in R} x_i log x_i + sum_{j notin R} x_j ),
/// with 0 log 0 = 0. Without a face argument this is f^eta at the full
/// support, i.e. eta^-1 f - h.
inline double logit_potential_value(const PotentialGame& pg, double eta, const SimplexPoint& x,
                                    std::optional<std::vector<int>> face = std::nullopt) {
  const int n = x.dim();
  std::vector<char> in_R(n, 0);
  if (face) {
    for (int i : *face) in_R.at(i) = 1;
    for (int i = 0; i < n; ++i) {
      if (!in_R[i] && x[i] > 0.0) {
        throw std::invalid_argument("logit_potential_value: support(x) not within the face");
      }
    }
  } else {
    for (int i = 0; i < n; ++i) in_R[i] = 1;
  }
  double h = 0.0;
  for (int i = 0; i < n; ++i) h += in_R[i] ? xlogx(x[i]) : x[i];
  return pg.potential(x) / eta - h;
}

/// Tangent gradient of the face potential:
/// grad0 f^eta_R(x) = P(eta^-1 F(x) - sum_{i in R} e_i log x_i).
/// Entries log x_j for j outside R never appear, so faces avoid log 0.
inline std::vector<double> logit_potential_grad0(const PotentialGame& pg, double eta,
                                                 const SimplexPoint& x,
                                                 const std::vector<int>& face) {
  const int n = x.dim();
  std::vector<double> v = pg.payoff(x);
  for (double& c : v) c /= eta;
  for (int i : face) {
    if (x[i] <= 0.0) throw std::invalid_argument("logit_potential_grad0: log 0 on the face");
    v[i] -= std::log(x[i]);
  }
  return project_tangent(v);
}

inline std::vector<double> logit_potential_grad0(const PotentialGame& pg, double eta,
                                                 const SimplexPoint& x) {
  return logit_potential_grad0(pg, eta, x, detail::full_support(x.dim()));
}

struct HjResult {
  double H = 0.0;           // H(x, -grad0 f^eta_R(x)), face-restricted moment sum
  double exp_H = 0.0;
  double closed_form_ratio = 0.0;  // sum_{i in R} e^{F_i/eta} / sum_{k in S} e^{F_k/eta}
};

/// Hamilton-Jacobi residual at x with support R. For interior x this is
/// H(x, -grad f^eta(x)) and vanishes; on a proper face the moment sum runs
/// over the increments that keep the support inside R (the limiting
/// Hamiltonian for motion confined to the face), is strictly negative, and
/// exp(H) equals the closed-form ratio.
inline HjResult hj_residual(const PotentialGame& pg, double eta, const SimplexPoint& x,
                            std::optional<std::vector<int>> face = std::nullopt) {
  const int n = x.dim();
  std::vector<int> R = face ? *face : x.support();
  if (!face && static_cast<int>(R.size()) == n) R = detail::full_support(n);
  {
    std::vector<char> in_R(n, 0);
    for (int i : R) in_R.at(i) = 1;
    for (int i = 0; i < n; ++i) {
      bool has = x[i] > 0.0;
      if (has != static_cast<bool>(in_R[i])) {
        throw std::invalid_argument("hj_residual: face must equal support(x)");
      }
    }
  }

  const LogitProtocol lp{eta};
  ProtocolSpec protocol{lp};
  SwitchMatrix sigma = switch_matrix(pg.game(), protocol, x);
  IncrementLaw nu = increment_law(x, sigma);
  // Restrict to increments staying within the face.
  std::vector<char> in_R(n, 0);
  for (int i : R) in_R[i] = 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (!in_R[i] || !in_R[j])) nu.set_move_mass(i, j, 0.0);
    }
  }

  std::vector<double> u = logit_potential_grad0(pg, eta, x, R);
  for (double& c : u) c = -c;
  HjResult out;
  out.H = log_mgf(nu, u).value;
  out.exp_H = std::exp(out.H);

  std::vector<double> F = pg.payoff(x);
  double m = F[0];
  for (double f : F) m = std::max(m, f);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n; ++k) den += std::exp((F[k] - m) / eta);
  for (int i : R) num += std::exp((F[i] - m) / eta);
  out.closed_form_ratio = num / den;
  return out;
}

/// grad_u H(x, -grad f^eta(x)) + (M^eta(F(x)) - x); vanishes at interior x.
inline std::vector<double> hfoc_residual(const PotentialGame& pg, double eta,
                                         const SimplexPoint& x) {
  const int n = x.dim();
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("hfoc_residual: x must be interior");
  }
  ProtocolSpec protocol{LogitProtocol{eta}};
  SwitchMatrix sigma = switch_matrix(pg.game(), protocol, x);
  std::vector<double> u = logit_potential_grad0(pg, eta, x);
  for (double& c : u) c = -c;
  LogMgf mgf = log_mgf(x, u, sigma);
  std::vector<double> M = logit_map(eta, pg.payoff(x));
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = mgf.grad[i] + (M[i] - x[i]);
  return r;
}

/// Exit cost to a single state: C_y = f^eta(x*) - f^eta(y).
inline double exit_cost(const PotentialGame& pg, double eta, const SimplexPoint& y,
                        const SimplexPoint& rest_point) {
  return logit_potential_value(pg, eta, rest_point) - logit_potential_value(pg, eta, y);
}

/// Boundary mesh of the l1 ball of the given radius around the center
/// (clipped to X). n = 2 yields the two endpoints; n = 3 sweeps the tangent
/// circle; higher n uses seeded random tangent directions.
inline std::vector<SimplexPoint> l1_sphere_mesh(const SimplexPoint& center, double radius,
                                                int points = 10000, std::uint64_t seed = 5) {
  const int n = center.dim();
  std::vector<SimplexPoint> mesh;
  auto push_dir = [&](std::vector<double> d) {
    d = project_tangent(std::move(d));
    double norm = l1_norm(d);
    if (norm < 1e-14) return;
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) {
      c[i] = center[i] + radius * d[i] / norm;
      if (c[i] < 0.0 || c[i] > 1.0) return;  // outside X
    }
    mesh.push_back(SimplexPoint(std::move(c)));
  };
  if (n == 2) {
    push_dir({1.0, -1.0});
    push_dir({-1.0, 1.0});
    return mesh;
  }
  if (n == 3) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int k = 0; k < points; ++k) {
      double th = kTwoPi * static_cast<double>(k) / static_cast<double>(points);
      // Orthonormal tangent basis for sum x = const.
      std::vector<double> d(3);
      d[0] = std::cos(th) / std::sqrt(2.0) + std::sin(th) / std::sqrt(6.0);
      d[1] = -std::cos(th) / std::sqrt(2.0) + std::sin(th) / std::sqrt(6.0);
      d[2] = -2.0 * std::sin(th) / std::sqrt(6.0);
      push_dir(std::move(d));
    }
    return mesh;
  }
  std::mt19937_64 rng = make_stream(seed, 0);
  std::normal_distribution<double> nd;
  for (int k = 0; k < points; ++k) {
    std::vector<double> d(n);
    for (double& v : d) v = nd(rng);
    push_dir(std::move(d));
  }
  return mesh;
}

/// C_{dO} = min over the boundary mesh of (f^eta(x*) - f^eta(y)).
inline double exit_cost_boundary(const PotentialGame& pg, double eta,
                                 const std::vector<SimplexPoint>& boundary_mesh,
                                 const SimplexPoint& rest_point) {
  if (boundary_mesh.empty()) throw std::invalid_argument("exit_cost_boundary: empty mesh");
  double best_feta = -kInf;
  for (const SimplexPoint& y : boundary_mesh) {
    best_feta = std::max(best_feta, logit_potential_value(pg, eta, y));
  }
  return logit_potential_value(pg, eta, rest_point) - best_feta;
}

struct LyapunovReport {
  bool monotone = true;
  double worst_step_drop = 0.0;       // most negative per-step change of f^eta
  double worst_drop_time = 0.0;
  double worst_identity_gap = 0.0;    // derivative identity vs finite differences
  double terminal_field_norm = 0.0;   // max over starts of |xdot|_1 at the end
  std::vector<double> terminal_values;
};

/// Along integrated logit trajectories, f^eta must ascend (within the given
/// slack per step). Also cross-checks the derivative identity
/// d/dt f^eta(x_t) = (grad0 h(y_t) - grad0 h(x_t))' (y_t - x_t),
/// y_t = M^eta(F(x_t)), against centered differences.
inline LyapunovReport lyapunov_check(const PotentialGame& pg, double eta,
                                     const std::vector<SimplexPoint>& starts, double T,
                                     double dt = 1e-4, double slack = 1e-9) {
  ProtocolSpec protocol{LogitProtocol{eta}};
  VectorField field = mean_field(pg.game(), protocol);
  LyapunovReport rep;
  const int n = pg.game().num_actions();
  for (const SimplexPoint& x0 : starts) {
    SampledPath path = integrate(field, x0, T, dt);
    std::vector<double> feta(path.size());
    for (std::size_t k = 0; k < path.size(); ++k)
      feta[k] = logit_potential_value(pg, eta, path.states[k]);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      double d = feta[k + 1] - feta[k];
      if (d < rep.worst_step_drop) {
        rep.worst_step_drop = d;
        rep.worst_drop_time = path.times[k + 1];
      }
      if (d < -slack) rep.monotone = false;
    }
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
      double fd = (feta[k + 1] - feta[k - 1]) / (path.times[k + 1] - path.times[k - 1]);
      const SimplexPoint& x = path.states[k];
      std::vector<double> y = logit_map(eta, pg.payoff(x));
      // grad0 h = P log x on the interior.
      std::vector<double> gy(n), gx(n);
      for (int i = 0; i < n; ++i) {
        gy[i] = std::log(y[i]);
        gx[i] = std::log(std::max(x[i], 1e-300));
      }
      gy = project_tangent(gy);
      gx = project_tangent(gx);
      double ident = 0.0;
      for (int i = 0; i < n; ++i) ident += (gy[i] - gx[i]) * (y[i] - x[i]);
      rep.worst_identity_gap = std::max(rep.worst_identity_gap, std::abs(fd - ident));
    }
    rep.terminal_field_norm =
        std::max(rep.terminal_field_norm, l1_norm(field.eval(path.terminal())));
    rep.terminal_values.push_back(feta.back());
  }
  return rep;
}

enum class RateCompareMode { stationary, exit_time };

struct RateCompareRow {
  long N = 0;
  int target = 0;     // index into the target list
  double rate = 0.0;  // measured decay/growth rate
  double reference = 0.0;
  double gap = 0.0;
};

struct RateCompareTable {
  std::vector<RateCompareRow> rows;
  bool gaps_decreasing(int target) const {
    double prev = kInf;
    bool any = false;
    for (const auto& r : rows) {
      if (r.target != target) continue;
      any = true;
      if (r.gap > prev + 1e-12) return false;
      prev = r.gap;
    }
    return any;
  }
};

struct RateCompareOptions {
  double delta = 0.04;        // stationary: l1 ball radius around each y
  double ball_radius = 0.1;   // exit mode: O = l1 ball of this radius at x*
  long replicas = 500;
  double cap_factor = 200.0;  // censoring horizon = cap_factor * exp(N C)
  std::uint64_t seed = 17;
  EvalMode mode = EvalMode::simple;
  int workers = 0;
};

/// Empirical decay rates against the closed-form exit costs.
/// stationary: -(1/N) log mu^N(B_delta(y)) vs C_y, exact solve (n = 2 uses
/// the log-space birth-death product). exit_time: (1/N) log(mean MC exit
/// time from the l1 ball around x*) vs C_{dO}.
inline RateCompareTable rate_compare(const PotentialGame& pg, double eta, RateCompareMode mode,
                                     const std::vector<long>& N_list,
                                     const std::vector<SimplexPoint>& targets,
                                     const RateCompareOptions& opt = {}) {
  ProtocolSpec protocol{LogitProtocol{eta}};
  const GameSpec& game = pg.game();
  const int n = game.num_actions();
  SimplexPoint rest = find_rest_point(game, LogitProtocol{eta}, SimplexPoint::uniform(n), 1e-13);
  RateCompareTable table;

  if (mode == RateCompareMode::stationary) {
    for (long N : N_list) {
      StationaryResult mu = stationary_distribution(
          game, protocol, N, n == 2 ? StationaryMethod::birth_death : StationaryMethod::exact,
          opt.mode);
      for (int t = 0; t < static_cast<int>(targets.size()); ++t) {
        const SimplexPoint& y = targets[t];
        std::vector<double> in_ball;
        for (std::size_t k = 0; k < mu.grid.size(); ++k) {
          GridState s(mu.grid.counts(k), N);
          if (l1_distance(s.to_point(), y) < opt.delta) in_ball.push_back(mu.log_mass[k]);
        }
        if (in_ball.empty()) throw std::runtime_error("rate_compare: empty ball; raise delta");
        RateCompareRow row;
        row.N = N;
        row.target = t;
        row.rate = -log_sum_exp(in_ball) / static_cast<double>(N);
        row.reference = exit_cost(pg, eta, y, rest);
        row.gap = std::abs(row.rate - row.reference);
        table.rows.push_back(row);
      }
    }
    return table;
  }

  // Exit-time mode: O is the l1 ball around the rest point.
  std::vector<SimplexPoint> sphere = l1_sphere_mesh(rest, opt.ball_radius);
  double C = exit_cost_boundary(pg, eta, sphere, rest);
  for (long N : N_list) {
    double cap = opt.cap_factor * std::exp(C * static_cast<double>(N));
    ExitProblem problem = ExitProblem::l1_ball(rest, opt.ball_radius, rest, cap);
    ExitSummary s = exit_time_mc(game, protocol, N, problem, opt.replicas,
                                 opt.seed + static_cast<std::uint64_t>(N), opt.mode, opt.workers);
    if (s.all_censored) throw std::runtime_error("rate_compare: all replicas censored");
    RateCompareRow row;
    row.N = N;
    row.target = 0;
    row.rate = s.rate;
    row.reference = C;
    row.gap = std::abs(row.rate - row.reference);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace evoldp

#endif  // EVOLDP_LOGIT_POTENTIAL_HPP
