#ifndef EVOLDP_DYNAMICS_HPP
#define EVOLDP_DYNAMICS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evoldp/numeric.hpp"
#include "evoldp/parallel.hpp"
#include "evoldp/process.hpp"
#include "evoldp/protocols.hpp"
#include "evoldp/rng.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Vector field on the simplex (values tangent: coordinates sum to 0).
struct VectorField {
  std::function<std::vector<double>(const SimplexPoint&)> eval;
  std::string provenance;
};

/// Mean dynamic xdot_i = sum_j x_j sigma_ji(x) - x_i. For logit protocols
/// this equals M^eta(F(x)) - x.
inline std::vector<double> mean_field_at(const GameSpec& game, const ProtocolSpec& protocol,
                                         const SimplexPoint& x) {
  SwitchMatrix sigma = switch_matrix(game, protocol, x);
  const int n = sigma.dim();
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double inflow = 0.0;
    for (int j = 0; j < n; ++j) inflow += x[j] * sigma(j, i);
    v[i] = inflow - x[i];
  }
  return v;
}

inline VectorField mean_field(const GameSpec& game, const ProtocolSpec& protocol) {
  return VectorField{
      [game, protocol](const SimplexPoint& x) { return mean_field_at(game, protocol, x); },
      "mean dynamic (" + game.variant_name() + ", " + protocol.variant_name() + ")"};
}

enum class Direction { forward, reverse };

/// Fixed-step RK4 with per-step renormalization onto the simplex (adaptive
/// stepping is deliberately not used: path costs must replay bit-for-bit).
///
/// Forward mode solves xdot = field(x) from x0. Reverse mode returns the
/// trajectory through x0 traversed against the flow: the output path phi
/// satisfies phidot = -field(phi) and ends at x0, and is produced by
/// integrating the field forward from x0 and reversing the sample order.
/// With halt_point set, integration stops early once within halt_tol (l1) of
/// it; in reverse mode the returned path then starts there.
inline SampledPath integrate(const VectorField& field, const SimplexPoint& x0, double T, double dt,
                             Direction direction = Direction::forward,
                             std::optional<SimplexPoint> halt_point = std::nullopt,
                             double halt_tol = 1e-9) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("integrate: need T > 0 and dt > 0");
  const int n = x0.dim();
  const long steps = static_cast<long>(std::ceil(T / dt - 1e-12));

  auto rk4_step = [&](const std::vector<double>& x, double h) {
    auto f = [&](const std::vector<double>& y) {
      // Clamp tiny negative overshoot before evaluating the field.
      std::vector<double> yc = y;
      double s = 0.0;
      for (double& c : yc) {
        c = std::max(0.0, c);
        s += c;
      }
      for (double& c : yc) c /= s;
      return field.eval(SimplexPoint(std::move(yc)));
    };
    std::vector<double> k1 = f(x);
    std::vector<double> t(n), k2, k3, k4;
    for (int i = 0; i < n; ++i) t[i] = x[i] + 0.5 * h * k1[i];
    k2 = f(t);
    for (int i = 0; i < n; ++i) t[i] = x[i] + 0.5 * h * k2[i];
    k3 = f(t);
    for (int i = 0; i < n; ++i) t[i] = x[i] + h * k3[i];
    k4 = f(t);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
      y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y;
  };

  SampledPath path;
  path.step = dt;
  path.times.push_back(0.0);
  path.states.push_back(x0);
  std::vector<double> x = x0.coords();
  for (long k = 0; k < steps; ++k) {
    double h = std::min(dt, T - static_cast<double>(k) * dt);
    std::vector<double> y = rk4_step(x, h);
    double s = 0.0;
    for (double& c : y) {
      c = std::max(0.0, c);
      s += c;
    }
    if (std::abs(s - 1.0) > 1e-8) {
      throw std::runtime_error("integrate: renormalization drift above 1e-8; reduce dt");
    }
    for (double& c : y) c /= s;
    x = y;
    path.times.push_back(std::min(T, static_cast<double>(k + 1) * dt));
    path.states.push_back(SimplexPoint(x));
    if (halt_point && l1_distance(path.states.back(), *halt_point) <= halt_tol) break;
  }
  if (direction == Direction::reverse) return time_reversed(path);
  return path;
}

/// Damped fixed-point iteration x <- (1 - omega) x + omega M^eta(F(x)) for
/// the logit rest point x = M^eta(F(x)).
struct RestPointError : std::runtime_error {
  RestPointError(const std::string& what, SimplexPoint iterate)
      : std::runtime_error(what), last_iterate(std::move(iterate)) {}
  SimplexPoint last_iterate;
};

inline SimplexPoint find_rest_point(const GameSpec& game, const LogitProtocol& protocol,
                                    const SimplexPoint& x_init, double tol = 1e-12,
                                    double omega = 0.5, long max_iter = 100000) {
  const int n = x_init.dim();
  std::vector<double> x = x_init.coords();
  auto fixed_point_gap = [&](const std::vector<double>& y, std::vector<double>& m) {
    m = logit_map(protocol.eta, payoff_limit(game, SimplexPoint(y)));
    double gap = 0.0;
    for (int i = 0; i < n; ++i) gap += std::abs(y[i] - m[i]);
    return gap;
  };
  double om = omega;
  std::vector<double> m(n), m_try(n), x_try(n);
  double gap = fixed_point_gap(x, m);
  for (long it = 0; it < max_iter; ++it) {
    if (gap <= tol) return SimplexPoint(std::move(x));
    // The undamped map can oscillate (sharp logit response); halve the
    // damping until the step shrinks the fixed-point gap.
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (int i = 0; i < n; ++i) x_try[i] = (1.0 - om) * x[i] + om * m[i];
      double gap_try = fixed_point_gap(x_try, m_try);
      if (gap_try < gap) {
        x = x_try;
        m = m_try;
        gap = gap_try;
        om = std::min(omega, om * 1.5);
        accepted = true;
        break;
      }
      om *= 0.5;
    }
    if (!accepted) {
      throw RestPointError("find_rest_point: stalled before reaching the tolerance",
                           SimplexPoint(std::move(x)));
    }
  }
  throw RestPointError("find_rest_point: no convergence within max iterations",
                       SimplexPoint(std::move(x)));
}

/// One row of a deterministic-approximation experiment.
struct DetApproxRow {
  long N = 0;
  double eps = 0.0;
  long replicas = 0;
  long exceedances = 0;
  double frequency = 0.0;
  double median_sup = 0.0;  // median over replicas of sup_t |Xhat - x_t|_1
};

struct DetApproxTable {
  std::vector<DetApproxRow> rows;
  /// log-frequency vs N fit (computed over eps-groups with positive counts).
  LinearFit log_freq_fit(double eps) const {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      if (r.eps == eps && r.exceedances > 0) {
        xs.push_back(static_cast<double>(r.N));
        ys.push_back(std::log(r.frequency));
      }
    }
    return fit_line(xs, ys);
  }
};

/// Frequencies of sup_{t <= T} |Xhat^N_t - x_t|_1 >= eps across replicas,
/// with the ODE solution from the same initial condition as reference.
inline DetApproxTable det_approx_experiment(const GameSpec& game, const ProtocolSpec& protocol,
                                            const SimplexPoint& x0, double T,
                                            const std::vector<long>& N_list, long replicas,
                                            const std::vector<double>& eps_list,
                                            std::uint64_t seed, EvalMode mode = EvalMode::simple,
                                            int workers = 0) {
  DetApproxTable table;
  VectorField field = mean_field(game, protocol);
  for (long N : N_list) {
    const GridState start = GridState::nearest(x0, N);
    // Reference solution sampled on the chain's time grid.
    const double dt = 1.0 / static_cast<double>(N);
    SampledPath ode = integrate(field, start.to_point(), T, std::min(dt, 1e-2));
    const long steps = static_cast<long>(std::ceil(T * static_cast<double>(N)));
    std::vector<double> sup(replicas, 0.0);
    parallel_for(
        static_cast<std::size_t>(replicas),
        [&](std::size_t r) {
          std::mt19937_64 rng = make_stream(seed ^ (0x9e37u + static_cast<std::uint64_t>(N)), r);
          double worst = 0.0;
          simulate_steps(game, protocol, start, steps, rng, mode,
                         [&](long k, const GridState& s) {
                           double t = static_cast<double>(k + 1) * dt;
                           worst = std::max(worst, l1_distance(s.to_point(), ode.at(t)));
                         });
          sup[r] = worst;
        },
        workers);
    std::vector<double> sorted = sup;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    for (double eps : eps_list) {
      DetApproxRow row;
      row.N = N;
      row.eps = eps;
      row.replicas = replicas;
      for (double s : sup)
        if (s >= eps) ++row.exceedances;
      row.frequency = static_cast<double>(row.exceedances) / static_cast<double>(replicas);
      row.median_sup = median;
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace evoldp

#endif  // EVOLDP_DYNAMICS_HPP
