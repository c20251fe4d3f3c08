#ifndef EVOLDP_CONTROL_HPP
#define EVOLDP_CONTROL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evoldp/dynamics.hpp"
#include "evoldp/largedev.hpp"
#include "evoldp/numeric.hpp"
#include "evoldp/process.hpp"
#include "evoldp/protocols.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Bounded continuous function of the terminal state only. Restricting to
/// terminal dependence keeps the dynamic program on states instead of
/// histories.
struct TerminalObjective {
  std::function<double(const SimplexPoint&)> h;
  std::string description;

  static TerminalObjective squared_distance(const SimplexPoint& target) {
    return TerminalObjective{[target](const SimplexPoint& x) {
                               double s = 0.0;
                               for (int i = 0; i < x.dim(); ++i)
                                 s += (x[i] - target[i]) * (x[i] - target[i]);
                               return s;
                             },
                             "squared distance to target"};
  }
};

struct TiltedMinimizer {
  double value = 0.0;           // -log sum_z e^{-gamma(z)} pi(z)
  std::vector<double> lambda;   // tilted law over atoms
  double identity_gap = 0.0;    // |value - (R(lambda||pi) + sum gamma lambda)|
};

/// The variational representation
///   -log sum_z e^{-gamma(z)} pi(z) = min_lambda ( R(lambda||pi) + <gamma, lambda> ),
/// minimized at lambda*(z) = pi(z) e^{-gamma(z)} / sum. gamma may be +inf off
/// a restricted support.
inline TiltedMinimizer tilted_minimizer(const IncrementLaw& pi, const std::vector<double>& gamma) {
  const int A = pi.atom_count();
  if (static_cast<int>(gamma.size()) != A)
    throw std::invalid_argument("tilted_minimizer: gamma size mismatch");
  std::vector<double> score(A, -kInf);
  double m = -kInf;
  for (int a = 0; a < A; ++a) {
    double p = pi.atom_prob(a);
    if (p <= 0.0 || gamma[a] == kInf) continue;
    if (!(gamma[a] > -kInf)) throw std::invalid_argument("tilted_minimizer: gamma must be > -inf");
    score[a] = -gamma[a] + std::log(p);
    m = std::max(m, score[a]);
  }
  TiltedMinimizer out;
  out.lambda.assign(A, 0.0);
  if (m == -kInf) {
    out.value = kInf;
    return out;
  }
  double total = 0.0;
  for (int a = 0; a < A; ++a) {
    if (score[a] == -kInf) continue;
    out.lambda[a] = std::exp(score[a] - m);
    total += out.lambda[a];
  }
  out.value = -(m + std::log(total));
  double check = 0.0;
  for (int a = 0; a < A; ++a) {
    if (out.lambda[a] == 0.0) continue;
    out.lambda[a] /= total;
    check += out.lambda[a] * std::log(out.lambda[a] / pi.atom_prob(a));
    check += out.lambda[a] * gamma[a];
  }
  out.identity_gap = std::abs(check - out.value);
  if (out.identity_gap > 1e-10) {
    throw std::logic_error("tilted_minimizer: variational identity violated");
  }
  return out;
}

struct LaplaceDpResult {
  double value = 0.0;  // V^N(x0)
  /// Optimal tilted controls lambda*_k(.|state); controls[k][state index] is
  /// a distribution over increment-law atoms. Filled when requested.
  std::vector<std::vector<std::vector<double>>> controls;
  GridEnumeration grid;
};

namespace detail {

struct DpChain {
  GridEnumeration grid;
  std::vector<IncrementLaw> laws;                 // nu^N(.|x) per grid state
  std::vector<std::vector<std::size_t>> targets;  // successor index per atom
};

inline DpChain build_dp_chain(const GameSpec& game, const ProtocolSpec& protocol, long N,
                              EvalMode mode, std::size_t state_cap) {
  const int n = game.num_actions();
  GridEnumeration grid(n, N);
  if (grid.size() > state_cap) {
    throw std::invalid_argument("laplace_dp: grid size exceeds the state cap");
  }
  DpChain chain{grid, {}, {}};
  chain.laws.reserve(grid.size());
  chain.targets.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    GridState s(grid.counts(k), N);
    SwitchMatrix sigma = switch_matrix(game, protocol, s, mode);
    IncrementLaw law = increment_law(s, sigma);
    std::vector<std::size_t> tgt(law.atom_count(), k);
    for (int a = 1; a < law.atom_count(); ++a) {
      if (law.atom_prob(a) <= 0.0) continue;
      auto [i, j] = law.atom_move(a);
      tgt[a] = grid.index(s.moved(i, j).counts());
    }
    chain.laws.push_back(std::move(law));
    chain.targets.push_back(std::move(tgt));
  }
  return chain;
}

}  // namespace detail

/// Backward dynamic-programming evaluation of the Laplace value
/// V^N(x0) = -(1/N) log E[exp(-N h(X^N_N))] over N periods (unit clock time),
/// via the functional equation with per-stage log-sum-exp. Optionally emits
/// the optimal tilted control at every (stage, state).
inline LaplaceDpResult laplace_dp_value(const GameSpec& game, const ProtocolSpec& protocol, long N,
                                        const TerminalObjective& h, const GridState& x0,
                                        bool emit_controls = false,
                                        EvalMode mode = EvalMode::simple,
                                        std::size_t state_cap = 200000) {
  detail::DpChain chain = detail::build_dp_chain(game, protocol, N, mode, state_cap);
  const std::size_t S = chain.grid.size();
  const double Nd = static_cast<double>(N);

  std::vector<double> v(S);
  for (std::size_t k = 0; k < S; ++k)
    v[k] = h.h(GridState(chain.grid.counts(k), N).to_point());

  LaplaceDpResult out{0.0, {}, chain.grid};
  if (emit_controls) out.controls.resize(N);

  std::vector<double> next(S, 0.0);
  for (long stage = N - 1; stage >= 0; --stage) {
    if (emit_controls) out.controls[stage].resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      const IncrementLaw& law = chain.laws[s];
      const int A = law.atom_count();
      double m = -kInf;
      std::vector<double> sc(A, -kInf);
      for (int a = 0; a < A; ++a) {
        double p = law.atom_prob(a);
        if (p <= 0.0) continue;
        sc[a] = -Nd * v[chain.targets[s][a]] + std::log(p);
        m = std::max(m, sc[a]);
      }
      double total = 0.0;
      for (int a = 0; a < A; ++a)
        if (sc[a] > -kInf) total += std::exp(sc[a] - m);
      next[s] = -(m + std::log(total)) / Nd;
      if (emit_controls) {
        std::vector<double> lam(A, 0.0);
        for (int a = 0; a < A; ++a)
          if (sc[a] > -kInf) lam[a] = std::exp(sc[a] - m) / total;
        out.controls[stage][s] = std::move(lam);
      }
    }
    v.swap(next);
  }
  out.value = v[chain.grid.index(x0.counts())];
  return out;
}

/// Direct route for the same quantity: forward evolution of the state
/// distribution in probability space, then one max-shifted expectation of
/// exp(-N h). Exact linear algebra on a different evaluation order than the
/// backward recursion; the two agree to rounding.
inline double laplace_direct_value(const GameSpec& game, const ProtocolSpec& protocol, long N,
                                   const TerminalObjective& h, const GridState& x0,
                                   EvalMode mode = EvalMode::simple,
                                   std::size_t state_cap = 200000) {
  detail::DpChain chain = detail::build_dp_chain(game, protocol, N, mode, state_cap);
  const std::size_t S = chain.grid.size();
  std::vector<double> mu(S, 0.0), next(S, 0.0);
  mu[chain.grid.index(x0.counts())] = 1.0;
  for (long stage = 0; stage < N; ++stage) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (mu[s] == 0.0) continue;
      const IncrementLaw& law = chain.laws[s];
      for (int a = 0; a < law.atom_count(); ++a) {
        double p = law.atom_prob(a);
        if (p > 0.0) next[chain.targets[s][a]] += mu[s] * p;
      }
    }
    mu.swap(next);
  }
  std::vector<double> hv(S);
  double hmin = kInf;
  for (std::size_t s = 0; s < S; ++s) {
    hv[s] = h.h(GridState(chain.grid.counts(s), N).to_point());
    hmin = std::min(hmin, hv[s]);
  }
  const double Nd = static_cast<double>(N);
  KahanSum acc;
  for (std::size_t s = 0; s < S; ++s) {
    if (mu[s] > 0.0) acc.add(mu[s] * std::exp(-Nd * (hv[s] - hmin)));
  }
  return hmin - std::log(acc.value()) / Nd;
}

/// Plugs emitted controls into the sequence-form objective
/// E[ (1/N) sum_k R(lambda*_k || nu(.|xi_k)) + h(xi_N) ] by exact forward
/// evaluation of the controlled chain. Reproduces V^N.
inline double controlled_objective_value(const GameSpec& game, const ProtocolSpec& protocol, long N,
                                         const TerminalObjective& h, const GridState& x0,
                                         const LaplaceDpResult& dp,
                                         EvalMode mode = EvalMode::simple) {
  if (dp.controls.empty()) throw std::invalid_argument("controlled_objective_value: no controls");
  detail::DpChain chain = detail::build_dp_chain(game, protocol, N, mode, 200000);
  const std::size_t S = chain.grid.size();
  std::vector<double> mu(S, 0.0), next(S, 0.0);
  mu[chain.grid.index(x0.counts())] = 1.0;
  KahanSum running;
  const double Nd = static_cast<double>(N);
  for (long stage = 0; stage < N; ++stage) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (mu[s] == 0.0) continue;
      const IncrementLaw& law = chain.laws[s];
      const std::vector<double>& lam = dp.controls[stage][s];
      double re = 0.0;
      for (int a = 0; a < law.atom_count(); ++a) {
        if (lam[a] <= 0.0) continue;
        re += lam[a] * std::log(lam[a] / law.atom_prob(a));
        next[chain.targets[s][a]] += mu[s] * lam[a];
      }
      running.add(mu[s] * re / Nd);
    }
    mu.swap(next);
  }
  KahanSum terminal;
  for (std::size_t s = 0; s < S; ++s) {
    if (mu[s] > 0.0)
      terminal.add(mu[s] * h.h(GridState(chain.grid.counts(s), N).to_point()));
  }
  return running.value() + terminal.value();
}

struct VariationalResult {
  double value = kInf;
  SampledPath path;
};

struct VariationalOptions {
  int knots = 16;      // free knots (path has knots + 1 samples over [0,1])
  int restarts = 3;    // reverse-flow seeds toward low-h terminal states
  int sweeps = 60;     // coordinate-descent passes
  std::uint64_t seed = 23;
  CramerOptions cramer;
};

/// Local minimization of c_x(phi) + h(phi_1) over piecewise-linear paths on
/// [0,1] with free knots, by cyclic coordinate descent over knot coordinates
/// (pairwise mass exchanges, golden-section line search). Seeds include the
/// mean-dynamic solution and reverse-time flows into candidate terminal
/// states. Reports the best local value found; no global claim.
inline VariationalResult laplace_variational(const GameSpec& game, const ProtocolSpec& protocol,
                                             const TerminalObjective& h, const SimplexPoint& x0,
                                             const VariationalOptions& opt = {}) {
  const int n = game.num_actions();
  const int K = opt.knots;
  if (K < 2) throw std::invalid_argument("laplace_variational: need K >= 2");
  const double dt = 1.0 / static_cast<double>(K);

  auto segment_cost = [&](const SimplexPoint& a, const SimplexPoint& b) {
    std::vector<double> z(n);
    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i) {
      z[i] = (b[i] - a[i]) / dt;
      mid[i] = 0.5 * (a[i] + b[i]);
    }
    SimplexPoint xm{std::move(mid)};
    CramerResult r = cramer_transform(xm, project_tangent(z), switch_matrix(game, protocol, xm),
                                      CramerMethod::dual, opt.cramer);
    return r.infeasible ? kInf : r.value * dt;
  };
  auto objective = [&](const std::vector<SimplexPoint>& knots) {
    double v = 0.0;
    for (int k = 0; k + 1 <= K; ++k) {
      double c = segment_cost(knots[k], knots[k + 1]);
      if (c == kInf) return kInf;
      v += c;
    }
    return v + h.h(knots[K]);
  };
  // Reported values use a common 128-point quadrature of the polyline, so
  // values at different knot counts are directly comparable (a refined knot
  // set evaluating the same polyline reports the same number).
  auto fine_value = [&](const std::vector<SimplexPoint>& knots) {
    const int m = std::max(1, 128 / K);
    double v = 0.0;
    for (int k = 0; k + 1 <= K; ++k) {
      std::vector<double> z(n);
      for (int i = 0; i < n; ++i) z[i] = (knots[k + 1][i] - knots[k][i]) / dt;
      z = project_tangent(z);
      for (int piece = 0; piece < m; ++piece) {
        double w = (static_cast<double>(piece) + 0.5) / static_cast<double>(m);
        std::vector<double> mid(n);
        for (int i = 0; i < n; ++i) mid[i] = (1.0 - w) * knots[k][i] + w * knots[k + 1][i];
        SimplexPoint xm{std::move(mid)};
        CramerResult r =
            cramer_transform(xm, z, switch_matrix(game, protocol, xm), CramerMethod::dual,
                             opt.cramer);
        if (r.infeasible) return kInf;
        v += r.value * dt / static_cast<double>(m);
      }
    }
    return v + h.h(knots[K]);
  };

  auto optimize_from = [&](std::vector<SimplexPoint> knots) {
    double best = objective(knots);
    for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
      double improved = 0.0;
      for (int k = 1; k <= K; ++k) {
        for (int a = 0; a < n; ++a) {
          for (int b = a + 1; b < n; ++b) {
            // Move mass t from coordinate b to a of knot k.
            const SimplexPoint cur = knots[k];
            double lo = -cur[a], hi = cur[b];
            if (hi - lo < 1e-12) continue;
            auto knot_at = [&](double t) {
              std::vector<double> c = cur.coords();
              c[a] += t;
              c[b] -= t;
              return SimplexPoint(std::move(c));
            };
            auto local = [&](double t) {
              SimplexPoint cand = knot_at(t);
              double v = segment_cost(knots[k - 1], cand);
              if (v == kInf) return kInf;
              if (k < K) {
                double v2 = segment_cost(cand, knots[k + 1]);
                if (v2 == kInf) return kInf;
                v += v2;
              } else {
                v += h.h(cand);
              }
              return v;
            };
            double base = local(0.0);
            if (base == kInf) continue;
            double t_best = golden_section_minimize(local, lo, hi, 1e-11);
            if (local(t_best) < base - 1e-13) {
              improved += base - local(t_best);
              knots[k] = knot_at(t_best);
            }
          }
        }
      }
      if (improved < 1e-12) break;
    }
    return std::make_pair(objective(knots), knots);
  };

  // Resampling by l1 arc length keeps seed segment speeds balanced (and
  // hence feasible) even when the source flow crawls near a rest point.
  auto arc_resample = [&](const SampledPath& src, int from_knot, std::vector<SimplexPoint>& out) {
    std::vector<double> cum(src.size(), 0.0);
    for (std::size_t k = 1; k < src.size(); ++k)
      cum[k] = cum[k - 1] + l1_distance(src.states[k], src.states[k - 1]);
    double total = cum.back();
    int count = K - from_knot;
    for (int k = 1; k <= count; ++k) {
      double want = total * static_cast<double>(k) / static_cast<double>(count);
      std::size_t lo = std::lower_bound(cum.begin(), cum.end(), want) - cum.begin();
      lo = std::min(lo, src.size() - 1);
      out.push_back(src.states[lo]);
    }
  };

  std::vector<std::vector<SimplexPoint>> seeds;
  // Seed 1: the mean-dynamic solution sampled at the knots (zero running cost).
  VectorField field = mean_field(game, protocol);
  SampledPath flow = integrate(field, x0, 1.0, 1e-3);
  {
    std::vector<SimplexPoint> s;
    for (int k = 0; k <= K; ++k) s.push_back(flow.at(static_cast<double>(k) * dt));
    seeds.push_back(std::move(s));
  }
  // Seeds 2..: mean flow for the first half, then the time-reversed flow
  // descending into a candidate terminal state y drawn from low values of h.
  std::vector<std::pair<double, SimplexPoint>> cand;
  for (const SimplexPoint& y : simplex_mesh(n, 24)) {
    if (y.min_coord() <= 1e-9) continue;
    cand.emplace_back(h.h(y), y);
  }
  std::sort(cand.begin(), cand.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });
  for (int r = 0; r < opt.restarts && r < static_cast<int>(cand.size()); ++r) {
    const SimplexPoint& y = cand[r].second;
    SampledPath into_y = integrate(field, y, 40.0, 1e-3, Direction::reverse, flow.terminal());
    std::vector<SimplexPoint> s;
    const int half = K / 2;
    for (int k = 0; k <= half; ++k) s.push_back(flow.at(static_cast<double>(k) * dt));
    arc_resample(into_y, half, s);
    seeds.push_back(std::move(s));
  }
  // Coarse-to-fine: the refined optimum at K/2 knots is feasible at K knots,
  // so the value cannot increase with K.
  if (K >= 4 && K % 2 == 0) {
    VariationalOptions coarse = opt;
    coarse.knots = K / 2;
    VariationalResult half = laplace_variational(game, protocol, h, x0, coarse);
    if (half.value < kInf) {
      std::vector<SimplexPoint> s;
      for (int k = 0; k <= K; ++k)
        s.push_back(half.path.at(static_cast<double>(k) * dt));
      seeds.push_back(std::move(s));
    }
  }

  VariationalResult out;
  auto consider = [&](const std::vector<SimplexPoint>& knots) {
    double value = fine_value(knots);
    if (value < out.value) {
      out.value = value;
      SampledPath p;
      p.step = dt;
      for (int k = 0; k <= K; ++k) {
        p.times.push_back(static_cast<double>(k) * dt);
        p.states.push_back(knots[k]);
      }
      out.path = std::move(p);
    }
  };
  for (auto& seed : seeds) {
    consider(seed);  // floor: descent decisions use the knot-level quadrature
    auto [value, knots] = optimize_from(std::move(seed));
    (void)value;
    consider(knots);
  }
  return out;
}

}  // namespace evoldp

#endif  // EVOLDP_CONTROL_HPP
