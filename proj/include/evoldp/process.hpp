#ifndef EVOLDP_PROCESS_HPP
#define EVOLDP_PROCESS_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evoldp/numeric.hpp"
#include "evoldp/parallel.hpp"
#include "evoldp/protocols.hpp"
#include "evoldp/rng.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Probability distribution over the raw increments
/// Z = {e_j - e_i : i != j} u {0}. Atom 0 is the null increment; atom
/// 1 + i*(n-1) + (j < i ? j : j-1) is e_j - e_i. The same container holds
/// both transition laws nu(.|x) and control/tilted laws lambda.
class IncrementLaw {
 public:
  explicit IncrementLaw(int n) : n_(n), off_(n, std::vector<double>(n, 0.0)), null_(0.0) {
    if (n < 2) throw std::invalid_argument("IncrementLaw: need n >= 2");
  }

  int dim() const { return n_; }
  int atom_count() const { return n_ * (n_ - 1) + 1; }

  double null_mass() const { return null_; }
  double move_mass(int i, int j) const { return off_[i][j]; }
  void set_null_mass(double p) { null_ = p; }
  void set_move_mass(int i, int j, double p) {
    assert(i != j);
    off_[i][j] = p;
  }

  int atom_index(int i, int j) const {
    assert(i != j);
    return 1 + i * (n_ - 1) + (j < i ? j : j - 1);
  }
  /// (i, j) for a move atom; atom 0 is null.
  std::pair<int, int> atom_move(int a) const {
    assert(a >= 1 && a < atom_count());
    int i = (a - 1) / (n_ - 1);
    int r = (a - 1) % (n_ - 1);
    int j = r < i ? r : r + 1;
    return {i, j};
  }

  double atom_prob(int a) const {
    if (a == 0) return null_;
    auto [i, j] = atom_move(a);
    return off_[i][j];
  }
  void set_atom_prob(int a, double p) {
    if (a == 0) {
      null_ = p;
    } else {
      auto [i, j] = atom_move(a);
      off_[i][j] = p;
    }
  }

  /// Increment vector of an atom (zero vector for the null atom).
  std::vector<double> atom_increment(int a) const {
    std::vector<double> z(n_, 0.0);
    if (a > 0) {
      auto [i, j] = atom_move(a);
      z[i] -= 1.0;
      z[j] += 1.0;
    }
    return z;
  }

  double total_mass() const {
    double s = null_;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += off_[i][j];
    return s;
  }

  /// E zeta = sum_z z nu(z).
  std::vector<double> mean() const {
    std::vector<double> m(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i == j || off_[i][j] == 0.0) continue;
        m[i] -= off_[i][j];
        m[j] += off_[i][j];
      }
    }
    return m;
  }

  void validate(const SimplexPoint* generating_state = nullptr) const {
    double s = 0.0;
    for (int a = 0; a < atom_count(); ++a) {
      double p = atom_prob(a);
      if (!(p >= 0.0)) throw std::invalid_argument("IncrementLaw: negative mass");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("IncrementLaw: total mass != 1");
    if (generating_state) {
      for (int i = 0; i < n_; ++i) {
        if ((*generating_state)[i] > 0.0) continue;
        for (int j = 0; j < n_; ++j) {
          if (i != j && off_[i][j] != 0.0) {
            throw std::invalid_argument("IncrementLaw: mass on a move out of an unused action");
          }
        }
      }
    }
  }

  /// Draw an atom index.
  int sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double r = uni(rng);
    r -= null_;
    if (r < 0.0) return 0;
    for (int a = 1; a < atom_count(); ++a) {
      r -= atom_prob(a);
      if (r < 0.0) return a;
    }
    return 0;  // residual rounding mass goes to the null atom
  }

 private:
  int n_;
  std::vector<std::vector<double>> off_;
  double null_;
};

/// nu(.|x): mass x_i sigma_ij on e_j - e_i and sum_i x_i sigma_ii on 0.
template <typename StateLike>
IncrementLaw increment_law(const StateLike& x, const SwitchMatrix& sigma) {
  const int n = sigma.dim();
  IncrementLaw law(n);
  double null = 0.0;
  for (int i = 0; i < n; ++i) {
    double xi = x[i];
    null += xi * sigma(i, i);
    if (xi == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      law.set_move_mass(i, j, xi * sigma(i, j));
    }
  }
  law.set_null_mass(null);
  return law;
}

inline IncrementLaw increment_law(const GridState& state, const SwitchMatrix& sigma) {
  return increment_law(state.to_point(), sigma);
}

/// Time-stamped trajectory through X. Chain output carries step 1/N, ODE
/// output carries dt; interpolation between samples is piecewise affine.
struct SampledPath {
  std::vector<double> times;
  std::vector<SimplexPoint> states;
  double step = 0.0;
  bool piecewise_affine = true;

  std::size_t size() const { return times.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
  const SimplexPoint& terminal() const { return states.back(); }

  void validate() const {
    if (times.size() != states.size() || times.size() < 1)
      throw std::invalid_argument("SampledPath: times/states mismatch");
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      double dt = times[k + 1] - times[k];
      if (!(dt > 0.0)) throw std::invalid_argument("SampledPath: times not strictly increasing");
      double d = l1_distance(states[k + 1], states[k]);
      if (d > 2.0 * dt * (1.0 + 1e-6) + 1e-12) {
        throw std::invalid_argument("SampledPath: l1 speed above the feasible bound 2");
      }
    }
  }

  /// State at clock time t by piecewise-affine interpolation.
  SimplexPoint at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    double w = (t - times[k]) / (times[k + 1] - times[k]);
    std::vector<double> c(states[k].dim());
    for (int i = 0; i < states[k].dim(); ++i)
      c[i] = (1.0 - w) * states[k][i] + w * states[k + 1][i];
    return SimplexPoint(std::move(c));
  }
};

/// Reverses a path's traversal order (times re-stamped on the same grid).
inline SampledPath time_reversed(const SampledPath& path) {
  SampledPath out;
  out.step = path.step;
  out.piecewise_affine = path.piecewise_affine;
  const double t0 = path.times.front();
  const double t1 = path.times.back();
  out.times.reserve(path.size());
  out.states.reserve(path.size());
  for (std::size_t k = path.size(); k-- > 0;) {
    out.times.push_back(t0 + (t1 - path.times[k]));
    out.states.push_back(path.states[k]);
  }
  return out;
}

/// One chain trajectory: ceil(N T) periods of 1/N clock time each, increments
/// drawn from nu^N(.|x) as in the recursive definition of the process.
/// Fixed (seed, mode, inputs) replay bit-identically.
inline SampledPath simulate_path(const GameSpec& game, const ProtocolSpec& protocol,
                                 const GridState& x0, double horizon, std::uint64_t seed,
                                 EvalMode mode = EvalMode::simple) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_path: horizon must be > 0");
  const long N = x0.pop_size();
  const long steps = static_cast<long>(std::ceil(horizon * static_cast<double>(N)));
  std::mt19937_64 rng = make_stream(seed, 0);

  SampledPath path;
  path.step = 1.0 / static_cast<double>(N);
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  GridState state = x0;
  path.times.push_back(0.0);
  path.states.push_back(state.to_point());
  for (long k = 0; k < steps; ++k) {
    SwitchMatrix sigma = switch_matrix(game, protocol, state, mode);
    IncrementLaw law = increment_law(state, sigma);
    int a = law.sample(rng);
    if (a != 0) {
      auto [i, j] = law.atom_move(a);
      assert(state.count(i) >= 1);  // support of nu(.|x) stays inside Z(x)
      state = state.moved(i, j);
    }
    path.times.push_back(static_cast<double>(k + 1) / static_cast<double>(N));
    path.states.push_back(state.to_point());
  }
  return path;
}

/// Streaming variant: visit(k, state_after_step_k) after every period;
/// no path storage.
template <typename Visitor>
void simulate_steps(const GameSpec& game, const ProtocolSpec& protocol, const GridState& x0,
                    long steps, std::mt19937_64& rng, EvalMode mode, Visitor&& visit) {
  GridState state = x0;
  for (long k = 0; k < steps; ++k) {
    SwitchMatrix sigma = switch_matrix(game, protocol, state, mode);
    IncrementLaw law = increment_law(state, sigma);
    int a = law.sample(rng);
    if (a != 0) {
      auto [i, j] = law.atom_move(a);
      state = state.moved(i, j);
    }
    visit(k, state);
  }
}

enum class StationaryMethod { exact, birth_death, empirical };

struct StationaryResult {
  GridEnumeration grid;
  std::vector<double> mass;      // probability per grid index
  std::vector<double> log_mass;  // exact in log space for birth_death
  StationaryMethod method;
  double residual_l1 = 0.0;  // ||mu P - mu||_1 where applicable
};

namespace detail {

/// Transition row of the chain at a grid state: pairs (grid index, prob).
inline std::vector<std::pair<std::size_t, double>> transition_row(
    const GameSpec& game, const ProtocolSpec& protocol, const GridEnumeration& grid,
    const GridState& s, EvalMode mode) {
  SwitchMatrix sigma = switch_matrix(game, protocol, s, mode);
  IncrementLaw law = increment_law(s, sigma);
  std::vector<std::pair<std::size_t, double>> row;
  row.reserve(law.atom_count());
  double stay = law.null_mass();
  const int n = s.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double p = law.move_mass(i, j);
      if (p <= 0.0) continue;
      row.emplace_back(grid.index(s.moved(i, j).counts()), p);
    }
  }
  row.emplace_back(grid.index(s.counts()), stay);
  return row;
}

}  // namespace detail

/// Stationary distribution mu^N of the chain.
///  - exact: dense solve of mu P = mu for |X^N| <= 2000, power iteration to a
///    1e-12 residual above that (up to the state cap).
///  - birth_death: n = 2 only; the exact product-form solution computed in
///    log space, reliable even where masses underflow doubles.
///  - empirical: visit frequencies after burn-in.
inline StationaryResult stationary_distribution(const GameSpec& game, const ProtocolSpec& protocol,
                                                long N, StationaryMethod method,
                                                EvalMode mode = EvalMode::simple,
                                                long burn_in = 100000, long samples = 1000000,
                                                std::uint64_t seed = 1,
                                                std::size_t state_cap = 200000) {
  const int n = game.num_actions();
  GridEnumeration grid(n, N);
  const std::size_t size = grid.size();

  if (method == StationaryMethod::birth_death) {
    if (n != 2) throw std::invalid_argument("birth_death: requires n = 2");
    // State k = count of action 1. Detailed balance gives
    // log mu_{k+1} - log mu_k = log p_k - log q_{k+1} with p_k the up-move
    // probability at k and q_k the down-move probability at k.
    std::vector<double> logw(size, 0.0);
    for (long k = 0; k + 1 <= N; ++k) {
      GridState sk({k, N - k}, N);
      GridState sk1({k + 1, N - k - 1}, N);
      SwitchMatrix sig_k = switch_matrix(game, protocol, sk, mode);
      SwitchMatrix sig_k1 = switch_matrix(game, protocol, sk1, mode);
      double up = sk.share(1) * sig_k(1, 0);     // action-2 player switches to 1
      double down = sk1.share(0) * sig_k1(0, 1); // action-1 player switches to 2
      if (!(up > 0.0) || !(down > 0.0)) {
        throw std::runtime_error("birth_death: chain not irreducible");
      }
      logw[k + 1] = logw[k] + std::log(up) - std::log(down);
    }
    double logz = log_sum_exp(logw);
    StationaryResult out{grid, std::vector<double>(size), std::vector<double>(size), method, 0.0};
    for (std::size_t k = 0; k < size; ++k) {
      out.log_mass[k] = logw[k] - logz;
      out.mass[k] = std::exp(out.log_mass[k]);
    }
    return out;
  }

  if (method == StationaryMethod::empirical) {
    std::vector<double> counts(size, 0.0);
    std::mt19937_64 rng = make_stream(seed, 0);
    GridState s0 = GridState::nearest(SimplexPoint::uniform(n), N);
    long total = burn_in + samples;
    simulate_steps(game, protocol, s0, total, rng, mode, [&](long k, const GridState& s) {
      if (k >= burn_in) counts[grid.index(s.counts())] += 1.0;
    });
    StationaryResult out{grid, std::vector<double>(size), std::vector<double>(size), method, 0.0};
    for (std::size_t k = 0; k < size; ++k) {
      out.mass[k] = counts[k] / static_cast<double>(samples);
      out.log_mass[k] = out.mass[k] > 0.0 ? std::log(out.mass[k]) : -kInf;
    }
    return out;
  }

  if (size > state_cap) {
    throw std::invalid_argument("stationary_distribution: grid size exceeds the state cap");
  }

  // Collect sparse rows once.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(size);
  parallel_for(size, [&](std::size_t k) {
    rows[k] = detail::transition_row(game, protocol, grid, GridState(grid.counts(k), N), mode);
  });

  std::vector<double> mu(size, 1.0 / static_cast<double>(size));
  if (size <= 2000) {
    // Solve (P' - I) mu = 0 with the last equation replaced by sum mu = 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t i = 0; i < size; ++i) {
      for (auto [j, p] : rows[i]) A(static_cast<long>(j), static_cast<long>(i)) += p;
      A(static_cast<long>(i), static_cast<long>(i)) -= 1.0;
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
    for (std::size_t j = 0; j < size; ++j) A(static_cast<long>(size) - 1, static_cast<long>(j)) = 1.0;
    b(static_cast<long>(size) - 1) = 1.0;
    Eigen::VectorXd sol = A.partialPivLu().solve(b);
    for (std::size_t k = 0; k < size; ++k) mu[k] = std::max(0.0, sol(static_cast<long>(k)));
    double s = 0.0;
    for (double m : mu) s += m;
    for (double& m : mu) m /= s;
  } else {
    std::vector<double> next(size, 0.0);
    double residual = kInf;
    for (long it = 0; it < 2000000 && residual > 1e-12; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < size; ++i) {
        for (auto [j, p] : rows[i]) next[j] += mu[i] * p;
      }
      residual = 0.0;
      for (std::size_t k = 0; k < size; ++k) residual += std::abs(next[k] - mu[k]);
      mu.swap(next);
      if (it + 1 == 2000000 && residual > 1e-12) {
        throw std::runtime_error("stationary_distribution: power iteration did not converge");
      }
    }
  }

  // Stationarity residual ||mu P - mu||_1.
  std::vector<double> muP(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (auto [j, p] : rows[i]) muP[j] += mu[i] * p;
  }
  double res = 0.0;
  for (std::size_t k = 0; k < size; ++k) res += std::abs(muP[k] - mu[k]);

  StationaryResult out{grid, std::move(mu), std::vector<double>(size), StationaryMethod::exact,
                       res};
  for (std::size_t k = 0; k < size; ++k)
    out.log_mass[k] = out.mass[k] > 0.0 ? std::log(out.mass[k]) : -kInf;
  if (res > 1e-10) throw std::runtime_error("stationary_distribution: residual above 1e-10");
  return out;
}

/// Exit problem: O = {g < 0}; the chain exits when the interpolated path
/// first reaches {g >= 0}. The ball form uses the l1 norm.
struct ExitProblem {
  std::function<double(const SimplexPoint&)> g;
  SimplexPoint start;
  double cap;  // clock-time censoring horizon

  static ExitProblem l1_ball(const SimplexPoint& center, double radius, const SimplexPoint& start,
                             double cap) {
    ExitProblem p{[center, radius](const SimplexPoint& x) { return l1_distance(x, center) - radius; },
                  start, cap};
    return p;
  }
};

struct ExitSummary {
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0, q25 = 0.0, q75 = 0.0, q95 = 0.0;
  double rate = 0.0;  // (1/N) log(mean)
  long replicas = 0;
  long censored = 0;
  bool all_censored = false;
  std::vector<double> exit_times;  // uncensored replica hitting times
};

namespace detail {

/// First boundary crossing inside one interpolation step, by bisection on the
/// sign change of g along the affine segment.
inline double crossing_fraction(const std::function<double(const SimplexPoint&)>& g,
                                const SimplexPoint& a, const SimplexPoint& b) {
  double lo = 0.0, hi = 1.0;
  auto eval = [&](double s) {
    std::vector<double> c(a.dim());
    for (int i = 0; i < a.dim(); ++i) c[i] = (1.0 - s) * a[i] + s * b[i];
    return g(SimplexPoint(std::move(c)));
  };
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (eval(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

/// Monte Carlo hitting times of the boundary of O under piecewise-affine
/// interpolation. Censored replicas (cap reached) are counted separately and
/// excluded from the quantile summary.
inline ExitSummary exit_time_mc(const GameSpec& game, const ProtocolSpec& protocol, long N,
                                const ExitProblem& problem, long replicas, std::uint64_t seed,
                                EvalMode mode = EvalMode::simple, int workers = 0) {
  if (replicas < 1) throw std::invalid_argument("exit_time_mc: need replicas >= 1");
  if (!(problem.cap > 0.0) || !std::isfinite(problem.cap)) {
    throw std::invalid_argument("exit_time_mc: cap must be finite and positive");
  }
  const GridState x0 = GridState::nearest(problem.start, N);
  if (problem.g(x0.to_point()) >= 0.0) {
    // Start already on or beyond the boundary: exit time 0 for every replica.
    ExitSummary out;
    out.replicas = replicas;
    out.exit_times.assign(replicas, 0.0);
    out.rate = -kInf;
    out.all_censored = false;
    return out;
  }

  std::vector<double> taus(replicas, -1.0);  // -1 marks censored
  const long max_steps = static_cast<long>(std::ceil(problem.cap * static_cast<double>(N)));
  parallel_for(
      static_cast<std::size_t>(replicas),
      [&](std::size_t r) {
        std::mt19937_64 rng = make_stream(seed, r);
        GridState state = x0;
        SimplexPoint prev = state.to_point();
        double gprev = problem.g(prev);
        for (long k = 0; k < max_steps; ++k) {
          SwitchMatrix sigma = switch_matrix(game, protocol, state, mode);
          IncrementLaw law = increment_law(state, sigma);
          int a = law.sample(rng);
          if (a != 0) {
            auto [i, j] = law.atom_move(a);
            state = state.moved(i, j);
          }
          SimplexPoint cur = state.to_point();
          double gcur = problem.g(cur);
          if (gcur >= 0.0) {
            double frac = gprev < 0.0 ? detail::crossing_fraction(problem.g, prev, cur) : 0.0;
            taus[r] = (static_cast<double>(k) + frac) / static_cast<double>(N);
            return;
          }
          prev = cur;
          gprev = gcur;
        }
      },
      workers);

  ExitSummary out;
  out.replicas = replicas;
  for (double t : taus) {
    if (t < 0.0) {
      ++out.censored;
    } else {
      out.exit_times.push_back(t);
    }
  }
  if (out.exit_times.empty()) {
    out.all_censored = true;
    return out;
  }
  std::sort(out.exit_times.begin(), out.exit_times.end());
  KahanSum mean;
  for (double t : out.exit_times) mean.add(t);
  out.mean = mean.value() / static_cast<double>(out.exit_times.size());
  auto quantile = [&](double q) {
    double pos = q * static_cast<double>(out.exit_times.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, out.exit_times.size() - 1);
    double w = pos - static_cast<double>(lo);
    return (1.0 - w) * out.exit_times[lo] + w * out.exit_times[hi];
  };
  out.median = quantile(0.5);
  out.q05 = quantile(0.05);
  out.q25 = quantile(0.25);
  out.q75 = quantile(0.75);
  out.q95 = quantile(0.95);
  out.rate = std::log(out.mean) / static_cast<double>(N);
  return out;
}

}  // namespace evoldp

#endif  // EVOLDP_PROCESS_HPP
