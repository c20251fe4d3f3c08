#ifndef EVOLDP_LARGEDEV_HPP
#define EVOLDP_LARGEDEV_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evoldp/dynamics.hpp"
#include "evoldp/numeric.hpp"
#include "evoldp/process.hpp"
#include "evoldp/protocols.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// R(lambda || pi) = sum_z lambda(z) log(lambda(z)/pi(z)), with
/// 0 log 0 = 0 log(0/0) = 0 and +inf when support(lambda) is not contained
/// in support(pi).
inline double relative_entropy(const IncrementLaw& lambda, const IncrementLaw& pi) {
  if (lambda.dim() != pi.dim()) throw std::invalid_argument("relative_entropy: dim mismatch");
  double r = 0.0;
  for (int a = 0; a < lambda.atom_count(); ++a) {
    double l = lambda.atom_prob(a);
    if (l <= 0.0) continue;
    double p = pi.atom_prob(a);
    if (p <= 0.0) return kInf;
    r += l * std::log(l / p);
  }
  return std::max(0.0, r);
}

struct LogMgf {
  double value = 0.0;
  std::vector<double> grad;          // tilted mean
  std::vector<double> tilted_probs;  // over atoms, same layout as IncrementLaw
};

/// H(x, u) = log sum_z e^<u,z> nu(z|x) and its u-gradient, max-subtracted.
/// H(x, u) = H(x, Pu) since every increment sums to zero.
inline LogMgf log_mgf(const IncrementLaw& nu, const std::vector<double>& u) {
  const int n = nu.dim();
  if (static_cast<int>(u.size()) != n) throw std::invalid_argument("log_mgf: dim mismatch");
  const int A = nu.atom_count();
  std::vector<double> score(A, -kInf);
  double m = -kInf;
  for (int a = 0; a < A; ++a) {
    if (nu.atom_prob(a) <= 0.0) continue;
    double s = 0.0;
    if (a > 0) {
      auto [i, j] = nu.atom_move(a);
      s = u[j] - u[i];
    }
    score[a] = s + std::log(nu.atom_prob(a));
    m = std::max(m, score[a]);
  }
  LogMgf out;
  out.grad.assign(n, 0.0);
  out.tilted_probs.assign(A, 0.0);
  double total = 0.0;
  for (int a = 0; a < A; ++a) {
    if (score[a] == -kInf) continue;
    out.tilted_probs[a] = std::exp(score[a] - m);
    total += out.tilted_probs[a];
  }
  out.value = m + std::log(total);
  for (int a = 0; a < A; ++a) {
    out.tilted_probs[a] /= total;
    if (a == 0 || out.tilted_probs[a] == 0.0) continue;
    auto [i, j] = nu.atom_move(a);
    out.grad[i] -= out.tilted_probs[a];
    out.grad[j] += out.tilted_probs[a];
  }
  return out;
}

inline LogMgf log_mgf(const SimplexPoint& x, const std::vector<double>& u,
                      const SwitchMatrix& sigma) {
  return log_mgf(increment_law(x, sigma), u);
}

/// Convex-hull membership of a displacement in Z(x) = conv(Z(x)):
/// z must sum to zero, satisfy z_i >= 0 wherever x_i = 0, and move at most
/// total mass one: sum_i max(-z_i, 0) <= 1.
struct FeasibilityCheck {
  bool feasible = true;
  std::vector<double> certificate;  // separating direction when infeasible
};

inline FeasibilityCheck check_direction_feasible(const SimplexPoint& x,
                                                 const std::vector<double>& z,
                                                 double tol = 1e-12) {
  const int n = x.dim();
  FeasibilityCheck out;
  double neg = 0.0;
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0.0 && z[i] < -tol) {
      out.feasible = false;
      out.certificate.assign(n, 0.0);
      out.certificate[i] = -1.0;
      return out;
    }
    neg += std::max(-z[i], 0.0);
  }
  if (neg > 1.0 + tol) {
    out.feasible = false;
    out.certificate.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (z[i] < 0.0) out.certificate[i] = -1.0;
    out.certificate = project_tangent(out.certificate);
  }
  return out;
}

enum class CramerMethod { dual, primal_oracle };

/// Value of L(x, z) together with the optimizing objects: the dual tilt u*
/// and the unique minimizing distribution lambda* (the exponentially tilted
/// law) when the value is finite.
struct CramerResult {
  double value = 0.0;
  std::vector<double> tilt;
  std::optional<IncrementLaw> minimizer;
  CramerMethod method = CramerMethod::dual;
  long iterations = 0;
  double residual = 0.0;  // dual: projected gradient norm; primal: constraint gap
  bool infeasible = false;
  std::vector<double> certificate;
  std::string diagnostic;
};

struct CramerOptions {
  long max_iter = 2000;
  double grad_tol = 1e-10;
  double tilt_norm_cap = 1e3;  // classification threshold for divergence
  long primal_outer = 120;
  long primal_inner = 20000;
  double primal_rho0 = 50.0;  // kept moderate: the multiplier updates do the
                              // work, large penalties wreck the inner
                              // conditioning of projected gradient
};

namespace detail {

inline IncrementLaw tilted_law(const IncrementLaw& nu, const std::vector<double>& probs) {
  IncrementLaw lam(nu.dim());
  for (int a = 0; a < nu.atom_count(); ++a) lam.set_atom_prob(a, probs[a]);
  return lam;
}

/// R(lambda_z || nu) for the explicit transport law with mean z
/// (lambda_ij proportional to (-z_i)_+ (z_j)_+, remainder on the null atom).
/// A certified upper bound for L(x, z) when z is feasible; +inf otherwise.
inline double transport_upper_bound(const IncrementLaw& nu, const std::vector<double>& z) {
  const int n = nu.dim();
  double pos = 0.0;
  for (int i = 0; i < n; ++i) pos += std::max(z[i], 0.0);
  if (pos > 1.0 + 1e-12) return kInf;
  double r = 0.0;
  if (pos > 0.0) {
    for (int i = 0; i < n; ++i) {
      if (!(z[i] < 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        if (!(z[j] > 0.0)) continue;
        double mass = (-z[i]) * z[j] / pos;
        double base = nu.move_mass(i, j);
        if (base <= 0.0) return kInf;
        r += mass * std::log(mass / base);
      }
    }
  }
  double null_mass = 1.0 - pos;
  if (null_mass > 0.0) {
    if (nu.null_mass() <= 0.0) return kInf;
    r += null_mass * std::log(null_mass / nu.null_mass());
  }
  return std::max(0.0, r);
}

/// Newton ascent of g(u) = <u,z> - H(x,u) over R^n_0. The Hessian of H is
/// the tilted covariance; it is singular along the all-ones direction, which
/// is patched by a rank-one 11'/n term (the solution stays tangent because
/// the right-hand side is).
inline CramerResult cramer_dual(const IncrementLaw& nu, const std::vector<double>& z,
                                const CramerOptions& opt) {
  const int n = nu.dim();
  CramerResult res;
  res.method = CramerMethod::dual;
  // Any dual value above the transport bound certifies infeasibility.
  const double upper = transport_upper_bound(nu, z);
  std::vector<double> u(n, 0.0);
  double g_prev = -kInf;

  auto objective = [&](const std::vector<double>& uu, LogMgf& mgf) {
    mgf = log_mgf(nu, uu);
    return dot(uu, z) - mgf.value;
  };

  auto newton_direction = [&](const LogMgf& m, const std::vector<double>& grad) {
    // Tilted covariance sum_a w_a z_a z_a' - mean mean', regularized and
    // patched along the all-ones null direction.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < nu.atom_count(); ++a) {
      double w = m.tilted_probs[a];
      if (w <= 0.0 || a == 0) continue;
      auto [i, j] = nu.atom_move(a);
      C(i, i) += w;
      C(j, j) += w;
      C(i, j) -= w;
      C(j, i) -= w;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) -= m.grad[i] * m.grad[j];
    for (int i = 0; i < n; ++i) C(i, i) += 1e-12;
    C.array() += 1.0 / static_cast<double>(n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = grad[i];
    return Eigen::VectorXd(C.ldlt().solve(rhs));
  };
  auto gradient_at = [&](const LogMgf& m) {
    std::vector<double> grad(n);
    for (int i = 0; i < n; ++i) grad[i] = z[i] - m.grad[i];
    return project_tangent(grad);
  };

  LogMgf mgf;
  double g = objective(u, mgf);
  for (long it = 0; it < opt.max_iter; ++it) {
    std::vector<double> grad = gradient_at(mgf);
    double gnorm = std::sqrt(dot(grad, grad));
    res.iterations = it;
    res.residual = gnorm;
    if (gnorm <= opt.grad_tol) {
      res.value = std::max(0.0, g);
      res.tilt = project_tangent(u);
      res.minimizer = tilted_law(nu, mgf.tilted_probs);
      return res;
    }
    double unorm = std::sqrt(dot(u, u));
    // For feasible z the dual value never exceeds the transport bound, so
    // crossing it certifies z outside Z(x). The norm test is the fallback
    // when no transport law exists to bound against.
    bool certified = g > upper + 1e-9;
    bool norm_blowup = upper == kInf && unorm > opt.tilt_norm_cap && g > g_prev;
    if (certified || norm_blowup) {
      res.infeasible = true;
      res.value = kInf;
      res.tilt = project_tangent(u);
      res.diagnostic = certified
                           ? "dual value exceeded the feasible transport bound"
                           : "dual norm " + std::to_string(unorm) + " with value still rising";
      res.certificate = project_tangent(u);
      double cn = std::sqrt(dot(res.certificate, res.certificate));
      if (cn > 0) {
        for (double& c : res.certificate) c /= cn;
      }
      return res;
    }
    g_prev = g;

    Eigen::VectorXd d = newton_direction(mgf, grad);
    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += grad[i] * d(i);
    if (!(slope > 0.0)) {  // fall back to steepest ascent
      for (int i = 0; i < n; ++i) d(i) = grad[i];
      slope = gnorm * gnorm;
    }
    // The Newton decrement bounds the remaining value gap. Once that is
    // below rounding noise the value is final, but undamped Newton steps
    // still shrink the gradient (and with it the minimizer's mean error)
    // toward the floating-point floor.
    if (slope <= 1e-17 * (1.0 + std::abs(g))) {
      double best_gnorm = gnorm;
      std::vector<double> u_best = u;
      LogMgf mgf_best = mgf;
      for (int polish = 0; polish < 60; ++polish) {
        for (int i = 0; i < n; ++i) u[i] += d(i);
        mgf = log_mgf(nu, u);
        std::vector<double> pgrad = gradient_at(mgf);
        double pnorm = std::sqrt(dot(pgrad, pgrad));
        if (pnorm < best_gnorm) {
          best_gnorm = pnorm;
          u_best = u;
          mgf_best = mgf;
        }
        if (pnorm <= opt.grad_tol || pnorm > 0.5 * best_gnorm) break;
        d = newton_direction(mgf, pgrad);
      }
      res.residual = best_gnorm;
      res.value = std::max(0.0, dot(u_best, z) - mgf_best.value);
      res.tilt = project_tangent(u_best);
      res.minimizer = tilted_law(nu, mgf_best.tilted_probs);
      return res;
    }
    double t = 1.0;
    std::vector<double> u_try(n);
    LogMgf mgf_try;
    for (int bt = 0; bt < 80; ++bt) {
      for (int i = 0; i < n; ++i) u_try[i] = u[i] + t * d(i);
      double g_try = objective(u_try, mgf_try);
      if (g_try >= g + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    u = u_try;
    mgf = mgf_try;
    g = dot(u, z) - mgf.value;
  }
  // Ran out of iterations: report the best dual value found (a valid lower
  // bound for L) with its residual.
  res.value = std::max(0.0, g);
  res.tilt = project_tangent(u);
  res.minimizer = tilted_law(nu, mgf.tilted_probs);
  res.diagnostic = "dual: max iterations reached";
  return res;
}

/// Independent primal route: augmented-Lagrangian minimization of
/// R(lambda||nu) subject to mean(lambda) = z, by Euclidean projected
/// gradient on the probability simplex over the atoms. Deliberately slow
/// and structurally unrelated to the dual Newton path; test oracle only.
inline CramerResult cramer_primal(const IncrementLaw& nu, const std::vector<double>& z,
                                  const CramerOptions& opt) {
  const int n = nu.dim();
  const int A = nu.atom_count();
  CramerResult res;
  res.method = CramerMethod::primal_oracle;

  std::vector<int> sup;
  for (int a = 0; a < A; ++a)
    if (nu.atom_prob(a) > 0.0) sup.push_back(a);
  const int S = static_cast<int>(sup.size());

  // Atom mean matrix restricted to the support.
  std::vector<std::vector<double>> Z(S, std::vector<double>(n, 0.0));
  for (int s = 0; s < S; ++s) Z[s] = nu.atom_increment(sup[s]);

  std::vector<double> lam(S, 1.0 / static_cast<double>(S));
  std::vector<double> w(n, 0.0);
  double rho = opt.primal_rho0;

  auto mean_of = [&](const std::vector<double>& l) {
    std::vector<double> m(n, 0.0);
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < n; ++i) m[i] += l[s] * Z[s][i];
    return m;
  };
  auto entropy_term = [&](const std::vector<double>& l) {
    double r = 0.0;
    for (int s = 0; s < S; ++s) r += xlogx_over(l[s], nu.atom_prob(sup[s]));
    return r;
  };
  auto al_value = [&](const std::vector<double>& l) {
    std::vector<double> m = mean_of(l);
    double v = entropy_term(l);
    for (int i = 0; i < n; ++i) {
      double c = m[i] - z[i];
      v += w[i] * c + 0.5 * rho * c * c;
    }
    return v;
  };

  long total_iter = 0;
  for (long outer = 0; outer < opt.primal_outer; ++outer) {
    double step = 0.1;
    for (long inner = 0; inner < opt.primal_inner; ++inner) {
      ++total_iter;
      std::vector<double> m = mean_of(lam);
      std::vector<double> glam(S);
      for (int s = 0; s < S; ++s) {
        double lg = lam[s] > 1e-300 ? std::log(lam[s] / nu.atom_prob(sup[s]))
                                    : std::log(1e-300 / nu.atom_prob(sup[s]));
        double pen = 0.0;
        for (int i = 0; i < n; ++i) pen += (w[i] + rho * (m[i] - z[i])) * Z[s][i];
        glam[s] = lg + 1.0 + pen;
      }
      double f0 = al_value(lam);
      double t = step;
      std::vector<double> cand;
      bool moved = false;
      double move_size = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> trial(S);
        for (int s = 0; s < S; ++s) trial[s] = lam[s] - t * glam[s];
        trial = project_to_simplex(std::move(trial));
        if (al_value(trial) < f0 - 1e-16) {
          for (int s = 0; s < S; ++s) move_size = std::max(move_size, std::abs(trial[s] - lam[s]));
          cand = std::move(trial);
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      step = std::min(1.0, t * 2.0);
      lam = std::move(cand);
      if (move_size < 1e-15) break;
    }
    std::vector<double> m = mean_of(lam);
    double gap = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] += rho * (m[i] - z[i]);
      gap = std::max(gap, std::abs(m[i] - z[i]));
    }
    res.residual = gap;
    if (gap < 1e-12 && outer > 6) break;
    rho = std::min(rho * 1.5, 1000.0);
  }
  res.iterations = total_iter;
  res.value = entropy_term(lam);
  res.tilt = project_tangent(w);  // multipliers approximate the dual argmax
  IncrementLaw out(n);
  for (int s = 0; s < S; ++s) out.set_atom_prob(sup[s], lam[s]);
  res.minimizer = out;
  if (res.residual > 1e-7) {
    res.infeasible = true;
    res.value = kInf;
    res.diagnostic = "primal: constraint gap " + std::to_string(res.residual);
  }
  return res;
}

}  // namespace detail

/// Cramer transform L(x, z): dual route is Newton ascent of
/// <u,z> - H(x,u) over R^n_0 with the minimizer recovered as the tilted law
/// lambda*(z) ~ nu(z|x) e^<u*,z>; primal_oracle is an independent
/// constrained minimization of relative entropy (test oracle).
/// Directions outside Z(x) yield value +inf, an infeasible flag, and a
/// separating certificate direction.
inline CramerResult cramer_transform(const SimplexPoint& x, const std::vector<double>& z,
                                     const SwitchMatrix& sigma,
                                     CramerMethod method = CramerMethod::dual,
                                     const CramerOptions& opt = {}) {
  if (static_cast<int>(z.size()) != x.dim())
    throw std::invalid_argument("cramer_transform: dim mismatch");
  double zs = 0.0;
  for (double v : z) zs += v;
  if (std::abs(zs) > 1e-10)
    throw std::invalid_argument("cramer_transform: z must sum to zero");

  IncrementLaw nu = increment_law(x, sigma);
  FeasibilityCheck fc = check_direction_feasible(x, z);
  if (!fc.feasible) {
    CramerResult res;
    res.method = method;
    res.value = kInf;
    res.infeasible = true;
    res.certificate = fc.certificate;
    res.diagnostic = "z outside Z(x)";
    return res;
  }
  return method == CramerMethod::dual ? detail::cramer_dual(nu, z, opt)
                                      : detail::cramer_primal(nu, z, opt);
}

struct PathCost {
  double value = 0.0;
  std::optional<std::size_t> infeasible_segment;
  bool finite() const { return !infeasible_segment.has_value(); }
};

/// c(phi) = int L(phi_t, phidot_t) dt for a sampled path.
/// Per interval the derivative is the forward difference and L is evaluated
/// at the interval's midpoint state (one-point composite rule; second-order
/// on smooth paths). Infeasible segments return value +inf with the index.
inline PathCost path_cost(const SampledPath& path, const GameSpec& game,
                          const ProtocolSpec& protocol, const CramerOptions& opt = {}) {
  if (path.size() < 2) throw std::invalid_argument("path_cost: need at least 2 samples");
  const int n = path.states.front().dim();
  KahanSum acc;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    double dt = path.times[k + 1] - path.times[k];
    std::vector<double> zv(n);
    double zsum = 0.0;
    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i) {
      zv[i] = (path.states[k + 1][i] - path.states[k][i]) / dt;
      zsum += zv[i];
      mid[i] = 0.5 * (path.states[k][i] + path.states[k + 1][i]);
    }
    if (std::abs(zsum) > 1e-8) {
      throw std::invalid_argument("path_cost: non-tangent derivative at segment " +
                                  std::to_string(k));
    }
    SimplexPoint xm{std::move(mid)};
    CramerResult L =
        cramer_transform(xm, project_tangent(zv), switch_matrix(game, protocol, xm),
                         CramerMethod::dual, opt);
    if (L.infeasible) {
      return PathCost{kInf, k};
    }
    acc.add(L.value * dt);
  }
  return PathCost{acc.value(), std::nullopt};
}

struct FaceProjection {
  IncrementLaw lambda_bar;
  std::vector<double> chi;  // per action, supported on I
};

/// Rewrites a distribution on Z with mean in Z(I) into one supported on
/// Z(I) with the same mean, by the incremental three-case zeroing pass over
/// the rows outside I. The output satisfies, with Dlambda = lambda_bar -
/// lambda: (i) row and column sums over I both drop by chi_i, (ii) the null
/// mass grows by lambda_[K] + chi_[I], (iii) chi_[I] <= lambda_[K],
/// (iv) |Dlambda| total <= 3 lambda_[K]; and the mean is preserved.
inline FaceProjection face_project(const IncrementLaw& lambda, const std::vector<int>& I) {
  const int n = lambda.dim();
  std::vector<char> in_I(n, 0);
  for (int i : I) {
    if (i < 0 || i >= n) throw std::invalid_argument("face_project: bad action index in I");
    in_I[i] = 1;
  }
  std::vector<double> mean = lambda.mean();
  for (int j = 0; j < n; ++j) {
    if (!in_I[j] && mean[j] < -1e-12) {
      throw std::invalid_argument("face_project: mean outside Z(I) (z_" + std::to_string(j) +
                                  " < 0)");
    }
  }

  IncrementLaw nu = lambda;
  std::vector<double> chi(n, 0.0);
  auto row_mass = [&](int k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != k) s += nu.move_mass(k, j);
    return s;
  };

  for (int k = 0; k < n; ++k) {
    if (in_I[k]) continue;
    long guard = 0;
    while (row_mass(k) > 0.0) {
      if (++guard > 8L * n * n) {
        if (row_mass(k) <= 1e-12) break;
        throw std::logic_error("face_project: zeroing pass failed to terminate");
      }
      int j = -1, i = -1;
      for (int cand = 0; cand < n; ++cand) {
        if (cand != k && nu.move_mass(k, cand) > 0.0) {
          j = cand;
          break;
        }
      }
      for (int cand = 0; cand < n; ++cand) {
        if (cand != k && nu.move_mass(cand, k) > 0.0) {
          i = cand;
          break;
        }
      }
      if (j < 0 || i < 0) {
        // Mean in Z(I) guarantees a matching column entry; residue here is
        // floating-point dust.
        if (row_mass(k) <= 1e-12) {
          for (int cand = 0; cand < n; ++cand) {
            if (cand == k) continue;
            nu.set_null_mass(nu.null_mass() + nu.move_mass(k, cand));
            nu.set_move_mass(k, cand, 0.0);
          }
          break;
        }
        throw std::logic_error("face_project: row has mass but column is empty");
      }
      double c = std::min(nu.move_mass(k, j), nu.move_mass(i, k));
      nu.set_move_mass(k, j, nu.move_mass(k, j) - c);
      nu.set_move_mass(i, k, nu.move_mass(i, k) - c);
      if (i != j) {
        nu.set_move_mass(i, j, nu.move_mass(i, j) + c);
        nu.set_null_mass(nu.null_mass() + c);
      } else {
        nu.set_null_mass(nu.null_mass() + 2.0 * c);
        if (in_I[i]) chi[i] += c;
      }
    }
  }
  return FaceProjection{std::move(nu), std::move(chi)};
}

struct SurgeryOptions {
  double dt = 1e-3;              // step for the mean-dynamic prefix
  long varsigma_mesh = 200;      // grid for the varsigma scan
  std::optional<double> varsigma_override;
  std::optional<double> beta;    // piecewise-linear coarsening width
};

/// Interior shift phi^alpha: follow the mean dynamic from the path's start
/// for alpha time units, then replay the original increments scaled by
/// 1 - 2 alpha / varsigma. With beta set, the result is additionally
/// coarsened to a piecewise-linear path with knot spacing beta after alpha.
inline SampledPath path_surgery(const SampledPath& path, double alpha, const GameSpec& game,
                                const ProtocolSpec& protocol, const SurgeryOptions& opt = {}) {
  if (path.size() < 2) throw std::invalid_argument("path_surgery: need at least 2 samples");
  double varsigma = opt.varsigma_override
                        ? *opt.varsigma_override
                        : sigma_lower_bound(game, protocol, opt.varsigma_mesh);
  if (!(alpha > 0.0) || alpha > varsigma / 4.0 + 1e-15) {
    throw std::invalid_argument("path_surgery: need 0 < alpha <= varsigma/4 (varsigma = " +
                                std::to_string(varsigma) + ")");
  }
  if (opt.beta) {
    double inv = 1.0 / *opt.beta;
    if (std::abs(inv - std::round(inv)) > 1e-9) {
      throw std::invalid_argument("path_surgery: 1/beta must be an integer");
    }
  }

  const SimplexPoint x = path.states.front();
  const double T = path.times.back() - path.times.front();
  const double t0 = path.times.front();
  const int n = x.dim();

  // Mean-dynamic prefix on [0, alpha], step chosen to land on alpha exactly.
  long pre_steps = std::max<long>(2, static_cast<long>(std::ceil(alpha / opt.dt)));
  double hpre = alpha / static_cast<double>(pre_steps);
  SampledPath prefix = integrate(mean_field(game, protocol), x, alpha, hpre);
  const SimplexPoint anchor = prefix.terminal();  // phibar_alpha
  const double scale = 1.0 - 2.0 * alpha / varsigma;

  auto shifted_state = [&](double t) {  // phi^alpha_t for t in (alpha, T]
    SimplexPoint orig = path.at(t0 + (t - alpha));
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = anchor[i] + scale * (orig[i] - x[i]);
    double s = 0.0;
    for (double v : c) s += v;
    for (double& v : c) v /= s;  // exact up to rounding; renormalize dust
    return SimplexPoint(std::move(c));
  };

  SampledPath out;
  out.step = path.step;
  out.times = prefix.times;
  out.states = prefix.states;
  if (!opt.beta) {
    // Sample the shifted section on the original path's grid offsets.
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      double t = (path.times[k + 1] - t0) + alpha;
      if (t > T + 1e-12) break;
      out.times.push_back(t);
      out.states.push_back(shifted_state(t));
    }
    return out;
  }

  const double beta = *opt.beta;
  double t = alpha;
  while (t + beta <= T + 1e-12) {
    t += beta;
    out.times.push_back(t);
    out.states.push_back(shifted_state(std::min(t, T)));
  }
  if (out.times.back() < T - 1e-12) {
    out.times.push_back(T);
    out.states.push_back(shifted_state(T));
  }
  return out;
}

/// Target set of means for the Sanov/Cramer check: the closed l1 ball
/// around `center` of radius `radius`.
struct MeanSet {
  std::vector<double> center;
  double radius = 0.0;

  bool contains(const std::vector<double>& z) const {
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) d += std::abs(z[i] - center[i]);
    return d <= radius + 1e-15;
  }
};

struct SanovRow {
  long N = 0;
  double probability = 0.0;
  double log_probability = -kInf;
  double rate = kInf;  // -(1/N) log P
};

struct SanovResult {
  std::vector<SanovRow> rows;
  double inf_L = kInf;  // inf over V of L(x, z)
};

namespace detail {

template <typename Visit>
void enumerate_compositions(long N, int parts, std::vector<long>& c, int pos, const Visit& visit) {
  if (pos == parts - 1) {
    c[pos] = N;
    visit(c);
    return;
  }
  for (long v = 0; v <= N; ++v) {
    c[pos] = v;
    enumerate_compositions(N - v, parts, c, pos + 1, visit);
  }
}

}  // namespace detail

/// Exact P(zbar^N in V) for iid draws from nu(.|x) by enumeration of
/// empirical distributions with multinomial weights, compared against
/// inf_{z in V} L(x,z). The minimization is exact (golden section) for
/// n = 2 and a dense directional search otherwise.
inline SanovResult sanov_check(const SimplexPoint& x, const SwitchMatrix& sigma,
                               const std::vector<long>& N_list, const MeanSet& V,
                               double enum_cap = 2e7, const CramerOptions& copt = {}) {
  const int n = x.dim();
  IncrementLaw nu = increment_law(x, sigma);
  std::vector<int> sup;
  for (int a = 0; a < nu.atom_count(); ++a)
    if (nu.atom_prob(a) > 0.0) sup.push_back(a);
  const int S = static_cast<int>(sup.size());
  std::vector<std::vector<double>> zs(S);
  std::vector<double> logp(S);
  for (int s = 0; s < S; ++s) {
    zs[s] = nu.atom_increment(sup[s]);
    logp[s] = std::log(nu.atom_prob(sup[s]));
  }

  SanovResult out;
  for (long N : N_list) {
    if (binomial(N + S - 1, S - 1) > enum_cap) {
      throw std::invalid_argument("sanov_check: enumeration cap exceeded at N = " +
                                  std::to_string(N));
    }
    // Streaming log-sum-exp over in-set empirical distributions.
    double run_max = -kInf, run_sum = 0.0;
    std::vector<long> c(S, 0);
    detail::enumerate_compositions(N, S, c, 0, [&](const std::vector<long>& counts) {
      std::vector<double> mean(n, 0.0);
      for (int s = 0; s < S; ++s) {
        for (int i = 0; i < n; ++i) mean[i] += static_cast<double>(counts[s]) * zs[s][i];
      }
      for (int i = 0; i < n; ++i) mean[i] /= static_cast<double>(N);
      if (!V.contains(mean)) return;
      double lt = std::lgamma(static_cast<double>(N) + 1.0);
      for (int s = 0; s < S; ++s) {
        lt -= std::lgamma(static_cast<double>(counts[s]) + 1.0);
        lt += static_cast<double>(counts[s]) * logp[s];
      }
      if (lt > run_max) {
        run_sum = run_sum * std::exp(run_max - lt) + 1.0;
        run_max = lt;
      } else {
        run_sum += std::exp(lt - run_max);
      }
    });
    SanovRow row;
    row.N = N;
    if (run_max > -kInf) {
      row.log_probability = run_max + std::log(run_sum);
      row.probability = std::exp(row.log_probability);
      row.rate = -row.log_probability / static_cast<double>(N);
    } else {
      row.probability = 0.0;
    }
    out.rows.push_back(row);
  }

  // inf over V of L(x, .).
  auto L_of = [&](const std::vector<double>& z) {
    CramerResult r = cramer_transform(x, project_tangent(z), sigma, CramerMethod::dual, copt);
    return r.infeasible ? kInf : r.value;
  };
  if (n == 2) {
    // Tangent space is one dimensional: z = (a, -a), |z - c|_1 = 2 |a - c_0|.
    double c0 = V.center[0];
    double lo = c0 - V.radius / 2.0, hi = c0 + V.radius / 2.0;
    auto f = [&](double a) { return L_of({a, -a}); };
    double a_best = golden_section_minimize(f, lo, hi, 1e-12);
    out.inf_L = std::min({f(a_best), f(lo), f(hi)});
  } else {
    double best = L_of(V.center);
    std::mt19937_64 rng = make_stream(0xC0FFEEu, 0);
    for (int trial = 0; trial < 4000; ++trial) {
      std::vector<double> dir(n);
      std::normal_distribution<double> nd;
      for (double& d : dir) d = nd(rng);
      dir = project_tangent(dir);
      double norm = l1_norm(dir);
      if (norm < 1e-12) continue;
      std::uniform_real_distribution<double> ur(0.0, 1.0);
      double r = V.radius * ur(rng) / norm;
      std::vector<double> z(n);
      for (int i = 0; i < n; ++i) z[i] = V.center[i] + r * dir[i];
      best = std::min(best, L_of(z));
    }
    out.inf_L = best;
  }
  return out;
}

}  // namespace evoldp

#endif  // EVOLDP_LARGEDEV_HPP
