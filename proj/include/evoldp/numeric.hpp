#ifndef EVOLDP_NUMERIC_HPP
#define EVOLDP_NUMERIC_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace evoldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Compensated accumulator. Aggregations over Monte Carlo replicas use this
/// so that results do not depend on summation order rounding.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// log(sum_i exp(a_i)) with max-subtraction; -inf entries are skipped.
inline double log_sum_exp(const std::vector<double>& a) {
  double m = -kInf;
  for (double v : a) m = std::max(m, v);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double v : a) {
    if (v == -kInf) continue;
    s += std::exp(v - m);
  }
  return m + std::log(s);
}

/// x log x with the convention 0 log 0 = 0.
inline double xlogx(double x) {
  assert(x >= 0.0);
  return x > 0.0 ? x * std::log(x) : 0.0;
}

/// x log(x/y) with 0 log(0/y) = 0 log(0/0) = 0; +inf when x > 0, y = 0.
inline double xlogx_over(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ a + b x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need >= 2 paired samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol = 1e-10,
                               int max_iter = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

/// Euclidean projection onto the probability simplex {p >= 0, sum p = 1}.
inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    css += u[k];
    double t = (css - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) {
      rho = static_cast<int>(k + 1);
      theta = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - theta);
  return v;
}

/// C(n, k) as a double (sizes used here stay well inside exact range).
inline double binomial(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (long i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace evoldp

#endif  // EVOLDP_NUMERIC_HPP
