#ifndef EVOLDP_SIMPLEX_HPP
#define EVOLDP_SIMPLEX_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evoldp/numeric.hpp"

namespace evoldp {

inline constexpr double kSimplexSumTol = 1e-12;

/// Population state x in X = {x in R^n_+ : sum_i x_i = 1}.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw std::invalid_argument("SimplexPoint: need n >= 2");
    double s = 0.0;
    for (double c : coords_) {
      if (!(c >= 0.0)) throw std::invalid_argument("SimplexPoint: negative coordinate");
      s += c;
    }
    // Rounded published states (e.g. four-decimal rest points) are accepted
    // and rescaled; anything further off is a caller error.
    if (std::abs(s - 1.0) > 1e-4) {
      throw std::invalid_argument("SimplexPoint: coordinates sum to " + std::to_string(s));
    }
    if (std::abs(s - 1.0) > kSimplexSumTol) {
      for (double& c : coords_) c /= s;
    }
  }

  static SimplexPoint uniform(int n) {
    return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  static SimplexPoint vertex(int n, int i) {
    std::vector<double> c(n, 0.0);
    c.at(i) = 1.0;
    return SimplexPoint(std::move(c));
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  /// Actions with mass above tol.
  std::vector<int> support(double tol = 0.0) const {
    std::vector<int> s;
    for (int i = 0; i < dim(); ++i)
      if (coords_[i] > tol) s.push_back(i);
    return s;
  }

  double min_coord() const {
    double m = coords_[0];
    for (double c : coords_) m = std::min(m, c);
    return m;
  }

 private:
  std::vector<double> coords_;
};

inline double l1_distance(const SimplexPoint& a, const SimplexPoint& b) {
  assert(a.dim() == b.dim());
  double d = 0.0;
  for (int i = 0; i < a.dim(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

inline double l1_norm(const std::vector<double>& v) {
  double d = 0.0;
  for (double x : v) d += std::abs(x);
  return d;
}

inline double linf_norm(const std::vector<double>& v) {
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x));
  return d;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Orthogonal projection onto R^n_0 = {z : sum z_i = 0}: P = I - (1/n) 11'.
inline std::vector<double> project_tangent(std::vector<double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
  return v;
}

/// Displacement direction z in R^n_0 (per unit clock time).
class TangentVector {
 public:
  explicit TangentVector(std::vector<double> z) : z_(std::move(z)) {
    double s = 0.0;
    for (double v : z_) s += v;
    if (std::abs(s) > 1e-10) {
      throw std::invalid_argument("TangentVector: coordinates sum to " + std::to_string(s));
    }
  }
  int dim() const { return static_cast<int>(z_.size()); }
  double operator[](int i) const { return z_[i]; }
  const std::vector<double>& coords() const { return z_; }

 private:
  std::vector<double> z_;
};

/// Grid state: integer counts over actions, counts sum to the population size.
class GridState {
 public:
  GridState(std::vector<long> counts, long pop_size)
      : counts_(std::move(counts)), pop_(pop_size) {
    if (pop_ <= 0) throw std::invalid_argument("GridState: pop_size must be positive");
    long s = 0;
    for (long c : counts_) {
      if (c < 0) throw std::invalid_argument("GridState: negative count");
      s += c;
    }
    if (s != pop_) throw std::invalid_argument("GridState: counts do not sum to pop_size");
    if (counts_.size() < 2) throw std::invalid_argument("GridState: need n >= 2");
  }

  int dim() const { return static_cast<int>(counts_.size()); }
  long pop_size() const { return pop_; }
  long count(int i) const { return counts_[i]; }
  const std::vector<long>& counts() const { return counts_; }
  double share(int i) const { return static_cast<double>(counts_[i]) / static_cast<double>(pop_); }

  SimplexPoint to_point() const {
    std::vector<double> c(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i)
      c[i] = static_cast<double>(counts_[i]) / static_cast<double>(pop_);
    return SimplexPoint(std::move(c));
  }

  /// Nearest grid state to x (largest-remainder rounding of N x).
  static GridState nearest(const SimplexPoint& x, long pop_size) {
    const int n = x.dim();
    std::vector<long> c(n);
    std::vector<std::pair<double, int>> rem(n);
    long total = 0;
    for (int i = 0; i < n; ++i) {
      double t = x[i] * static_cast<double>(pop_size);
      c[i] = static_cast<long>(std::floor(t));
      rem[i] = {t - std::floor(t), i};
      total += c[i];
    }
    std::sort(rem.begin(), rem.end(), [](auto& a, auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (long k = 0; k < pop_size - total; ++k) c[rem[static_cast<std::size_t>(k)].second] += 1;
    return GridState(std::move(c), pop_size);
  }

  GridState moved(int from, int to) const {
    std::vector<long> c = counts_;
    if (c[from] <= 0) throw std::invalid_argument("GridState::moved: source action unused");
    c[from] -= 1;
    c[to] += 1;
    return GridState(std::move(c), pop_);
  }

  bool operator==(const GridState& o) const { return pop_ == o.pop_ && counts_ == o.counts_; }

 private:
  std::vector<long> counts_;
  long pop_;
};

/// Enumeration of the grid X^N (all count vectors summing to N), in
/// lexicographically ascending count order. Index <-> counts is the stable
/// contract used by stationary-distribution output and serialization.
class GridEnumeration {
 public:
  GridEnumeration(int n, long pop) : n_(n), pop_(pop) {
    if (n < 2) throw std::invalid_argument("GridEnumeration: need n >= 2");
  }

  std::size_t size() const {
    return static_cast<std::size_t>(binomial(pop_ + n_ - 1, n_ - 1) + 0.5);
  }

  std::vector<long> counts(std::size_t index) const {
    std::vector<long> c(n_);
    long rem = pop_;
    std::size_t idx = index;
    for (int pos = 0; pos < n_ - 1; ++pos) {
      long v = 0;
      for (;; ++v) {
        std::size_t block =
            static_cast<std::size_t>(binomial(rem - v + n_ - pos - 2, n_ - pos - 2) + 0.5);
        if (idx < block) break;
        idx -= block;
      }
      c[pos] = v;
      rem -= v;
    }
    c[n_ - 1] = rem;
    return c;
  }

  std::size_t index(const std::vector<long>& c) const {
    assert(static_cast<int>(c.size()) == n_);
    std::size_t idx = 0;
    long rem = pop_;
    for (int pos = 0; pos < n_ - 1; ++pos) {
      for (long v = 0; v < c[pos]; ++v) {
        idx += static_cast<std::size_t>(binomial(rem - v + n_ - pos - 2, n_ - pos - 2) + 0.5);
      }
      rem -= c[pos];
    }
    return idx;
  }

  int dim() const { return n_; }
  long pop_size() const { return pop_; }

 private:
  int n_;
  long pop_;
};

/// Deterministic mesh over the simplex: all grid points of X^M as points.
inline std::vector<SimplexPoint> simplex_mesh(int n, long mesh) {
  GridEnumeration e(n, mesh);
  std::vector<SimplexPoint> out;
  out.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    out.push_back(GridState(e.counts(k), mesh).to_point());
  }
  return out;
}

/// Uniform random interior point (Dirichlet(1,..,1) via exponential trick),
/// floored away from the boundary when min_mass > 0.
inline SimplexPoint random_interior_point(int n, std::mt19937_64& rng, double min_mass = 0.0) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> c(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    c[i] = ex(rng);
    s += c[i];
  }
  for (int i = 0; i < n; ++i) c[i] /= s;
  if (min_mass > 0.0) {
    double scale = 1.0 - static_cast<double>(n) * min_mass;
    for (int i = 0; i < n; ++i) c[i] = min_mass + scale * c[i];
  }
  return SimplexPoint(std::move(c));
}

}  // namespace evoldp

#endif  // EVOLDP_SIMPLEX_HPP
