#ifndef EVOLDP_PROTOCOLS_HPP
#define EVOLDP_PROTOCOLS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evoldp/games.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Logit choice: probability of action j proportional to exp(eta^-1 pi_j),
/// independent of the revising agent's current action.
struct LogitProtocol {
  double eta;
};

/// Pairwise logit: pick a candidate action uniformly among the other n-1,
/// then apply the logit rule to {current, candidate} only.
struct PairwiseLogitProtocol {
  double eta;
};

/// Imitation with mutations: with probability 1-eps imitate a random
/// opponent proportionally to her payoff, with probability eps pick uniformly.
/// Requires payoffs normalized into [0,1]; the normalization is an explicit
/// affine map pi -> offset + scale * pi supplied in the configuration.
struct ImitationProtocol {
  double epsilon;
  double norm_offset = 0.0;
  double norm_scale = 1.0;
};

class ProtocolSpec {
 public:
  explicit ProtocolSpec(LogitProtocol p) : v_(p) {
    if (!(p.eta > 0.0)) throw std::invalid_argument("logit: eta must be > 0");
  }
  explicit ProtocolSpec(PairwiseLogitProtocol p) : v_(p) {
    if (!(p.eta > 0.0)) throw std::invalid_argument("pairwise_logit: eta must be > 0");
  }
  explicit ProtocolSpec(ImitationProtocol p) : v_(p) {
    if (!(p.epsilon > 0.0 && p.epsilon <= 1.0))
      throw std::invalid_argument("imitation_mutation: epsilon must be in (0,1]");
  }

  const LogitProtocol* logit() const { return std::get_if<LogitProtocol>(&v_); }
  const PairwiseLogitProtocol* pairwise_logit() const {
    return std::get_if<PairwiseLogitProtocol>(&v_);
  }
  const ImitationProtocol* imitation() const { return std::get_if<ImitationProtocol>(&v_); }

  std::string variant_name() const {
    if (logit()) return "logit";
    if (pairwise_logit()) return "pairwise_logit";
    return "imitation_mutation";
  }

  /// CLI shorthand, e.g. "logit:0.25", "pairwise_logit:0.1",
  /// "imitation:0.05" (optionally "imitation:eps:offset:scale").
  static ProtocolSpec parse(const std::string& text);

 private:
  std::variant<LogitProtocol, PairwiseLogitProtocol, ImitationProtocol> v_;
};

namespace detail {

inline std::vector<double> logit_choice(double eta, const std::vector<double>& payoffs) {
  const int n = static_cast<int>(payoffs.size());
  double m = payoffs[0];
  for (double p : payoffs) m = std::max(m, p);
  std::vector<double> w(n);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    w[j] = std::exp((payoffs[j] - m) / eta);
    s += w[j];
  }
  for (double& x : w) x /= s;
  return w;
}

}  // namespace detail

/// M^eta(pi): the logit choice distribution itself (used by the mean dynamic
/// and rest-point iteration).
inline std::vector<double> logit_map(double eta, const std::vector<double>& payoffs) {
  return detail::logit_choice(eta, payoffs);
}

/// Choice probabilities rho_{i .}(pi, x) of a revising action-i player.
/// pop_size selects the finite-population form where the protocol has one;
/// when absent the limiting protocol is used.
inline std::vector<double> choice_distribution(const ProtocolSpec& protocol,
                                               const std::vector<double>& payoffs,
                                               int current_action, const SimplexPoint& state,
                                               std::optional<long> pop_size = std::nullopt) {
  const int n = static_cast<int>(payoffs.size());
  if (state.dim() != n) throw std::invalid_argument("choice_distribution: dimension mismatch");
  if (current_action < 0 || current_action >= n)
    throw std::invalid_argument("choice_distribution: bad current action");
  for (double p : payoffs)
    if (!std::isfinite(p)) throw std::invalid_argument("choice_distribution: non-finite payoff");

  if (const LogitProtocol* lp = protocol.logit()) {
    return detail::logit_choice(lp->eta, payoffs);
  }

  if (const PairwiseLogitProtocol* pl = protocol.pairwise_logit()) {
    const int i = current_action;
    std::vector<double> rho(n, 0.0);
    double stay = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      // exp(pi_j/eta) / (exp(pi_i/eta) + exp(pi_j/eta)), max-subtracted.
      double m = std::max(payoffs[i], payoffs[j]);
      double wi = std::exp((payoffs[i] - m) / pl->eta);
      double wj = std::exp((payoffs[j] - m) / pl->eta);
      rho[j] = wj / (wi + wj) / static_cast<double>(n - 1);
      stay += wi / (wi + wj) / static_cast<double>(n - 1);
    }
    rho[i] = stay;
    return rho;
  }

  const ImitationProtocol& im = *protocol.imitation();
  std::vector<double> pi(n);
  for (int j = 0; j < n; ++j) {
    pi[j] = im.norm_offset + im.norm_scale * payoffs[j];
    if (pi[j] < -1e-12 || pi[j] > 1.0 + 1e-12) {
      throw std::invalid_argument(
          "imitation_mutation: normalized payoff outside [0,1]; fix the normalization map");
    }
  }
  const int i = current_action;
  const double eps = im.epsilon;
  std::vector<double> rho(n, eps / static_cast<double>(n));
  if (pop_size.has_value()) {
    const double N = static_cast<double>(*pop_size);
    if (N < 2) throw std::invalid_argument("imitation_mutation: need N >= 2");
    // Verbatim finite-N form. Its row sum is 1 + (1-eps)(1 - N x_i)/(N(N-1));
    // the whole vector is rescaled by the row sum so a probability vector is
    // returned (see the row-sum property test for the raw identity).
    double stay = (N * state[i] - 1.0) / N;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      rho[k] += (1.0 - eps) * (N / (N - 1.0)) * state[k] * pi[k];
      stay += (N / (N - 1.0)) * state[k] * (1.0 - pi[k]);
    }
    rho[i] += (1.0 - eps) * stay;
    double total = 0.0;
    for (double r : rho) total += r;
    for (double& r : rho) r /= total;
  } else {
    // Large-population limit: sigma_ij = (1-eps) x_j pi_j + eps/n for j != i.
    double stay = state[i];
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      rho[k] += (1.0 - eps) * state[k] * pi[k];
      stay += state[k] * (1.0 - pi[k]);
    }
    rho[i] += (1.0 - eps) * stay;
  }
  return rho;
}

/// Raw (unrescaled) row sum of the verbatim finite-N imitation formula;
/// exposed for the property test that pins the transcription.
inline double imitation_raw_row_sum(const ImitationProtocol& im, const std::vector<double>& payoffs,
                                    int current_action, const SimplexPoint& state, long pop_size) {
  const int n = static_cast<int>(payoffs.size());
  const double N = static_cast<double>(pop_size);
  const double eps = im.epsilon;
  double sum = eps;
  double acc = (N * state[current_action] - 1.0) / N;
  for (int k = 0; k < n; ++k) {
    if (k == current_action) continue;
    double pik = im.norm_offset + im.norm_scale * payoffs[k];
    acc += (N / (N - 1.0)) * state[k] * (1.0 - pik);
    sum += (1.0 - eps) * (N / (N - 1.0)) * state[k] * pik;
  }
  return sum + (1.0 - eps) * acc;
}

/// Switch probability matrix sigma^N(x) (rows: current action, columns:
/// next action) plus the smallest entry as a lower-bound estimate.
struct SwitchMatrix {
  std::vector<std::vector<double>> entries;
  double lower_bound = 0.0;

  int dim() const { return static_cast<int>(entries.size()); }
  double operator()(int i, int j) const { return entries[i][j]; }
};

enum class EvalMode { simple, clever, limit };

namespace detail {

inline SwitchMatrix assemble_switch_matrix(int n, const std::function<std::vector<double>(int)>& row) {
  SwitchMatrix sm;
  sm.entries.resize(n);
  sm.lower_bound = kInf;
  for (int i = 0; i < n; ++i) {
    sm.entries[i] = row(i);
    double s = 0.0;
    for (double e : sm.entries[i]) {
      s += e;
      sm.lower_bound = std::min(sm.lower_bound, e);
    }
    if (std::abs(s - 1.0) > 1e-12) {
      throw std::runtime_error("switch_matrix: row does not sum to 1");
    }
  }
  return sm;
}

}  // namespace detail

/// sigma(x) in the large-population limit: row i is the limiting choice
/// distribution at payoff vector F(x). Logit rows are identical.
inline SwitchMatrix switch_matrix(const GameSpec& game, const ProtocolSpec& protocol,
                                  const SimplexPoint& x) {
  const int n = game.num_actions();
  std::vector<double> F = payoff_limit(game, x);
  return detail::assemble_switch_matrix(
      n, [&](int i) { return choice_distribution(protocol, F, i, x); });
}

/// sigma^N(x) = rho^N(F^N_{i -> .}(x), x) rowwise. Rows of actions with zero
/// count fall back to simple payoffs (such rows carry zero weight in the
/// transition law but keep the matrix well formed).
inline SwitchMatrix switch_matrix(const GameSpec& game, const ProtocolSpec& protocol,
                                  const GridState& state, EvalMode mode) {
  if (mode == EvalMode::limit) return switch_matrix(game, protocol, state.to_point());
  const int n = game.num_actions();
  const SimplexPoint x = state.to_point();
  return detail::assemble_switch_matrix(n, [&](int i) {
    PayoffMode pm = (mode == EvalMode::clever && state.count(i) >= 1) ? PayoffMode::clever
                                                                      : PayoffMode::simple;
    std::vector<double> F = payoff_finite(game, state, i, pm);
    return choice_distribution(protocol, F, i, x, state.pop_size());
  });
}

/// Scan of min_{i,j} sigma_ij over a deterministic simplex grid of the given
/// mesh; the varsigma lower bound used by path surgery.
inline double sigma_lower_bound(const GameSpec& game, const ProtocolSpec& protocol,
                                long mesh = 200) {
  double bound = kInf;
  for (const SimplexPoint& x : simplex_mesh(game.num_actions(), mesh)) {
    bound = std::min(bound, switch_matrix(game, protocol, x).lower_bound);
  }
  return bound;
}

inline ProtocolSpec ProtocolSpec::parse(const std::string& text) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t next = s.find(':', pos);
      if (next == std::string::npos) {
        parts.push_back(s.substr(pos));
        break;
      }
      parts.push_back(s.substr(pos, next - pos));
      pos = next + 1;
    }
    return parts;
  };
  std::vector<std::string> parts = split(text);
  const std::string& kind = parts[0];
  if (kind == "logit") {
    if (parts.size() != 2) throw std::invalid_argument("protocol shorthand: logit:<eta>");
    return ProtocolSpec(LogitProtocol{std::stod(parts[1])});
  }
  if (kind == "pairwise_logit") {
    if (parts.size() != 2) throw std::invalid_argument("protocol shorthand: pairwise_logit:<eta>");
    return ProtocolSpec(PairwiseLogitProtocol{std::stod(parts[1])});
  }
  if (kind == "imitation" || kind == "imitation_mutation") {
    if (parts.size() != 2 && parts.size() != 4)
      throw std::invalid_argument("protocol shorthand: imitation:<eps>[:<offset>:<scale>]");
    ImitationProtocol im{std::stod(parts[1])};
    if (parts.size() == 4) {
      im.norm_offset = std::stod(parts[2]);
      im.norm_scale = std::stod(parts[3]);
    }
    return ProtocolSpec(im);
  }
  throw std::invalid_argument("unknown protocol: " + text);
}

}  // namespace evoldp

#endif  // EVOLDP_PROTOCOLS_HPP
