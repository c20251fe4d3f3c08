#ifndef EVOLDP_CONFIG_HPP
#define EVOLDP_CONFIG_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evoldp/games.hpp"
#include "evoldp/protocols.hpp"

namespace evoldp {

inline constexpr int kConfigSchemaVersion = 1;

/// {"variant":"congestion","facilities":[[1,8],[2,4],[4]],
///  "usage":[[1,0,0],[0,1,0],[0,0,1]]}
inline GameSpec game_from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "congestion") {
    CongestionGame g;
    g.facility_cost_coeffs = j.at("facilities").get<std::vector<std::vector<double>>>();
    g.usage = j.at("usage").get<std::vector<std::vector<int>>>();
    return GameSpec(std::move(g));
  }
  if (variant == "matching") {
    MatchingGame g;
    g.payoff = j.at("payoff").get<std::vector<std::vector<double>>>();
    g.self_match_excluded = j.value("self_match_excluded", true);
    return GameSpec(std::move(g));
  }
  throw std::invalid_argument("game json: unknown variant '" + variant +
                              "' (closure games are code-only)");
}

inline nlohmann::json game_to_json(const GameSpec& game) {
  nlohmann::json j;
  if (const CongestionGame* c = game.congestion()) {
    j["variant"] = "congestion";
    j["facilities"] = c->facility_cost_coeffs;
    j["usage"] = c->usage;
  } else if (const MatchingGame* m = game.matching()) {
    j["variant"] = "matching";
    j["payoff"] = m->payoff;
    j["self_match_excluded"] = m->self_match_excluded;
  } else {
    j["variant"] = "direct";
    j["name"] = game.direct()->name;
  }
  return j;
}

/// {"variant":"logit","eta":0.25}
inline ProtocolSpec protocol_from_json(const nlohmann::json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "logit") return ProtocolSpec(LogitProtocol{j.at("eta").get<double>()});
  if (variant == "pairwise_logit")
    return ProtocolSpec(PairwiseLogitProtocol{j.at("eta").get<double>()});
  if (variant == "imitation_mutation") {
    ImitationProtocol im{j.at("epsilon").get<double>()};
    if (j.contains("normalization")) {
      im.norm_offset = j["normalization"].value("offset", 0.0);
      im.norm_scale = j["normalization"].value("scale", 1.0);
    }
    return ProtocolSpec(im);
  }
  throw std::invalid_argument("protocol json: unknown variant '" + variant + "'");
}

inline nlohmann::json protocol_to_json(const ProtocolSpec& p) {
  nlohmann::json j;
  if (const LogitProtocol* lp = p.logit()) {
    j["variant"] = "logit";
    j["eta"] = lp->eta;
  } else if (const PairwiseLogitProtocol* pl = p.pairwise_logit()) {
    j["variant"] = "pairwise_logit";
    j["eta"] = pl->eta;
  } else {
    const ImitationProtocol* im = p.imitation();
    j["variant"] = "imitation_mutation";
    j["epsilon"] = im->epsilon;
    j["normalization"] = {{"offset", im->norm_offset}, {"scale", im->norm_scale}};
  }
  return j;
}

inline GameSpec load_game_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open game file: " + path);
  nlohmann::json j;
  is >> j;
  return game_from_json(j);
}

/// The three-link congestion network used throughout: delays 1 + 8u, 2 + 4u
/// and a constant 4 on parallel links.
inline CongestionGame example_congestion_network() {
  return CongestionGame{{{1, 8}, {2, 4}, {4}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

/// Two parallel links with delays 1 + 4u and 2 + 2u; the n = 2 instance used
/// by the birth-death and Laplace experiments.
inline CongestionGame example_two_link_network() {
  return CongestionGame{{{1, 4}, {2, 2}}, {{1, 0}, {0, 1}}};
}

}  // namespace evoldp

#endif  // EVOLDP_CONFIG_HPP
