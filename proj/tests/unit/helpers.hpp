#ifndef EVOLDP_TEST_HELPERS_HPP
#define EVOLDP_TEST_HELPERS_HPP

#include <cmath>
#include <vector>

#include "evoldp/config.hpp"
#include "evoldp/games.hpp"
#include "evoldp/protocols.hpp"

namespace evoldp::testing {

inline GameSpec three_link_game() { return GameSpec{example_congestion_network()}; }
inline GameSpec two_link_game() { return GameSpec{example_two_link_network()}; }

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace evoldp::testing

#endif
