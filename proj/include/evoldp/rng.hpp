#ifndef EVOLDP_RNG_HPP
#define EVOLDP_RNG_HPP

#include <cstdint>
#include <random>

namespace evoldp {

/// splitmix64 step; used to derive decorrelated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Independent stream for (master seed, stream index). Replicas of a Monte
/// Carlo experiment each own stream(seed, replica), so results are
/// reproducible and independent of scheduling.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream_index * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull);
  std::uint64_t b = splitmix64(s);
  std::uint64_t c = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace evoldp

#endif  // EVOLDP_RNG_HPP
