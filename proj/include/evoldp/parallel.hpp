#ifndef EVOLDP_PARALLEL_HPP
#define EVOLDP_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace evoldp {

/// Worker count: EVO_LDP_WORKERS overrides any explicit request; otherwise
/// the request, then hardware concurrency.
inline int resolve_workers(int requested = 0) {
  if (const char* env = std::getenv("EVO_LDP_WORKERS")) {
    int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, count). Each index is processed exactly once;
/// bodies must only write to their own slot of any shared output, which keeps
/// results identical for every worker count.
template <typename Body>
void parallel_for(std::size_t count, const Body& body, int workers = 0) {
  int w = resolve_workers(workers);
  if (w <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(w), count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([t, nthreads, count, &body] {
      for (std::size_t i = t; i < count; i += nthreads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace evoldp

#endif  // EVOLDP_PARALLEL_HPP
