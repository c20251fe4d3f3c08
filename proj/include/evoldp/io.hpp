#ifndef EVOLDP_IO_HPP
#define EVOLDP_IO_HPP

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evoldp/dynamics.hpp"
#include "evoldp/process.hpp"
#include "evoldp/simplex.hpp"

namespace evoldp {

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a over the canonical config string; embedded in every artifact so
/// outputs can be traced to the exact configuration.
inline std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Header block for CSV artifacts. Everything after the timestamp line is a
/// deterministic function of config + seed.
inline void write_artifact_header(std::ostream& os, const std::string& subcommand,
                                  const std::string& canonical_config, std::uint64_t seed) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(canonical_config);
  std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  os << "# evoldp " << subcommand << "\n";
  os << "# timestamp=" << stamp << "\n";
  os << "# config_hash=0x" << hash.str() << "\n";
  os << "# seed=" << seed << "\n";
}

inline void write_path_csv(std::ostream& os, const SampledPath& path) {
  const int n = path.states.front().dim();
  os << "time";
  for (int i = 0; i < n; ++i) os << ",x_" << (i + 1);
  os << "\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    os << format_double(path.times[k]);
    for (int i = 0; i < n; ++i) os << "," << format_double(path.states[k][i]);
    os << "\n";
  }
}

inline void write_det_approx_csv(std::ostream& os, const DetApproxTable& table) {
  os << "N,eps,exceed_freq,replicas\n";
  for (const DetApproxRow& row : table.rows) {
    os << row.N << "," << format_double(row.eps) << "," << format_double(row.frequency) << ","
       << row.replicas << "\n";
  }
}

inline SampledPath read_path_csv(std::istream& is) {
  SampledPath path;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 3) throw std::runtime_error("path csv: need time plus n >= 2 coordinates");
    path.times.push_back(row[0]);
    path.states.push_back(SimplexPoint(std::vector<double>(row.begin() + 1, row.end())));
  }
  if (path.size() < 2) throw std::runtime_error("path csv: need at least 2 samples");
  path.step = path.times[1] - path.times[0];
  return path;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  return os;
}

}  // namespace evoldp

#endif  // EVOLDP_IO_HPP
