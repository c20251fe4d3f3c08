// Experiment runner for the evolutionary large-deviations toolkit.
//
// Subcommands: simulate, mean-dynamic, rest-point, cramer, path-cost,
// exit-time, stationary, rate-compare, laplace-dp, levelsets, verify.
// Every artifact embeds the config hash and master seed in its header.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evoldp/config.hpp"
#include "evoldp/control.hpp"
#include "evoldp/dynamics.hpp"
#include "evoldp/io.hpp"
#include "evoldp/largedev.hpp"
#include "evoldp/logit_potential.hpp"
#include "evoldp/process.hpp"
#include "evoldp/verify.hpp"

namespace {

using namespace evoldp;

struct CommonArgs {
  std::string game_file;
  std::string protocol = "logit:0.25";
  std::uint64_t seed = 1;
  std::string out;
  int workers = 0;
  long pop_size = 100;
  double horizon = 5.0;
  long mesh = 200;
};

GameSpec resolve_game(const CommonArgs& a) {
  if (!a.game_file.empty()) return load_game_file(a.game_file);
  return GameSpec{example_congestion_network()};
}

PotentialGame resolve_potential_game(const CommonArgs& a) {
  GameSpec g = resolve_game(a);
  if (const CongestionGame* c = g.congestion()) return PotentialGame::congestion_game(*c);
  if (const MatchingGame* m = g.matching()) return PotentialGame::symmetric_matching(*m);
  throw std::runtime_error("this subcommand needs a potential game (congestion or symmetric matching)");
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

std::vector<long> parse_longs(const std::string& text) {
  std::vector<long> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stol(cell));
  return v;
}

std::string canonical_config(const std::string& subcommand, const CommonArgs& a,
                             const std::string& extra) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["subcommand"] = subcommand;
  j["game"] = game_to_json(resolve_game(a));
  j["protocol"] = protocol_to_json(ProtocolSpec::parse(a.protocol));
  j["seed"] = a.seed;
  j["pop_size"] = a.pop_size;
  j["horizon"] = a.horizon;
  j["mesh"] = a.mesh;
  j["extra"] = extra;
  return j.dump();
}

std::ostream& output_stream(const CommonArgs& a, std::ofstream& file) {
  if (a.out.empty()) return std::cout;
  file = open_output(a.out);
  return file;
}

double eta_of(const ProtocolSpec& p) {
  if (const LogitProtocol* lp = p.logit()) return lp->eta;
  throw std::runtime_error("this subcommand requires a logit protocol");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evoldp: finite-population evolutionary dynamics and large-deviations rates"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand name

  CommonArgs a;
  app.add_option("--game", a.game_file, "game spec JSON file (default: 3-link congestion example)");
  app.add_option("--protocol", a.protocol, "protocol shorthand, e.g. logit:0.25");
  app.add_option("--seed", a.seed, "master seed");
  app.add_option("--out", a.out, "output file (default: stdout)");
  app.add_option("--workers", a.workers, "worker threads (0 = EVO_LDP_WORKERS or hardware)");
  app.add_option("--pop-size", a.pop_size, "population size N");
  app.add_option("--horizon", a.horizon, "clock-time horizon T");
  app.add_option("--mesh", a.mesh, "simplex mesh resolution");

  std::string x0_text, x_text, z_text, in_file, method = "dual", mode = "stationary";
  std::string target_text, pop_sizes_text = "50,100,200,400";
  double dt = 1e-3, eta_flag = 0.0, radius = 0.1, cap = 0.0, delta = 0.04;
  long replicas = 500;
  bool clever = false;

  CLI::App* simulate = app.add_subcommand("simulate", "sample one chain trajectory");
  simulate->add_option("--x0", x0_text, "initial state a,b,c (default uniform)");
  simulate->add_flag("--clever", clever, "clever payoff evaluation");

  CLI::App* meandyn = app.add_subcommand("mean-dynamic", "integrate the mean dynamic");
  meandyn->add_option("--x0", x0_text, "initial state (default uniform)");
  meandyn->add_option("--dt", dt, "RK4 step");

  app.add_subcommand("rest-point", "logit rest point of the mean dynamic");

  CLI::App* cramer = app.add_subcommand("cramer", "running cost L(x, z)");
  cramer->add_option("--x", x_text, "state a,b,c")->required();
  cramer->add_option("--z", z_text, "displacement dz1,dz2,...")->required();
  cramer->add_option("--method", method, "dual | primal_oracle");

  CLI::App* pathcost = app.add_subcommand("path-cost", "cost of a sampled path");
  pathcost->add_option("--in", in_file, "path CSV (time,x_1..x_n)")->required();

  CLI::App* exittime = app.add_subcommand("exit-time", "Monte Carlo exit times from an l1 ball");
  exittime->add_option("--radius", radius, "ball radius around the rest point");
  exittime->add_option("--replicas", replicas, "replica count");
  exittime->add_option("--cap", cap, "censoring horizon (0: auto)");

  CLI::App* stationary = app.add_subcommand("stationary", "stationary distribution of the chain");
  stationary->add_option("--method", method, "exact | birth_death | empirical");

  CLI::App* ratecmp = app.add_subcommand("rate-compare", "empirical rates vs closed-form exit costs");
  ratecmp->add_option("--mode", mode, "stationary | exit_time");
  ratecmp->add_option("--pop-sizes", pop_sizes_text, "comma-separated N list");
  ratecmp->add_option("--targets", target_text, "semicolon-separated states a,b;c,d");
  ratecmp->add_option("--delta", delta, "stationary ball radius");
  ratecmp->add_option("--radius", radius, "exit-time ball radius");
  ratecmp->add_option("--replicas", replicas, "exit-time replicas");

  CLI::App* laplace = app.add_subcommand("laplace-dp", "Laplace values V^N vs variational limit");
  laplace->add_option("--pop-sizes", pop_sizes_text, "comma-separated N list");
  laplace->add_option("--target", target_text, "terminal penalty target a,b");
  laplace->add_option("--x0", x0_text, "initial state (default uniform)");

  CLI::App* levelsets = app.add_subcommand("levelsets", "logit potential values on a simplex mesh");
  levelsets->add_option("--eta", eta_flag, "noise level (default: from --protocol)");

  app.add_subcommand("verify", "run the library invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    GameSpec game = resolve_game(a);
    ProtocolSpec protocol = ProtocolSpec::parse(a.protocol);
    const int n = game.num_actions();
    std::ofstream file;

    if (simulate->parsed()) {
      SimplexPoint x0 = x0_text.empty() ? SimplexPoint::uniform(n) : SimplexPoint(parse_point(x0_text));
      GridState start = GridState::nearest(x0, a.pop_size);
      SampledPath path = simulate_path(game, protocol, start, a.horizon, a.seed,
                                       clever ? EvalMode::clever : EvalMode::simple);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "simulate", canonical_config("simulate", a, x0_text), a.seed);
      write_path_csv(os, path);
      return 0;
    }

    if (meandyn->parsed()) {
      SimplexPoint x0 = x0_text.empty() ? SimplexPoint::uniform(n) : SimplexPoint(parse_point(x0_text));
      SampledPath path = integrate(mean_field(game, protocol), x0, a.horizon, dt);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "mean-dynamic", canonical_config("mean-dynamic", a, x0_text), a.seed);
      write_path_csv(os, path);
      return 0;
    }

    if (app.get_subcommand("rest-point")->parsed()) {
      double eta = eta_of(protocol);
      SimplexPoint rest = find_rest_point(game, LogitProtocol{eta}, SimplexPoint::uniform(n), 1e-12);
      std::ostream& os = output_stream(a, file);
      if (!a.out.empty()) {
        write_artifact_header(os, "rest-point", canonical_config("rest-point", a, ""), a.seed);
      }
      os << "rest_point:";
      for (int i = 0; i < n; ++i) os << " " << format_double(rest[i]);
      os << "\n";
      return 0;
    }

    if (cramer->parsed()) {
      SimplexPoint x{parse_point(x_text)};
      std::vector<double> z = parse_point(z_text);
      CramerMethod m = method == "primal_oracle" ? CramerMethod::primal_oracle : CramerMethod::dual;
      CramerResult r = cramer_transform(x, project_tangent(z), switch_matrix(game, protocol, x), m);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "cramer", canonical_config("cramer", a, x_text + "|" + z_text), a.seed);
      os << "x,z,value,method,iterations,residual\n";
      os << "\"" << x_text << "\",\"" << z_text << "\"," << format_double(r.value) << ","
         << (m == CramerMethod::dual ? "dual" : "primal_oracle") << "," << r.iterations << ","
         << format_double(r.residual) << "\n";
      return 0;
    }

    if (pathcost->parsed()) {
      std::ifstream is(in_file);
      if (!is) throw std::runtime_error("cannot open " + in_file);
      SampledPath path = read_path_csv(is);
      PathCost pc = path_cost(path, game, protocol);
      nlohmann::json j;
      j["config_hash"] = config_hash(canonical_config("path-cost", a, in_file));
      j["seed"] = a.seed;
      j["value"] = pc.finite() ? nlohmann::json(pc.value) : nlohmann::json("inf");
      if (!pc.finite()) j["infeasible_segment"] = *pc.infeasible_segment;
      std::ostream& os = output_stream(a, file);
      os << j.dump(2) << "\n";
      return 0;
    }

    if (exittime->parsed()) {
      PotentialGame pg = resolve_potential_game(a);
      double eta = eta_of(protocol);
      SimplexPoint rest = find_rest_point(game, LogitProtocol{eta}, SimplexPoint::uniform(n), 1e-12);
      double C = exit_cost_boundary(pg, eta, l1_sphere_mesh(rest, radius), rest);
      double horizon = cap > 0.0 ? cap : 200.0 * std::exp(C * static_cast<double>(a.pop_size));
      ExitProblem problem = ExitProblem::l1_ball(rest, radius, rest, horizon);
      ExitSummary s = exit_time_mc(game, protocol, a.pop_size, problem, replicas, a.seed,
                                   EvalMode::simple, a.workers);
      nlohmann::json j;
      j["config_hash"] = config_hash(canonical_config("exit-time", a, std::to_string(radius)));
      j["seed"] = a.seed;
      j["pop_size"] = a.pop_size;
      j["replicas"] = s.replicas;
      j["censored"] = s.censored;
      j["all_censored"] = s.all_censored;
      if (!s.all_censored) {
        j["mean"] = s.mean;
        j["median"] = s.median;
        j["quantiles"] = {{"q05", s.q05}, {"q25", s.q25}, {"q75", s.q75}, {"q95", s.q95}};
        j["rate"] = s.rate;
        j["exit_cost_reference"] = C;
      }
      std::ostream& os = output_stream(a, file);
      os << j.dump(2) << "\n";
      return 0;
    }

    if (stationary->parsed()) {
      StationaryMethod m = StationaryMethod::exact;
      if (method == "birth_death") m = StationaryMethod::birth_death;
      if (method == "empirical") m = StationaryMethod::empirical;
      StationaryResult r = stationary_distribution(game, protocol, a.pop_size, m,
                                                   EvalMode::simple, 100000, 1000000, a.seed);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "stationary", canonical_config("stationary", a, method), a.seed);
      for (int i = 0; i < n; ++i) os << "count_" << (i + 1) << ",";
      os << "mass\n";
      for (std::size_t k = 0; k < r.grid.size(); ++k) {
        for (long c : r.grid.counts(k)) os << c << ",";
        os << format_double(r.mass[k]) << "\n";
      }
      return 0;
    }

    if (ratecmp->parsed()) {
      PotentialGame pg = resolve_potential_game(a);
      double eta = eta_of(protocol);
      std::vector<long> Ns = parse_longs(pop_sizes_text);
      std::vector<SimplexPoint> targets;
      if (!target_text.empty()) {
        std::stringstream ss(target_text);
        std::string part;
        while (std::getline(ss, part, ';')) targets.push_back(SimplexPoint(parse_point(part)));
      }
      RateCompareOptions opt;
      opt.delta = delta;
      opt.ball_radius = radius;
      opt.replicas = replicas;
      opt.seed = a.seed;
      opt.workers = a.workers;
      RateCompareMode m = mode == "exit_time" ? RateCompareMode::exit_time : RateCompareMode::stationary;
      if (m == RateCompareMode::stationary && targets.empty())
        throw std::runtime_error("rate-compare stationary mode needs --targets");
      RateCompareTable t = rate_compare(pg, eta, m, Ns, targets, opt);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "rate-compare", canonical_config("rate-compare", a, mode), a.seed);
      os << "N,target,rate,reference,gap\n";
      for (const auto& row : t.rows) {
        os << row.N << "," << row.target << "," << format_double(row.rate) << ","
           << format_double(row.reference) << "," << format_double(row.gap) << "\n";
      }
      return 0;
    }

    if (laplace->parsed()) {
      std::vector<long> Ns = parse_longs(pop_sizes_text);
      SimplexPoint target = target_text.empty() ? SimplexPoint::vertex(n, 0)
                                                : SimplexPoint(parse_point(target_text));
      SimplexPoint x0 = x0_text.empty() ? SimplexPoint::uniform(n) : SimplexPoint(parse_point(x0_text));
      TerminalObjective h = TerminalObjective::squared_distance(target);
      VariationalResult var = laplace_variational(game, protocol, h, x0);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "laplace-dp", canonical_config("laplace-dp", a, target_text), a.seed);
      os << "N,VN,variational,gap\n";
      for (long N : Ns) {
        double vn = laplace_dp_value(game, protocol, N, h, GridState::nearest(x0, N)).value;
        os << N << "," << format_double(vn) << "," << format_double(var.value) << ","
           << format_double(std::abs(var.value - vn)) << "\n";
      }
      return 0;
    }

    if (levelsets->parsed()) {
      PotentialGame pg = resolve_potential_game(a);
      double eta = eta_flag > 0.0 ? eta_flag : eta_of(protocol);
      std::ostream& os = output_stream(a, file);
      write_artifact_header(os, "levelsets", canonical_config("levelsets", a, std::to_string(eta)),
                            a.seed);
      for (int i = 0; i < n; ++i) os << "x_" << (i + 1) << ",";
      os << "f_eta\n";
      for (const SimplexPoint& x : simplex_mesh(n, a.mesh)) {
        for (int i = 0; i < n; ++i) os << format_double(x[i]) << ",";
        os << format_double(logit_potential_value(pg, eta, x)) << "\n";
      }
      return 0;
    }

    if (app.get_subcommand("verify")->parsed()) {
      std::vector<CheckResult> results = run_invariant_suite();
      bool all = true;
      for (const CheckResult& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " — " << r.detail << "\n";
        all = all && r.passed;
      }
      std::cout << (all ? "verify: all invariant suites passed\n"
                        : "verify: FAILURES detected\n");
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: unknown subcommand\n";
  return 2;
}
