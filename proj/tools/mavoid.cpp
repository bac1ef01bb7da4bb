// mavoid: solve, certify, tune, check and reproduce from the command line.
//
// Exit codes: 0 success, 1 input error, 2 solver did not converge,
// 3 certificate/avoidance/infeasibility failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mavoid/errors.hpp"
#include "mavoid/pipeline.hpp"

using namespace mavoid;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kInput = 1;
constexpr int kNoConvergence = 2;
constexpr int kFail = 3;

struct Flags {
  std::string scenario;
  std::string out = ".";
  std::optional<double> h;
  std::string method;
  std::string convention;
  std::optional<long> max_evals;
  std::optional<double> r;
  bool bounded = false;
  std::optional<double> vstar;
  std::string reference;
  std::vector<double> accel_bound;
  std::string report;
  std::string which;
};

Overrides overrides_from(const Flags& f) {
  Overrides ov;
  ov.h = f.h;
  if (!f.method.empty()) ov.method = integrator_from_string(f.method);
  if (!f.convention.empty()) ov.convention = constants_convention_from_string(f.convention);
  ov.max_evals = f.max_evals;
  ov.r = f.r;
  return ov;
}

std::string out_path(const Flags& f, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  if (ec) throw InputError("cannot create '" + f.out + "': " + ec.message());
  return (std::filesystem::path(f.out) / name).string();
}

ordered_json avoidance_json(const std::vector<EdgeAvoidance>& av) {
  ordered_json a = ordered_json::array();
  for (const auto& e : av) {
    a.push_back({{"edge", {e.edge.i + 1, e.edge.j + 1}},
                 {"min_distance", e.min_distance},
                 {"argmin_t", e.argmin_t},
                 {"avoided", e.avoided}});
  }
  return a;
}

int cmd_solve(const Flags& f) {
  Scenario s = load_scenario(f.scenario);
  const Overrides ov = overrides_from(f);
  ov.apply(s);
  std::cerr << "solving " << f.scenario << " (" << unknown_count(s.problem()) << " unknowns)\n";
  const SolveReport rep = solve_bvp(s.problem(), s.solve_options());
  std::cerr << rep.message << "\n";
  std::vector<EdgeAvoidance> av;
  if (!rep.trajectory.samples.empty()) {
    av = check_avoidance(rep.trajectory, s.graph, s.tolerances);
    write_file(out_path(f, "trajectory.csv"), write_trajectory(rep.trajectory, s.graph.edges()));
    write_file(out_path(f, "plot.gp"),
               write_gnuplot_script(path_samples(rep.trajectory), "trajectory.csv"));
  }
  write_file(out_path(f, "solve_report.json"), write_solve_report(rep, av, ov.echo()));
  ordered_json doc;
  doc["converged"] = rep.converged;
  doc["residual"] = rep.residual;
  doc["function_evals"] = rep.function_evals;
  doc["samples"] = rep.trajectory.samples.size();
  doc["avoidance"] = avoidance_json(av);
  if (!ov.echo().empty()) doc["overrides"] = ov.echo();
  std::cout << doc.dump(2) << "\n";
  return rep.converged ? kOk : kNoConvergence;
}

int cmd_certify(const Flags& f) {
  Scenario s = load_scenario(f.scenario);
  const Overrides ov = overrides_from(f);
  ov.apply(s);
  CertifyOptions co;
  co.bounded = f.bounded;
  co.bounded_r = f.r;
  co.vstar = f.vstar;
  if (!f.reference.empty() && f.reference != "recipe") co.reference_csv = f.reference;
  if (!f.accel_bound.empty()) co.accel_bound = f.accel_bound;
  if (f.bounded) std::cerr << "solving for the bounded certificate\n";
  CertificateReport rep = certify_scenario(s, co);
  rep.overrides = ov.echo();
  const std::string text = write_certificate(rep);
  write_file(out_path(f, "certificate.json"), text);
  std::cout << text;
  if (!rep.cert.pass) std::cerr << "certificate fails\n";
  return rep.cert.pass ? kOk : kFail;
}

int cmd_tune(const Flags& f) {
  Scenario s = load_scenario(f.scenario);
  const Overrides ov = overrides_from(f);
  ov.apply(s);
  CertifyOptions co;
  co.vstar = 0.0;  // constants only; V* is irrelevant here
  if (!f.reference.empty() && f.reference != "recipe") co.reference_csv = f.reference;
  if (!f.accel_bound.empty()) co.accel_bound = f.accel_bound;
  // Tuning is certified against V- = 1.
  s.reference.Vminus.assign(s.graph.edges().size(), 1.0);
  const CertificateReport base = certify_scenario(s, co);
  const auto params = tune_potential(s.graph, s.tolerances, *base.constants);
  Scenario tuned = s;
  tuned.graph = InteractionGraph(s.agent_count());
  for (std::size_t m = 0; m < params.size(); ++m) {
    const auto& e = s.graph.edges()[m];
    tuned.graph.add_edge(e.i, e.j, params[m]);
  }
  tuned.has_potential = true;
  const std::string text = scenario_to_json(tuned);
  write_file(out_path(f, "tuned_scenario.json"), text);
  ordered_json doc;
  doc["tuned"] = out_path(f, "tuned_scenario.json");
  doc["c"] = base.constants->c;
  ordered_json edges = ordered_json::array();
  for (std::size_t m = 0; m < params.size(); ++m) {
    const auto& e = s.graph.edges()[m];
    edges.push_back({{"edge", {e.i + 1, e.j + 1}},
                     {"D", params[m].D},
                     {"eps", params[m].eps},
                     {"k", params[m].k}});
  }
  doc["edges"] = edges;
  std::cout << doc.dump(2) << "\n";
  return kOk;
}

int cmd_check(const Flags& f) {
  const auto table = read_trajectory(read_file(f.scenario));
  Tolerances tol;
  InteractionGraph g(static_cast<int>(table.path.q.front().size()));
  for (const auto& e : table.edges) g.add_edge(e.i, e.j, PotentialParams{});
  if (!f.report.empty()) {
    // Tolerances from a scenario file.
    const Scenario s = load_scenario(f.report);
    for (const auto& e : g.edges()) {
      if (s.graph.edge_index(e.i, e.j) < 0) {
        throw InputError("edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                         ") of the trajectory is not in " + f.report);
      }
      tol.edges.push_back(s.tolerances.at(s.graph, e.i, e.j));
    }
  } else if (f.r) {
    if (*f.r < 0.0) throw InputError("--r must be >= 0");
    for (std::size_t m = 0; m < g.edges().size(); ++m) {
      // Only r matters for avoidance; the other radii just keep the record valid.
      tol.edges.push_back({*f.r, *f.r + 1.0, *f.r + 2.0});
    }
  } else {
    throw InputError("check needs --r or --scenario for the tolerances");
  }
  const auto av = check_avoidance(table.path, g, tol);
  bool all = true;
  for (const auto& a : av) all = all && a.avoided;
  ordered_json doc;
  doc["avoided"] = all;
  doc["edges"] = avoidance_json(av);
  const std::string text = doc.dump(2) + "\n";
  if (f.out != ".") write_file(out_path(f, "avoidance.json"), text);
  std::cout << text;
  return all ? kOk : kFail;
}

int cmd_reproduce(const Flags& f) {
  const Overrides ov = overrides_from(f);
  const auto r = reproduce(f.which, ov, [](const std::string& m) { std::cerr << m << "\n"; });
  write_bundle(r, f.out);
  for (const auto& fact : r.facts) {
    std::cerr << (fact.pass ? "PASS " : "FAIL ") << fact.id << ": " << format_double(fact.value)
              << " (expected " << fact.expected << ")\n";
  }
  std::cout << reproduce_summary(r);
  return r.pass() ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-avoiding multi-agent trajectories on R^n and S^2"};
  app.require_subcommand(1);
  // -h is taken by the step size.
  app.set_help_flag("--help", "print this help message and exit");
  Flags f;

  auto common = [&](CLI::App* c) {
    c->set_help_flag("--help", "print this help message and exit");
    c->add_option("--out", f.out, "output directory");
    c->add_option("--h", f.h, "integration step");
    c->add_option("--method", f.method, "euler or rk4")->check(CLI::IsMember({"euler", "rk4"}));
  };

  auto* solve = app.add_subcommand("solve", "shooting solve of a scenario");
  solve->add_option("scenario", f.scenario, "scenario JSON")->required();
  common(solve);
  solve->add_option("--max-evals", f.max_evals, "objective evaluation budget");

  auto* certify = app.add_subcommand("certify", "safety certificate of a scenario");
  certify->add_option("scenario", f.scenario, "scenario JSON")->required();
  common(certify);
  certify->add_option("--convention", f.convention, "strict or half")
      ->check(CLI::IsMember({"strict", "half"}));
  certify->add_option("--reference", f.reference, "recipe (default) or a trajectory CSV");
  certify->add_option("--vstar", f.vstar, "force V* on every edge");
  certify->add_option("--accel-bound", f.accel_bound, "declared acceleration bound(s)");
  certify->add_flag("--bounded", f.bounded, "bounded-derivative certificate of the solution");
  certify->add_option("--r", f.r, "collision radius for --bounded");
  certify->add_option("--max-evals", f.max_evals, "objective evaluation budget for --bounded");

  auto* tune = app.add_subcommand("tune", "choose certified potential parameters");
  tune->add_option("scenario", f.scenario, "scenario JSON")->required();
  tune->set_help_flag("--help", "print this help message and exit");
  tune->add_option("--out", f.out, "output directory");
  tune->add_option("--convention", f.convention, "strict or half")
      ->check(CLI::IsMember({"strict", "half"}));
  tune->add_option("--reference", f.reference, "recipe (default) or a trajectory CSV");
  tune->add_option("--accel-bound", f.accel_bound, "declared acceleration bound(s)");

  auto* check = app.add_subcommand("check", "avoidance report of a trajectory CSV");
  check->add_option("trajectory", f.scenario, "trajectory CSV")->required();
  check->add_option("--r", f.r, "collision radius for every edge");
  check->add_option("--scenario", f.report, "take per-edge tolerances from a scenario");
  check->set_help_flag("--help", "print this help message and exit");
  check->add_option("--out", f.out, "output directory");

  auto* repro = app.add_subcommand("reproduce", "run a bundled scenario end to end");
  repro->add_option("which", f.which, "r3 or s2")->required()->check(CLI::IsMember({"r3", "s2"}));
  common(repro);
  repro->add_option("--convention", f.convention, "strict or half")
      ->check(CLI::IsMember({"strict", "half"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kOk : kInput;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kOk : kInput;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*solve) return cmd_solve(f);
    if (*certify) return cmd_certify(f);
    if (*tune) return cmd_tune(f);
    if (*check) return cmd_check(f);
    if (*repro) return cmd_reproduce(f);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kFail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
