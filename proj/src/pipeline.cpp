#include "mavoid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mavoid/errors.hpp"

namespace mavoid {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path + "'");
}

void Overrides::apply(Scenario& s) const {
  if (h) {
    if (!(*h > 0.0) || !(*h <= s.bc.T)) throw InputError("--h must be in (0, T]");
    s.integrator.h = *h;
  }
  if (method) s.integrator.method = *method;
  if (convention) s.reference.convention = *convention;
  if (max_evals) {
    if (*max_evals < 1) throw InputError("--max-evals must be >= 1");
    s.solver.max_evals = *max_evals;
    // A forced budget is the whole budget.
    s.solver.restarts = 0;
  }
  if (r) {
    if (!(*r >= 0.0)) throw InputError("--r must be >= 0");
    s.bounded_r = *r;
  }
}

std::map<std::string, std::string> Overrides::echo() const {
  std::map<std::string, std::string> m;
  if (h) m["h"] = format_double(*h);
  if (method) m["method"] = to_string(*method);
  if (convention) m["convention"] = to_string(*convention);
  if (max_evals) m["max_evals"] = std::to_string(*max_evals);
  if (r) m["r"] = format_double(*r);
  return m;
}

std::vector<double> path_accel_maxima(const PathSamples& path) {
  if (path.manifold.is_sphere()) throw InputError("accelerations from a path are only supported on r<n>");
  if (path.v.empty()) throw InputError("trajectory has no velocity columns");
  const std::size_t N = path.t.size();
  if (N < 3) throw InputError("trajectory needs at least 3 samples");
  const std::size_t s = path.q.front().size();
  std::vector<double> a(s, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    // Central differences inside, second-order one-sided at the ends.
    for (std::size_t i = 0; i < s; ++i) {
      Vec acc;
      if (k == 0) {
        acc = (-3.0 * path.v[0][i] + 4.0 * path.v[1][i] - path.v[2][i]) / (path.t[2] - path.t[0]);
      } else if (k == N - 1) {
        acc = (3.0 * path.v[N - 1][i] - 4.0 * path.v[N - 2][i] + path.v[N - 3][i]) /
              (path.t[N - 1] - path.t[N - 3]);
      } else {
        acc = (path.v[k + 1][i] - path.v[k - 1][i]) / (path.t[k + 1] - path.t[k - 1]);
      }
      a[i] = std::max(a[i], acc.norm());
    }
  }
  return a;
}

ReferenceConstants path_constants(const PathSamples& path, double T, const InteractionGraph& g,
                                  const Tolerances& tol, const std::vector<double>& Vminus,
                                  ConstantsConvention convention) {
  const auto& edges = g.edges();
  if (tol.edges.size() != edges.size()) throw InputError("tolerances need one entry per edge");
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    for (std::size_t m = 0; m < edges.size(); ++m) {
      const double d = dist(path.manifold, path.q[k][edges[m].i], path.q[k][edges[m].j]);
      if (d <= tol.edges[m].R) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "reference leaves the safety region: edge (%d,%d) distance %.6g <= R = %.6g at t = %.6g",
                      edges[m].i + 1, edges[m].j + 1, d, tol.edges[m].R, path.t[k]);
        throw PreconditionError(buf);
      }
    }
  }
  std::vector<double> speeds;
  for (const auto& v : path.v.front()) speeds.push_back(v.norm());
  return constants_from_accel_bounds(path_accel_maxima(path), T, speeds, g, Vminus, convention);
}

std::vector<double> initial_potentials(const Scenario& s) {
  std::vector<double> out;
  for (const auto& e : s.graph.edges()) {
    const double d = dist(s.manifold, s.bc.agents[e.i].q0, s.bc.agents[e.j].q0);
    out.push_back(s.has_potential ? eval_potential(s.graph.params(e.i, e.j), d) : 0.0);
  }
  return out;
}

namespace {

std::vector<double> initial_speeds(const Scenario& s) {
  std::vector<double> v;
  for (const auto& a : s.bc.agents) v.push_back(a.v0.norm());
  return v;
}

}  // namespace

CertificateReport certify_scenario(const Scenario& s, const CertifyOptions& opt) {
  CertificateReport rep;
  const auto& g = s.graph;
  if (g.edges().empty()) throw InputError("scenario has no edges to certify");

  if (opt.bounded) {
    if (!s.has_potential) throw InputError("bounded certificates need a potential");
    if (opt.reference_csv) {
      throw InputError("bounded certificates need the full derivative stack of a solution; "
                       "trajectory files only hold positions and velocities");
    }
    const double r = opt.bounded_r ? *opt.bounded_r
                     : s.bounded_r ? *s.bounded_r
                                   : s.tolerances.edges.front().r;
    SolveReport solved;
    const SolveReport* sol = opt.solution;
    if (!sol) {
      solved = solve_bvp(s.problem(), s.solve_options());
      sol = &solved;
    }
    if (sol->trajectory.samples.empty()) throw NumericError("no solution trajectory to measure");
    const auto bounds = measure_bounds(sol->trajectory);
    const auto vminus = initial_potentials(s);
    std::vector<double> vstar;
    for (const auto& e : g.edges()) vstar.push_back(eval_potential(g.params(e.i, e.j), r));
    if (opt.vstar) vstar.assign(vstar.size(), *opt.vstar);
    rep.cert = certify_bounded(bounds, g, vminus, vstar);
    rep.bounds = bounds;
    rep.bounded_sum = bounded_sum(bounds, g, vminus);
    double limit = std::numeric_limits<double>::infinity();
    for (const auto& e : g.edges()) {
      limit = std::min(limit, radius_limit(g.params(e.i, e.j), *rep.bounded_sum));
    }
    rep.radius_limit = limit;
    rep.reference_source = std::string(sol->converged ? "converged" : "unconverged") +
                           " solution, V- at initial distances, r = " + format_double(r);
    return rep;
  }

  const auto convention = s.reference.convention;
  const auto& vminus = s.reference.Vminus;
  ReferenceConstants consts;
  if (opt.reference_csv) {
    const auto table = read_trajectory(read_file(*opt.reference_csv));
    if (table.path.manifold.name() != s.manifold.name()) {
      throw InputError("trajectory manifold " + table.path.manifold.name() +
                       " does not match the scenario (" + s.manifold.name() + ")");
    }
    if (table.path.q.front().size() != s.bc.agents.size()) {
      throw InputError("trajectory agent count does not match the scenario");
    }
    consts = path_constants(table.path, table.path.t.back() - table.path.t.front(), g,
                            s.tolerances, vminus, convention);
    rep.reference_source = "trajectory " + *opt.reference_csv;
  } else if (opt.accel_bound || !s.reference.accel_bounds.empty()) {
    std::vector<double> a = opt.accel_bound ? *opt.accel_bound : s.reference.accel_bounds;
    if (a.size() == 1) a.assign(s.bc.agents.size(), a.front());
    if (a.size() != s.bc.agents.size()) throw InputError("accel bounds need one value per agent");
    consts = constants_from_accel_bounds(a, s.bc.T, initial_speeds(s), g, vminus, convention);
    rep.reference_source = "declared acceleration bounds";
  } else if (s.reference.recipe) {
    const Trajectory ref = build_reference(*s.reference.recipe, s.bc, s.integrator.h);
    consts = reference_constants(ref, g, s.tolerances, vminus, convention);
    rep.reference_source = "reference recipe";
  } else {
    throw InputError("no reference available: give reference.recipe, reference.accel_bounds "
                     "or a trajectory file");
  }
  std::vector<double> vstar;
  if (opt.vstar) {
    vstar.assign(g.edges().size(), *opt.vstar);
  } else {
    if (!s.has_potential) throw InputError("scenario has no potential; pass V* explicitly");
    vstar = risk_boundary_potential(g, s.tolerances);
  }
  rep.cert = certify_minimizer(consts, g, s.tolerances, vstar);
  rep.constants = consts;
  return rep;
}

bool ReproduceResult::pass() const {
  return std::all_of(facts.begin(), facts.end(), [](const Fact& f) { return f.pass; });
}

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double min_distance(const std::vector<EdgeAvoidance>& av) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : av) m = std::min(m, a.min_distance);
  return m;
}

// Largest pairwise distance at each sample with t in [t0, t1]; returns the
// sample where it is smallest as (t, distance).
std::pair<double, double> tightest_cluster(const Trajectory& traj, const std::vector<Edge>& pairs,
                                           double t0, double t1) {
  std::pair<double, double> best{-1.0, std::numeric_limits<double>::infinity()};
  for (const auto& smp : traj.samples) {
    if (smp.t < t0 - 1e-12 || smp.t > t1 + 1e-12) continue;
    const auto q = positions(smp);
    double worst = 0.0;
    for (const auto& e : pairs) worst = std::max(worst, dist(traj.manifold, q[e.i], q[e.j]));
    if (worst < best.second) best = {smp.t, worst};
  }
  return best;
}

std::vector<Edge> all_pairs(int n) {
  std::vector<Edge> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

void facts_r3(ReproduceResult& r) {
  auto& F = r.facts;
  const double base = min_distance(r.baseline_avoidance);
  double base_t = 0.0;
  for (const auto& a : r.baseline_avoidance) {
    if (a.min_distance == base) base_t = a.argmin_t;
  }
  F.push_back({"1a.baseline_min_distance", "baseline (V = 0) minimum edge distance", base, "< 0.05",
               base < 0.05});
  F.push_back({"1a.baseline_argmin_t", "time of the baseline minimum", base_t, "in [1.5, 2.5]",
               base_t >= 1.5 && base_t <= 2.5});
  F.push_back({"1b.converged", "potential solve converged", r.solved.residual,
               "residual <= " + fmt("%g", r.scenario.solver.residual_tol), r.solved.converged});
  const double sol = min_distance(r.solved_avoidance);
  bool every = !r.solved_avoidance.empty();
  for (const auto& a : r.solved_avoidance) every = every && a.min_distance > 0.5;
  F.push_back({"1b.solved_min_distance", "minimum edge distance with potential", sol, "> 0.5", every});
  const auto& cert = r.certificate.cert;
  const double thr = *std::max_element(cert.threshold.begin(), cert.threshold.end());
  F.push_back({"1c.threshold", "certificate threshold (largest edge)", thr, "within 1% of 20290",
               std::abs(thr - 20290.0) <= 0.01 * 20290.0});
  const double vs = *std::min_element(cert.vstar.begin(), cert.vstar.end());
  F.push_back({"1c.vstar", "V(r*) = 1/(1e-5 + 2^-16)", vs, "within 0.1% of 65527",
               std::abs(vs - 65527.0) <= 0.001 * 65527.0});
  F.push_back({"1c.certificate", "minimizer certificate passes", cert.pass ? 1.0 : 0.0, "pass",
               cert.pass});

  // Constants measured on the reference recipe itself.
  const auto& s = r.scenario;
  if (s.reference.recipe) {
    const Trajectory ref = build_reference(*s.reference.recipe, s.bc, s.integrator.h);
    std::vector<double> a(s.bc.agents.size(), 0.0);
    for (const auto& smp : ref.samples) {
      const auto n = derivative_norms(smp);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], n[i].a);
    }
    const auto c = constants_from_accel_bounds(a, s.bc.T, initial_speeds(s), s.graph,
                                               s.reference.Vminus, ConstantsConvention::HalfPotential);
    const double amax = *std::max_element(a.begin(), a.end());
    F.push_back({"2.a_max", "largest measured reference acceleration", amax, "< 3.22", amax < 3.22});
    F.push_back({"2.c", "c from measured accelerations (half)", c.c, "< 187.759",
                 c.c < 185.9 * 1.01});
    double worst = 0.0;
    double vmax = 0.0;
    for (double v : c.v) {
      if (std::abs(v - 54.55) >= worst) {
        worst = std::abs(v - 54.55);
        vmax = v;
      }
    }
    F.push_back({"2.v", "speed bound furthest from 54.55", vmax, "within 0.1 of 54.55",
                 worst <= 0.1});
  }
}

void facts_s2(ReproduceResult& r) {
  auto& F = r.facts;
  const auto& s = r.scenario;
  const double rr = s.tolerances.edges.front().r;
  const auto [t_c, d_c] = tightest_cluster(r.baseline, all_pairs(s.agent_count()), 2.8, 3.1);
  F.push_back({"3a.geodesic_cluster", "largest geodesic pair distance at t = " + fmt("%.3f", t_c) +
                                          " (tightest sample in [2.8, 3.1])",
               d_c, "< r = " + fmt("%g", rr), d_c < rr});
  F.push_back({"3b.converged", "potential solve converged", r.solved.residual,
               "residual <= " + fmt("%g", s.solver.residual_tol), r.solved.converged});
  const double sol = min_distance(r.solved_avoidance);
  F.push_back({"3b.solved_min_distance", "minimum edge great-circle distance", sol, "> 0.401",
               sol > 0.401});
  const double sum = r.certificate.bounded_sum.value_or(std::numeric_limits<double>::infinity());
  F.push_back({"3c.bounded_sum", "bounded-derivative sum", sum, "< 10.32", sum < 10.32});
  const double limit = r.certificate.radius_limit.value_or(0.0);
  F.push_back({"3c.radius_limit", "radius certified by the measured sum", limit,
               "within 0.002 of 0.373", std::abs(limit - 0.373) <= 0.002});
  F.push_back({"3c.certificate", "bounded certificate passes at r = " + fmt("%g", *s.bounded_r),
               r.certificate.cert.pass ? 1.0 : 0.0, "pass", r.certificate.cert.pass});
}

}  // namespace

ReproduceResult reproduce(const std::string& which, const Overrides& ov, const Logger& log) {
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };
  ReproduceResult r;
  r.which = which;
  r.scenario = parse_scenario(bundled_scenario(which));
  ov.apply(r.scenario);
  r.overrides = ov.echo();
  const Scenario& s = r.scenario;
  const bool sphere = s.manifold.is_sphere();

  const ShootingProblem free = s.potential_free_problem();
  if (sphere) {
    say("geodesic baseline");
    r.baseline = shoot_trajectory(free, Vec::Zero(unknown_count(free)));
  } else {
    say("baseline solve without potential");
    SolveOptions o = s.solve_options();
    o.guess = GuessKind::CubicInit;
    r.baseline = solve_bvp(free, o).trajectory;
  }
  r.baseline_avoidance = check_avoidance(r.baseline, s.graph, s.tolerances);

  say("shooting solve with potential");
  const auto t0 = std::chrono::steady_clock::now();
  r.solved = solve_bvp(s.problem(), s.solve_options());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  say(r.solved.message + ", " + std::to_string(r.solved.function_evals) + " evaluations, " +
      fmt("%.1f", secs) + " s");
  if (!r.solved.trajectory.samples.empty()) {
    r.solved_avoidance = check_avoidance(r.solved.trajectory, s.graph, s.tolerances);
  }

  say("certificate");
  CertifyOptions co;
  co.bounded = sphere;
  co.solution = &r.solved;
  r.certificate = certify_scenario(s, co);
  r.certificate.overrides = r.overrides;

  if (sphere) {
    facts_s2(r);
  } else {
    facts_r3(r);
  }
  return r;
}

std::string reproduce_summary(const ReproduceResult& r) {
  ordered_json doc;
  doc["which"] = r.which;
  doc["pass"] = r.pass();
  ordered_json facts = ordered_json::array();
  for (const auto& f : r.facts) {
    facts.push_back({{"id", f.id},
                     {"description", f.description},
                     {"value", f.value},
                     {"expected", f.expected},
                     {"pass", f.pass}});
  }
  doc["facts"] = facts;
  doc["solve"] = {{"converged", r.solved.converged},
                  {"residual", r.solved.residual},
                  {"function_evals", r.solved.function_evals}};
  ordered_json edges = ordered_json::array();
  for (std::size_t k = 0; k < r.solved_avoidance.size(); ++k) {
    const auto& a = r.solved_avoidance[k];
    edges.push_back({{"edge", {a.edge.i + 1, a.edge.j + 1}},
                     {"baseline_min", r.baseline_avoidance[k].min_distance},
                     {"solved_min", a.min_distance},
                     {"solved_argmin_t", a.argmin_t}});
  }
  doc["edges"] = edges;
  if (!r.overrides.empty()) doc["overrides"] = r.overrides;
  return doc.dump(2) + "\n";
}

void write_bundle(const ReproduceResult& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create '" + dir + "': " + ec.message());
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  const auto& edges = r.scenario.graph.edges();
  write_file(path("baseline.csv"), write_trajectory(r.baseline, edges));
  if (!r.solved.trajectory.samples.empty()) {
    write_file(path("trajectory.csv"), write_trajectory(r.solved.trajectory, edges));
    write_file(path("plot.gp"),
               write_gnuplot_script(path_samples(r.solved.trajectory), "trajectory.csv"));
  }
  write_file(path("solve_report.json"),
             write_solve_report(r.solved, r.solved_avoidance, r.overrides));
  write_file(path("certificate.json"), write_certificate(r.certificate));
  write_file(path("summary.json"), reproduce_summary(r));
}

}  // namespace mavoid
