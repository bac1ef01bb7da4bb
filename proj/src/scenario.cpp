#include "mavoid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mavoid/errors.hpp"

namespace mavoid {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InputError(path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string edge_label(const Edge& e) {
  return "[" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "]";
}

void check_keys(const json& o, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!o.is_object()) fail(path.empty() ? "document" : path, "expected an object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(join(path, it.key()), "unknown key");
  }
}

const json& require(const json& o, const std::string& path, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) fail(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

long as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e15) return static_cast<long>(x);
  }
  fail(path, "expected an integer");
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Vec as_vec(const json& v, const std::string& path, int dim) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  if (dim >= 0 && static_cast<int>(v.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = as_number(v[i], index(path, i));
  return out;
}

Mat3 as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected a 3x3 array (row-major)");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec row = as_vec(v[r], index(path, r), 3);
    m.row(r) = row.transpose();
  }
  return m;
}

Manifold parse_manifold(const json& v, const std::string& path) {
  const std::string s = as_string(v, path);
  if (s == "s2") return Manifold::sphere();
  if (s.size() >= 2 && s[0] == 'r') {
    try {
      std::size_t used = 0;
      const int n = std::stoi(s.substr(1), &used);
      if (used == s.size() - 1 && n >= 1) return Manifold::euclidean(n);
    } catch (const std::exception&) {
    }
  }
  fail(path, "unknown manifold '" + s + "' (expected r<n> or s2)");
}

PotentialParams parse_potential(const json& o, const std::string& path, bool allow_edge) {
  if (allow_edge) {
    check_keys(o, path, {"edge", "family", "D", "eps", "k"});
  } else {
    check_keys(o, path, {"family", "D", "eps", "k"});
  }
  PotentialParams p;
  if (o.contains("family")) {
    try {
      p.family = potential_family_from_string(as_string(o["family"], join(path, "family")));
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind(path, 0) == 0) throw;
      fail(join(path, "family"), e.what());
    }
  }
  p.D = as_number(require(o, path, "D"), join(path, "D"));
  p.eps = as_number(require(o, path, "eps"), join(path, "eps"));
  const long k = as_integer(require(o, path, "k"), join(path, "k"));
  p.k = static_cast<int>(std::clamp<long>(k, -1, 1000000));
  try {
    p.validate();
  } catch (const InputError& e) {
    throw InputError(path + "." + e.what());
  }
  // The gradient is singular at coincident agents for k = 1.
  if (p.k < 2) throw InputError(path + ".k must be >= 2");
  return p;
}

EdgeTolerance parse_tolerance(const json& o, const std::string& path, bool allow_edge) {
  if (allow_edge) {
    check_keys(o, path, {"edge", "r", "r_star", "R"});
  } else {
    check_keys(o, path, {"r", "r_star", "R"});
  }
  EdgeTolerance t;
  t.r = as_number(require(o, path, "r"), join(path, "r"));
  t.r_star = as_number(require(o, path, "r_star"), join(path, "r_star"));
  t.R = as_number(require(o, path, "R"), join(path, "R"));
  return t;
}

Edge parse_edge(const json& v, const std::string& path, int agents) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [i, j]");
  const long i = as_integer(v[0], index(path, 0));
  const long j = as_integer(v[1], index(path, 1));
  if (i < 1 || j < 1 || i > agents || j > agents) {
    fail(path, "agent index out of range 1.." + std::to_string(agents));
  }
  if (i == j) fail(path, "self-loop");
  return Edge{static_cast<int>(std::min(i, j)) - 1, static_cast<int>(std::max(i, j)) - 1};
}

// Geodesic endpoint for the given start data.
void geodesic_terminal(const Manifold& m, double T, AgentBoundary& a) {
  if (!m.is_sphere()) {
    a.qT = a.q0 + T * a.v0;
    a.vT = a.v0;
    return;
  }
  const Mat3 R0 = a.R0 ? *a.R0 : frame_from_point(a.q0.head<3>(), a.v0.head<3>()).matrix();
  const Vec3 xi = body_velocity(R0, a.v0.head<3>());
  const Mat3 RT = reorthonormalize(R0 * exp_rotation(T * xi).matrix()).matrix();
  a.qT = RT.col(0);
  a.vT = ambient_velocity(RT, xi);
}

AgentBoundary parse_agent(const json& o, const std::string& path, const Manifold& m, double T) {
  check_keys(o, path, {"q0", "v0", "qT", "vT", "R0", "xi0", "terminal"});
  const int dim = m.ambient_dim();
  AgentBoundary a;
  if (o.contains("R0") || o.contains("xi0")) {
    if (!m.is_sphere()) fail(join(path, "R0"), "R0/xi0 are only valid on s2");
    if (o.contains("q0") || o.contains("v0")) fail(path, "give either R0/xi0 or q0/v0, not both");
    const Mat3 R = as_matrix(require(o, path, "R0"), join(path, "R0"));
    try {
      Rotation check(R, 1e-6);
      (void)check;
    } catch (const InputError& e) {
      fail(join(path, "R0"), e.what());
    }
    const Mat3 R0 = reorthonormalize(R).matrix();
    const Vec xi = as_vec(require(o, path, "xi0"), join(path, "xi0"), 3);
    if (std::abs(xi[0]) > 1e-9) fail(join(path, "xi0"), "first component must be 0 (horizontal)");
    a.R0 = R0;
    a.xi0 = xi.head<3>();
    a.q0 = R0.col(0);
    a.v0 = ambient_velocity(R0, xi.head<3>());
  } else {
    a.q0 = as_vec(require(o, path, "q0"), join(path, "q0"), dim);
    a.v0 = as_vec(require(o, path, "v0"), join(path, "v0"), dim);
  }
  if (o.contains("terminal")) {
    if (as_string(o["terminal"], join(path, "terminal")) != "geodesic") {
      fail(join(path, "terminal"), "only \"geodesic\" is supported");
    }
    if (o.contains("qT") || o.contains("vT")) fail(path, "give either terminal or qT/vT");
    try {
      validate_point(m, a.q0);
      validate_tangent(m, a.q0, a.v0);
    } catch (const InputError& e) {
      fail(path, e.what());
    }
    geodesic_terminal(m, T, a);
  } else {
    a.qT = as_vec(require(o, path, "qT"), join(path, "qT"), dim);
    a.vT = as_vec(require(o, path, "vT"), join(path, "vT"), dim);
  }
  return a;
}

RecipeSegment parse_segment(const json& o, const std::string& path, int dim) {
  if (!o.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(require(o, path, "kind"), join(path, "kind"));
  RecipeSegment s;
  if (kind == "cubic") {
    check_keys(o, path, {"kind", "t1", "q1", "v1"});
    s.kind = RecipeSegment::Kind::Cubic;
    if (o.contains("q1") != o.contains("v1")) fail(path, "give both q1 and v1 or neither");
    if (o.contains("q1")) {
      s.q1 = as_vec(o["q1"], join(path, "q1"), dim);
      s.v1 = as_vec(o["v1"], join(path, "v1"), dim);
    }
  } else if (kind == "arc") {
    check_keys(o, path, {"kind", "t1", "center", "radius", "rate", "normal"});
    s.kind = RecipeSegment::Kind::Arc;
    s.center = as_vec(require(o, path, "center"), join(path, "center"), dim);
    s.radius = as_number(require(o, path, "radius"), join(path, "radius"));
    if (!(s.radius > 0.0)) fail(join(path, "radius"), "must be > 0");
    s.rate = as_number(require(o, path, "rate"), join(path, "rate"));
    if (dim == 3) {
      s.normal = o.contains("normal") ? as_vec(o["normal"], join(path, "normal"), 3)
                                      : Vec(Vec3::UnitZ());
      if (s.normal.norm() < 1e-12) fail(join(path, "normal"), "must be nonzero");
    } else if (dim != 2) {
      fail(path, "arcs need a 2- or 3-dimensional space");
    } else if (o.contains("normal")) {
      fail(join(path, "normal"), "not used in two dimensions");
    }
  } else {
    fail(join(path, "kind"), "unknown segment kind '" + kind + "' (expected cubic or arc)");
  }
  s.t1 = as_number(require(o, path, "t1"), join(path, "t1"));
  return s;
}

std::vector<double> per_edge_values(const json& v, const std::string& path, std::size_t n) {
  if (v.is_number()) return std::vector<double>(n, as_number(v, path));
  const Vec x = as_vec(v, path, static_cast<int>(n));
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::pair<int, int> location(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ShootingProblem Scenario::problem() const {
  if (!has_potential && !graph.edges().empty()) {
    throw InputError("potential: missing (needed to solve with edges)");
  }
  ShootingProblem p;
  p.bc = bc;
  p.graph = graph;
  p.integrator = integrator;
  p.w_position = solver.w_position;
  p.w_velocity = solver.w_velocity;
  return p;
}

ShootingProblem Scenario::potential_free_problem() const {
  ShootingProblem p;
  p.bc = bc;
  p.graph = InteractionGraph(agent_count());
  p.integrator = integrator;
  p.w_position = solver.w_position;
  p.w_velocity = solver.w_velocity;
  return p;
}

SolveOptions Scenario::solve_options() const {
  SolveOptions o;
  o.guess = solver.guess;
  o.initial = solver.initial;
  o.residual_tol = solver.residual_tol;
  o.restarts = solver.restarts;
  o.nm.ftol = solver.ftol;
  o.nm.xtol = solver.xtol;
  o.nm.max_evals = solver.max_evals;
  o.direct_nodes = solver.direct_nodes;
  if (solver.guess == GuessKind::Direct && reference.recipe) {
    // Seed the direct warm start with the reference curve, linearly
    // interpolated between its grid samples.
    auto ref = std::make_shared<Trajectory>(build_reference(*reference.recipe, bc, integrator.h));
    o.warm_path = [ref](int agent, double t) {
      const auto& smp = ref->samples;
      const double u = std::clamp(t / ref->h, 0.0, static_cast<double>(smp.size() - 1));
      const auto k = std::min(static_cast<std::size_t>(u), smp.size() - 2);
      const double a = u - static_cast<double>(k);
      return Vec((1.0 - a) * positions(smp[k])[agent] + a * positions(smp[k + 1])[agent]);
    };
  }
  if (solver.adaptive) {
    const double n = std::max(2, 2 * manifold.intrinsic_dim() * agent_count());
    o.nm.expand = 1.0 + 2.0 / n;
    o.nm.contract = 0.75 - 0.5 / n;
    o.nm.shrink = 1.0 - 1.0 / n;
  }
  return o;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = location(text, e.byte);
    std::ostringstream os;
    os << "syntax error at line " << line << ", column " << col << ": " << e.what();
    throw ParseError(os.str(), line, col);
  }
  check_keys(doc, "",
             {"name", "description", "manifold", "T", "agents", "edges", "potential",
              "edge_potentials", "tolerances", "edge_tolerances", "integrator", "solver",
              "reference", "bounded"});

  Scenario s;
  if (doc.contains("name")) s.name = as_string(doc["name"], "name");
  if (doc.contains("description")) as_string(doc["description"], "description");
  s.manifold = parse_manifold(require(doc, "", "manifold"), "manifold");
  s.bc.manifold = s.manifold;
  s.bc.T = as_number(require(doc, "", "T"), "T");
  if (!(s.bc.T > 0.0)) fail("T", "must be > 0");

  const json& agents = require(doc, "", "agents");
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a non-empty array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    s.bc.agents.push_back(parse_agent(agents[i], index("agents", i), s.manifold, s.bc.T));
  }
  for (std::size_t i = 0; i < s.bc.agents.size(); ++i) {
    const auto& a = s.bc.agents[i];
    const std::string path = index("agents", i);
    try {
      validate_point(s.manifold, a.q0);
      validate_tangent(s.manifold, a.q0, a.v0);
    } catch (const InputError& e) {
      fail(path + ".q0/v0", e.what());
    }
    try {
      validate_point(s.manifold, a.qT);
      validate_tangent(s.manifold, a.qT, a.vT);
    } catch (const InputError& e) {
      fail(path + ".qT/vT", e.what());
    }
  }
  const int n = s.agent_count();

  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    const json& e = doc["edges"];
    if (!e.is_array()) fail("edges", "expected an array of [i, j] pairs");
    for (std::size_t k = 0; k < e.size(); ++k) {
      const Edge edge = parse_edge(e[k], index("edges", k), n);
      for (const Edge& prev : edges) {
        if (prev == edge) fail(index("edges", k), "duplicate edge " + edge_label(edge));
      }
      edges.push_back(edge);
    }
  }

  std::optional<PotentialParams> base;
  if (doc.contains("potential")) base = parse_potential(doc["potential"], "potential", false);
  std::vector<std::optional<PotentialParams>> per_edge(edges.size());
  if (doc.contains("edge_potentials")) {
    const json& ep = doc["edge_potentials"];
    if (!ep.is_array()) fail("edge_potentials", "expected an array");
    for (std::size_t k = 0; k < ep.size(); ++k) {
      const std::string path = index("edge_potentials", k);
      const PotentialParams p = parse_potential(ep[k], path, true);
      const Edge e = parse_edge(require(ep[k], path, "edge"), join(path, "edge"), n);
      bool found = false;
      for (std::size_t m = 0; m < edges.size(); ++m) {
        if (edges[m] == e) {
          if (per_edge[m]) fail(path, "edge " + edge_label(e) + " given twice");
          per_edge[m] = p;
          found = true;
        }
      }
      if (!found) fail(join(path, "edge"), "edge " + edge_label(e) + " is not in edges");
    }
  }
  s.has_potential = !edges.empty();
  for (std::size_t m = 0; m < edges.size(); ++m) {
    if (!per_edge[m] && !base) s.has_potential = false;
  }
  if (!s.has_potential && doc.contains("edge_potentials") && !base) {
    for (std::size_t m = 0; m < edges.size(); ++m) {
      if (!per_edge[m]) fail("edge_potentials", "no potential for edge " + edge_label(edges[m]));
    }
  }
  s.graph = InteractionGraph(n);
  for (std::size_t m = 0; m < edges.size(); ++m) {
    const PotentialParams p = per_edge[m] ? *per_edge[m] : base.value_or(PotentialParams{});
    s.graph.add_edge(edges[m].i, edges[m].j, p);
  }

  std::optional<EdgeTolerance> base_tol;
  if (doc.contains("tolerances")) base_tol = parse_tolerance(doc["tolerances"], "tolerances", false);
  std::vector<std::optional<EdgeTolerance>> tol(edges.size());
  if (doc.contains("edge_tolerances")) {
    const json& et = doc["edge_tolerances"];
    if (!et.is_array()) fail("edge_tolerances", "expected an array");
    for (std::size_t k = 0; k < et.size(); ++k) {
      const std::string path = index("edge_tolerances", k);
      const EdgeTolerance t = parse_tolerance(et[k], path, true);
      const Edge e = parse_edge(require(et[k], path, "edge"), join(path, "edge"), n);
      const int m = s.graph.edge_index(e.i, e.j);
      if (m < 0) fail(join(path, "edge"), "edge " + edge_label(e) + " is not in edges");
      if (tol[m]) fail(path, "edge " + edge_label(e) + " given twice");
      tol[m] = t;
    }
  }
  for (std::size_t m = 0; m < edges.size(); ++m) {
    if (!tol[m]) {
      if (!base_tol) fail("tolerances", "missing for edge " + edge_label(edges[m]));
      tol[m] = base_tol;
    }
    try {
      tol[m]->validate();
    } catch (const InputError& e) {
      throw InputError("tolerances.edge" + edge_label(edges[m]) + ": " + e.what());
    }
    s.tolerances.edges.push_back(*tol[m]);
  }

  if (doc.contains("integrator")) {
    const json& o = doc["integrator"];
    check_keys(o, "integrator", {"method", "h"});
    if (o.contains("method")) {
      try {
        s.integrator.method = integrator_from_string(as_string(o["method"], "integrator.method"));
      } catch (const InputError& e) {
        if (std::string(e.what()).rfind("integrator", 0) == 0) throw;
        fail("integrator.method", e.what());
      }
    }
    if (o.contains("h")) {
      s.integrator.h = as_number(o["h"], "integrator.h");
      if (!(s.integrator.h > 0.0)) fail("integrator.h", "must be > 0");
    }
  }
  if (s.bc.T / s.integrator.h > 5e7) fail("integrator.h", "too small for the horizon");

  if (doc.contains("solver")) {
    const json& o = doc["solver"];
    check_keys(o, "solver",
               {"guess", "residual_tol", "max_evals", "ftol", "xtol", "restarts", "adaptive",
                "w_position", "w_velocity", "direct_nodes"});
    auto& sv = s.solver;
    if (o.contains("guess")) {
      const json& g = o["guess"];
      if (g.is_string()) {
        const std::string v = g.get<std::string>();
        if (v == "zero") {
          sv.guess = GuessKind::Zero;
        } else if (v == "cubic-init") {
          sv.guess = GuessKind::CubicInit;
        } else if (v == "direct") {
          if (s.manifold.is_sphere()) fail("solver.guess", "\"direct\" is only available on r<n>");
          sv.guess = GuessKind::Direct;
        } else {
          fail("solver.guess",
               "expected \"zero\", \"cubic-init\", \"direct\" or an array of unknowns");
        }
      } else {
        const int count = 2 * s.manifold.intrinsic_dim() * n;
        sv.guess = GuessKind::Given;
        sv.initial = as_vec(g, "solver.guess", count);
      }
    }
    auto positive = [&](const char* key, double& out) {
      if (!o.contains(key)) return;
      out = as_number(o[key], join("solver", key));
      if (!(out > 0.0)) fail(join("solver", key), "must be > 0");
    };
    positive("residual_tol", sv.residual_tol);
    positive("ftol", sv.ftol);
    positive("xtol", sv.xtol);
    positive("w_position", sv.w_position);
    positive("w_velocity", sv.w_velocity);
    if (o.contains("max_evals")) {
      sv.max_evals = as_integer(o["max_evals"], "solver.max_evals");
      if (sv.max_evals < 1) fail("solver.max_evals", "must be >= 1");
    }
    if (o.contains("restarts")) {
      const long r = as_integer(o["restarts"], "solver.restarts");
      if (r < 0 || r > 1000) fail("solver.restarts", "must be in 0..1000");
      sv.restarts = static_cast<int>(r);
    }
    if (o.contains("direct_nodes")) {
      const long d = as_integer(o["direct_nodes"], "solver.direct_nodes");
      if (d < 4 || d > 100000) fail("solver.direct_nodes", "must be in 4..100000");
      sv.direct_nodes = static_cast<int>(d);
    }
    if (o.contains("adaptive")) {
      if (!o["adaptive"].is_boolean()) fail("solver.adaptive", "expected true or false");
      sv.adaptive = o["adaptive"].get<bool>();
    }
  }

  auto& ref = s.reference;
  for (std::size_t m = 0; m < edges.size(); ++m) {
    ref.Vminus.push_back(s.has_potential
                             ? eval_potential(s.graph.params(edges[m].i, edges[m].j),
                                              s.tolerances.edges[m].R)
                             : 1.0);
  }
  if (doc.contains("reference")) {
    const json& o = doc["reference"];
    check_keys(o, "reference", {"recipe", "accel_bounds", "Vminus", "convention"});
    if (o.contains("convention")) {
      try {
        ref.convention =
            constants_convention_from_string(as_string(o["convention"], "reference.convention"));
      } catch (const InputError& e) {
        if (std::string(e.what()).rfind("reference", 0) == 0) throw;
        fail("reference.convention", e.what());
      }
    }
    if (o.contains("Vminus")) {
      ref.Vminus = per_edge_values(o["Vminus"], "reference.Vminus", edges.size());
      for (double v : ref.Vminus) {
        if (!(v >= 0.0)) fail("reference.Vminus", "must be >= 0");
      }
    }
    if (o.contains("accel_bounds")) {
      ref.accel_bounds = per_edge_values(o["accel_bounds"], "reference.accel_bounds", n);
      for (double v : ref.accel_bounds) {
        if (!(v >= 0.0)) fail("reference.accel_bounds", "must be >= 0");
      }
    }
    if (o.contains("recipe")) {
      if (s.manifold.is_sphere()) fail("reference.recipe", "recipes are only supported on r<n>");
      const json& r = o["recipe"];
      if (!r.is_array() || static_cast<int>(r.size()) != n) {
        fail("reference.recipe", "expected one entry per agent");
      }
      ReferenceRecipe recipe;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const std::string path = index("reference.recipe", i);
        check_keys(r[i], path, {"segments"});
        const json& segs = require(r[i], path, "segments");
        if (!segs.is_array() || segs.empty()) fail(join(path, "segments"), "expected a non-empty array");
        AgentRecipe ar;
        for (std::size_t k = 0; k < segs.size(); ++k) {
          ar.segments.push_back(
              parse_segment(segs[k], index(join(path, "segments"), k), s.manifold.ambient_dim()));
        }
        recipe.agents.push_back(ar);
      }
      try {
        build_reference(recipe, s.bc, s.integrator.h);
      } catch (const RecipeError& e) {
        throw RecipeError(std::string("reference.recipe: ") + e.what());
      }
      ref.recipe = recipe;
    }
  }

  if (doc.contains("bounded")) {
    const json& o = doc["bounded"];
    check_keys(o, "bounded", {"r"});
    s.bounded_r = as_number(require(o, "bounded", "r"), "bounded.r");
    if (!(*s.bounded_r > 0.0)) fail("bounded.r", "must be > 0");
  }

  if (s.manifold.is_sphere()) {
    for (const Edge& e : edges) {
      const double d = dist(s.manifold, s.bc.agents[e.i].q0, s.bc.agents[e.j].q0);
      if (d > std::acos(-1.0) - kCutLocusMargin) {
        fail("agents", "agents " + std::to_string(e.i + 1) + " and " + std::to_string(e.j + 1) +
                           " start antipodal");
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json edge_json(const Edge& e) { return json::array({e.i + 1, e.j + 1}); }

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json doc = json::object();
  if (!s.name.empty()) doc["name"] = s.name;
  doc["manifold"] = s.manifold.name();
  doc["T"] = s.bc.T;
  json agents = json::array();
  for (const auto& a : s.bc.agents) {
    json o = json::object();
    if (a.R0) {
      json m = json::array();
      for (int r = 0; r < 3; ++r) m.push_back(vec_json(a.R0->row(r).transpose()));
      o["R0"] = m;
      o["xi0"] = vec_json(a.xi0 ? *a.xi0 : body_velocity(*a.R0, a.v0.head<3>()));
    } else {
      o["q0"] = vec_json(a.q0);
      o["v0"] = vec_json(a.v0);
    }
    o["qT"] = vec_json(a.qT);
    o["vT"] = vec_json(a.vT);
    agents.push_back(o);
  }
  doc["agents"] = agents;
  json edges = json::array(), pots = json::array(), tols = json::array();
  for (std::size_t m = 0; m < s.graph.edges().size(); ++m) {
    const Edge e = s.graph.edges()[m];
    edges.push_back(edge_json(e));
    const auto& p = s.graph.params(e.i, e.j);
    pots.push_back({{"edge", edge_json(e)},
                    {"family", to_string(p.family)},
                    {"D", p.D},
                    {"eps", p.eps},
                    {"k", p.k}});
    const auto& t = s.tolerances.edges[m];
    tols.push_back({{"edge", edge_json(e)}, {"r", t.r}, {"r_star", t.r_star}, {"R", t.R}});
  }
  doc["edges"] = edges;
  if (s.has_potential) doc["edge_potentials"] = pots;
  if (!s.graph.edges().empty()) doc["edge_tolerances"] = tols;
  doc["integrator"] = {{"method", to_string(s.integrator.method)}, {"h", s.integrator.h}};

  const auto& sv = s.solver;
  json solver = json::object();
  if (sv.guess == GuessKind::Zero) solver["guess"] = "zero";
  if (sv.guess == GuessKind::CubicInit) solver["guess"] = "cubic-init";
  if (sv.guess == GuessKind::Given) solver["guess"] = vec_json(sv.initial);
  if (sv.guess == GuessKind::Direct) {
    solver["guess"] = "direct";
    solver["direct_nodes"] = sv.direct_nodes;
  }
  solver["residual_tol"] = sv.residual_tol;
  if (sv.max_evals > 0) solver["max_evals"] = sv.max_evals;
  solver["ftol"] = sv.ftol;
  solver["xtol"] = sv.xtol;
  solver["restarts"] = sv.restarts;
  solver["adaptive"] = sv.adaptive;
  solver["w_position"] = sv.w_position;
  solver["w_velocity"] = sv.w_velocity;
  doc["solver"] = solver;

  const auto& ref = s.reference;
  json r = json::object();
  r["convention"] = to_string(ref.convention);
  r["Vminus"] = ref.Vminus;
  if (!ref.accel_bounds.empty()) r["accel_bounds"] = ref.accel_bounds;
  if (ref.recipe) {
    json recipe = json::array();
    for (const auto& ar : ref.recipe->agents) {
      json segs = json::array();
      for (const auto& seg : ar.segments) {
        json o = json::object();
        if (seg.kind == RecipeSegment::Kind::Cubic) {
          o["kind"] = "cubic";
          o["t1"] = seg.t1;
          if (seg.q1) {
            o["q1"] = vec_json(*seg.q1);
            o["v1"] = vec_json(*seg.v1);
          }
        } else {
          o["kind"] = "arc";
          o["t1"] = seg.t1;
          o["center"] = vec_json(seg.center);
          o["radius"] = seg.radius;
          o["rate"] = seg.rate;
          if (seg.normal.size() == 3) o["normal"] = vec_json(seg.normal);
        }
        segs.push_back(o);
      }
      recipe.push_back({{"segments", segs}});
    }
    r["recipe"] = recipe;
  }
  doc["reference"] = r;
  if (s.bounded_r) doc["bounded"] = {{"r", *s.bounded_r}};
  return doc.dump(2) + "\n";
}

}  // namespace mavoid
