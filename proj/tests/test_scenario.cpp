#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numbers>

#include "mavoid/errors.hpp"
#include "mavoid/scenario.hpp"
#include "mavoid/trajectory_io.hpp"
#include "support.hpp"

using namespace mavoid;
using namespace testing;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_scenario(doc.dump());
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

json two_agent_doc() {
  return json::parse(R"({
    "manifold": "r2", "T": 2,
    "agents": [
      {"q0": [0, 0], "v0": [1, 0], "qT": [2, 1], "vT": [0, 1]},
      {"q0": [0, 3], "v0": [1, 0], "qT": [2, 4], "vT": [1, 0]}
    ],
    "edges": [[1, 2]],
    "potential": {"family": "inverse", "D": 1, "eps": 0.1, "k": 4},
    "tolerances": {"r": 0.2, "r_star": 0.4, "R": 0.8},
    "integrator": {"method": "rk4", "h": 0.01}
  })");
}

}  // namespace

TEST_CASE("bundled R^3 scenario") {
  const Scenario s = parse_scenario(bundled_scenario("r3"));
  CHECK(s.agent_count() == 4);
  CHECK(s.manifold.name() == "r3");
  CHECK(s.bc.T == 4.0);
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}};
  CHECK(s.graph.edges() == edges);
  CHECK(s.graph.params(0, 1) == PotentialParams{PotentialFamily::Inverse, 2.0, 1e-5, 16});
  CHECK(s.tolerances.edges[0] == EdgeTolerance{0.5, 1.0, 2.0});
  CHECK(s.integrator.method == Integrator::Euler);
  CHECK(s.integrator.h == 0.005);
  CHECK(s.reference.recipe.has_value());
  CHECK(s.reference.accel_bounds == std::vector<double>(4, 3.22));
}

TEST_CASE("bundled S^2 scenario") {
  const Scenario s = parse_scenario(bundled_scenario("s2"));
  CHECK(s.manifold.is_sphere());
  CHECK(s.agent_count() == 3);
  for (const auto& e : s.graph.edges()) {
    CHECK(s.graph.params(e.i, e.j) == PotentialParams{PotentialFamily::Inverse, 0.5, 1e-5, 8});
  }
  for (const auto& a : s.bc.agents) {
    CHECK(std::abs(a.q0.norm() - 1.0) < 1e-12);
    CHECK(std::abs(a.qT.norm() - 1.0) < 1e-12);
    CHECK(std::abs(a.q0.dot(a.v0)) < 1e-12);
  }
  CHECK(s.bounded_r == 0.3);
  CHECK_THROWS_AS(bundled_scenario("r4"), InputError);
}

TEST_CASE("semantic errors carry the field path") {
  auto doc = two_agent_doc();
  doc["potential"]["eps"] = 0;
  CHECK(error_of(doc) == "potential.eps must be > 0");

  doc = two_agent_doc();
  doc["tolerances"]["r"] = 0.5;
  CHECK(error_of(doc) == "tolerances.edge[1,2]: r must be < r_star");

  doc = two_agent_doc();
  doc["colour"] = "red";
  CHECK(error_of(doc) == "colour: unknown key");

  doc = two_agent_doc();
  doc["edges"] = json::array({json::array({1, 3})});
  CHECK(error_of(doc).rfind("edges[0]", 0) == 0);

  doc = two_agent_doc();
  doc["agents"][0]["q0"] = json::array({0, 0, 0});
  CHECK(error_of(doc).rfind("agents[0]", 0) == 0);

  doc = two_agent_doc();
  doc.erase("T");
  CHECK(error_of(doc) == "T: missing required field");

  doc = two_agent_doc();
  doc["integrator"]["method"] = "leapfrog";
  CHECK(error_of(doc).rfind("integrator.method", 0) == 0);
}

TEST_CASE("syntax errors report line and column") {
  try {
    parse_scenario("{\n  \"T\": 4,\n  \"agents\": [}\n");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), InputError);
}

TEST_CASE("scenario serialisation round trip") {
  for (const char* which : {"r3", "s2"}) {
    const Scenario a = parse_scenario(bundled_scenario(which));
    const Scenario b = parse_scenario(scenario_to_json(a));
    CHECK(scenario_to_json(b) == scenario_to_json(a));
    CHECK(b.graph.edges() == a.graph.edges());
    CHECK(b.tolerances.edges == a.tolerances.edges);
    CHECK(b.bc.T == a.bc.T);
    for (int i = 0; i < a.agent_count(); ++i) {
      CHECK(b.bc.agents[i].q0 == a.bc.agents[i].q0);
      CHECK(b.bc.agents[i].vT == a.bc.agents[i].vT);
    }
    for (const auto& e : a.graph.edges()) CHECK(b.graph.params(e.i, e.j) == a.graph.params(e.i, e.j));
    CHECK(b.solver.guess == a.solver.guess);
  }
}

TEST_CASE("reference recipe of agent 1 at t = 2") {
  const Scenario s = parse_scenario(bundled_scenario("r3"));
  const auto ref = build_reference(*s.reference.recipe, s.bc, 0.005);
  const auto& smp = ref.samples.at(400);
  CHECK(smp.t == doctest::Approx(2.0).epsilon(1e-12));
  const Vec q = positions(smp)[0];
  const double a = std::numbers::pi / 4;
  CHECK((q - vec3(2 * std::cos(a), -2 * std::sin(a), 0)).norm() < 1e-12);
  CHECK(ref.samples.back().t == 4.0);
  for (int i = 0; i < 4; ++i) {
    CHECK((positions(ref.samples.back())[i] - s.bc.agents[i].qT).norm() < 1e-12);
    CHECK((velocities(ref.samples.front())[i] - s.bc.agents[i].v0).norm() < 1e-12);
  }
}

TEST_CASE("reference recipe edge distances") {
  const Scenario s = parse_scenario(bundled_scenario("r3"));
  const auto ref = build_reference(*s.reference.recipe, s.bc, 0.005);
  // clear of the collision radius throughout
  double interior = 1e9;
  for (std::size_t k = 1; k + 1 < ref.samples.size(); ++k) {
    const auto q = positions(ref.samples[k]);
    for (const auto& e : s.graph.edges()) interior = std::min(interior, (q[e.i] - q[e.j]).norm());
  }
  CHECK(interior > 0.7);
  // the boundary data put edge (1,2) exactly at R = 2 at t = 0
  const auto q0 = positions(ref.samples.front());
  CHECK((q0[0] - q0[1]).norm() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(reference_constants(ref, s.graph, s.tolerances, s.reference.Vminus,
                                      ConstantsConvention::HalfPotential),
                  PreconditionError);
}

TEST_CASE("pure cubic recipe equals the Hermite cubic") {
  auto doc = two_agent_doc();
  doc["reference"] = {{"recipe", json::array({{{"segments", json::array({{{"kind", "cubic"}, {"t1", 2}}})}},
                                              {{"segments", json::array({{{"kind", "cubic"}, {"t1", 2}}})}}})}};
  const Scenario s = parse_scenario(doc.dump());
  const auto ref = build_reference(*s.reference.recipe, s.bc, 0.01);
  const auto free = integrate(InteractionGraph(2), initial_state(s.potential_free_problem(),
                                                                 cubic_init(s.potential_free_problem())),
                              0.01, 2.0, Integrator::RK4);
  REQUIRE(ref.samples.size() == free.samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.samples.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      worst = std::max(worst, (positions(ref.samples[k])[i] - positions(free.samples[k])[i]).norm());
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("recipe junctions must be C1") {
  auto doc = two_agent_doc();
  const json bad = {{"segments", json::array({{{"kind", "cubic"}, {"t1", 1}, {"q1", {1, 0.5}}, {"v1", {1, 0}}},
                                              {{"kind", "arc"}, {"t1", 2}, {"center", {1, 0}},
                                               {"radius", 1}, {"rate", 1}}})}};
  const json good = {{"segments", json::array({{{"kind", "cubic"}, {"t1", 2}}})}};
  doc["reference"] = {{"recipe", json::array({bad, good})}};
  try {
    const Scenario s = parse_scenario(doc.dump());
    build_reference(*s.reference.recipe, s.bc, 0.01);
    FAIL("no error");
  } catch (const RecipeError& e) {
    CHECK(std::string(e.what()).find("t = 1") != std::string::npos);
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("t = 1") != std::string::npos);
  }
}

TEST_CASE("trajectory CSV layout") {
  Vec z = Vec::Zero(1);
  SystemState s;
  s.agents = std::vector<EuclideanAgent>{{z, z, z, z}};
  const auto tr = integrate(InteractionGraph(1), s, 0.5, 1.0, Integrator::RK4);
  const std::string csv = write_trajectory(tr, {});
  int data_rows = 0;
  std::size_t pos = 0;
  std::string header;
  while (pos < csv.size()) {
    const std::size_t nl = csv.find('\n', pos);
    const std::string line = csv.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++data_rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
  }
  CHECK(data_rows == 3);
  CHECK(std::count(header.begin(), header.end(), ',') == 2);
}

TEST_CASE("trajectory CSV round trip is bit exact") {
  std::mt19937_64 rng(61);
  const Scenario sc = parse_scenario(bundled_scenario("s2"));
  const auto p = sc.potential_free_problem();
  const auto tr = shoot_trajectory(p, random_vec(rng, unknown_count(p), 0.3));
  const auto path = path_samples(tr);
  const auto back = read_trajectory(write_trajectory(tr, sc.graph.edges()));
  CHECK(back.edges == sc.graph.edges());
  CHECK(back.path.manifold.name() == "s2");
  REQUIRE(back.path.t.size() == path.t.size());
  bool exact = true;
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    exact = exact && back.path.t[k] == path.t[k];
    for (int i = 0; i < 3; ++i) {
      exact = exact && back.path.q[k][i] == path.q[k][i] && back.path.v[k][i] == path.v[k][i];
    }
  }
  CHECK(exact);
  CHECK_THROWS_AS(read_trajectory("t,a1_q1\n0,abc\n"), ParseError);
}

TEST_CASE("certificate JSON") {
  const Scenario s = parse_scenario(bundled_scenario("r3"));
  CertificateReport rep;
  rep.constants = constants_from_accel_bounds(std::vector<double>(4, 3.22), 4.0,
                                              std::vector<double>(4, std::sqrt(0.5)), s.graph,
                                              std::vector<double>(5, 1.0),
                                              ConstantsConvention::HalfPotential);
  rep.cert = certify_minimizer(*rep.constants, s.graph, s.tolerances,
                               risk_boundary_potential(s.graph, s.tolerances));
  rep.reference_source = "accel_bounds";
  const json doc = json::parse(write_certificate(rep));
  CHECK(doc["kind"] == "minimizer");
  CHECK(doc["pass"] == true);
  CHECK(doc["convention"] == "half");
  CHECK(doc["constants"]["c"].get<double>() == rep.constants->c);
  CHECK(doc["edges"].size() == 5);
  CHECK(doc["edges"][0].contains("threshold"));
  CHECK(doc["edges"][0].contains("margin"));
}
