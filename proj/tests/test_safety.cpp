#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mavoid/errors.hpp"
#include "mavoid/safety.hpp"
#include "support.hpp"

using namespace mavoid;
using namespace testing;

namespace {

const EdgeTolerance kTol{0.5, 1.0, 2.0};
const PotentialParams kPaperR3{PotentialFamily::Inverse, 2.0, 1e-5, 16};
const PotentialParams kPaperS2{PotentialFamily::Inverse, 0.5, 1e-5, 8};

InteractionGraph four_agents() {
  InteractionGraph g(4);
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}) g.add_edge(i, j, kPaperR3);
  return g;
}

InteractionGraph two_agents(const PotentialParams& p = kPaperR3) {
  InteractionGraph g(2);
  g.add_edge(0, 1, p);
  return g;
}

ReferenceConstants manual_constants(double c, std::vector<double> v) {
  ReferenceConstants rc;
  rc.T = 4.0;
  rc.c = c;
  rc.v = std::move(v);
  rc.a.assign(rc.v.size(), 0.0);
  return rc;
}

SystemState line_state(const std::vector<std::pair<Vec, Vec>>& qv) {
  std::vector<EuclideanAgent> a;
  for (const auto& [q, v] : qv) {
    const Vec z = Vec::Zero(q.size());
    a.push_back({q, v, z, z});
  }
  SystemState s;
  s.agents = a;
  return s;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("region classification") {
  CHECK(region_classify(kTol, 0.3) == Region::Collision);
  CHECK(region_classify(kTol, 0.5) == Region::Risk);
  CHECK(region_classify(kTol, 0.99) == Region::Risk);
  CHECK(region_classify(kTol, 1.5) == Region::Intermediate);
  CHECK(region_classify(kTol, 2.0) == Region::Intermediate);
  CHECK(region_classify(kTol, 2.5) == Region::Safety);
  CHECK(to_string(Region::Safety) == "safety");
  CHECK_THROWS_WITH_AS((EdgeTolerance{0.5, 0.5, 2}.validate()), "r must be < r_star", InputError);
  CHECK_THROWS_AS((EdgeTolerance{0.0, 0.5, 2}.validate()), InputError);
  CHECK_THROWS_AS((EdgeTolerance{0.1, 2.5, 2}.validate()), InputError);
}

TEST_CASE("avoidance of stationary and crossing agents") {
  const auto g = two_agents();
  const auto tol = Tolerances::uniform(g, kTol);
  const auto still = integrate(g, line_state({{v2(0, 0), v2(0, 0)}, {v2(3, 0), v2(0, 0)}}), 0.1, 1.0,
                               Integrator::RK4);
  const auto av = check_avoidance(still, g, tol);
  CHECK(av[0].avoided);
  CHECK(av[0].min_distance == doctest::Approx(3.0).epsilon(1e-12));

  const auto cross = integrate(InteractionGraph(2),
                               line_state({{v2(-1, 0), v2(1, 0)}, {v2(1, 0), v2(-1, 0)}}), 0.01,
                               2.0, Integrator::RK4);
  const auto bad = check_avoidance(cross, g, tol);
  CHECK_FALSE(bad[0].avoided);
  CHECK(bad[0].min_distance < 1e-9);
  CHECK(bad[0].argmin_t == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(check_avoidance(cross, g, Tolerances{}), InputError);
}

TEST_CASE("constants from declared acceleration bounds") {
  const auto g = four_agents();
  const std::vector<double> vm(5, 1.0);
  const std::vector<double> speeds(4, std::sqrt(0.5));
  const auto half = constants_from_accel_bounds(std::vector<double>(4, 3.22), 4.0, speeds, g, vm,
                                                ConstantsConvention::HalfPotential);
  CHECK(half.c == doctest::Approx(4.0 * (4 * 3.22 * 3.22 + 5)).epsilon(1e-14));
  CHECK(half.c == doctest::Approx(185.89).epsilon(1e-4));
  const auto strict = constants_from_accel_bounds(std::vector<double>(4, 3.22), 4.0, speeds, g, vm,
                                                  ConstantsConvention::Strict);
  CHECK(strict.c == doctest::Approx(4.0 * (4 * 3.22 * 3.22 + 10)).epsilon(1e-14));

  const auto at_paper_c = constants_from_accel_bounds(
      std::vector<double>(4, std::sqrt((185.9 / 4.0 - 5.0) / 4.0)), 4.0, speeds, g, vm,
      ConstantsConvention::HalfPotential);
  CHECK(at_paper_c.c == doctest::Approx(185.9).epsilon(1e-12));
  for (double v : at_paper_c.v) {
    CHECK(v == doctest::Approx(std::sqrt(743.6) + std::sqrt(744.1)).epsilon(1e-12));
    CHECK(v == doctest::Approx(54.55).epsilon(1e-3));
  }
  CHECK_THROWS_AS(constants_from_accel_bounds({1.0}, 4.0, speeds, g, vm,
                                              ConstantsConvention::Strict),
                  InputError);
}

TEST_CASE("minimizer certificate examples") {
  const auto g = four_agents();
  const auto tol = Tolerances::uniform(g, kTol);
  const auto rc = manual_constants(185.9, std::vector<double>(4, 54.57));
  const double th = 185.9 * 2 * 54.57 / (2 * 0.5);
  const auto pass = certify_minimizer(rc, g, tol, std::vector<double>(5, 65527));
  CHECK(pass.pass);
  for (double t : pass.threshold) CHECK(t == doctest::Approx(th).epsilon(1e-14));
  CHECK(th == doctest::Approx(20290).epsilon(1e-3));
  CHECK(certify_minimizer(rc, g, tol, risk_boundary_potential(g, tol)).pass);

  const auto edge = certify_minimizer(rc, g, tol, std::vector<double>(5, th));
  CHECK_FALSE(edge.pass);
  const auto zero = certify_minimizer(rc, g, tol, std::vector<double>(5, 0.0));
  CHECK_FALSE(zero.pass);
  CHECK(zero.margin[2] == -zero.threshold[2]);
  CHECK_THROWS_AS(certify_minimizer(rc, g, tol, {1.0}), InputError);
}

TEST_CASE("risk boundary potential is V(r*)") {
  const auto g = two_agents();
  const auto v = risk_boundary_potential(g, Tolerances::uniform(g, kTol));
  CHECK(v[0] == doctest::Approx(1.0 / (1e-5 + std::pow(0.5, 16))).epsilon(1e-14));
}

TEST_CASE("certificate monotonicity and symmetry") {
  std::mt19937_64 rng(51);
  for (int n = 0; n < 300; ++n) {
    const auto g = two_agents();
    const EdgeTolerance t{uniform(rng, 0.1, 0.5), uniform(rng, 0.6, 1.0), uniform(rng, 1.1, 3.0)};
    const auto tol = Tolerances::uniform(g, t);
    const double c = uniform(rng, 1, 500);
    const std::vector<double> v{uniform(rng, 1, 80), uniform(rng, 1, 80)};
    const double vs = uniform(rng, 0, 1e5);
    const auto base = certify_minimizer(manual_constants(c, v), g, tol, {vs});
    if (base.pass) {
      CHECK(certify_minimizer(manual_constants(c, v), g, tol, {vs * 1.5}).pass);
      CHECK(certify_minimizer(manual_constants(0.5 * c, v), g, tol, {vs}).pass);
    }
    const auto swapped = certify_minimizer(manual_constants(c, {v[1], v[0]}), g, tol, {vs});
    CHECK(swapped.threshold[0] == base.threshold[0]);
    CHECK(swapped.margin[0] == base.margin[0]);
    EdgeTolerance wide = t;
    wide.r_star += 0.1;
    wide.R += 0.1;
    CHECK(certify_minimizer(manual_constants(c, v), g, Tolerances::uniform(g, wide), {vs})
              .threshold[0] < base.threshold[0]);
  }
}

TEST_CASE("tuning the bundled R^3 inputs") {
  const auto g = four_agents();
  const auto tol = Tolerances::uniform(g, kTol);
  const auto rc = manual_constants(185.9, std::vector<double>(4, 54.57));
  const auto params = tune_potential(g, tol, rc);
  REQUIRE(params.size() == 5);
  const double eps_max = 0.5 / (185.9 * 2 * 54.57);
  for (const auto& p : params) {
    CHECK(p.D == 2.0);
    CHECK(p.eps <= 2.46e-5);
    CHECK(p.eps == doctest::Approx(0.5 * eps_max).epsilon(1e-14));
    CHECK(p.k == 16);
  }
  // the hand choice eps = 1e-5, k = 16 certifies too
  CHECK(certify_minimizer(rc, g, tol, risk_boundary_potential(g, tol)).pass);

  // c scaled by 10: eps scales by 1/10, k grows by at most ceil(log2 10)
  const auto scaled = tune_potential(g, tol, manual_constants(1859, std::vector<double>(4, 54.57)));
  CHECK(scaled[0].eps == doctest::Approx(params[0].eps / 10).epsilon(1e-12));
  CHECK(scaled[0].k - params[0].k >= 3);
  CHECK(scaled[0].k - params[0].k <= 4);
}

TEST_CASE("tuning is self-consistent on random feasible inputs") {
  std::mt19937_64 rng(52);
  for (int n = 0; n < 300; ++n) {
    InteractionGraph g(2);
    g.add_edge(0, 1, {});
    const EdgeTolerance t{uniform(rng, 0.05, 0.5), uniform(rng, 0.55, 1.5), uniform(rng, 1.6, 4.0)};
    const auto tol = Tolerances::uniform(g, t);
    const auto rc = manual_constants(uniform(rng, 1, 300), {uniform(rng, 1, 60), uniform(rng, 1, 60)});
    const auto p = tune_potential(g, tol, rc)[0];
    CHECK(p.D == t.R);
    CHECK(certify_minimizer(rc, g, tol, {1.0 / (2.0 * p.eps)}).pass);
    InteractionGraph tuned(2);
    tuned.add_edge(0, 1, p);
    // V(r*) >= 1/(2 eps_max): the concrete potential certifies as well
    CHECK(certify_minimizer(rc, tuned, tol, risk_boundary_potential(tuned, tol)).pass);
    // V- = 1 on the safety region
    CHECK(eval_potential(p, t.R * 1.0001) < 1.0);
  }
}

TEST_CASE("tuning infeasibility") {
  const auto g = two_agents();
  const auto rc = manual_constants(185.9, {54.57, 54.57});
  CHECK_THROWS_AS(tune_potential(g, Tolerances::uniform(g, {2.0, 2.5, 2.0}), rc), InfeasibleError);
  CHECK_THROWS_AS(tune_potential(g, Tolerances::uniform(g, {0.5, 0.5 + 1e-9, 2.0}), rc),
                  InfeasibleError);
}

TEST_CASE("reference constants enforce the safety-region precondition") {
  const auto g = two_agents();
  const auto tol = Tolerances::uniform(g, kTol);
  const auto ref = integrate(InteractionGraph(2),
                             line_state({{v2(0, 0), v2(0.5, 0)}, {v2(0, 3), v2(0.5, 0)}}), 0.01,
                             4.0, Integrator::RK4);
  const auto rc = reference_constants(ref, g, tol, {1.0}, ConstantsConvention::HalfPotential);
  CHECK(rc.a[0] == 0.0);
  CHECK(rc.c == doctest::Approx(4.0 * 0.5 * 2));
  std::mt19937_64 rng(53);
  for (int n = 0; n < 50; ++n) {
    auto bad = ref;
    const std::size_t k = static_cast<std::size_t>(uniform(rng, 0, bad.samples.size() - 1));
    auto agents = bad.samples[k].euclidean();
    agents[1].q = agents[0].q + v2(0, uniform(rng, 0.0, 2.0));
    bad.samples[k].agents = agents;
    CHECK_THROWS_AS(reference_constants(bad, g, tol, {1.0}, ConstantsConvention::HalfPotential),
                    PreconditionError);
  }
}

TEST_CASE("measured derivative bounds") {
  Vec z = Vec::Zero(1), one(1);
  one << 1;
  SystemState s;
  s.agents = std::vector<EuclideanAgent>{{z, z, z, one}};
  const auto cubic = integrate(InteractionGraph(1), s, 0.01, 1.0, Integrator::RK4);
  const auto b = measure_bounds(cubic);
  CHECK(b.a_max[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.eta_max[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.v_max[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.v0[0] == 0.0);
  CHECK(b.eta0[0] == 1.0);

  SystemState sph;
  sph.agents = std::vector<SphereAgent>{{Mat3::Identity(), Vec3(0, 1, 0), Vec3::Zero(), Vec3::Zero()}};
  const auto geo = measure_bounds(integrate(InteractionGraph(1), sph, 0.01, 1.0, Integrator::RK4));
  CHECK(geo.a_max[0] == 0.0);
  CHECK(geo.eta_max[0] == 0.0);
  CHECK(geo.v_max[0] == doctest::Approx(1.0));
}

TEST_CASE("bounded certificate") {
  const auto g = two_agents(kPaperS2);
  DerivativeBounds zero{{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}};
  CHECK(bounded_sum(zero, g, {0.0}) == 0.0);
  CHECK(certify_bounded(zero, g, {0.0}, {1e-9}).pass);

  DerivativeBounds b{{1, 2}, {3, 4}, {5, 6}, {0.5, 0.25}, {2, 4}};
  const double sum = (9 + 1 * 5 + 0.5 * 2 + 0.5 * 7) + (16 + 2 * 6 + 0.25 * 4 + 0.5 * 7);
  CHECK(bounded_sum(b, g, {7.0}) == doctest::Approx(sum).epsilon(1e-15));
  const auto c = certify_bounded(b, g, {7.0}, {sum});
  CHECK_FALSE(c.pass);
  CHECK(c.threshold[0] == doctest::Approx(sum));
  CHECK(certify_bounded(b, g, {7.0}, {sum + 1e-9}).pass);
}

TEST_CASE("radius limit") {
  const double r = radius_limit(kPaperS2, 10.32);
  CHECK(r == doctest::Approx(std::pow((1 / 10.32 - 1e-5) / 256, 1.0 / 8)).epsilon(1e-14));
  CHECK(std::abs(r - 0.3734) < 1e-4);
  CHECK(eval_potential(kPaperS2, r) == doctest::Approx(10.32).epsilon(1e-12));
  CHECK(eval_potential(kPaperS2, 0.99 * r) > 10.32);
  CHECK(radius_limit(kPaperS2, 2e5) == 0.0);
  const PotentialParams bump{PotentialFamily::Bump, 1.0, 0.1, 2};
  const double rb = radius_limit(bump, 1.0);
  CHECK(eval_potential(bump, rb) == doctest::Approx(1.0).epsilon(1e-9));
}
