#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mavoid/errors.hpp"
#include "mavoid/potentials.hpp"
#include "support.hpp"

using namespace mavoid;
using namespace testing;

namespace {

const PotentialParams kPaperR3{PotentialFamily::Inverse, 2.0, 1e-5, 16};
const PotentialParams kPaperS2{PotentialFamily::Inverse, 0.5, 1e-5, 8};

double slope_fd(const PotentialParams& p, double d) {
  return directional_fd([&](double s) { return eval_potential(p, d + s); }, 1e-3 * d);
}

// Roundoff floor of the difference quotient: |V| eps_machine / step.
double fd_noise(const PotentialParams& p, double d) { return 1e-10 * eval_potential(p, d) / d; }

}  // namespace

TEST_CASE("inverse potential values") {
  CHECK(eval_potential(kPaperR3, 2.0) == doctest::Approx(1.0 / (1e-5 + 1.0)).epsilon(1e-15));
  CHECK(eval_potential(kPaperR3, 0.0) == doctest::Approx(1e5).epsilon(1e-15));
  CHECK(eval_potential(kPaperR3, 1.0) ==
        doctest::Approx(1.0 / (1e-5 + std::pow(2.0, -16))).epsilon(1e-14));
  for (double r : {0.1, 0.3, 0.373, 0.45}) {
    CHECK(eval_potential(kPaperS2, r) ==
          doctest::Approx(1.0 / (1e-5 + 256 * std::pow(r, 8))).epsilon(1e-13));
  }
}

TEST_CASE("bump potential values and support") {
  const PotentialParams b{PotentialFamily::Bump, 1.5, 0.01, 2};
  CHECK(eval_potential(b, 1.5) == 0.0);
  CHECK(eval_potential(b, 3.0) == 0.0);
  CHECK(eval_potential(b, 0.0) == doctest::Approx(std::exp(-1.0) / 0.01));
  const double x = std::pow(0.5 / 1.5, 2);
  CHECK(eval_potential(b, 0.5) == doctest::Approx(std::exp(-1.0 / (1.0 - x)) / 0.01));
  // continuity of value and slope across d = D
  CHECK(eval_potential(b, 1.5 - 1e-4) < 1e-100);
  CHECK(std::abs(potential_slope(b, 1.5 - 1e-6)) < 1e-6);
  CHECK(potential_slope(b, 1.6) == 0.0);
}

TEST_CASE("slope matches finite differences") {
  std::mt19937_64 rng(21);
  const PotentialParams sets[] = {
      {PotentialFamily::Inverse, 1.0, 0.5, 2},
      {PotentialFamily::Inverse, 2.0, 1e-5, 16},
      {PotentialFamily::Inverse, 0.5, 1e-5, 8},
      {PotentialFamily::Bump, 3.5, 1.0, 2},
      {PotentialFamily::Bump, 2.0, 0.1, 4},
  };
  for (const auto& p : sets) {
    for (int n = 0; n < 100; ++n) {
      const double d = uniform(rng, 0.1, 3.0);
      if (p.family == PotentialFamily::Bump && d > 0.95 * p.D) continue;
      const double fd = slope_fd(p, d);
      const double an = potential_slope(p, d);
      CHECK(std::abs(an - fd) <= 1e-6 * std::abs(fd) + fd_noise(p, d));
    }
  }
}

TEST_CASE("inverse potential is bounded and strictly decreasing") {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 500; ++n) {
    const PotentialParams p{PotentialFamily::Inverse, uniform(rng, 0.2, 3.0),
                            std::pow(10.0, uniform(rng, -6, 0)), 1 + n % 20};
    const double d1 = uniform(rng, 0.0, 4.0);
    const double d2 = d1 + uniform(rng, 1e-3, 1.0);
    const double v1 = eval_potential(p, d1);
    const double v2 = eval_potential(p, d2);
    CHECK(v1 > v2);
    CHECK(v2 >= 0.0);
    CHECK(v1 <= 1.0 / p.eps);
    // V < 1 beyond D
    CHECK(eval_potential(p, p.D * (1.0 + uniform(rng, 0.0, 1.0))) < 1.0);
  }
}

TEST_CASE("risk region bound for large enough k") {
  // k >= ln(eps)/ln(r*/D) gives V(r*) >= 1/(2 eps)
  const double eps = 2.46e-5, rs = 1.0, D = 2.0;
  const int k = static_cast<int>(std::ceil(std::log(eps) / std::log(rs / D)));
  CHECK(k == 16);
  CHECK(eval_potential({PotentialFamily::Inverse, D, eps, k}, rs) >= 1.0 / (2.0 * eps));
}

TEST_CASE("gradient in R^3 for the bundled potential at d = 2") {
  const auto r3 = Manifold::euclidean(3);
  const Vec p = vec3(1, 0, 0), q = vec3(-1, 0, 0);
  const Vec g = grad1_potential(r3, kPaperR3, p, q);
  const double fd = slope_fd(kPaperR3, 2.0);
  // points towards q, so -grad pushes p away
  CHECK(g.dot(p - q) < 0.0);
  CHECK(std::abs(g.norm() - std::abs(fd)) < 1e-6 * std::abs(fd));
  CHECK((g.normalized() + (p - q).normalized()).norm() < 1e-15);
}

TEST_CASE("gradient on S^2 for the bundled potential at d = 0.6") {
  const auto s2 = Manifold::sphere();
  const Vec p = vec3(1, 0, 0), q = vec3(std::cos(0.6), std::sin(0.6), 0);
  const Vec g = grad1_potential(s2, kPaperS2, p, q);
  CHECK(std::abs(g.dot(p)) < 1e-15);
  const double fd = slope_fd(kPaperS2, 0.6);
  CHECK(std::abs(g.norm() - std::abs(fd)) < 1e-6 * std::abs(fd));
  // moving p towards q along the great circle decreases d
  CHECK(g[1] * fd < 0.0);
}

TEST_CASE("gradient directional derivative along geodesics") {
  std::mt19937_64 rng(23);
  const PotentialParams p{PotentialFamily::Inverse, 1.0, 0.5, 3};
  const auto s2 = Manifold::sphere();
  for (int n = 0; n < 100; ++n) {
    const Vec3 a = random_unit(rng), b = random_unit(rng);
    const double d = dist(s2, a, b);
    if (d < 0.1 || d > 3.0) continue;
    const Vec3 u = random_tangent(rng, a, 1.0).normalized();
    const auto V = [&](double s) { return eval_potential(p, dist(s2, great_circle(a, u, s), b)); };
    const double fd = directional_fd(V, 1e-4);
    const double an = grad1_potential(s2, p, a, b).dot(u);
    CHECK(std::abs(an - fd) < 1e-6 * (std::abs(fd) + 1e-3));
  }
}

TEST_CASE("gradient edge cases") {
  const auto r2 = Manifold::euclidean(2);
  Vec z = Vec::Zero(2);
  CHECK_THROWS_AS(grad1_potential(r2, {PotentialFamily::Inverse, 1, 1, 1}, z, z), SingularityError);
  CHECK(grad1_potential(r2, {PotentialFamily::Inverse, 1, 1, 3}, z, z).norm() == 0.0);
  const PotentialParams b{PotentialFamily::Bump, 1.0, 1.0, 2};
  Vec far(2);
  far << 3, 0;
  CHECK(grad1_potential(r2, b, z, far).norm() == 0.0);
  CHECK_THROWS_AS(grad1_potential(Manifold::sphere(), kPaperS2, vec3(1, 0, 0), vec3(-1, 0, 0)),
                  DomainError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_WITH_AS((PotentialParams{PotentialFamily::Inverse, 0.0, 1, 2}.validate()),
                       "D must be > 0", InputError);
  CHECK_THROWS_WITH_AS((PotentialParams{PotentialFamily::Inverse, 1.0, 0.0, 2}.validate()),
                       "eps must be > 0", InputError);
  CHECK_THROWS_AS((PotentialParams{PotentialFamily::Inverse, 1.0, 1.0, 0}.validate()), InputError);
  CHECK(potential_family_from_string("bump") == PotentialFamily::Bump);
  CHECK(to_string(PotentialFamily::Inverse) == "inverse");
  CHECK_THROWS_AS(potential_family_from_string("gauss"), InputError);
}

TEST_CASE("interaction graph") {
  InteractionGraph g(4);
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}) g.add_edge(i, j, kPaperR3);
  CHECK(g.degree(0) == 3);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 3);
  CHECK(g.degree(3) == 2);
  CHECK(g.has_edge(3, 2));
  CHECK_FALSE(g.has_edge(1, 3));
  CHECK(g.edge_index(2, 1) == 3);
  CHECK(g.edge_index(1, 3) == -1);
  CHECK_THROWS_AS(g.add_edge(1, 1, kPaperR3), InputError);
  CHECK_THROWS_AS(g.add_edge(0, 1, kPaperR3), InputError);
  CHECK_THROWS_AS(g.add_edge(0, 7, kPaperR3), InputError);
  CHECK_THROWS_AS(g.params(1, 3), InputError);

  const auto r3 = Manifold::euclidean(3);
  CHECK(pair_potential_symmetry_check(g, r3, vec3(0, 0, 0), vec3(1, 2, 0)));
  g.set_directed_params(2, 1, kPaperS2);
  CHECK_FALSE(pair_potential_symmetry_check(g, r3, vec3(0, 0, 0), vec3(1, 2, 0)));
}
