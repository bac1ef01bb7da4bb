#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <numbers>

#include "mavoid/errors.hpp"
#include "mavoid/geometry.hpp"
#include "support.hpp"

using namespace mavoid;
using namespace testing;

const double kPi = std::numbers::pi;

TEST_CASE("manifold names and dimensions") {
  CHECK(Manifold::euclidean(3).name() == "r3");
  CHECK(Manifold::sphere().name() == "s2");
  CHECK(Manifold::sphere().ambient_dim() == 3);
  CHECK(Manifold::sphere().intrinsic_dim() == 2);
  CHECK_THROWS_AS(Manifold::euclidean(0), InputError);
}

TEST_CASE("distance examples") {
  const auto r3 = Manifold::euclidean(3);
  CHECK(dist(r3, vec3(0, 0, 0), vec3(3, 4, 0)) == doctest::Approx(5.0).epsilon(1e-15));
  const auto s2 = Manifold::sphere();
  CHECK(dist(s2, vec3(1, 0, 0), vec3(0, 1, 0)) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(dist(s2, vec3(1, 0, 0), vec3(-1, 0, 0)) == doctest::Approx(kPi).epsilon(1e-15));
  // atan2 keeps tiny separations accurate where acos would return 0.
  const Vec3 p(1, 0, 0);
  const Vec3 q = great_circle(p, Vec3(0, 1, 0), 1e-9);
  CHECK(dist(s2, p, q) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK_THROWS_AS(dist(r3, vec3(0, 0, 0), Vec::Zero(2)), InputError);
}

TEST_CASE("validation of points and tangents") {
  const auto s2 = Manifold::sphere();
  CHECK_NOTHROW(validate_point(s2, vec3(0, 0, 1)));
  CHECK_THROWS_AS(validate_point(s2, vec3(0, 0, 1.1)), InputError);
  CHECK_THROWS_AS(validate_tangent(s2, vec3(0, 0, 1), vec3(0, 0, 1)), InputError);
  Vec bad = vec3(0, std::nan(""), 0);
  CHECK_THROWS_AS(validate_point(Manifold::euclidean(3), bad), InputError);
}

TEST_CASE("sphere log against the great-circle oracle") {
  std::mt19937_64 rng(11);
  const auto s2 = Manifold::sphere();
  for (int n = 0; n < 200; ++n) {
    const Vec3 p = random_unit(rng);
    const Vec3 u = random_tangent(rng, p, 1.0).normalized();
    const double s = uniform(rng, 1e-3, kPi - 1e-3);
    const Vec3 q = great_circle(p, u, s);
    const Vec lg = log_map(s2, p, q);
    CHECK((lg - s * u).norm() < 1e-9);
  }
}

TEST_CASE("log is undefined at the antipode") {
  const auto s2 = Manifold::sphere();
  CHECK_THROWS_AS(log_map(s2, vec3(0, 0, 1), vec3(0, 0, -1)), DomainError);
}

TEST_CASE("exp and log round trip, |log| equals distance") {
  std::mt19937_64 rng(12);
  const auto s2 = Manifold::sphere();
  for (int n = 0; n < 1000; ++n) {
    const Vec3 p = random_unit(rng);
    const Vec3 q = random_unit(rng);
    if (dist(s2, p, q) > kPi - 1e-3) continue;
    const Vec v = log_map(s2, p, q);
    CHECK((exp_map(s2, p, v) - q).norm() < 1e-8);
    CHECK(std::abs(v.norm() - dist(s2, p, q)) < 1e-9);
    CHECK(std::abs(v.dot(p)) < 1e-12);
  }
  for (int n = 0; n < 200; ++n) {
    const int dim = 1 + n % 4;
    const auto rn = Manifold::euclidean(dim);
    const Vec p = random_vec(rng, dim, 5.0);
    const Vec q = random_vec(rng, dim, 5.0);
    CHECK((exp_map(rn, p, log_map(rn, p, q)) - q).norm() < 1e-12);
  }
}

TEST_CASE("hat and vee") {
  const Vec3 a(0.3, -1.2, 2.0);
  const Mat3 s = hat(a);
  CHECK((s + s.transpose()).norm() == 0.0);
  CHECK((s * Vec3(1, 2, 3) - a.cross(Vec3(1, 2, 3))).norm() < 1e-15);
  CHECK((vee(s) - a).norm() == 0.0);
  CHECK_THROWS_AS(vee(Mat3::Identity()), InputError);
}

TEST_CASE("rotation exponential against the matrix exponential") {
  std::mt19937_64 rng(13);
  for (int n = 0; n < 300; ++n) {
    const Vec3 a = random_vec(rng, 3, 2.0);
    const Mat3 oracle = hat(a).exp();
    CHECK((exp_rotation(a).matrix() - oracle).norm() < 1e-12);
  }
  // small-angle branch
  const Vec3 tiny(1e-6, -2e-6, 5e-7);
  CHECK((exp_rotation(tiny).matrix() - Mat3(hat(tiny).exp())).norm() < 1e-15);
}

TEST_CASE("rotation logarithm") {
  std::mt19937_64 rng(14);
  for (int n = 0; n < 1000; ++n) {
    Vec3 a = random_unit(rng) * uniform(rng, 0.0, kPi - 1e-3);
    const Vec3 back = log_rotation(exp_rotation(a));
    CHECK((back - a).norm() < 1e-8);
  }
  CHECK(log_rotation(Rotation::identity()).norm() == 0.0);
  const Rotation flip = exp_rotation(Vec3(0, 0, kPi));
  CHECK_THROWS_AS(log_rotation(flip), DomainError);
}

TEST_CASE("rotation validation and reorthonormalization") {
  CHECK_THROWS_AS(Rotation(2.0 * Mat3::Identity()), InputError);
  Mat3 refl = Mat3::Identity();
  refl(2, 2) = -1;
  CHECK_THROWS_AS(Rotation{refl}, InputError);

  std::mt19937_64 rng(15);
  for (int n = 0; n < 200; ++n) {
    const Mat3 r = exp_rotation(random_vec(rng, 3, 3.0)).matrix();
    Mat3 noisy = r;
    for (int k = 0; k < 9; ++k) noisy.data()[k] += uniform(rng, -1e-4, 1e-4);
    const Rotation fixed = reorthonormalize(noisy);
    CHECK(orthogonality_defect(fixed.matrix()) < 1e-12);
    CHECK(fixed.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((fixed.matrix() - r).norm() < 1e-3);
  }
  CHECK_THROWS_AS(reorthonormalize(Mat3::Zero()), NumericError);
}

TEST_CASE("frames, body velocities and the projection") {
  std::mt19937_64 rng(16);
  for (int n = 0; n < 200; ++n) {
    const Vec3 q = random_unit(rng);
    const Vec3 v = random_tangent(rng, q, 2.0);
    const Rotation r = frame_from_point(q, v);
    CHECK((project_to_sphere(r) - q).norm() < 1e-12);
    CHECK(orthogonality_defect(r.matrix()) < 1e-12);
    CHECK(r.matrix().determinant() == doctest::Approx(1.0));
    const Vec3 xi = body_velocity(r.matrix(), v);
    CHECK(xi.x() == 0.0);
    CHECK((ambient_velocity(r.matrix(), xi) - v).norm() < 1e-12);
    // d/dt (R exp(t xi^) e1) at t = 0 is the ambient velocity
    const double h = 1e-6;
    const Vec3 fd = ((r.matrix() * exp_rotation(h * xi).matrix()).col(0) -
                     (r.matrix() * exp_rotation(-h * xi).matrix()).col(0)) /
                    (2 * h);
    CHECK((fd - v).norm() < 1e-8);
  }
}

TEST_CASE("minimal rotation maps p onto q and fixes p x q") {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 200; ++n) {
    const Vec3 p = random_unit(rng);
    const Vec3 q = random_unit(rng);
    if (p.dot(q) < -0.999) continue;
    const Mat3 m = minimal_rotation(p, q);
    CHECK((m * p - q).norm() < 1e-10);
    const Vec3 axis = p.cross(q);
    CHECK((m * axis - axis).norm() < 1e-10);
  }
  CHECK(minimal_rotation(Vec3::UnitX(), Vec3::UnitX()) == Mat3::Identity());
}
