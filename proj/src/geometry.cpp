#include "mavoid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mavoid/errors.hpp"

namespace mavoid {

Manifold Manifold::euclidean(int n) {
  if (n < 1) {
    throw InputError("euclidean dimension must be >= 1, got " + std::to_string(n));
  }
  return Manifold(Kind::Euclidean, n);
}

Manifold Manifold::sphere() { return Manifold(Kind::Sphere, 2); }

std::string Manifold::name() const {
  return is_sphere() ? "s2" : "r" + std::to_string(n_);
}

namespace {

void check_dim(const Manifold& m, const Vec& v, const char* what) {
  if (v.size() != m.ambient_dim()) {
    std::ostringstream os;
    os << what << " has dimension " << v.size() << ", manifold " << m.name() << " expects "
       << m.ambient_dim();
    throw InputError(os.str());
  }
}

// Great-circle angle; atan2 keeps full precision near 0 and pi where acos
// of a dot product does not.
double sphere_angle(const Vec3& p, const Vec3& q) {
  return std::atan2(p.cross(q).norm(), std::clamp(p.dot(q), -1.0, 1.0));
}

}  // namespace

void validate_point(const Manifold& m, const Vec& p) {
  check_dim(m, p, "point");
  if (!p.allFinite()) throw InputError("point has non-finite coordinates");
  if (m.is_sphere() && std::abs(p.norm() - 1.0) > kUnitTolerance) {
    throw InputError("sphere point is not unit length (norm " + std::to_string(p.norm()) + ")");
  }
}

void validate_tangent(const Manifold& m, const Vec& p, const Vec& v) {
  check_dim(m, v, "tangent vector");
  if (!v.allFinite()) throw InputError("tangent vector has non-finite coordinates");
  if (m.is_sphere() && std::abs(v.dot(p)) > kUnitTolerance) {
    throw InputError("sphere tangent vector is not orthogonal to its base point");
  }
}

double dist(const Manifold& m, const Vec& p, const Vec& q) {
  check_dim(m, p, "p");
  check_dim(m, q, "q");
  if (!m.is_sphere()) return (q - p).norm();
  return sphere_angle(p.head<3>(), q.head<3>());
}

Vec log_map(const Manifold& m, const Vec& p, const Vec& q) {
  check_dim(m, p, "p");
  check_dim(m, q, "q");
  if (!m.is_sphere()) return q - p;

  const double c = p.dot(q);
  const Vec w = q - c * p;  // component of q orthogonal to p, norm sin(phi)
  const double s = w.norm();
  const double phi = std::atan2(s, std::clamp(c, -1.0, 1.0));
  if (phi > std::numbers::pi - kCutLocusMargin) {
    throw DomainError("antipodal points on S2: log map undefined (distance " +
                      std::to_string(phi) + ")");
  }
  const double scale = s > 1e-8 ? phi / s : 1.0 + phi * phi / 6.0;
  return scale * w;
}

Vec exp_map(const Manifold& m, const Vec& p, const Vec& v) {
  check_dim(m, p, "p");
  check_dim(m, v, "v");
  if (!m.is_sphere()) return p + v;
  const double t = v.norm();
  if (t < 1e-300) return p;
  Vec out = std::cos(t) * p + (std::sin(t) / t) * v;
  return out / out.norm();
}

Rotation::Rotation(const Mat3& m, double tol) : m_(m) {
  if (!m.allFinite() || orthogonality_defect(m) > tol || std::abs(m.determinant() - 1.0) > tol) {
    throw InputError("matrix is not a rotation (orthogonality defect " +
                     std::to_string(orthogonality_defect(m)) + ", det " +
                     std::to_string(m.determinant()) + ")");
  }
}

Mat3 hat(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

Vec3 vee(const Mat3& s) {
  if ((s + s.transpose()).norm() > 1e-9) throw InputError("vee: matrix is not skew-symmetric");
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

Rotation exp_rotation(const Vec3& a) {
  const double t2 = a.squaredNorm();
  const double t = std::sqrt(t2);
  double sa;  // sin(t)/t
  double sb;  // (1 - cos(t))/t^2
  if (t < 1e-4) {
    sa = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    sb = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    sa = std::sin(t) / t;
    sb = (1.0 - std::cos(t)) / t2;
  }
  const Mat3 k = hat(a);
  return Rotation::from_trusted(Mat3::Identity() + sa * k + sb * k * k);
}

Vec3 log_rotation(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));  // vee(R - R^T)
  const double cos_phi = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double phi = std::atan2(0.5 * w.norm(), cos_phi);
  if (phi > std::numbers::pi - kCutLocusMargin) {
    throw DomainError("antipodal rotation, log undefined (angle " + std::to_string(phi) + ")");
  }
  // phi / (2 sin phi), with its Taylor expansion near the identity.
  const double factor =
      phi < 1e-4 ? 0.5 + phi * phi / 12.0 + 7.0 * phi * phi * phi * phi / 720.0
                 : phi / (2.0 * std::sin(phi));
  return factor * w;
}

Vec3 project_to_sphere(const Rotation& r) { return r.matrix().col(0); }

double orthogonality_defect(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).norm();
}

Rotation reorthonormalize(const Mat3& m) {
  if (!m.allFinite()) throw NumericError("reorthonormalize: non-finite matrix");
  const double det = m.determinant();
  if (!(det > 1e-12)) {
    throw NumericError("reorthonormalize: degenerate or reflecting matrix (det " +
                       std::to_string(det) + ")");
  }
  // Newton iteration X <- (X + X^{-T}) / 2 converges quadratically to the
  // orthogonal polar factor.
  Mat3 x = m;
  for (int it = 0; it < 50; ++it) {
    const Mat3 next = 0.5 * (x + x.inverse().transpose());
    const double step = (next - x).norm();
    x = next;
    if (step < 1e-15) break;
  }
  // One Gram-Schmidt-free polish keeps the defect at round-off level.
  x = 1.5 * x - 0.5 * x * x.transpose() * x;
  if (orthogonality_defect(x) > 1e-12 || x.determinant() < 0.0) {
    throw NumericError("reorthonormalize: polar iteration did not converge");
  }
  return Rotation::from_trusted(x);
}

Rotation frame_from_point(const Vec3& q, const Vec3& v) {
  const Vec3 e1 = q.normalized();
  Vec3 e2 = v - v.dot(e1) * e1;
  if (e2.norm() < 1e-12) {
    // Any unit vector orthogonal to q.
    const Vec3 trial = std::abs(e1.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    e2 = trial - trial.dot(e1) * e1;
  }
  e2.normalize();
  Mat3 r;
  r.col(0) = e1;
  r.col(1) = e2;
  r.col(2) = e1.cross(e2);
  return Rotation::from_trusted(r);
}

Vec3 body_velocity(const Mat3& r, const Vec3& v) {
  // e1 x (R^T v)
  return Vec3(0.0, -r.col(2).dot(v), r.col(1).dot(v));
}

Vec3 ambient_velocity(const Mat3& r, const Vec3& xi) {
  // R (xi x e1); xi x e1 = (0, xi3, -xi2)
  return xi.z() * r.col(1) - xi.y() * r.col(2);
}

Mat3 minimal_rotation(const Vec3& p, const Vec3& q) {
  const Vec3 axis = p.cross(q);
  const double s = axis.norm();
  if (s < 1e-15) return Mat3::Identity();
  const double angle = std::atan2(s, p.dot(q));
  return exp_rotation(axis * (angle / s)).matrix();
}

}  // namespace mavoid
