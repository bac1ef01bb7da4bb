#pragma once

#include <string>

#include <Eigen/Dense>

namespace mavoid {

using Vec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Configuration space of a single agent: Euclidean space R^n, or the unit
/// sphere S^2 stored as unit vectors in R^3.
class Manifold {
 public:
  enum class Kind { Euclidean, Sphere };

  static Manifold euclidean(int n);
  static Manifold sphere();

  Kind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == Kind::Sphere; }
  /// Length of the coordinate vectors used for points and tangent vectors.
  int ambient_dim() const { return kind_ == Kind::Sphere ? 3 : n_; }
  /// Degrees of freedom per derivative (n, or 2 on the sphere).
  int intrinsic_dim() const { return kind_ == Kind::Sphere ? 2 : n_; }
  /// "r<n>" or "s2", the spelling used in scenario files.
  std::string name() const;

  bool operator==(const Manifold&) const = default;

 private:
  Manifold(Kind kind, int n) : kind_(kind), n_(n) {}
  Kind kind_;
  int n_;
};

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kCutLocusMargin = 1e-6;

/// Throws InputError unless p is a valid point of the manifold.
void validate_point(const Manifold& m, const Vec& p);
/// Throws InputError unless v is tangent to the manifold at p.
void validate_tangent(const Manifold& m, const Vec& p, const Vec& v);

double dist(const Manifold& m, const Vec& p, const Vec& q);

/// Inverse exponential map: the tangent vector at p whose geodesic reaches q
/// at unit time. On S^2 the pair must stay off the antipodal cut locus.
Vec log_map(const Manifold& m, const Vec& p, const Vec& q);
Vec exp_map(const Manifold& m, const Vec& p, const Vec& v);

/// Rotation matrix with validated orthogonality and orientation.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  /// Throws InputError when m is not in SO(3) within tol.
  explicit Rotation(const Mat3& m, double tol = kUnitTolerance);

  static Rotation identity() { return Rotation(); }
  static Rotation from_trusted(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return from_trusted(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return from_trusted(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  Mat3 m_;
};

Mat3 hat(const Vec3& a);
/// Inverse of hat; throws InputError if s is not skew within 1e-9.
Vec3 vee(const Mat3& s);

/// Rodrigues formula.
Rotation exp_rotation(const Vec3& a);
/// Axis-angle vector of a rotation with angle below pi. Throws DomainError
/// within 1e-6 of the antipodal set Tr(R) = -1.
Vec3 log_rotation(const Rotation& r);

/// pi(R) = R e1.
Vec3 project_to_sphere(const Rotation& r);

/// Closest rotation to a nearly orthogonal matrix (polar factor).
Rotation reorthonormalize(const Mat3& m);
/// Frobenius norm of m^T m - I.
double orthogonality_defect(const Mat3& m);

/// A rotation with R e1 = q and, when v is nonzero, R e2 parallel to v.
Rotation frame_from_point(const Vec3& q, const Vec3& v);
/// Horizontal body velocity xi (first component zero) with R (xi x e1) = v.
Vec3 body_velocity(const Mat3& r, const Vec3& v);
/// Velocity of pi(R(t)) for Rdot = R hat(xi).
Vec3 ambient_velocity(const Mat3& r, const Vec3& xi);

/// Rotation about p x q taking unit vector p onto unit vector q (identity if
/// they coincide). Used to compare tangent vectors based at nearby points.
Mat3 minimal_rotation(const Vec3& p, const Vec3& q);

}  // namespace mavoid
