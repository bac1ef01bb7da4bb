#include "flat_system.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "mavoid/errors.hpp"

namespace mavoid::detail {

using Eigen::Map;
using MapVec = Map<const Eigen::VectorXd>;
using MapMat3 = Map<const Mat3>;
using MapVec3 = Map<const Vec3>;

FlatSystem::FlatSystem(const SystemState& shape, const InteractionGraph& g)
    : sphere_(shape.is_sphere()), dim_(0), agents_(shape.agent_count()), graph_(g) {
  if (g.agent_count() != 0 && g.agent_count() != agents_) {
    throw InputError("graph has " + std::to_string(g.agent_count()) + " agents, state has " +
                     std::to_string(agents_));
  }
  if (sphere_) {
    dim_ = 3;
    stride_ = 18;
  } else {
    const auto& a = shape.euclidean();
    dim_ = a.empty() ? 1 : static_cast<int>(a.front().q.size());
    for (const auto& ag : a) {
      if (ag.q.size() != dim_ || ag.dq.size() != dim_ || ag.d2q.size() != dim_ ||
          ag.d3q.size() != dim_) {
        throw InputError("inconsistent agent dimensions in state");
      }
    }
    stride_ = 4 * static_cast<std::size_t>(dim_);
  }
  const std::size_t n = size();
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
  force_.resize(static_cast<std::size_t>(agents_) * 3 + static_cast<std::size_t>(agents_ * dim_));
}

void FlatSystem::potential_forces(const double* y, double* force) const {
  // force_i = -sum_j grad_1 V_ij, expressed in R^n (Euclidean) or in body
  // coordinates of the horizontal lift (sphere).
  const int fd = sphere_ ? 3 : dim_;
  std::fill(force, force + static_cast<std::size_t>(agents_) * fd, 0.0);
  if (graph_.agent_count() == 0) return;

  for (int i = 0; i < agents_; ++i) {
    const double* yi = y + stride_ * i;
    double* fi = force + static_cast<std::size_t>(fd) * i;
    for (const auto& nb : graph_.neighbors(i)) {
      const double* yj = y + stride_ * nb.j;
      if (!sphere_) {
        double d2 = 0.0;
        for (int c = 0; c < dim_; ++c) d2 += (yi[c] - yj[c]) * (yi[c] - yj[c]);
        const double d = std::sqrt(d2);
        if (d == 0.0) {
          if (nb.params.k < 2) {
            throw SingularityError("coincident agents " + std::to_string(i + 1) + " and " +
                                   std::to_string(nb.j + 1) + " with k < 2");
          }
          continue;
        }
        // -grad_1 V = (-V'(d)/d) (q_i - q_j)
        const double coef = -potential_slope(nb.params, d) / d;
        for (int c = 0; c < dim_; ++c) fi[c] += coef * (yi[c] - yj[c]);
      } else {
        const MapMat3 Ri(yi);
        const Vec3 qi = Ri.col(0).normalized();
        const Vec3 qj = MapMat3(yj).col(0).normalized();
        const double c = qi.dot(qj);
        const Vec3 w = qj - c * qi;
        const double s = w.norm();
        const double d = std::atan2(s, c);
        if (d > std::numbers::pi - kCutLocusMargin) {
          throw DomainError("agents " + std::to_string(i + 1) + " and " +
                            std::to_string(nb.j + 1) + " are antipodal");
        }
        if (s == 0.0) {
          if (nb.params.k < 2) {
            throw SingularityError("coincident agents " + std::to_string(i + 1) + " and " +
                                   std::to_string(nb.j + 1) + " with k < 2");
          }
          continue;
        }
        // grad_1 V = (-V'(d)/s) w; lift to body coordinates e1 x (R^T grad).
        const Vec3 grad = (-potential_slope(nb.params, d) / s) * w;
        fi[1] += Ri.col(2).dot(grad);
        fi[2] -= Ri.col(1).dot(grad);
      }
    }
  }
}

void FlatSystem::rhs(const double* y, double* dy) const {
  double* force = force_.data();
  potential_forces(y, force);
  for (int i = 0; i < agents_; ++i) {
    const double* yi = y + stride_ * i;
    double* di = dy + stride_ * i;
    if (!sphere_) {
      const std::size_t n = dim_;
      for (std::size_t c = 0; c < 3 * n; ++c) di[c] = yi[c + n];
      for (std::size_t c = 0; c < n; ++c) di[3 * n + c] = force[i * n + c];
    } else {
      const MapMat3 R(yi);
      const MapVec3 xi(yi + 9);
      const MapVec3 dxi(yi + 12);
      Map<Mat3> dR(di);
      dR.noalias() = R * hat(xi);
      for (int c = 0; c < 6; ++c) di[9 + c] = yi[12 + c];
      const Vec3 curv = -xi.cross(dxi.cross(xi));
      for (int c = 0; c < 3; ++c) di[15 + c] = curv[c] + force[3 * i + c];
    }
  }
}

void FlatSystem::project(double* y) const {
  if (!sphere_) return;
  for (int i = 0; i < agents_; ++i) {
    Map<Mat3> R(y + stride_ * i);
    // Newton-Schulz steps X <- X (3I - X^T X) / 2 converge quadratically to
    // the polar factor when X is already close to orthogonal, which is the
    // case after one integration step.
    Mat3 x = R;
    bool done = false;
    for (int it = 0; it < 6; ++it) {
      const Mat3 e = x.transpose() * x - Mat3::Identity();
      const double defect = e.norm();
      if (!(defect < 1e-2)) break;
      if (defect < 1e-15) {
        done = true;
        break;
      }
      x = x - 0.5 * x * e;
    }
    R = done ? x : reorthonormalize(R).matrix();
  }
}

double FlatSystem::hamiltonian(const double* y) const {
  double h = 0.0;
  for (int i = 0; i < agents_; ++i) {
    const double* yi = y + stride_ * i;
    if (!sphere_) {
      const MapVec dq(yi + dim_, dim_), d2q(yi + 2 * dim_, dim_), d3q(yi + 3 * dim_, dim_);
      h += dq.dot(d3q) - 0.5 * d2q.squaredNorm();
    } else {
      const MapVec3 xi(yi + 9), dxi(yi + 12), d2xi(yi + 15);
      h += xi.dot(d2xi) - 0.5 * dxi.squaredNorm();
    }
  }
  if (graph_.agent_count() == 0) return h;
  for (int i = 0; i < agents_; ++i) {
    for (const auto& nb : graph_.neighbors(i)) {
      double d;
      if (!sphere_) {
        const double* yi = y + stride_ * i;
        const double* yj = y + stride_ * nb.j;
        double d2 = 0.0;
        for (int c = 0; c < dim_; ++c) d2 += (yi[c] - yj[c]) * (yi[c] - yj[c]);
        d = std::sqrt(d2);
      } else {
        const Vec3 qi = MapMat3(y + stride_ * i).col(0).normalized();
        const Vec3 qj = MapMat3(y + stride_ * nb.j).col(0).normalized();
        d = std::atan2(qi.cross(qj).norm(), qi.dot(qj));
      }
      h += 0.5 * eval_potential(nb.params, d);
    }
  }
  return h;
}

std::vector<double> FlatSystem::pack(const SystemState& s) const {
  std::vector<double> y(size());
  for (int i = 0; i < agents_; ++i) {
    double* yi = y.data() + stride_ * i;
    if (!sphere_) {
      const auto& a = s.euclidean()[i];
      for (int c = 0; c < dim_; ++c) {
        yi[c] = a.q[c];
        yi[dim_ + c] = a.dq[c];
        yi[2 * dim_ + c] = a.d2q[c];
        yi[3 * dim_ + c] = a.d3q[c];
      }
    } else {
      const auto& a = s.sphere()[i];
      Map<Mat3>{yi} = a.R;
      Map<Vec3>{yi + 9} = a.xi;
      Map<Vec3>{yi + 12} = a.dxi;
      Map<Vec3>{yi + 15} = a.d2xi;
    }
  }
  return y;
}

SystemState FlatSystem::unpack(const double* y, double t) const {
  SystemState s;
  s.t = t;
  if (!sphere_) {
    std::vector<EuclideanAgent> a(agents_);
    for (int i = 0; i < agents_; ++i) {
      const double* yi = y + stride_ * i;
      a[i].q = MapVec(yi, dim_);
      a[i].dq = MapVec(yi + dim_, dim_);
      a[i].d2q = MapVec(yi + 2 * dim_, dim_);
      a[i].d3q = MapVec(yi + 3 * dim_, dim_);
    }
    s.agents = std::move(a);
  } else {
    std::vector<SphereAgent> a(agents_);
    for (int i = 0; i < agents_; ++i) {
      const double* yi = y + stride_ * i;
      a[i].R = MapMat3(yi);
      a[i].xi = MapVec3(yi + 9);
      a[i].dxi = MapVec3(yi + 12);
      a[i].d2xi = MapVec3(yi + 15);
    }
    s.agents = std::move(a);
  }
  return s;
}

void FlatSystem::step(Integrator method, double h, std::vector<double>& y) const {
  const std::size_t n = y.size();
  if (method == Integrator::Euler) {
    rhs(y.data(), k1_.data());
    for (std::size_t c = 0; c < n; ++c) y[c] += h * k1_[c];
  } else {
    rhs(y.data(), k1_.data());
    for (std::size_t c = 0; c < n; ++c) tmp_[c] = y[c] + 0.5 * h * k1_[c];
    rhs(tmp_.data(), k2_.data());
    for (std::size_t c = 0; c < n; ++c) tmp_[c] = y[c] + 0.5 * h * k2_[c];
    rhs(tmp_.data(), k3_.data());
    for (std::size_t c = 0; c < n; ++c) tmp_[c] = y[c] + h * k3_[c];
    rhs(tmp_.data(), k4_.data());
    for (std::size_t c = 0; c < n; ++c) {
      y[c] += h / 6.0 * (k1_[c] + 2.0 * k2_[c] + 2.0 * k3_[c] + k4_[c]);
    }
  }
  project(y.data());
}

}  // namespace mavoid::detail

namespace mavoid::detail {

void rethrow_at_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (at t = %.6g)", t);
  try {
    throw;
  } catch (const SingularityError& e) {
    throw SingularityError(e.what() + std::string(buf));
  } catch (const DomainError& e) {
    throw DomainError(e.what() + std::string(buf));
  } catch (const NumericError& e) {
    throw NumericError(e.what() + std::string(buf));
  } catch (const InputError& e) {
    throw InputError(e.what() + std::string(buf));
  } catch (const Error& e) {
    throw Error(e.what() + std::string(buf));
  }
}

}  // namespace mavoid::detail
