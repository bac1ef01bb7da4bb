#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mavoid/geometry.hpp"
#include "mavoid/potentials.hpp"

namespace mavoid {

/// Position and derivative stack of one agent in R^n.
struct EuclideanAgent {
  Vec q, dq, d2q, d3q;
};

/// One agent on S^2 carried by a horizontal curve in SO(3): q = R e1 and
/// Rdot = R hat(xi), with xi, xi', xi'' in span{e2, e3}.
struct SphereAgent {
  Mat3 R = Mat3::Identity();
  Vec3 xi = Vec3::Zero();
  Vec3 dxi = Vec3::Zero();
  Vec3 d2xi = Vec3::Zero();
};

using AgentList = std::variant<std::vector<EuclideanAgent>, std::vector<SphereAgent>>;

struct SystemState {
  double t = 0.0;
  AgentList agents;

  int agent_count() const;
  bool is_sphere() const { return std::holds_alternative<std::vector<SphereAgent>>(agents); }
  const std::vector<EuclideanAgent>& euclidean() const;
  const std::vector<SphereAgent>& sphere() const;
};

/// Samples at t = 0, h, 2h, ..., T (the last step may be shorter).
struct Trajectory {
  Manifold manifold = Manifold::euclidean(1);
  double T = 0.0;
  double h = 0.0;
  std::vector<SystemState> samples;
};

/// Agent positions as manifold points (R e1 on the sphere).
std::vector<Vec> positions(const SystemState& s);
/// Agent velocities as ambient tangent vectors.
std::vector<Vec> velocities(const SystemState& s);
/// Norms of velocity, covariant acceleration and covariant jerk per agent.
/// On the sphere these are |xi|, |xi'| and |xi''| (the horizontal frame is
/// parallel along the projected curve).
struct DerivativeNorms {
  double v, a, eta;
};
std::vector<DerivativeNorms> derivative_norms(const SystemState& s);

/// d^4 q_i / dt^4 = -sum_j grad_1 V_ij(q_i, q_j) (flat metric, no curvature term).
std::vector<Vec> el_rhs_euclidean(const SystemState& s, const InteractionGraph& g);

/// xi_i''' = -xi_i x (xi_i' x xi_i) - sum_j lift_i(grad_1 V_ij), where the lift
/// maps a tangent vector w at R_i e1 to e1 x (R_i^T w). The result lies in
/// span{e2, e3}.
std::vector<Vec3> reduced_rhs_so3(const SystemState& s, const InteractionGraph& g);

enum class Integrator { Euler, RK4 };

std::string to_string(Integrator m);
Integrator integrator_from_string(const std::string& s);

/// Number of steps and final-step length for a horizon T and step h.
struct TimeGrid {
  int steps;
  double h;
  double last_h;
  double T;
  double time(int k) const { return k >= steps ? T : k * h; }
};
TimeGrid make_time_grid(double T, double h);

/// Fixed-step integration of the Euler-Lagrange system. On the sphere R is
/// projected back onto SO(3) after every step.
Trajectory integrate(const InteractionGraph& g, const SystemState& initial, double h, double T,
                     Integrator method);

/// H = sum_i [<v_i, D^2 v_i> - |D v_i|^2 / 2 + sum_j V_ij / 2]; constant along
/// solutions of the Euler-Lagrange equations.
double hamiltonian(const SystemState& s, const InteractionGraph& g);

enum class JConvention {
  EqJ,     ///< (1/2) sum_i int (|acc|^2 + (1/2) sum_j V_ij)
  ProofJ,  ///< sum_i int (|acc|^2 + (1/2) sum_j V_ij)
};

std::string to_string(JConvention c);

/// Composite trapezoid quadrature of the cost functional over the samples.
double functional_J(const Trajectory& traj, const InteractionGraph& g, JConvention convention);

}  // namespace mavoid
