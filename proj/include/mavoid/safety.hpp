#pragma once

#include <string>
#include <vector>

#include "mavoid/dynamics.hpp"

namespace mavoid {

/// Collision radius r, risk radius r_star and safety radius R of one edge.
struct EdgeTolerance {
  double r = 0.5;
  double r_star = 1.0;
  double R = 2.0;

  /// Throws InputError unless 0 < r < r_star < R.
  void validate() const;
  bool operator==(const EdgeTolerance&) const = default;
};

/// One entry per edge, in the order of InteractionGraph::edges().
struct Tolerances {
  std::vector<EdgeTolerance> edges;

  static Tolerances uniform(const InteractionGraph& g, const EdgeTolerance& t);
  const EdgeTolerance& at(const InteractionGraph& g, int i, int j) const;
};

enum class Region { Collision, Risk, Intermediate, Safety };
std::string to_string(Region r);

/// Innermost band containing d: d < r, r <= d < r_star, d > R, otherwise
/// intermediate.
Region region_classify(const EdgeTolerance& tol, double d);

/// Positions (and optionally velocities) sampled on a time grid. This is what
/// a trajectory CSV file holds.
struct PathSamples {
  Manifold manifold = Manifold::euclidean(1);
  std::vector<double> t;
  std::vector<std::vector<Vec>> q;  ///< [sample][agent]
  std::vector<std::vector<Vec>> v;  ///< same shape, may be empty
};

PathSamples path_samples(const Trajectory& traj);

struct EdgeAvoidance {
  Edge edge;
  double min_distance = 0.0;
  double argmin_t = 0.0;
  bool avoided = false;
};

/// Grid minimum of every edge distance; avoided iff the minimum is >= r.
std::vector<EdgeAvoidance> check_avoidance(const PathSamples& path, const InteractionGraph& g,
                                           const Tolerances& tol);
std::vector<EdgeAvoidance> check_avoidance(const Trajectory& traj, const InteractionGraph& g,
                                           const Tolerances& tol);

/// How potential terms enter the energy bound c.
enum class ConstantsConvention {
  Strict,         ///< c = T sum_i [a_i^2 + sum_j V-_ij]
  HalfPotential,  ///< c = T sum_i [a_i^2 + (1/2) sum_j V-_ij]
};
std::string to_string(ConstantsConvention c);
ConstantsConvention constants_convention_from_string(const std::string& s);

struct ReferenceConstants {
  double T = 0.0;
  std::vector<double> a;       ///< per agent
  double c = 0.0;
  std::vector<double> v;       ///< per agent, sqrt(cT) + sqrt(cT + |v_i^0|^2)
  std::vector<double> Vminus;  ///< per edge
  ConstantsConvention convention = ConstantsConvention::HalfPotential;
};

/// Constants from declared per-agent acceleration bounds a_i.
ReferenceConstants constants_from_accel_bounds(const std::vector<double>& a, double T,
                                               const std::vector<double>& initial_speeds,
                                               const InteractionGraph& g,
                                               const std::vector<double>& Vminus,
                                               ConstantsConvention convention);

/// Constants measured on a reference trajectory (a_i = grid maximum of the
/// acceleration norm). Throws PreconditionError if any edge distance is <= R
/// at any sample.
ReferenceConstants reference_constants(const Trajectory& ref, const InteractionGraph& g,
                                       const Tolerances& tol, const std::vector<double>& Vminus,
                                       ConstantsConvention convention);

enum class CertificateKind { Minimizer, Bounded };
std::string to_string(CertificateKind k);

struct SafetyCertificate {
  CertificateKind kind = CertificateKind::Minimizer;
  std::vector<Edge> edges;
  std::vector<double> threshold;  ///< required lower bound on V*
  std::vector<double> vstar;      ///< provided V*
  std::vector<double> margin;     ///< vstar - threshold
  bool pass = false;
};

/// Threshold c (v_i + v_j) / (2 (r*_ij - r_ij)) per edge; passes iff every
/// V*_ij exceeds it strictly.
SafetyCertificate certify_minimizer(const ReferenceConstants& consts, const InteractionGraph& g,
                                    const Tolerances& tol, const std::vector<double>& vstar);

/// V(r*) per edge for the potentials attached to the graph.
std::vector<double> risk_boundary_potential(const InteractionGraph& g, const Tolerances& tol);

/// Potentials (D = R, eps = half the admissible maximum, smallest k with
/// (r*/R)^k <= eps_max) that certify with V* = 1/(2 eps) and V- = 1.
/// Throws InfeasibleError when r >= R or the admissible eps drops below 1e-12.
std::vector<PotentialParams> tune_potential(const InteractionGraph& g, const Tolerances& tol,
                                            const ReferenceConstants& consts);

inline constexpr double kMinTunedEps = 1e-12;

struct DerivativeBounds {
  std::vector<double> v_max, a_max, eta_max;
  std::vector<double> v0, eta0;
};

/// Grid maxima of speed, covariant acceleration and covariant jerk.
DerivativeBounds measure_bounds(const Trajectory& traj);

/// sum_i [a_i^2 + v_i eta_i + v_i^0 eta_i^0 + (1/2) sum_j V-_ij].
double bounded_sum(const DerivativeBounds& b, const InteractionGraph& g,
                   const std::vector<double>& Vminus);

/// Edge-independent threshold bounded_sum; passes iff every V*_ij exceeds it.
SafetyCertificate certify_bounded(const DerivativeBounds& b, const InteractionGraph& g,
                                  const std::vector<double>& Vminus,
                                  const std::vector<double>& vstar);

/// Largest r with V(r) >= S for a decreasing potential (0 if none).
double radius_limit(const PotentialParams& params, double S);

}  // namespace mavoid
