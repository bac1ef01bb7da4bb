#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mavoid/dynamics.hpp"
#include "mavoid/nelder_mead.hpp"

namespace mavoid {

/// Boundary data of one agent. On S^2 the initial frame R0 may be given
/// explicitly; otherwise it is built from q0 and v0.
struct AgentBoundary {
  Vec q0, v0, qT, vT;
  std::optional<Mat3> R0;
  std::optional<Vec3> xi0;  ///< body velocity as given with R0
};

struct BoundaryConditions {
  Manifold manifold = Manifold::euclidean(1);
  double T = 1.0;
  std::vector<AgentBoundary> agents;

  /// Throws InputError on inconsistent dimensions or off-manifold data.
  void validate() const;
};

struct IntegratorSettings {
  Integrator method = Integrator::RK4;
  double h = 0.005;
};

struct ShootingProblem {
  BoundaryConditions bc;
  InteractionGraph graph;
  IntegratorSettings integrator;
  double w_position = 1.0;
  double w_velocity = 1.0;
};

/// Length of the unknown vector: per agent the initial acceleration and jerk
/// (n + n in R^n; 2 + 2 horizontal components on S^2).
int unknown_count(const ShootingProblem& p);

/// Initial state for the given unknowns.
SystemState initial_state(const ShootingProblem& p, const Vec& unknowns);

/// Terminal state reached from the given unknowns.
SystemState shoot(const ShootingProblem& p, const Vec& unknowns);

/// Full trajectory for the given unknowns.
Trajectory shoot_trajectory(const ShootingProblem& p, const Vec& unknowns);

/// sqrt(sum_i w_p dist(q_i(T), qT_i)^2 + w_v |v_i(T) - vT_i|^2). On S^2 the
/// target velocity is carried to q_i(T) by the minimal rotation first.
double residual(const ShootingProblem& p, const Vec& unknowns);
double terminal_residual(const ShootingProblem& p, const SystemState& terminal);

/// Unknowns of the potential-free solution: Hermite cubics in R^n, zero on S^2.
Vec cubic_init(const ShootingProblem& p);

/// Position of agent i at time t, used to seed the direct warm start.
using WarmPath = std::function<Vec(int agent, double t)>;

/// Unknowns read off a minimiser of the discretised action
/// sum_m dt (1/2 sum_i |a_i|^2 + sum_edges V) on a uniform node grid, with
/// ghost nodes carrying the velocity boundary conditions. Solved by
/// Levenberg-Marquardt from `init` (Hermite cubics when empty). R^n only.
Vec direct_guess(const ShootingProblem& p, const WarmPath& init = {}, int nodes = 800);

enum class GuessKind { Zero, CubicInit, Given, Direct };

struct SolveOptions {
  GuessKind guess = GuessKind::CubicInit;
  Vec initial;  ///< used with GuessKind::Given
  WarmPath warm_path;  ///< used with GuessKind::Direct
  int direct_nodes = 800;
  NelderMeadOptions nm;
  double residual_tol = 1e-6;
  /// Fresh simplices started from the best point after a stall.
  int restarts = 8;
};

struct SolveReport {
  bool converged = false;
  double residual = 0.0;
  long iterations = 0;
  long function_evals = 0;
  int restarts_used = 0;
  bool inflated_retry = false;
  long singular_evals = 0;
  std::string message;
  Vec unknowns;
  Trajectory trajectory;
};

/// Shooting with Nelder-Mead on the residual. Deterministic for identical
/// inputs. Non-convergence is reported, not thrown.
SolveReport solve_bvp(const ShootingProblem& p, const SolveOptions& opt = {});

}  // namespace mavoid
