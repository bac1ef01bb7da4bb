#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mavoid/bvp.hpp"
#include "mavoid/safety.hpp"

namespace mavoid {

/// One piece of a reference curve, starting where the previous one ends.
/// Cubic: Hermite cubic to (q1, v1) at t1; the last cubic defaults to the
/// agent's terminal boundary data. Arc: constant-rate circular motion about
/// center with the given radius; rate is the signed angular speed and normal
/// fixes the orientation of the plane (R^3 only).
struct RecipeSegment {
  enum class Kind { Cubic, Arc };
  Kind kind = Kind::Cubic;
  double t1 = 0.0;
  std::optional<Vec> q1, v1;
  Vec center;
  double radius = 0.0;
  double rate = 0.0;
  Vec normal;
};

struct AgentRecipe {
  std::vector<RecipeSegment> segments;
};

struct ReferenceRecipe {
  std::vector<AgentRecipe> agents;
};

/// Samples the piecewise reference on the grid of step h with analytic
/// derivatives. Throws RecipeError when neighbouring segments do not join in
/// position and velocity within 1e-9.
Trajectory build_reference(const ReferenceRecipe& recipe, const BoundaryConditions& bc, double h);

struct SolverSettings {
  GuessKind guess = GuessKind::CubicInit;
  Vec initial;
  double residual_tol = 1e-6;
  long max_evals = 0;
  double ftol = 1e-10;
  double xtol = 1e-8;
  int restarts = 8;
  bool adaptive = false;
  int direct_nodes = 800;
  double w_position = 1.0;
  double w_velocity = 1.0;
};

/// Data used to derive the reference constants a_i, c, v_i.
struct ReferenceSettings {
  std::optional<ReferenceRecipe> recipe;
  std::vector<double> accel_bounds;  ///< declared a_i, empty if not given
  std::vector<double> Vminus;        ///< per edge
  ConstantsConvention convention = ConstantsConvention::HalfPotential;
};

struct Scenario {
  std::string name;
  Manifold manifold = Manifold::euclidean(1);
  BoundaryConditions bc;
  InteractionGraph graph;
  bool has_potential = false;
  Tolerances tolerances;
  IntegratorSettings integrator;
  SolverSettings solver;
  ReferenceSettings reference;
  std::optional<double> bounded_r;

  int agent_count() const { return static_cast<int>(bc.agents.size()); }
  ShootingProblem problem() const;
  SolveOptions solve_options() const;
  /// Same problem with every potential removed.
  ShootingProblem potential_free_problem() const;
};

/// Parses and validates a scenario document. Syntax errors raise ParseError
/// with line and column; semantic errors raise InputError prefixed with the
/// offending field path.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Serialises a scenario back to JSON (per-edge potentials and tolerances
/// written out explicitly).
std::string scenario_to_json(const Scenario& s);

/// Scenario files compiled into the library.
std::string bundled_scenario(const std::string& which);

}  // namespace mavoid
