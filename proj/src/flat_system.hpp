#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mavoid/dynamics.hpp"
#include "mavoid/errors.hpp"

namespace mavoid::detail {

// Flat-array form of the Euler-Lagrange system used by the integrators.
// Per-agent layout:
//   Euclidean: q(n) dq(n) d2q(n) d3q(n)
//   Sphere:    R(9, column-major) xi(3) dxi(3) d2xi(3)
class FlatSystem {
 public:
  FlatSystem(const SystemState& shape, const InteractionGraph& g);

  std::size_t size() const { return stride_ * agents_; }
  bool sphere() const { return sphere_; }

  void rhs(const double* y, double* dy) const;
  // Reprojects every rotation block onto SO(3).
  void project(double* y) const;
  double hamiltonian(const double* y) const;

  std::vector<double> pack(const SystemState& s) const;
  SystemState unpack(const double* y, double t) const;

  // Advances y by one step of length h.
  void step(Integrator method, double h, std::vector<double>& y) const;

 private:
  void potential_forces(const double* y, double* force) const;

  bool sphere_;
  int dim_;
  int agents_;
  std::size_t stride_;
  const InteractionGraph& graph_;
  mutable std::vector<double> k1_, k2_, k3_, k4_, tmp_, force_;
};

// Rethrows a library error with the simulation time appended, keeping its type.
[[noreturn]] void rethrow_at_time(double t);

// Steps y across the grid. visit(k, y) runs after step k (1-based). Errors are
// rethrown with the time of the failing step.
template <class Visit>
void advance(const FlatSystem& sys, std::vector<double>& y, const TimeGrid& grid,
             Integrator method, Visit&& visit) {
  for (int k = 1; k <= grid.steps; ++k) {
    const double h = k == grid.steps ? grid.last_h : grid.h;
    try {
      sys.step(method, h, y);
      for (double v : y) {
        if (!std::isfinite(v)) throw NumericError("state became non-finite");
      }
    } catch (const Error&) {
      rethrow_at_time(grid.time(k - 1));
    }
    visit(k, y);
  }
}

}  // namespace mavoid::detail
