#include <cmath>
#include <cstdio>

#include "mavoid/errors.hpp"
#include "mavoid/scenario.hpp"

namespace mavoid {

namespace {

constexpr double kJunctionTol = 1e-9;

struct Piece {
  double t0, t1;
  bool arc;
  // cubic: q = p + v tau + c2 tau^2 + c3 tau^3
  Vec p, v, c2, c3;
  // arc: center + rho (cos(w tau) ea + sin(w tau) eb)
  Vec center, ea, eb;
  double rho = 0.0, w = 0.0;

  EuclideanAgent eval(double t) const {
    const double tau = t - t0;
    EuclideanAgent a;
    if (!arc) {
      a.q = p + tau * (v + tau * (c2 + tau * c3));
      a.dq = v + tau * (2.0 * c2 + 3.0 * tau * c3);
      a.d2q = 2.0 * c2 + 6.0 * tau * c3;
      a.d3q = 6.0 * c3;
    } else {
      const double c = std::cos(w * tau), s = std::sin(w * tau);
      const Vec radial = c * ea + s * eb;
      const Vec tangent = -s * ea + c * eb;
      a.q = center + rho * radial;
      a.dq = rho * w * tangent;
      a.d2q = -rho * w * w * radial;
      a.d3q = -rho * w * w * w * tangent;
    }
    return a;
  }
};

[[noreturn]] void junction_error(int agent, double t, const char* what, double gap) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "agent %d: discontinuous junction at t = %.9g (%s gap %.3g)",
                agent + 1, t, what, gap);
  throw RecipeError(buf);
}

std::vector<Piece> agent_pieces(const AgentRecipe& r, const AgentBoundary& b, double T, int agent) {
  std::vector<Piece> pieces;
  Vec p = b.q0, v = b.v0;
  double t0 = 0.0;
  const int dim = static_cast<int>(b.q0.size());
  for (std::size_t k = 0; k < r.segments.size(); ++k) {
    const auto& seg = r.segments[k];
    const bool last = k + 1 == r.segments.size();
    if (!(seg.t1 > t0)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "agent %d: segment %zu ends at t = %g, not after %g",
                    agent + 1, k + 1, seg.t1, t0);
      throw RecipeError(buf);
    }
    if (seg.t1 > T + kJunctionTol) {
      throw RecipeError("agent " + std::to_string(agent + 1) + ": segment ends after T");
    }
    Piece pc;
    pc.t0 = t0;
    pc.t1 = seg.t1;
    if (seg.kind == RecipeSegment::Kind::Cubic) {
      Vec q1, v1;
      if (seg.q1) {
        q1 = *seg.q1;
        v1 = *seg.v1;
      } else if (last) {
        q1 = b.qT;
        v1 = b.vT;
      } else {
        throw RecipeError("agent " + std::to_string(agent + 1) + ": cubic segment " +
                          std::to_string(k + 1) + " needs q1 and v1");
      }
      if (q1.size() != dim || v1.size() != dim) throw RecipeError("waypoint dimension mismatch");
      const double L = seg.t1 - t0;
      const Vec delta = q1 - p - v * L;
      pc.arc = false;
      pc.p = p;
      pc.v = v;
      pc.c3 = ((v1 - v) - 2.0 * delta / L) / (L * L);
      pc.c2 = (delta - pc.c3 * L * L * L) / (L * L);
    } else {
      pc.arc = true;
      pc.center = seg.center;
      pc.rho = seg.radius;
      pc.w = seg.rate;
      const Vec rel = p - seg.center;
      const double gap = std::abs(rel.norm() - seg.radius);
      if (gap > kJunctionTol) junction_error(agent, t0, "position", gap);
      pc.ea = rel / rel.norm();
      if (dim == 3) {
        const Vec3 n = seg.normal.head<3>().normalized();
        const double off = std::abs(n.dot(pc.ea.head<3>()));
        if (off > kJunctionTol) junction_error(agent, t0, "out-of-plane position", off * pc.rho);
        pc.eb = n.cross(Vec3(pc.ea.head<3>()));
      } else {
        pc.eb = Vec(2);
        pc.eb << -pc.ea[1], pc.ea[0];
      }
      const double vgap = (pc.rho * pc.w * pc.eb - v).norm();
      if (vgap > kJunctionTol) junction_error(agent, t0, "velocity", vgap);
    }
    const EuclideanAgent end = pc.eval(seg.t1);
    p = end.q;
    v = end.dq;
    t0 = seg.t1;
    pieces.push_back(pc);
  }
  if (std::abs(t0 - T) > kJunctionTol) {
    throw RecipeError("agent " + std::to_string(agent + 1) + ": recipe ends at t = " +
                      std::to_string(t0) + ", not at T");
  }
  const double pgap = (p - b.qT).norm();
  if (pgap > kJunctionTol) junction_error(agent, T, "terminal position", pgap);
  const double vgap = (v - b.vT).norm();
  if (vgap > kJunctionTol) junction_error(agent, T, "terminal velocity", vgap);
  return pieces;
}

}  // namespace

Trajectory build_reference(const ReferenceRecipe& recipe, const BoundaryConditions& bc, double h) {
  if (bc.manifold.is_sphere()) throw RecipeError("reference recipes are only defined on r<n>");
  if (recipe.agents.size() != bc.agents.size()) {
    throw RecipeError("recipe has " + std::to_string(recipe.agents.size()) + " agents, scenario has " +
                      std::to_string(bc.agents.size()));
  }
  std::vector<std::vector<Piece>> pieces;
  for (std::size_t i = 0; i < bc.agents.size(); ++i) {
    pieces.push_back(agent_pieces(recipe.agents[i], bc.agents[i], bc.T, static_cast<int>(i)));
  }
  const TimeGrid grid = make_time_grid(bc.T, h);
  Trajectory traj;
  traj.manifold = bc.manifold;
  traj.T = bc.T;
  traj.h = h;
  for (int k = 0; k <= grid.steps; ++k) {
    const double t = grid.time(k);
    std::vector<EuclideanAgent> agents;
    for (const auto& ps : pieces) {
      std::size_t m = 0;
      while (m + 1 < ps.size() && t > ps[m].t1) ++m;
      agents.push_back(ps[m].eval(t));
    }
    traj.samples.push_back(SystemState{t, std::move(agents)});
  }
  return traj;
}

}  // namespace mavoid
