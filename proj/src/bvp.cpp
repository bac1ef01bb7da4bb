#include "mavoid/bvp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "flat_system.hpp"
#include "mavoid/errors.hpp"

namespace mavoid {

void BoundaryConditions::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("T must be > 0");
  if (agents.empty()) throw InputError("at least one agent is required");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string tag = "agent " + std::to_string(i + 1) + ": ";
    try {
      validate_point(manifold, a.q0);
      validate_point(manifold, a.qT);
      validate_tangent(manifold, a.q0, a.v0);
      validate_tangent(manifold, a.qT, a.vT);
      if (a.R0) {
        if (!manifold.is_sphere()) throw InputError("R0 is only meaningful on s2");
        Rotation r(*a.R0, 1e-6);
        if ((a.R0->col(0) - a.q0).norm() > 1e-6) throw InputError("R0 e1 must equal q0");
      }
    } catch (const InputError& e) {
      throw InputError(tag + e.what());
    }
  }
}

namespace {

int per_derivative(const ShootingProblem& p) { return p.bc.manifold.intrinsic_dim(); }

void check_unknowns(const ShootingProblem& p, const Vec& u) {
  if (u.size() != unknown_count(p)) {
    throw InputError("expected " + std::to_string(unknown_count(p)) + " unknowns, got " +
                     std::to_string(u.size()));
  }
}

// Terminal residual straight from the flat state.
double flat_residual(const ShootingProblem& p, const double* y) {
  const auto& agents = p.bc.agents;
  double sum = 0.0;
  if (p.bc.manifold.is_sphere()) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const double* yi = y + 18 * i;
      const Eigen::Map<const Mat3> R(yi);
      const Eigen::Map<const Vec3> xi(yi + 9);
      const Vec3 q = R.col(0).normalized();
      const Vec3 qT = agents[i].qT.head<3>();
      const double dp = std::atan2(q.cross(qT).norm(), q.dot(qT));
      const Vec3 v = ambient_velocity(R, xi);
      const Vec3 target = minimal_rotation(qT, q) * agents[i].vT.head<3>();
      sum += p.w_position * dp * dp + p.w_velocity * (v - target).squaredNorm();
    }
  } else {
    const int n = p.bc.manifold.ambient_dim();
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const double* yi = y + 4 * n * i;
      for (int c = 0; c < n; ++c) {
        const double dq = yi[c] - agents[i].qT[c];
        const double dv = yi[n + c] - agents[i].vT[c];
        sum += p.w_position * dq * dq + p.w_velocity * dv * dv;
      }
    }
  }
  return std::sqrt(sum);
}

// Reusable integrator for repeated residual evaluations.
class Shooter {
 public:
  explicit Shooter(const ShootingProblem& p)
      : p_(p),
        shape_(initial_state(p, Vec::Zero(unknown_count(p)))),
        sys_(shape_, p.graph),
        grid_(make_time_grid(p.bc.T, p.integrator.h)) {}

  double operator()(const Vec& u) {
    y_ = sys_.pack(initial_state(p_, u));
    detail::advance(sys_, y_, grid_, p_.integrator.method, [](int, const std::vector<double>&) {});
    return flat_residual(p_, y_.data());
  }

 private:
  const ShootingProblem& p_;
  SystemState shape_;
  detail::FlatSystem sys_;
  TimeGrid grid_;
  std::vector<double> y_;
};

}  // namespace

int unknown_count(const ShootingProblem& p) {
  return 2 * per_derivative(p) * static_cast<int>(p.bc.agents.size());
}

SystemState initial_state(const ShootingProblem& p, const Vec& u) {
  check_unknowns(p, u);
  SystemState s;
  const int m = per_derivative(p);
  if (p.bc.manifold.is_sphere()) {
    std::vector<SphereAgent> agents;
    for (std::size_t i = 0; i < p.bc.agents.size(); ++i) {
      const auto& b = p.bc.agents[i];
      SphereAgent a;
      a.R = b.R0 ? reorthonormalize(*b.R0).matrix()
                 : frame_from_point(b.q0.head<3>(), b.v0.head<3>()).matrix();
      a.xi = body_velocity(a.R, b.v0.head<3>());
      const double* ui = u.data() + 2 * m * i;
      a.dxi = Vec3(0.0, ui[0], ui[1]);
      a.d2xi = Vec3(0.0, ui[2], ui[3]);
      agents.push_back(a);
    }
    s.agents = std::move(agents);
  } else {
    std::vector<EuclideanAgent> agents;
    for (std::size_t i = 0; i < p.bc.agents.size(); ++i) {
      const auto& b = p.bc.agents[i];
      EuclideanAgent a;
      a.q = b.q0;
      a.dq = b.v0;
      a.d2q = u.segment(2 * m * i, m);
      a.d3q = u.segment(2 * m * i + m, m);
      agents.push_back(a);
    }
    s.agents = std::move(agents);
  }
  return s;
}

SystemState shoot(const ShootingProblem& p, const Vec& u) {
  const SystemState s0 = initial_state(p, u);
  detail::FlatSystem sys(s0, p.graph);
  std::vector<double> y = sys.pack(s0);
  const TimeGrid grid = make_time_grid(p.bc.T, p.integrator.h);
  detail::advance(sys, y, grid, p.integrator.method, [](int, const std::vector<double>&) {});
  return sys.unpack(y.data(), p.bc.T);
}

Trajectory shoot_trajectory(const ShootingProblem& p, const Vec& u) {
  return integrate(p.graph, initial_state(p, u), p.integrator.h, p.bc.T, p.integrator.method);
}

double residual(const ShootingProblem& p, const Vec& u) {
  check_unknowns(p, u);
  Shooter shooter(p);
  return shooter(u);
}

double terminal_residual(const ShootingProblem& p, const SystemState& terminal) {
  detail::FlatSystem sys(terminal, p.graph);
  const auto y = sys.pack(terminal);
  return flat_residual(p, y.data());
}

Vec cubic_init(const ShootingProblem& p) {
  Vec u = Vec::Zero(unknown_count(p));
  if (p.bc.manifold.is_sphere()) return u;
  const int n = per_derivative(p);
  const double T = p.bc.T;
  for (std::size_t i = 0; i < p.bc.agents.size(); ++i) {
    const auto& b = p.bc.agents[i];
    // q(t) = q0 + v0 t + c2 t^2 + c3 t^3 matching q(T) and q'(T).
    const Vec delta = b.qT - b.q0 - b.v0 * T;
    const Vec c3 = ((b.vT - b.v0) - 2.0 * delta / T) / (T * T);
    const Vec c2 = (delta - c3 * T * T * T) / (T * T);
    u.segment(2 * n * i, n) = 2.0 * c2;
    u.segment(2 * n * i + n, n) = 6.0 * c3;
  }
  return u;
}

SolveReport solve_bvp(const ShootingProblem& p, const SolveOptions& opt) {
  p.bc.validate();
  if (p.graph.agent_count() != 0 && p.graph.agent_count() != static_cast<int>(p.bc.agents.size())) {
    throw InputError("graph and boundary conditions disagree on the agent count");
  }
  const int dim = unknown_count(p);
  Vec x0;
  switch (opt.guess) {
    case GuessKind::Zero: x0 = Vec::Zero(dim); break;
    case GuessKind::CubicInit: x0 = cubic_init(p); break;
    case GuessKind::Given:
      check_unknowns(p, opt.initial);
      x0 = opt.initial;
      break;
    case GuessKind::Direct: x0 = direct_guess(p, opt.warm_path, opt.direct_nodes); break;
  }

  Shooter shooter(p);
  SolveReport rep;
  auto objective = [&](const Vec& u) {
    try {
      return shooter(u);
    } catch (const SingularityError&) {
    } catch (const DomainError&) {
    } catch (const NumericError&) {
    }
    ++rep.singular_evals;
    return std::numeric_limits<double>::infinity();
  };

  NelderMeadOptions nm = opt.nm;
  const long budget = nm.max_evals > 0 ? nm.max_evals : 50000L * std::max(dim, 1);

  auto best_x = x0;
  double best_f = objective(x0);
  ++rep.function_evals;
  if (!std::isfinite(best_f)) {
    // Start point hits a singular configuration: probe an inflated simplex
    // and continue from its best vertex.
    rep.inflated_retry = true;
    for (int c = 0; c < dim; ++c) {
      Vec x = x0;
      x[c] += 10.0 * std::max(nm.step_floor, nm.step_scale * std::abs(x0[c]));
      const double f = objective(x);
      ++rep.function_evals;
      if (f < best_f) {
        best_f = f;
        best_x = x;
      }
    }
    if (!std::isfinite(best_f)) {
      rep.message = "objective is singular at the initial guess and its inflated simplex";
      rep.unknowns = x0;
      rep.residual = best_f;
      return rep;
    }
  }

  auto run = [&](const Vec& start, double scale) {
    NelderMeadOptions o = nm;
    o.step_floor *= scale;
    o.max_evals = std::max<long>(budget - rep.function_evals, dim + 2);
    const NelderMeadResult r = nelder_mead(objective, start, o);
    rep.iterations += r.iterations;
    rep.function_evals += r.evals;
    if (r.f < best_f) {
      best_f = r.f;
      best_x = r.x;
    }
    return r;
  };

  NelderMeadResult last = run(best_x, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.restarts && best_f > opt.residual_tol && rep.function_evals < budget;
       ++k) {
    // Stop restarting once a fresh simplex no longer makes real progress.
    if (!(best_f < 0.999 * prev)) break;
    prev = best_f;
    ++rep.restarts_used;
    last = run(best_x, 1.0);
  }
  if (best_f > opt.residual_tol && rep.singular_evals > 0 && !rep.inflated_retry &&
      rep.function_evals < budget) {
    rep.inflated_retry = true;
    last = run(best_x, 10.0);
  }

  rep.unknowns = best_x;
  rep.residual = best_f;
  rep.converged = best_f <= opt.residual_tol;
  std::ostringstream msg;
  msg << (rep.converged ? "converged" : "not converged") << " (residual " << best_f
      << ", last stop " << to_string(last.reason) << ")";
  rep.message = msg.str();
  try {
    rep.trajectory = shoot_trajectory(p, best_x);
  } catch (const Error& e) {
    rep.converged = false;
    rep.message += std::string("; trajectory failed: ") + e.what();
  }
  return rep;
}

}  // namespace mavoid
