#include "mavoid/dynamics.hpp"

#include <cmath>
#include <string>

#include "flat_system.hpp"
#include "mavoid/errors.hpp"

namespace mavoid {

int SystemState::agent_count() const {
  return std::visit([](const auto& a) { return static_cast<int>(a.size()); }, agents);
}

const std::vector<EuclideanAgent>& SystemState::euclidean() const {
  if (is_sphere()) throw InputError("expected a Euclidean state, got a sphere state");
  return std::get<std::vector<EuclideanAgent>>(agents);
}

const std::vector<SphereAgent>& SystemState::sphere() const {
  if (!is_sphere()) throw InputError("expected a sphere state, got a Euclidean state");
  return std::get<std::vector<SphereAgent>>(agents);
}

std::vector<Vec> positions(const SystemState& s) {
  std::vector<Vec> out;
  if (s.is_sphere()) {
    for (const auto& a : s.sphere()) out.push_back(a.R.col(0));
  } else {
    for (const auto& a : s.euclidean()) out.push_back(a.q);
  }
  return out;
}

std::vector<Vec> velocities(const SystemState& s) {
  std::vector<Vec> out;
  if (s.is_sphere()) {
    for (const auto& a : s.sphere()) out.push_back(ambient_velocity(a.R, a.xi));
  } else {
    for (const auto& a : s.euclidean()) out.push_back(a.dq);
  }
  return out;
}

std::vector<DerivativeNorms> derivative_norms(const SystemState& s) {
  std::vector<DerivativeNorms> out;
  if (s.is_sphere()) {
    for (const auto& a : s.sphere()) out.push_back({a.xi.norm(), a.dxi.norm(), a.d2xi.norm()});
  } else {
    for (const auto& a : s.euclidean()) out.push_back({a.dq.norm(), a.d2q.norm(), a.d3q.norm()});
  }
  return out;
}

std::vector<Vec> el_rhs_euclidean(const SystemState& s, const InteractionGraph& g) {
  if (s.is_sphere()) throw InputError("el_rhs_euclidean needs a Euclidean state");
  detail::FlatSystem sys(s, g);
  const auto y = sys.pack(s);
  std::vector<double> dy(y.size());
  sys.rhs(y.data(), dy.data());
  std::vector<Vec> out;
  const int n = s.agent_count() ? static_cast<int>(s.euclidean().front().q.size()) : 0;
  for (int i = 0; i < s.agent_count(); ++i) {
    out.push_back(Eigen::Map<const Vec>(dy.data() + 4 * n * i + 3 * n, n));
  }
  return out;
}

std::vector<Vec3> reduced_rhs_so3(const SystemState& s, const InteractionGraph& g) {
  if (!s.is_sphere()) throw InputError("reduced_rhs_so3 needs a sphere state");
  detail::FlatSystem sys(s, g);
  const auto y = sys.pack(s);
  std::vector<double> dy(y.size());
  sys.rhs(y.data(), dy.data());
  std::vector<Vec3> out;
  for (int i = 0; i < s.agent_count(); ++i) out.push_back(Eigen::Map<const Vec3>(dy.data() + 18 * i + 15));
  return out;
}

std::string to_string(Integrator m) { return m == Integrator::Euler ? "euler" : "rk4"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return Integrator::Euler;
  if (s == "rk4") return Integrator::RK4;
  throw InputError("unknown integrator '" + s + "' (expected euler or rk4)");
}

TimeGrid make_time_grid(double T, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("step h must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("horizon T must be > 0");
  const int steps = static_cast<int>(std::ceil(T / h - 1e-9));
  if (steps > 50'000'000) throw InputError("too many integration steps");
  TimeGrid g{steps, h, T - (steps - 1) * h, T};
  return g;
}

namespace {

void validate_state(const SystemState& s) {
  if (s.is_sphere()) {
    for (const auto& a : s.sphere()) {
      Rotation check(a.R, 1e-6);
      (void)check;
      if (std::abs(a.xi.x()) > 1e-9 || std::abs(a.dxi.x()) > 1e-9 || std::abs(a.d2xi.x()) > 1e-9) {
        throw InputError("body velocities must be horizontal (first component 0)");
      }
    }
  } else {
    for (const auto& a : s.euclidean()) {
      if (!a.q.allFinite() || !a.dq.allFinite() || !a.d2q.allFinite() || !a.d3q.allFinite()) {
        throw InputError("state has non-finite entries");
      }
    }
  }
}

}  // namespace

Trajectory integrate(const InteractionGraph& g, const SystemState& initial, double h, double T,
                     Integrator method) {
  validate_state(initial);
  const TimeGrid grid = make_time_grid(T, h);
  detail::FlatSystem sys(initial, g);
  std::vector<double> y = sys.pack(initial);
  sys.project(y.data());

  Trajectory traj;
  if (initial.is_sphere()) {
    traj.manifold = Manifold::sphere();
  } else if (initial.agent_count() > 0) {
    traj.manifold = Manifold::euclidean(static_cast<int>(initial.euclidean().front().q.size()));
  }
  traj.T = T;
  traj.h = h;
  traj.samples.reserve(grid.steps + 1);
  traj.samples.push_back(sys.unpack(y.data(), 0.0));
  detail::advance(sys, y, grid, method, [&](int k, const std::vector<double>& yk) {
    traj.samples.push_back(sys.unpack(yk.data(), grid.time(k)));
  });
  return traj;
}

double hamiltonian(const SystemState& s, const InteractionGraph& g) {
  detail::FlatSystem sys(s, g);
  const auto y = sys.pack(s);
  return sys.hamiltonian(y.data());
}

std::string to_string(JConvention c) { return c == JConvention::EqJ ? "eq" : "proof"; }

double functional_J(const Trajectory& traj, const InteractionGraph& g, JConvention convention) {
  const auto& samples = traj.samples;
  if (samples.empty()) return 0.0;
  const Manifold& m = traj.manifold;
  auto integrand = [&](const SystemState& s) {
    const auto norms = derivative_norms(s);
    const auto pos = positions(s);
    double total = 0.0;
    for (int i = 0; i < s.agent_count(); ++i) {
      double pot = 0.0;
      if (g.agent_count() > 0) {
        for (const auto& nb : g.neighbors(i)) pot += eval_potential(nb.params, dist(m, pos[i], pos[nb.j]));
      }
      total += norms[i].a * norms[i].a + 0.5 * pot;
    }
    return total;
  };
  double J = 0.0;
  double prev = integrand(samples.front());
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double cur = integrand(samples[k]);
    J += 0.5 * (samples[k].t - samples[k - 1].t) * (prev + cur);
    prev = cur;
  }
  return convention == JConvention::EqJ ? 0.5 * J : J;
}

}  // namespace mavoid
