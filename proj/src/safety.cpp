#include "mavoid/safety.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mavoid/errors.hpp"

namespace mavoid {

void EdgeTolerance::validate() const {
  if (!(r > 0.0)) throw InputError("r must be > 0");
  if (!(r < r_star)) throw InputError("r must be < r_star");
  if (!(r_star < R)) throw InputError("r_star must be < R");
  if (!std::isfinite(R)) throw InputError("R must be finite");
}

Tolerances Tolerances::uniform(const InteractionGraph& g, const EdgeTolerance& t) {
  return Tolerances{std::vector<EdgeTolerance>(g.edges().size(), t)};
}

const EdgeTolerance& Tolerances::at(const InteractionGraph& g, int i, int j) const {
  const int k = g.edge_index(i, j);
  if (k < 0 || k >= static_cast<int>(edges.size())) {
    throw InputError("no tolerance for edge (" + std::to_string(i + 1) + "," +
                     std::to_string(j + 1) + ")");
  }
  return edges[k];
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Collision: return "collision";
    case Region::Risk: return "risk";
    case Region::Intermediate: return "intermediate";
    case Region::Safety: return "safety";
  }
  return "?";
}

Region region_classify(const EdgeTolerance& tol, double d) {
  if (d < tol.r) return Region::Collision;
  if (d < tol.r_star) return Region::Risk;
  if (d > tol.R) return Region::Safety;
  return Region::Intermediate;
}

PathSamples path_samples(const Trajectory& traj) {
  PathSamples p;
  p.manifold = traj.manifold;
  for (const auto& s : traj.samples) {
    p.t.push_back(s.t);
    p.q.push_back(positions(s));
    p.v.push_back(velocities(s));
  }
  return p;
}

namespace {

void check_edges(const InteractionGraph& g, const Tolerances& tol) {
  if (tol.edges.size() != g.edges().size()) {
    throw InputError("tolerance count " + std::to_string(tol.edges.size()) +
                     " does not match edge count " + std::to_string(g.edges().size()));
  }
}

void check_per_edge(const InteractionGraph& g, const std::vector<double>& x, const char* what) {
  if (x.size() != g.edges().size()) {
    throw InputError(std::string(what) + " needs one value per edge");
  }
}

}  // namespace

std::vector<EdgeAvoidance> check_avoidance(const PathSamples& path, const InteractionGraph& g,
                                           const Tolerances& tol) {
  check_edges(g, tol);
  if (path.t.empty()) throw InputError("empty trajectory");
  std::vector<EdgeAvoidance> out;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const Edge e = g.edges()[k];
    EdgeAvoidance a{e, std::numeric_limits<double>::infinity(), 0.0, false};
    for (std::size_t s = 0; s < path.t.size(); ++s) {
      const double d = dist(path.manifold, path.q[s].at(e.i), path.q[s].at(e.j));
      if (d < a.min_distance) {
        a.min_distance = d;
        a.argmin_t = path.t[s];
      }
    }
    a.avoided = a.min_distance >= tol.edges[k].r;
    out.push_back(a);
  }
  return out;
}

std::vector<EdgeAvoidance> check_avoidance(const Trajectory& traj, const InteractionGraph& g,
                                           const Tolerances& tol) {
  return check_avoidance(path_samples(traj), g, tol);
}

std::string to_string(ConstantsConvention c) {
  return c == ConstantsConvention::Strict ? "strict" : "half";
}

ConstantsConvention constants_convention_from_string(const std::string& s) {
  if (s == "strict") return ConstantsConvention::Strict;
  if (s == "half") return ConstantsConvention::HalfPotential;
  throw InputError("unknown convention '" + s + "' (expected strict or half)");
}

ReferenceConstants constants_from_accel_bounds(const std::vector<double>& a, double T,
                                               const std::vector<double>& initial_speeds,
                                               const InteractionGraph& g,
                                               const std::vector<double>& Vminus,
                                               ConstantsConvention convention) {
  check_per_edge(g, Vminus, "Vminus");
  const int s = g.agent_count();
  if (static_cast<int>(a.size()) != s || static_cast<int>(initial_speeds.size()) != s) {
    throw InputError("acceleration bounds and initial speeds need one value per agent");
  }
  if (!(T > 0.0)) throw InputError("T must be > 0");
  const double w = convention == ConstantsConvention::Strict ? 1.0 : 0.5;
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    if (!(a[i] >= 0.0)) throw InputError("acceleration bounds must be >= 0");
    double pot = 0.0;
    for (const auto& nb : g.neighbors(i)) pot += Vminus[g.edge_index(i, nb.j)];
    sum += a[i] * a[i] + w * pot;
  }
  ReferenceConstants rc;
  rc.T = T;
  rc.a = a;
  rc.c = T * sum;
  rc.Vminus = Vminus;
  rc.convention = convention;
  for (int i = 0; i < s; ++i) {
    const double ct = rc.c * T;
    rc.v.push_back(std::sqrt(ct) + std::sqrt(ct + initial_speeds[i] * initial_speeds[i]));
  }
  return rc;
}

ReferenceConstants reference_constants(const Trajectory& ref, const InteractionGraph& g,
                                       const Tolerances& tol, const std::vector<double>& Vminus,
                                       ConstantsConvention convention) {
  check_edges(g, tol);
  if (ref.samples.empty()) throw InputError("empty reference trajectory");
  for (const auto& s : ref.samples) {
    const auto q = positions(s);
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
      const Edge e = g.edges()[k];
      const double d = dist(ref.manifold, q[e.i], q[e.j]);
      if (!(d > tol.edges[k].R)) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "reference leaves the safety region: edge (%d,%d) has distance %.6g <= R = "
                      "%.6g at t = %.6g",
                      e.i + 1, e.j + 1, d, tol.edges[k].R, s.t);
        throw PreconditionError(buf);
      }
    }
  }
  const int n = ref.samples.front().agent_count();
  std::vector<double> a(n, 0.0);
  for (const auto& s : ref.samples) {
    const auto norms = derivative_norms(s);
    for (int i = 0; i < n; ++i) a[i] = std::max(a[i], norms[i].a);
  }
  std::vector<double> speeds;
  for (const auto& nrm : derivative_norms(ref.samples.front())) speeds.push_back(nrm.v);
  return constants_from_accel_bounds(a, ref.T, speeds, g, Vminus, convention);
}

std::string to_string(CertificateKind k) {
  return k == CertificateKind::Minimizer ? "minimizer" : "bounded";
}

SafetyCertificate certify_minimizer(const ReferenceConstants& consts, const InteractionGraph& g,
                                    const Tolerances& tol, const std::vector<double>& vstar) {
  check_edges(g, tol);
  check_per_edge(g, vstar, "vstar");
  SafetyCertificate cert;
  cert.kind = CertificateKind::Minimizer;
  cert.edges = g.edges();
  cert.pass = true;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const Edge e = g.edges()[k];
    const auto& t = tol.edges[k];
    const double th = consts.c * (consts.v.at(e.i) + consts.v.at(e.j)) / (2.0 * (t.r_star - t.r));
    cert.threshold.push_back(th);
    cert.vstar.push_back(vstar[k]);
    cert.margin.push_back(vstar[k] - th);
    cert.pass = cert.pass && vstar[k] > th;
  }
  return cert;
}

std::vector<double> risk_boundary_potential(const InteractionGraph& g, const Tolerances& tol) {
  check_edges(g, tol);
  std::vector<double> out;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const Edge e = g.edges()[k];
    out.push_back(eval_potential(g.params(e.i, e.j), tol.edges[k].r_star));
  }
  return out;
}

std::vector<PotentialParams> tune_potential(const InteractionGraph& g, const Tolerances& tol,
                                            const ReferenceConstants& consts) {
  check_edges(g, tol);
  std::vector<PotentialParams> out;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const Edge e = g.edges()[k];
    const auto& t = tol.edges[k];
    char buf[200];
    if (!(t.r < t.R)) {
      std::snprintf(buf, sizeof buf, "edge (%d,%d): r = %g is not below R = %g", e.i + 1, e.j + 1,
                    t.r, t.R);
      throw InfeasibleError(buf);
    }
    if (!(t.r < t.r_star) || !(t.r_star < t.R)) {
      std::snprintf(buf, sizeof buf, "edge (%d,%d): need r < r_star < R", e.i + 1, e.j + 1);
      throw InfeasibleError(buf);
    }
    const double eps_max = (t.r_star - t.r) / (consts.c * (consts.v.at(e.i) + consts.v.at(e.j)));
    const double eps = 0.5 * eps_max;
    if (!(eps >= kMinTunedEps)) {
      std::snprintf(buf, sizeof buf,
                    "edge (%d,%d): admissible eps %.3g is below %.0e (r_star - r = %g too small "
                    "for c = %g)",
                    e.i + 1, e.j + 1, eps, kMinTunedEps, t.r_star - t.r, consts.c);
      throw InfeasibleError(buf);
    }
    const int kk = static_cast<int>(std::ceil(std::log(eps_max) / std::log(t.r_star / t.R) - 1e-12));
    PotentialParams p;
    p.family = PotentialFamily::Inverse;
    p.D = t.R;
    p.eps = eps;
    p.k = std::max(kk, 2);
    out.push_back(p);
  }
  return out;
}

DerivativeBounds measure_bounds(const Trajectory& traj) {
  DerivativeBounds b;
  if (traj.samples.empty()) throw InputError("empty trajectory");
  const auto first = derivative_norms(traj.samples.front());
  const std::size_t n = first.size();
  b.v_max.assign(n, 0.0);
  b.a_max.assign(n, 0.0);
  b.eta_max.assign(n, 0.0);
  for (const auto& s : traj.samples) {
    const auto norms = derivative_norms(s);
    for (std::size_t i = 0; i < n; ++i) {
      b.v_max[i] = std::max(b.v_max[i], norms[i].v);
      b.a_max[i] = std::max(b.a_max[i], norms[i].a);
      b.eta_max[i] = std::max(b.eta_max[i], norms[i].eta);
    }
  }
  for (const auto& nrm : first) {
    b.v0.push_back(nrm.v);
    b.eta0.push_back(nrm.eta);
  }
  return b;
}

double bounded_sum(const DerivativeBounds& b, const InteractionGraph& g,
                   const std::vector<double>& Vminus) {
  check_per_edge(g, Vminus, "Vminus");
  const int s = g.agent_count();
  if (static_cast<int>(b.v_max.size()) != s) throw InputError("bounds need one entry per agent");
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    double pot = 0.0;
    for (const auto& nb : g.neighbors(i)) pot += Vminus[g.edge_index(i, nb.j)];
    sum += b.a_max[i] * b.a_max[i] + b.v_max[i] * b.eta_max[i] + b.v0[i] * b.eta0[i] + 0.5 * pot;
  }
  return sum;
}

SafetyCertificate certify_bounded(const DerivativeBounds& b, const InteractionGraph& g,
                                  const std::vector<double>& Vminus,
                                  const std::vector<double>& vstar) {
  check_per_edge(g, vstar, "vstar");
  const double sum = bounded_sum(b, g, Vminus);
  SafetyCertificate cert;
  cert.kind = CertificateKind::Bounded;
  cert.edges = g.edges();
  cert.pass = true;
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    cert.threshold.push_back(sum);
    cert.vstar.push_back(vstar[k]);
    cert.margin.push_back(vstar[k] - sum);
    cert.pass = cert.pass && vstar[k] > sum;
  }
  return cert;
}

double radius_limit(const PotentialParams& params, double S) {
  params.validate();
  if (!(S > 0.0)) return std::numeric_limits<double>::infinity();
  if (params.family == PotentialFamily::Inverse) {
    const double base = 1.0 / S - params.eps;
    if (base <= 0.0) return 0.0;
    return params.D * std::pow(base, 1.0 / params.k);
  }
  if (eval_potential(params, 0.0) <= S) return 0.0;
  double lo = 0.0, hi = params.D;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * params.D; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval_potential(params, mid) > S ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace mavoid
