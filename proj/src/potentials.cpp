#include "mavoid/potentials.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mavoid/errors.hpp"

namespace mavoid {

namespace {

double ipow(double x, int k) {
  double result = 1.0;
  while (k > 0) {
    if (k & 1) result *= x;
    x *= x;
    k >>= 1;
  }
  return result;
}

}  // namespace

void PotentialParams::validate() const {
  if (!(D > 0.0) || !std::isfinite(D)) throw InputError("D must be > 0");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("eps must be > 0");
  if (k < 1) throw InputError("k must be >= 1");
}

std::string to_string(PotentialFamily f) {
  return f == PotentialFamily::Inverse ? "inverse" : "bump";
}

PotentialFamily potential_family_from_string(const std::string& s) {
  if (s == "inverse") return PotentialFamily::Inverse;
  if (s == "bump") return PotentialFamily::Bump;
  throw InputError("unknown potential family '" + s + "' (expected inverse or bump)");
}

double eval_potential(const PotentialParams& p, double d) {
  const double x = d / p.D;
  if (p.family == PotentialFamily::Inverse) return 1.0 / (p.eps + ipow(x, p.k));
  if (x >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - ipow(x, p.k))) / p.eps;
}

double potential_slope(const PotentialParams& p, double d) {
  const double x = d / p.D;
  const double xk1 = ipow(x, p.k - 1);
  const double xk = xk1 * x;
  if (p.family == PotentialFamily::Inverse) {
    const double den = p.eps + xk;
    return -p.k * xk1 / (p.D * den * den);
  }
  if (x >= 1.0) return 0.0;
  const double u = 1.0 - xk;
  return -eval_potential(p, d) * p.k * xk1 / (p.D * u * u);
}

Vec grad1_potential(const Manifold& m, const PotentialParams& params, const Vec& p, const Vec& q) {
  const Vec log = log_map(m, p, q);  // throws on the cut locus
  const double d = log.norm();
  if (d == 0.0) {
    if (params.k < 2) throw SingularityError("potential gradient undefined at d = 0 for k < 2");
    return Vec::Zero(m.ambient_dim());
  }
  return (-potential_slope(params, d) / d) * log;
}

InteractionGraph::InteractionGraph(int agents) : agents_(agents), adjacency_(agents) {
  if (agents < 0) throw InputError("agent count must be nonnegative");
}

void InteractionGraph::add_edge(int i, int j, const PotentialParams& params) {
  if (i == j || i < 0 || j < 0 || i >= agents_ || j >= agents_) {
    std::ostringstream os;
    os << "invalid edge (" << i + 1 << "," << j + 1 << ") for " << agents_ << " agents";
    throw InputError(os.str());
  }
  if (has_edge(i, j)) {
    std::ostringstream os;
    os << "duplicate edge (" << i + 1 << "," << j + 1 << ")";
    throw InputError(os.str());
  }
  edges_.push_back(Edge{std::min(i, j), std::max(i, j)});
  adjacency_[i].push_back({j, params});
  adjacency_[j].push_back({i, params});
}

void InteractionGraph::set_directed_params(int i, int j, const PotentialParams& params) {
  for (auto& n : adjacency_.at(i)) {
    if (n.j == j) {
      n.params = params;
      return;
    }
  }
  throw InputError("set_directed_params: no such edge");
}

bool InteractionGraph::has_edge(int i, int j) const { return edge_index(i, j) >= 0; }

int InteractionGraph::edge_index(int i, int j) const {
  const Edge e{std::min(i, j), std::max(i, j)};
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (edges_[k] == e) return static_cast<int>(k);
  }
  return -1;
}

const PotentialParams& InteractionGraph::params(int i, int j) const {
  for (const auto& n : adjacency_.at(i)) {
    if (n.j == j) return n.params;
  }
  throw InputError("no edge between agents " + std::to_string(i + 1) + " and " +
                   std::to_string(j + 1));
}

bool pair_potential_symmetry_check(const InteractionGraph& graph, const Manifold& m, const Vec& p,
                                   const Vec& q) {
  const double dpq = dist(m, p, q);
  const double dqp = dist(m, q, p);
  for (const Edge& e : graph.edges()) {
    const double a = eval_potential(graph.params(e.i, e.j), dpq);
    const double b = eval_potential(graph.params(e.i, e.j), dqp);
    const double c = eval_potential(graph.params(e.j, e.i), dpq);
    if (a != b || a != c) return false;
  }
  return true;
}

}  // namespace mavoid
