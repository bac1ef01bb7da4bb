#pragma once

#include <string>
#include <vector>

#include "mavoid/geometry.hpp"

namespace mavoid {

enum class PotentialFamily { Inverse, Bump };

/// Repulsive pair potential as a function of the Riemannian distance d.
///   Inverse: V(d) = 1 / (eps + (d/D)^k)
///   Bump:    V(d) = exp(-1 / (1 - (d/D)^k)) / eps for d < D, 0 otherwise
struct PotentialParams {
  PotentialFamily family = PotentialFamily::Inverse;
  double D = 1.0;
  double eps = 1.0;
  int k = 2;

  /// Throws InputError on D <= 0, eps <= 0 or k < 1.
  void validate() const;
  bool operator==(const PotentialParams&) const = default;
};

std::string to_string(PotentialFamily f);
PotentialFamily potential_family_from_string(const std::string& s);

double eval_potential(const PotentialParams& params, double d);
/// dV/dd.
double potential_slope(const PotentialParams& params, double d);

/// Riemannian gradient of p -> V(dist(p, q)) at p, computed as
/// V'(d) * grad_1 d with grad_1 d = -log_p(q) / d. It points towards q, so the
/// force -grad pushes p away from q.
Vec grad1_potential(const Manifold& m, const PotentialParams& params, const Vec& p, const Vec& q);

/// Unordered pair of agents, stored with i < j (0-based).
struct Edge {
  int i = 0;
  int j = 0;
  bool operator==(const Edge&) const = default;
};

/// Undirected neighbour graph with a potential attached to each direction of
/// every edge. add_edge sets both directions; set_directed_params exists so
/// that validation code can be exercised on deliberately asymmetric input.
class InteractionGraph {
 public:
  struct Neighbor {
    int j;
    PotentialParams params;
  };

  explicit InteractionGraph(int agents = 0);

  void add_edge(int i, int j, const PotentialParams& params);
  void set_directed_params(int i, int j, const PotentialParams& params);

  int agent_count() const { return agents_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(int i) const { return adjacency_.at(i); }
  int degree(int i) const { return static_cast<int>(adjacency_.at(i).size()); }
  bool has_edge(int i, int j) const;
  /// Parameters used by agent i for its neighbour j.
  const PotentialParams& params(int i, int j) const;
  /// Index of the edge {i, j} in edges(), or -1.
  int edge_index(int i, int j) const;

 private:
  int agents_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// True iff V_ij(p,q) = V_ij(q,p) = V_ji(p,q) for every edge of the graph.
bool pair_potential_symmetry_check(const InteractionGraph& graph, const Manifold& m, const Vec& p,
                                   const Vec& q);

}  // namespace mavoid
