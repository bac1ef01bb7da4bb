#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "mavoid/bvp.hpp"
#include "mavoid/errors.hpp"

namespace mavoid {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

Vec hermite(const AgentBoundary& b, double T, double t) {
  const Vec delta = b.qT - b.q0 - b.v0 * T;
  const Vec c3 = ((b.vT - b.v0) - 2.0 * delta / T) / (T * T);
  const Vec c2 = (delta - c3 * T * T * T) / (T * T);
  return b.q0 + b.v0 * t + c2 * t * t + c3 * t * t * t;
}

// Node positions: x holds the interior nodes 1..M-1; 0 and M are pinned and
// -1, M+1 are ghosts fixed by the boundary velocities.
class Discretisation {
 public:
  Discretisation(const ShootingProblem& p, int nodes)
      : p_(p),
        n_(p.bc.manifold.ambient_dim()),
        S_(static_cast<int>(p.bc.agents.size())),
        M_(nodes),
        dt_(p.bc.T / nodes) {}

  int unknowns() const { return S_ * (M_ - 1) * n_; }
  int residuals() const {
    return S_ * (M_ + 1) * n_ + (M_ + 1) * static_cast<int>(p_.graph.edges().size());
  }
  int index(int i, int m) const { return (i * (M_ - 1) + (m - 1)) * n_; }
  double dt() const { return dt_; }
  int nodes() const { return M_; }

  Vec node(const Vec& x, int i, int m) const {
    const auto& b = p_.bc.agents[i];
    if (m == 0) return b.q0;
    if (m == M_) return b.qT;
    if (m == -1) return x.segment(index(i, 1), n_) - 2.0 * dt_ * b.v0;
    if (m == M_ + 1) return x.segment(index(i, M_ - 1), n_) + 2.0 * dt_ * b.vT;
    return x.segment(index(i, m), n_);
  }

  // Interior node whose coordinates a given node depends on, or -1.
  int owner(int m) const {
    if (m >= 1 && m <= M_ - 1) return m;
    if (m == -1) return 1;
    if (m == M_ + 1) return M_ - 1;
    return -1;
  }

  void eval(const Vec& x, Vec& r, SpMat* jac) const {
    r.resize(residuals());
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int row, int i, int m, int c, double v) {
      const int o = owner(m);
      if (o >= 0) trip.emplace_back(row, index(i, o) + c, v);
    };
    int row = 0;
    for (int i = 0; i < S_; ++i) {
      for (int m = 0; m <= M_; ++m) {
        const double w = std::sqrt(0.5 * weight(m) * dt_) / (dt_ * dt_);
        const Vec a = node(x, i, m + 1) - 2.0 * node(x, i, m) + node(x, i, m - 1);
        for (int c = 0; c < n_; ++c, ++row) {
          r[row] = w * a[c];
          if (jac) {
            add(row, i, m + 1, c, w);
            add(row, i, m, c, -2.0 * w);
            add(row, i, m - 1, c, w);
          }
        }
      }
    }
    for (int m = 0; m <= M_; ++m) {
      const double w = weight(m) * dt_;
      for (const auto& e : p_.graph.edges()) {
        const Vec diff = node(x, e.i, m) - node(x, e.j, m);
        const double d = diff.norm();
        const auto& pp = p_.graph.params(e.i, e.j);
        const double rr = std::sqrt(w * eval_potential(pp, d));
        r[row] = rr;
        if (jac && d > 0.0 && rr > 0.0) {
          const double g = w * potential_slope(pp, d) / (2.0 * rr * d);
          for (int c = 0; c < n_; ++c) {
            add(row, e.i, m, c, g * diff[c]);
            add(row, e.j, m, c, -g * diff[c]);
          }
        }
        ++row;
      }
    }
    if (jac) {
      jac->resize(residuals(), unknowns());
      jac->setFromTriplets(trip.begin(), trip.end());
    }
  }

 private:
  double weight(int m) const { return (m == 0 || m == M_) ? 0.5 : 1.0; }

  const ShootingProblem& p_;
  int n_, S_, M_;
  double dt_;
};

}  // namespace

Vec direct_guess(const ShootingProblem& p, const WarmPath& init, int nodes) {
  p.bc.validate();
  if (p.bc.manifold.is_sphere()) throw InputError("direct guess is only available on r<n>");
  if (nodes < 4) throw InputError("direct guess needs at least 4 nodes");
  const Discretisation disc(p, nodes);
  const int S = static_cast<int>(p.bc.agents.size());
  const int n = p.bc.manifold.ambient_dim();
  const int M = disc.nodes();
  const double dt = disc.dt();

  Vec x(disc.unknowns());
  for (int i = 0; i < S; ++i) {
    for (int m = 1; m < M; ++m) {
      const double t = m * dt;
      const Vec q = init ? init(i, t) : hermite(p.bc.agents[i], p.bc.T, t);
      if (q.size() != n) throw InputError("warm path has the wrong dimension");
      x.segment(disc.index(i, m), n) = q;
    }
  }

  Vec r;
  SpMat jac;
  disc.eval(x, r, &jac);
  double f = r.squaredNorm();
  if (!std::isfinite(f)) throw NumericError("direct guess: action is not finite at the start path");
  double lambda = 1e-3;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  for (int it = 0; it < 500; ++it) {
    const SpMat A = jac.transpose() * jac;
    const Vec g = jac.transpose() * r;
    if (g.norm() < 1e-9 * (1.0 + f)) break;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      SpMat B = A;
      for (int k = 0; k < B.rows(); ++k) B.coeffRef(k, k) += lambda * (A.coeff(k, k) + 1e-12);
      ldlt.compute(B);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Vec trial = x - ldlt.solve(g);
      Vec rt;
      disc.eval(trial, rt, nullptr);
      const double ft = rt.squaredNorm();
      if (std::isfinite(ft) && ft < f) {
        const double gain = f - ft;
        x = trial;
        f = ft;
        lambda = std::max(lambda * 0.3, 1e-10);
        accepted = true;
        if (gain < 1e-14 * f) it = 500;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
    disc.eval(x, r, &jac);
  }

  // a(0) from the second difference at node 0, jerk by a one-sided
  // second-order difference of the accelerations.
  Vec u(unknown_count(p));
  for (int i = 0; i < S; ++i) {
    auto acc = [&](int m) {
      return Vec((disc.node(x, i, m + 1) - 2.0 * disc.node(x, i, m) + disc.node(x, i, m - 1)) /
                 (dt * dt));
    };
    const Vec a0 = acc(0);
    u.segment(2 * n * i, n) = a0;
    u.segment(2 * n * i + n, n) = (-3.0 * a0 + 4.0 * acc(1) - acc(2)) / (2.0 * dt);
  }
  return u;
}

}  // namespace mavoid
