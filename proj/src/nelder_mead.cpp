#include "mavoid/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mavoid/errors.hpp"

namespace mavoid {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::FTol: return "ftol";
    case StopReason::XTol: return "xtol";
    case StopReason::MaxEvals: return "max_evals";
  }
  return "?";
}

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             const NelderMeadOptions& opt) {
  const int n = static_cast<int>(x0.size());
  const long max_evals = opt.max_evals > 0 ? opt.max_evals : 50000L * std::max(n, 1);
  NelderMeadResult res;
  long evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  const double f0 = f(x0);
  ++evals;
  if (!std::isfinite(f0)) throw InputError("nelder_mead: objective is not finite at x0");
  if (n == 0) {
    res.x = x0;
    res.f = f0;
    res.evals = evals;
    res.reason = StopReason::XTol;
    return res;
  }

  std::vector<Vec> xs(n + 1, x0);
  std::vector<double> fs(n + 1, f0);
  for (int c = 0; c < n; ++c) {
    xs[c + 1][c] += std::max(opt.step_floor, opt.step_scale * std::abs(x0[c]));
    fs[c + 1] = eval(xs[c + 1]);
  }

  std::vector<int> order(n + 1);
  Vec centroid(n), xr(n), xe(n), xc(n);
  long it = 0;
  StopReason reason = StopReason::MaxEvals;
  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    // Stable sort keeps ties in insertion order, which makes runs reproducible.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[n - 1];

    if (opt.observer) opt.observer(it, fs[best]);

    const double fspread = fs[worst] - fs[best];
    double xspread = 0.0;
    for (int v = 0; v <= n; ++v) xspread = std::max(xspread, (xs[v] - xs[best]).lpNorm<Eigen::Infinity>());
    if (std::isfinite(fspread) && fspread < opt.ftol) {
      reason = StopReason::FTol;
      break;
    }
    if (xspread < opt.xtol) {
      reason = StopReason::XTol;
      break;
    }
    if (evals >= max_evals) {
      reason = StopReason::MaxEvals;
      break;
    }
    ++it;

    centroid.setZero();
    for (int v = 0; v <= n; ++v) {
      if (v != worst) centroid += xs[v];
    }
    centroid /= n;

    xr = centroid + opt.reflect * (centroid - xs[worst]);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      xe = centroid + opt.expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflected point improved on the worst.
    if (fr < fs[worst]) {
      xc = centroid + opt.contract * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        xs[worst] = xc;
        fs[worst] = fc;
        continue;
      }
    } else {
      xc = centroid + opt.contract * (xs[worst] - centroid);
      const double fc = eval(xc);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
        continue;
      }
    }
    for (int v = 0; v <= n; ++v) {
      if (v == best) continue;
      xs[v] = xs[best] + opt.shrink * (xs[v] - xs[best]);
      fs[v] = eval(xs[v]);
    }
  }

  const int best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  res.x = xs[best];
  res.f = fs[best];
  res.iterations = it;
  res.evals = evals;
  res.reason = reason;
  return res;
}

}  // namespace mavoid
