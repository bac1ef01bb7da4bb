#pragma once

#include <functional>
#include <string>

#include "mavoid/geometry.hpp"

namespace mavoid {

struct NelderMeadOptions {
  double ftol = 1e-10;  ///< stop when max f - min f over the simplex is below this
  double xtol = 1e-8;   ///< stop when the simplex diameter (inf-norm) is below this
  long max_evals = 0;   ///< 0 means 50000 * dim
  double reflect = 1.0;
  double expand = 2.0;
  double contract = 0.5;
  double shrink = 0.5;
  double step_floor = 0.1;     ///< initial step max(step_floor, step_scale*|x0_c|)
  double step_scale = 0.1;
  /// Called after every iteration with the current best value.
  std::function<void(long iteration, double best)> observer;
};

enum class StopReason { FTol, XTol, MaxEvals };
std::string to_string(StopReason r);

struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  long iterations = 0;
  long evals = 0;
  StopReason reason = StopReason::MaxEvals;
};

/// Downhill simplex minimisation. Non-finite objective values are treated as
/// +infinity after the start; a non-finite f(x0) throws InputError.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             const NelderMeadOptions& opt = {});

}  // namespace mavoid
