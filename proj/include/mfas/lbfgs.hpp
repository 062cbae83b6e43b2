#pragma once

// Limited-memory BFGS with a strong-Wolfe line search.

#include "mfas/core.hpp"

#include <functional>
#include <string>

namespace mfas {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 200;
  /// Converged when the gradient infinity norm drops below this.
  double gradient_tolerance = 1e-6;
  /// Also stop when (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) falls below this.
  double relative_tolerance = 2.2e-9;
  int max_line_search_steps = 30;
};

enum class LbfgsStatus { kGradientConverged, kRelativeReduction, kMaxIterations, kLineSearchFailed };

std::string to_string(LbfgsStatus status);

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
};

/// Objective returning f(x) and writing its gradient. Non-finite values are
/// treated as infeasible points; the line search backs away from them.
using Objective = std::function<double(const Vector& x, Vector& gradient)>;

/// Minimizes `objective` from `x0`. Throws NumericalError if f(x0) is not finite.
LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsOptions& options = {});

}  // namespace mfas
